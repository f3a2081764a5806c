#include "salctx/cli.hpp"

#include <iostream>

#include "salctx/error.hpp"
#include "stage.hpp"

namespace salctx::cli {

void add_run_settings(CLI::App* sub, const std::shared_ptr<RunSettings>& settings, bool with_seed) {
  if (with_seed) sub->add_option("--seed", settings->seed, "Seed for every randomized step")->capture_default_str();
  sub->add_option("--jobs", settings->jobs, "Worker threads (0 = all cores); output is identical for any value")
      ->capture_default_str();
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"salctx: saliency-context corpus pipeline and WSD evaluation toolkit", "salctx"};
  app.set_config("--config", "", "TOML/INI file mirroring the flags; [subcommand] sections; flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", "salctx " SALCTX_VERSION);

  std::vector<Stage> stages;
  register_corpus_stages(app, stages);
  register_eval_stages(app, stages);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  for (auto& stage : stages) {
    if (!stage.app->parsed()) continue;
    StageContext ctx(stage.app, stage.app->get_name());
    try {
      stage.run(ctx);
      ctx.close_outputs();
      ctx.write_manifests();
      return kOk;
    } catch (const Error& e) {
      std::cerr << stage.app->get_name() << ": error: " << e.what() << '\n';
      switch (e.kind()) {
        case ErrorKind::kUsage: return kUsage;
        case ErrorKind::kParse: return kInputParse;
        case ErrorKind::kPrecondition: return kPrecondition;
        case ErrorKind::kInternal: return kInternal;
      }
      return kInternal;
    } catch (const std::exception& e) {
      std::cerr << stage.app->get_name() << ": internal error: " << e.what() << '\n';
      return kInternal;
    }
  }
  return kUsage;
}

}  // namespace salctx::cli
