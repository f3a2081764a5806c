#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "salctx/contextualize.hpp"
#include "salctx/cxmi.hpp"
#include "salctx/docmucow.hpp"
#include "salctx/error.hpp"
#include "salctx/text.hpp"
#include "salctx/wsd_eval.hpp"
#include "stage.hpp"

namespace salctx::cli {
namespace {

std::vector<MucowRecord> load_records(StageContext& ctx, const std::string& path) {
  auto in = ctx.open_input(path);
  return read_records_tsv(in);
}

// "NAME=FILE", or a bare FILE named after its stem.
std::pair<std::string, std::string> split_named(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos) return {fs::path(arg).stem().string(), arg};
  if (eq == 0 || eq + 1 == arg.size()) throw UsageError("expected NAME=FILE, got " + arg);
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

bool is_jsonl(const std::string& path) {
  auto ext = fs::path(path).extension().string();
  return ext == ".jsonl" || ext == ".json";
}

// JSONL {id, text}, or plain text with one line per record in record order.
std::map<std::uint64_t, std::string> read_hypotheses(std::istream& in, bool jsonl,
                                                     std::span<const MucowRecord> records) {
  std::map<std::uint64_t, std::string> out;
  std::string line;
  std::size_t n = 0;
  if (jsonl) {
    while (std::getline(in, line)) {
      ++n;
      if (trim(line).empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        auto id = j.at("id").get<std::uint64_t>();
        if (!out.emplace(id, j.at("text").get<std::string>()).second)
          throw ParseError("duplicate id " + std::to_string(id), n);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad hypothesis record: ") + e.what(), n);
      }
    }
    return out;
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n >= records.size())
      throw PreconditionError(fmt::format("hypothesis file has more lines than the {} records", records.size()));
    out.emplace(records[n++].id, line);
  }
  if (n != records.size())
    throw PreconditionError(fmt::format("hypothesis file has {} lines for {} records", n, records.size()));
  return out;
}

std::unique_ptr<Lemmatizer> load_lemmatizer(StageContext& ctx, const std::string& spec) {
  if (spec.rfind("dict:", 0) == 0) ctx.note_input(spec.substr(5));
  return make_lemmatizer(spec);
}

SenseInventory load_inventory(StageContext& ctx, const std::string& path) {
  auto in = ctx.open_input(path);
  return SenseInventory::load_tsv(in);
}

void add_build_testset(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("build-testset", "Attach source document ids to ambiguous-word test records");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string records, corpus, out, report;
    bool fold_case = false, cross_subcorpus = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--records", o->records, "Test records TSV")->required();
  sub->add_option("--corpus", o->corpus, "Corpus directory or JSONL file")->required();
  sub->add_option("--out", o->out, "Records TSV with doc_id (stdout if omitted)");
  sub->add_option("--report", o->report, "Per-subcorpus statistics TSV");
  sub->add_flag("--fold-case", o->fold_case, "Lowercase both sides before matching");
  sub->add_flag("--cross-subcorpus", o->cross_subcorpus, "Search every document, not only the record's subcorpus");
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      auto records = load_records(ctx, o->records);
                      std::vector<RawDocument> corpus;
                      if (fs::is_directory(o->corpus)) {
                        ctx.note_input(o->corpus);
                        corpus = read_corpus_dir(o->corpus);
                      } else {
                        auto in = ctx.open_input(o->corpus);
                        corpus = read_corpus_jsonl(in);
                      }
                      AssignOptions opts;
                      opts.fold_case = o->fold_case;
                      opts.cross_subcorpus = o->cross_subcorpus;
                      opts.jobs = settings->jobs;
                      auto result = assign_doc_ids(std::move(records), corpus, opts);
                      for (const auto& w : result.warnings) ctx.warn(w);
                      ctx.info(fmt::format("{} matched, {} unmatched, {} ambiguous, {} empty after normalization",
                                           result.matched, result.unmatched, result.ambiguous,
                                           result.empty_needles));
                      write_records_tsv(ctx.open_output(o->out), result.records);
                      if (!o->report.empty())
                        write_stats_tsv(ctx.open_output(o->report), docmucow_stats(result.records));
                    }});
}

void add_eval_wsd(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("eval-wsd", "Score translations of ambiguous words as POS/NEG/UNK");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string records, inventory, lemmatizer = "identity", report, labels_dir;
    std::vector<std::string> hyps;
    std::optional<std::string> split_sep;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--records", o->records, "Test records TSV")->required();
  sub->add_option("--inventory", o->inventory, "Sense inventory TSV")->required();
  sub->add_option("--lemmatizer", o->lemmatizer, "identity or dict:FILE")->capture_default_str();
  sub->add_option("--hyp", o->hyps, "System outputs, NAME=FILE (.jsonl {id,text} or one line per record)")
      ->required();
  sub->add_option("--split-sep", o->split_sep, "Strip everything up to this separator from each output");
  sub->add_option("--report", o->report, "Report TSV (stdout if omitted)");
  sub->add_option("--labels-dir", o->labels_dir, "Write NAME.labels.jsonl per system here");
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      auto records = load_records(ctx, o->records);
                      auto inventory = load_inventory(ctx, o->inventory);
                      auto lemmatizer = load_lemmatizer(ctx, o->lemmatizer);
                      std::map<std::string, SystemEvaluation> results;
                      for (const auto& arg : o->hyps) {
                        auto [name, path] = split_named(arg);
                        if (results.count(name)) throw UsageError("duplicate system name " + name);
                        auto in = ctx.open_input(path);
                        auto outputs = read_hypotheses(in, is_jsonl(path), records);
                        if (o->split_sep)
                          for (auto& [id, text] : outputs) text = split_on_sep(text, *o->split_sep);
                        results.emplace(name, evaluate_system(outputs, records, inventory, *lemmatizer));
                      }
                      auto& out = ctx.open_output(o->report);
                      out << "system\tn_pos\tn_neg\tn_unk\tprecision\trecall\tf1\n";
                      for (const auto& [name, ev] : results) {
                        const auto& r = ev.report;
                        out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", name, r.n_pos, r.n_neg, r.n_unk,
                                           r.precision, r.recall, r.f1);
                      }
                      if (!o->labels_dir.empty())
                        for (const auto& [name, ev] : results)
                          write_labels_jsonl(ctx.open_output((fs::path(o->labels_dir) / (name + ".labels.jsonl")).string()),
                                             ev.labels);
                    }});
}

std::vector<double> parse_edges(const std::string& text) {
  std::vector<double> edges;
  for (auto part : split(text, ',')) {
    auto t = std::string(trim(part));
    if (t == "inf" || t == "+inf") {
      edges.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      std::size_t used = 0;
      double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      edges.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad bin edge '" + t + "'");
    }
  }
  if (edges.size() < 2) throw UsageError("--edges needs at least two values");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw UsageError("--edges must be strictly increasing");
  return edges;
}

void add_analyze(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("analyze", "Break WSD results down by sense frequency or sentence length");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string bin = "sense-freq", records, baseline, train_tgt, inventory, lemmatizer = "identity", out;
    std::string edges = "0,10,20,30,inf";
    std::vector<std::string> labels;
    double bin_width = 0.2;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--bin", o->bin, "Binning")->check(CLI::IsMember({"sense-freq", "length"}))->capture_default_str();
  sub->add_option("--records", o->records, "Test records TSV")->required();
  sub->add_option("--labels", o->labels, "Per-system labels, NAME=FILE (from eval-wsd --labels-dir)")->required();
  sub->add_option("--baseline", o->baseline, "System the deltas are measured against")->required();
  sub->add_option("--train-tgt", o->train_tgt, "Training target text, one sentence per line (sense-freq)");
  sub->add_option("--inventory", o->inventory, "Sense inventory TSV (sense-freq)");
  sub->add_option("--lemmatizer", o->lemmatizer, "identity or dict:FILE")->capture_default_str();
  sub->add_option("--bin-width", o->bin_width, "Sense-frequency bin width")->capture_default_str();
  sub->add_option("--edges", o->edges, "Length bin edges in source tokens, comma-separated")->capture_default_str();
  sub->add_option("--out", o->out, "Table TSV (stdout if omitted)");
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      auto records = load_records(ctx, o->records);
                      SystemLabels systems;
                      for (const auto& arg : o->labels) {
                        auto [name, path] = split_named(arg);
                        auto in = ctx.open_input(path);
                        if (!systems.emplace(name, read_labels_jsonl(in)).second)
                          throw UsageError("duplicate system name " + name);
                      }
                      if (!systems.count(o->baseline)) throw UsageError("baseline " + o->baseline + " is not among --labels");
                      BinnedTable table;
                      if (o->bin == "sense-freq") {
                        if (o->train_tgt.empty() || o->inventory.empty())
                          throw UsageError("--bin sense-freq needs --train-tgt and --inventory");
                        if (!(o->bin_width > 0.0 && o->bin_width <= 1.0)) throw UsageError("--bin-width must lie in (0, 1]");
                        auto inventory = load_inventory(ctx, o->inventory);
                        auto lemmatizer = load_lemmatizer(ctx, o->lemmatizer);
                        std::vector<std::string> lines;
                        {
                          auto in = ctx.open_input(o->train_tgt);
                          std::string line;
                          while (std::getline(in, line)) lines.push_back(line);
                        }
                        std::vector<std::string> warnings;
                        auto freqs = compute_sense_frequencies(lines, inventory, *lemmatizer, &warnings);
                        for (const auto& w : warnings) ctx.warn(w);
                        table = bin_by_sense_frequency(systems, records, freqs, o->baseline, o->bin_width);
                      } else {
                        auto edges = parse_edges(o->edges);
                        auto length_of = [](std::string_view s) { return split_whitespace(s).size(); };
                        table = bin_by_length(systems, records, length_of, edges, o->baseline);
                      }
                      write_binned_tsv(ctx.open_output(o->out), table);
                    }});
}

void add_significance(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("significance", "Test whether system A beats system B");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string mode = "bootstrap", a, b, out;
    std::size_t resamples = 5000, trials = 50, samples = 750;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--mode", o->mode, "Test")->check(CLI::IsMember({"bootstrap", "ttest"}))->capture_default_str();
  sub->add_option("--a", o->a, "Labels JSONL of system A")->required();
  sub->add_option("--b", o->b, "Labels JSONL of system B")->required();
  sub->add_option("--resamples", o->resamples, "Bootstrap resamples")->capture_default_str();
  sub->add_option("--trials", o->trials, "t-test trials")->capture_default_str();
  sub->add_option("--samples", o->samples, "Examples per t-test trial")->capture_default_str();
  sub->add_option("--out", o->out, "Result TSV (stdout if omitted)");
  add_run_settings(sub, settings, true);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      LabelMap a, b;
                      {
                        auto in = ctx.open_input(o->a);
                        a = read_labels_jsonl(in);
                      }
                      {
                        auto in = ctx.open_input(o->b);
                        b = read_labels_jsonl(in);
                      }
                      auto [la, lb] = align_labels(a, b);
                      SignificanceResult r;
                      if (o->mode == "bootstrap") {
                        if (o->resamples == 0) throw UsageError("--resamples must be positive");
                        r = paired_bootstrap(la, lb, o->resamples, settings->seed, settings->jobs);
                      } else {
                        if (o->trials < 2 || o->samples == 0) throw UsageError("--trials must be >= 2 and --samples > 0");
                        r = resampled_ttest(la, lb, o->trials, o->samples, settings->seed);
                      }
                      auto& out = ctx.open_output(o->out);
                      out << "metric\tmean_delta\tp_value\n";
                      out << fmt::format("precision\t{}\t{}\n", r.precision.mean_delta, r.precision.p_value);
                      out << fmt::format("recall\t{}\t{}\n", r.recall.mean_delta, r.recall.p_value);
                      out << fmt::format("f1\t{}\t{}\n", r.f1.mean_delta, r.f1.p_value);
                    }});
}

void add_cxmi(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("cxmi", "Conditional cross-mutual information between two score files");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string base, ctx, log_base = "e", out;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--base", o->base, "Context-agnostic scores JSONL")->required();
  sub->add_option("--ctx", o->ctx, "Context-aware scores JSONL")->required();
  sub->add_option("--log-base", o->log_base, "Base of the input log-probabilities (e, 2, 10, ...)")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output (stdout if omitted)");
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      double base = parse_log_base(o->log_base);
                      std::vector<std::string> warnings;
                      std::vector<ScoredExample> b, c;
                      {
                        auto in = ctx.open_input(o->base);
                        b = parse_scores(in, base, &warnings);
                      }
                      {
                        auto in = ctx.open_input(o->ctx);
                        c = parse_scores(in, base, &warnings);
                      }
                      for (const auto& w : warnings) ctx.warn(w);
                      auto r = compute_cxmi(b, c);
                      ctx.open_output(o->out) << fmt::format("{}\t{}\n", r.value, r.n);
                    }});
}

}  // namespace

void register_eval_stages(CLI::App& app, std::vector<Stage>& stages) {
  add_build_testset(app, stages);
  add_eval_wsd(app, stages);
  add_analyze(app, stages);
  add_significance(app, stages);
  add_cxmi(app, stages);
}

}  // namespace salctx::cli
