#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace salctx::cli {

namespace fs = std::filesystem;

// Per-invocation bookkeeping: inputs are digested and every written output
// gets a sidecar manifest.
class StageContext {
 public:
  StageContext(CLI::App* app, std::string name) : app_(app), name_(std::move(name)) {}

  // Opens an input file, failing with a usage error that names the path.
  std::ifstream open_input(const std::string& path);
  // Records a directory input (digest over its sorted files).
  void note_input(const std::string& path);

  // Empty path writes to stdout (no manifest).
  std::ostream& open_output(const std::string& path);
  void close_outputs();
  void write_manifests() const;

  void warn(const std::string& message) const { std::cerr << name_ << ": warning: " << message << '\n'; }
  void info(const std::string& message) const { std::cerr << name_ << ": " << message << '\n'; }

 private:
  CLI::App* app_;
  std::string name_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::unique_ptr<std::ofstream>> streams_;
};

struct Stage {
  CLI::App* app = nullptr;
  std::function<void(StageContext&)> run;
};

// Common run settings shared by every subcommand.
struct RunSettings {
  std::uint64_t seed = 1;
  unsigned jobs = 0;
};

void add_run_settings(CLI::App* sub, const std::shared_ptr<RunSettings>& settings, bool with_seed);

void register_corpus_stages(CLI::App& app, std::vector<Stage>& stages);
void register_eval_stages(CLI::App& app, std::vector<Stage>& stages);

}  // namespace salctx::cli
