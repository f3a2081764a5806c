#include <algorithm>

#include <openssl/evp.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "stage.hpp"

#ifndef SALCTX_VERSION
#define SALCTX_VERSION "dev"
#endif

namespace salctx::cli {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  void update_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read input file: " + path.string());
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) update(buf, static_cast<std::size_t>(in.gcount()));
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::string out;
    for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string digest(const std::string& path) {
  Sha256 sha;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string rel = f.lexically_relative(path).generic_string();
      sha.update(rel.data(), rel.size() + 1);  // include the terminating NUL as separator
      sha.update_file(f);
    }
  } else {
    sha.update_file(path);
  }
  return sha.hex();
}

}  // namespace

std::ifstream StageContext::open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (path.empty() || !in || fs::is_directory(path)) throw UsageError("cannot open input file: " + path);
  note_input(path);
  return in;
}

void StageContext::note_input(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("input not found: " + path);
  if (std::find(inputs_.begin(), inputs_.end(), path) == inputs_.end()) inputs_.push_back(path);
}

std::ostream& StageContext::open_output(const std::string& path) {
  if (path.empty()) return std::cout;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*out) throw UsageError("cannot open output file: " + path);
  outputs_.push_back(path);
  streams_.push_back(std::move(out));
  return *streams_.back();
}

void StageContext::close_outputs() {
  for (auto& s : streams_) {
    s->flush();
    if (!*s) throw Error(ErrorKind::kInternal, "failed writing an output file");
    s->close();
  }
  streams_.clear();
}

void StageContext::write_manifests() const {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : app_->get_options()) {
    std::string key = opt->get_single_name();
    // --jobs never changes output bytes, so it stays out of the manifest.
    if (key.empty() || key == "help" || key == "config" || key == "jobs") continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      if (opt->get_expected_max() > 1)
        config[key] = results;
      else if (opt->get_type_size() == 0)  // flag
        config[key] = true;
      else
        config[key] = results.empty() ? std::string() : results.back();
    } else if (!opt->get_default_str().empty()) {
      config[key] = opt->get_default_str();
    }
  }
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& in : inputs_) inputs.push_back({{"path", in}, {"sha256", digest(in)}});

  for (const auto& out : outputs_) {
    nlohmann::ordered_json m;
    m["tool"] = "salctx";
    m["version"] = SALCTX_VERSION;
    m["subcommand"] = name_;
    m["config"] = config;
    m["inputs"] = inputs;
    m["output"] = {{"path", out}, {"sha256", digest(out)}};
    std::ofstream f(out + ".manifest.json", std::ios::binary | std::ios::trunc);
    f << m.dump(2) << '\n';
    if (!f) throw Error(ErrorKind::kInternal, "cannot write manifest for " + out);
  }
}

}  // namespace salctx::cli
