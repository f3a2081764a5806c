#include "salctx/cxmi.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "salctx/text.hpp"

namespace salctx {
namespace {

constexpr double kClampTolerance = 1e-6;

std::map<std::uint64_t, double> by_id(std::span<const ScoredExample> scores) {
  std::map<std::uint64_t, double> out;
  for (const auto& s : scores)
    if (!out.emplace(s.id, s.logprob).second) throw PreconditionError("duplicate score id " + std::to_string(s.id));
  return out;
}

}  // namespace

double parse_log_base(const std::string& text) {
  if (text == "e" || text.empty()) return 0.0;
  try {
    std::size_t used = 0;
    double b = std::stod(text, &used);
    if (used == text.size() && b > 0.0 && b != 1.0) return b;
  } catch (const std::exception&) {
  }
  throw UsageError("invalid log base '" + text + "'");
}

std::vector<ScoredExample> parse_scores(std::istream& in, double log_base, std::vector<std::string>* warnings) {
  const double scale = log_base > 0.0 ? std::log(log_base) : 1.0;
  std::vector<ScoredExample> out;
  std::set<std::uint64_t> ids;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() || j["id"].get<long long>() < 0)
      throw ParseError("score record needs a non-negative integer id", n);
    if (!j.contains("logprob") || !j["logprob"].is_number())
      throw ParseError("non-numeric logprob", n);
    ScoredExample s{j["id"].get<std::uint64_t>(), j["logprob"].get<double>() * scale};
    if (!std::isfinite(s.logprob)) throw ParseError("non-finite logprob", n);
    if (s.logprob > 0.0) {
      if (s.logprob > kClampTolerance) throw ParseError(fmt::format("positive logprob {}", s.logprob), n);
      if (warnings) warnings->push_back(fmt::format("line {}: logprob {} clamped to 0", n, s.logprob));
      s.logprob = 0.0;
    }
    if (!ids.insert(s.id).second) throw ParseError("duplicate id " + std::to_string(s.id), n);
    out.push_back(s);
  }
  return out;
}

CxmiReport compute_cxmi(std::span<const ScoredExample> base, std::span<const ScoredExample> ctx) {
  auto b = by_id(base), c = by_id(ctx);
  std::vector<std::uint64_t> diff;
  for (const auto& [id, v] : b)
    if (!c.count(id)) diff.push_back(id);
  for (const auto& [id, v] : c)
    if (!b.count(id)) diff.push_back(id);
  if (!diff.empty()) {
    std::sort(diff.begin(), diff.end());
    diff.resize(std::min<std::size_t>(diff.size(), 20));
    throw PreconditionError(fmt::format("score files cover different ids; symmetric difference starts [{}]",
                                        fmt::join(diff, ",")));
  }
  if (b.empty()) throw PreconditionError("no scored examples");

  double sum = 0.0, comp = 0.0;
  for (const auto& [id, base_lp] : b) {
    double term = c.at(id) - base_lp;
    double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return {(sum + comp) / static_cast<double>(b.size()), b.size()};
}

}  // namespace salctx
