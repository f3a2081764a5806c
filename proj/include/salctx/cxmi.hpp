#pragma once

// Conditional cross-mutual information between a context-aware and a
// context-agnostic model, from per-example reference log-probabilities:
//   CXMI = (1/N) * sum_i [log p(y_i | x_i, context_i) - log p(y_i | x_i)]
// Positive values mean the context model is more confident.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace salctx {

struct ScoredExample {
  std::uint64_t id = 0;
  double logprob = 0.0;  // natural log, <= 0
};

struct CxmiReport {
  double value = 0.0;
  std::size_t n = 0;
};

// Lines {"id": ..., "logprob": ...}. Scores in another base are converted to
// natural log. Values in (0, 1e-6] are clamped to 0 with a warning; larger
// positive values are rejected. Duplicate ids are rejected.
std::vector<ScoredExample> parse_scores(std::istream& in, double log_base = 0.0,
                                        std::vector<std::string>* warnings = nullptr);

// log_base <= 0 selects natural log; "e", "2", "10" are the usual CLI values.
double parse_log_base(const std::string& text);

// Throws PreconditionError listing the symmetric difference when the id sets
// differ. Summation runs in id order with Neumaier compensation.
CxmiReport compute_cxmi(std::span<const ScoredExample> base, std::span<const ScoredExample> ctx);

}  // namespace salctx
