#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "salctx/error.hpp"
#include "salctx/parallel.hpp"
#include "salctx/rng.hpp"
#include "salctx/wsd_eval.hpp"

namespace salctx {
namespace {

using Triple = std::array<double, 3>;  // precision, recall, f1

Triple metrics(std::size_t pos, std::size_t neg, std::size_t unk) {
  auto r = report_from_counts(pos, neg, unk);
  return {r.precision, r.recall, r.f1};
}

// Metrics of A and B on `samples` indices drawn with replacement.
std::pair<Triple, Triple> resample(std::span<const EvalLabel> a, std::span<const EvalLabel> b, std::size_t samples,
                                   Rng& rng) {
  std::array<std::size_t, 3> ca{}, cb{};
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t i = rng.below(a.size());
    ++ca[static_cast<int>(a[i])];
    ++cb[static_cast<int>(b[i])];
  }
  return {metrics(ca[0], ca[1], ca[2]), metrics(cb[0], cb[1], cb[2])};
}

void check_pair(std::span<const EvalLabel> a, std::span<const EvalLabel> b) {
  if (a.size() != b.size()) throw PreconditionError("label sequences are not aligned");
  if (a.empty()) throw PreconditionError("significance test needs at least one example");
}

}  // namespace

const MetricTest& SignificanceResult::at(Metric m) const {
  switch (m) {
    case Metric::kPrecision: return precision;
    case Metric::kRecall: return recall;
    case Metric::kF1: return f1;
  }
  return f1;
}

SignificanceResult paired_bootstrap(std::span<const EvalLabel> a, std::span<const EvalLabel> b, std::size_t resamples,
                                    std::uint64_t seed, unsigned jobs) {
  check_pair(a, b);
  if (resamples == 0) throw PreconditionError("resamples must be >= 1");
  std::vector<Triple> deltas(resamples);
  std::vector<std::array<bool, 3>> worse(resamples);
  parallel_chunks(resamples, jobs, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng = Rng::keyed(seed, t);
      auto [ma, mb] = resample(a, b, a.size(), rng);
      for (int m = 0; m < 3; ++m) {
        deltas[t][m] = ma[m] - mb[m];
        worse[t][m] = ma[m] <= mb[m];
      }
    }
  });
  // Reduce in trial order so the sums are identical for any `jobs`.
  SignificanceResult result;
  result.trials = resamples;
  std::array<MetricTest*, 3> out{&result.precision, &result.recall, &result.f1};
  for (int m = 0; m < 3; ++m) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < resamples; ++t) {
      sum += deltas[t][m];
      count += worse[t][m];
    }
    out[m]->mean_delta = sum / static_cast<double>(resamples);
    out[m]->p_value = static_cast<double>(count) / static_cast<double>(resamples);
  }
  return result;
}

SignificanceResult resampled_ttest(std::span<const EvalLabel> a, std::span<const EvalLabel> b, std::size_t trials,
                                   std::size_t samples, std::uint64_t seed) {
  check_pair(a, b);
  if (trials < 2) throw PreconditionError("t-test needs at least two trials");
  if (samples == 0) throw PreconditionError("samples must be >= 1");
  std::vector<Triple> deltas(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::keyed(seed, t);
    auto [ma, mb] = resample(a, b, samples, rng);
    for (int m = 0; m < 3; ++m) deltas[t][m] = ma[m] - mb[m];
  }
  SignificanceResult result;
  result.trials = trials;
  std::array<MetricTest*, 3> out{&result.precision, &result.recall, &result.f1};
  const double n = static_cast<double>(trials);
  for (int m = 0; m < 3; ++m) {
    double mean = 0.0;
    for (const auto& d : deltas) mean += d[m];
    mean /= n;
    double ss = 0.0;
    for (const auto& d : deltas) ss += (d[m] - mean) * (d[m] - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    out[m]->mean_delta = mean;
    if (sd == 0.0) {
      out[m]->p_value = mean > 0.0 ? 0.0 : 1.0;
      continue;
    }
    double t_stat = mean / (sd / std::sqrt(n));
    boost::math::students_t dist(n - 1.0);
    out[m]->p_value = boost::math::cdf(boost::math::complement(dist, t_stat));
  }
  return result;
}

}  // namespace salctx
