#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "salctx/error.hpp"
#include "salctx/saliency.hpp"
#include "salctx/text.hpp"

namespace salctx {
namespace {

constexpr double kEpsilon = 1e-9;

struct Stats {
  std::vector<std::size_t> offsets;
  std::set<std::string_view> left, right;
  std::set<std::size_t> sentences;
};

double median(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2) return static_cast<double>(v[n / 2]);
  return (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

}  // namespace

std::vector<YakeFeatures> yake_features(const TokenizedDoc& doc, const YakeOptions& options) {
  // Punctuation-only tokens take no part in scoring; offsets and neighbours
  // are measured on what remains of each sentence.
  std::vector<std::vector<std::string_view>> sentences;
  for (auto [begin, end] : doc.sentence_bounds) {
    auto& s = sentences.emplace_back();
    for (std::size_t i = begin; i < end; ++i)
      if (has_alnum(doc.tokens[i])) s.push_back(doc.tokens[i]);
  }

  std::map<std::string_view, Stats> stats;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto& s = sentences[si];
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (options.stopwords.count(std::string(s[i]))) continue;
      auto& st = stats[s[i]];
      st.offsets.push_back(i);
      st.sentences.insert(si);
      for (std::size_t w = 1; w <= options.window; ++w) {
        if (i >= w) st.left.insert(s[i - w]);
        if (i + w < s.size()) st.right.insert(s[i + w]);
      }
    }
  }
  if (stats.empty()) return {};

  double mean = 0.0;
  for (const auto& [w, st] : stats) mean += static_cast<double>(st.offsets.size());
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (const auto& [w, st] : stats) {
    double d = static_cast<double>(st.offsets.size()) - mean;
    var += d * d;
  }
  double stdev = std::sqrt(var / static_cast<double>(stats.size()));
  const double num_sentences = static_cast<double>(std::max<std::size_t>(sentences.size(), 1));

  std::vector<YakeFeatures> out;
  out.reserve(stats.size());
  for (const auto& [w, st] : stats) {
    YakeFeatures f;
    f.word = std::string(w);
    f.tf = st.offsets.size();
    double tf = static_cast<double>(f.tf);
    f.position = std::log(std::log(3.0 + median(st.offsets)));
    f.frequency = tf / (mean + stdev);
    f.relatedness = 1.0 + static_cast<double>(st.left.size() + st.right.size()) / (2.0 * tf);
    f.spread = static_cast<double>(st.sentences.size()) / num_sentences;
    f.score = f.relatedness * f.position /
              (f.frequency / f.relatedness + f.spread / f.relatedness + kEpsilon);
    out.push_back(std::move(f));
  }
  return out;
}

KeywordList yake_extract(const TokenizedDoc& doc, std::size_t k, const YakeOptions& options) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  if (doc.tokens.empty()) throw PreconditionError("yake_extract on an empty document");
  KeywordList ranked;
  for (const auto& f : yake_features(doc, options)) ranked.push_back({f.word, 1.0 / (1.0 + f.score)});
  sort_keywords(ranked);
  return dedup_keywords(ranked, options.dedup_ratio, k);
}

}  // namespace salctx
