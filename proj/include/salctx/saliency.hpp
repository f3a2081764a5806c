#pragma once

// Keyword saliency over pseudo-documents: tf-idf with smoothed idf and a
// YAKE-style unigram scorer, both returning keywords in descending weight with
// ties broken by ascending token.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace salctx {

// Lowercased, punctuation-isolating tokenization.
std::vector<std::string> tokenize_for_saliency(std::string_view text);

struct TokenizedDoc {
  std::vector<std::string> tokens;
  // Half-open [start, end) token ranges, one per sentence, partitioning tokens.
  std::vector<std::pair<std::size_t, std::size_t>> sentence_bounds;

  // Tokenizes each sentence with tokenize_for_saliency. With drop_punct,
  // tokens that contain no letter or digit are removed.
  static TokenizedDoc from_sentences(std::span<const std::string> sentences, bool drop_punct = true);
  bool empty() const { return tokens.empty(); }
};

class TfidfModel {
 public:
  using DfMap = std::map<std::string, std::uint64_t, std::less<>>;

  TfidfModel() = default;
  TfidfModel(DfMap df, std::uint64_t num_docs);

  // df(t) counts documents containing t at least once. Throws on an empty
  // sample. Shards are counted in parallel and merged.
  static TfidfModel fit(std::span<const TokenizedDoc> docs, unsigned jobs = 1);

  // Sum of two independent fits.
  void merge(const TfidfModel& other);

  std::uint64_t df(std::string_view term) const;
  std::uint64_t num_docs() const { return num_docs_; }
  const DfMap& df_map() const { return df_; }

  // Header {"num_docs": N}, then one {"token": t, "df": n} per line sorted by
  // token.
  void save(std::ostream& out) const;
  static TfidfModel load(std::istream& in);

  friend bool operator==(const TfidfModel&, const TfidfModel&) = default;

 private:
  DfMap df_;
  std::uint64_t num_docs_ = 0;
};

// count(term) / |doc|.
double tf(std::string_view term, const TokenizedDoc& doc);
// ln((N + 1) / (df + 1)) + 1, with df = 0 for unseen terms.
double idf(std::string_view term, const TfidfModel& model);

struct Keyword {
  std::string word;
  double score = 0.0;
  friend bool operator==(const Keyword&, const Keyword&) = default;
};
using KeywordList = std::vector<Keyword>;

// Sorts by descending score, ascending word on ties.
void sort_keywords(KeywordList& keywords);

KeywordList tfidf_extract(const TokenizedDoc& doc, std::size_t k, const TfidfModel& model);

// Greedy scan in rank order: a candidate is dropped when its sequence-match
// ratio against any kept keyword is >= ratio. Stops once `limit` are kept.
KeywordList dedup_keywords(const KeywordList& ranked, double ratio = 0.9,
                           std::size_t limit = static_cast<std::size_t>(-1));

struct YakeOptions {
  std::size_t window = 1;
  std::unordered_set<std::string> stopwords;
  double dedup_ratio = 0.9;
};

// Per-candidate YAKE-style features; exposed for inspection and testing.
struct YakeFeatures {
  std::string word;
  std::size_t tf = 0;
  double position = 0.0;   // ln(ln(3 + median in-sentence offset))
  double frequency = 0.0;  // tf / (mean_tf + stdev_tf)
  double relatedness = 0.0;  // 1 + (distinct left + distinct right) / (2 tf)
  double spread = 0.0;     // sentences containing word / sentences
  double score = 0.0;      // S(w), lower is more salient
};

std::vector<YakeFeatures> yake_features(const TokenizedDoc& doc, const YakeOptions& options = {});

// Weight 1 / (1 + S(w)), ranked, deduplicated, truncated to k.
KeywordList yake_extract(const TokenizedDoc& doc, std::size_t k, const YakeOptions& options = {});

std::unordered_set<std::string> load_stopwords(std::istream& in);

}  // namespace salctx
