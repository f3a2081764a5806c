#include "salctx/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "salctx/parallel.hpp"
#include "salctx/sequence_matcher.hpp"
#include "salctx/text.hpp"

namespace salctx {

std::vector<std::string> tokenize_for_saliency(std::string_view text) { return tokenize(text, true); }

TokenizedDoc TokenizedDoc::from_sentences(std::span<const std::string> sentences, bool drop_punct) {
  TokenizedDoc doc;
  for (const auto& s : sentences) {
    std::size_t start = doc.tokens.size();
    for (auto& tok : tokenize_for_saliency(s)) {
      if (drop_punct && !has_alnum(tok)) continue;
      doc.tokens.push_back(std::move(tok));
    }
    doc.sentence_bounds.emplace_back(start, doc.tokens.size());
  }
  return doc;
}

TfidfModel::TfidfModel(DfMap df, std::uint64_t num_docs) : df_(std::move(df)), num_docs_(num_docs) {
  if (num_docs_ == 0) throw PreconditionError("tfidf model needs at least one document");
  for (const auto& [token, count] : df_)
    if (count < 1 || count > num_docs_)
      throw PreconditionError("df of '" + token + "' outside [1, num_docs]");
}

TfidfModel TfidfModel::fit(std::span<const TokenizedDoc> docs, unsigned jobs) {
  if (docs.empty()) throw PreconditionError("no documents");
  std::vector<TfidfModel> shards(chunk_count(docs.size(), jobs));
  parallel_chunks(docs.size(), jobs, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    std::unordered_map<std::string_view, std::uint64_t> counts;
    std::vector<std::string_view> seen;
    for (std::size_t d = begin; d < end; ++d) {
      seen.assign(docs[d].tokens.begin(), docs[d].tokens.end());
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (auto t : seen) ++counts[t];
    }
    auto& shard = shards[chunk];
    for (auto [t, c] : counts) shard.df_.emplace(std::string(t), c);
    shard.num_docs_ = end - begin;
  });
  TfidfModel model = std::move(shards.front());
  for (std::size_t i = 1; i < shards.size(); ++i) model.merge(shards[i]);
  return model;
}

void TfidfModel::merge(const TfidfModel& other) {
  for (const auto& [token, count] : other.df_) df_[token] += count;
  num_docs_ += other.num_docs_;
}

std::uint64_t TfidfModel::df(std::string_view term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

void TfidfModel::save(std::ostream& out) const {
  out << nlohmann::json{{"num_docs", num_docs_}}.dump() << '\n';
  for (const auto& [token, count] : df_) out << nlohmann::ordered_json{{"token", token}, {"df", count}}.dump() << '\n';
}

TfidfModel TfidfModel::load(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  std::uint64_t num_docs = 0;
  bool have_header = false;
  DfMap df;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (!have_header) {
        num_docs = j.at("num_docs").get<std::uint64_t>();
        have_header = true;
        continue;
      }
      std::string token = j.at("token").get<std::string>();
      if (!df.emplace(std::move(token), j.at("df").get<std::uint64_t>()).second)
        throw ParseError("duplicate token in tfidf model", n);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad tfidf model line: ") + e.what(), n);
    }
  }
  if (!have_header) throw ParseError("tfidf model is missing its {\"num_docs\"} header");
  return TfidfModel(std::move(df), num_docs);
}

double tf(std::string_view term, const TokenizedDoc& doc) {
  if (doc.tokens.empty()) throw PreconditionError("tf of an empty document");
  auto count = std::count(doc.tokens.begin(), doc.tokens.end(), term);
  return static_cast<double>(count) / static_cast<double>(doc.tokens.size());
}

double idf(std::string_view term, const TfidfModel& model) {
  double n = static_cast<double>(model.num_docs());
  double df = static_cast<double>(model.df(term));
  return std::log((n + 1.0) / (df + 1.0)) + 1.0;
}

void sort_keywords(KeywordList& keywords) {
  std::sort(keywords.begin(), keywords.end(), [](const Keyword& a, const Keyword& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
}

KeywordList tfidf_extract(const TokenizedDoc& doc, std::size_t k, const TfidfModel& model) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  if (doc.tokens.empty()) throw PreconditionError("tfidf_extract on an empty document");
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& t : doc.tokens) ++counts[t];
  const double size = static_cast<double>(doc.tokens.size());
  KeywordList scored;
  scored.reserve(counts.size());
  for (auto [token, count] : counts)
    scored.push_back({std::string(token), static_cast<double>(count) / size * idf(token, model)});
  sort_keywords(scored);
  if (scored.size() > k) scored.resize(k);
  return scored;
}

KeywordList dedup_keywords(const KeywordList& ranked, double ratio, std::size_t limit) {
  KeywordList kept;
  for (const auto& candidate : ranked) {
    if (kept.size() >= limit) break;
    bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Keyword& k) {
      // Candidate first, kept keyword second, as in YAKE's seqm deduplication.
      return sequence_match_ratio(candidate.word, k.word) >= ratio;
    });
    if (!duplicate) kept.push_back(candidate);
  }
  return kept;
}

std::unordered_set<std::string> load_stopwords(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty() && t.front() != '#') words.insert(to_lower(t));
  }
  return words;
}

}  // namespace salctx
