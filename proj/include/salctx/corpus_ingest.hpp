#pragma once

// URL-keyed bitext ingestion: parse TSV/JSONL records, gate on precomputed
// similarity, group by canonical source URL into pseudo-documents and keep
// documents of admissible length.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace salctx {

using PairId = std::uint64_t;

struct BitextPair {
  PairId id = 0;
  std::string src;
  std::string tgt;
  std::vector<std::string> src_urls;
  std::vector<std::string> tgt_urls;
  std::optional<double> similarity;
};

struct PseudoDocument {
  std::string doc_key;
  std::vector<PairId> sentences;  // ingestion order
};

enum class InputFormat { kTsv, kJsonl };
enum class OnError { kAbort, kSkip };

struct SkippedRecord {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<BitextPair> pairs;
  std::vector<SkippedRecord> skipped;
};

// TSV columns: src, tgt[, src_urls[, tgt_urls[, similarity]]]; URL lists are
// ';'-separated. JSONL objects use the same names; URL fields may be arrays or
// ';'-joined strings. Ids are assigned 0, 1, ... to well-formed records in
// stream order. Blank lines are ignored.
ParseResult parse_bitext(std::istream& in, InputFormat format, OnError on_error = OnError::kAbort,
                         unsigned jobs = 1);

// Parses one record; throws ParseError mentioning `line`.
BitextPair parse_bitext_record(std::string_view record, InputFormat format, std::size_t line);

// Keeps pairs whose similarity is strictly greater than threshold. Pairs
// without a score are dropped.
std::vector<BitextPair> filter_by_similarity(std::vector<BitextPair> pairs, double threshold = 0.85);

// Lowercases scheme and host, then drops the scheme, any leading "www.", the
// query string, the fragment and trailing slashes. Input that does not look
// like a URL is returned lowercased and trimmed. Idempotent.
std::string canonicalize_url(std::string_view url);

// Canonical source URLs, deduplicated, sorted and joined with '|'. Pairs
// without URLs get a key unique to their id.
std::string doc_key_for(const BitextPair& pair);

// Groups by doc_key_for(); output sorted by doc_key.
std::vector<PseudoDocument> group_into_pseudodocs(std::span<const BitextPair> pairs, unsigned jobs = 1);

std::vector<PseudoDocument> filter_doc_length(std::vector<PseudoDocument> docs, std::size_t min_len = 2,
                                              std::size_t max_len = 10);

// A set of pseudo-documents together with the pairs they reference. This is
// what the ingest stage writes and every later stage reads.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<BitextPair> pairs, std::vector<PseudoDocument> docs);

  const std::vector<BitextPair>& pairs() const { return pairs_; }
  const std::vector<PseudoDocument>& docs() const { return docs_; }
  const BitextPair& pair(PairId id) const;
  bool contains(PairId id) const { return index_.count(id) != 0; }

  // Source sentences of a document, in document order.
  std::vector<std::string> source_sentences(const PseudoDocument& doc) const;

 private:
  std::vector<BitextPair> pairs_;
  std::vector<PseudoDocument> docs_;
  std::unordered_map<PairId, std::size_t> index_;
};

// One document per line:
//   {"doc_key": ..., "sentences": [{"id": ..., "src": ..., "tgt": ...}, ...]}
void write_pseudodocs_jsonl(std::ostream& out, const Corpus& corpus);
Corpus read_pseudodocs_jsonl(std::istream& in);

struct IngestOptions {
  InputFormat format = InputFormat::kTsv;
  OnError on_error = OnError::kAbort;
  double min_similarity = 0.85;
  std::size_t min_len = 2;
  std::size_t max_len = 10;
  unsigned jobs = 1;
};

struct IngestStats {
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::size_t after_similarity = 0;
  std::size_t docs_before_length = 0;
  std::size_t docs = 0;
  std::size_t sentences = 0;
};

// parse -> filter_by_similarity -> group -> filter_doc_length.
Corpus ingest(std::istream& in, const IngestOptions& options, IngestStats* stats = nullptr);

}  // namespace salctx
