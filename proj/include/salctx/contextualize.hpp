#pragma once

// Model-input construction for each system variant:
//   sent    src
//   2sent   <other sentence of the same pseudo-document> SEP src
//   tfidf / yake   <k salient words> SEP src   (optionally shuffled)

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "salctx/corpus_ingest.hpp"
#include "salctx/saliency.hpp"

namespace salctx {

inline constexpr std::string_view kDefaultSep = "<SEP>";

enum class Variant { kSent, kTwoSent, kTfidf, kYake };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct ContextualizedExample {
  PairId id = 0;
  std::string doc_key;
  Variant variant = Variant::kSent;
  bool shuffled = false;
  std::optional<PairId> context_id;  // 2sent only

  std::vector<std::string> prefix;
  std::optional<std::string> sep;  // absent iff variant is sent
  std::string src;
  std::string tgt;

  // Prefix words joined by single spaces, then sep, then src.
  std::string render() const;
};

ContextualizedExample build_salient_prefix(const BitextPair& pair, const KeywordList& keywords,
                                           std::string_view sep, Variant tag = Variant::kTfidf);

// Same words as build_salient_prefix, permuted by a generator keyed on
// (seed, pair.id).
ContextualizedExample build_shuffled_prefix(const BitextPair& pair, const KeywordList& keywords,
                                            std::string_view sep, std::uint64_t seed,
                                            Variant tag = Variant::kTfidf);

// Prefix is the source of one other sentence of `doc`, drawn uniformly with a
// generator keyed on (seed, pair.id).
ContextualizedExample build_2sent_prefix(const BitextPair& pair, const PseudoDocument& doc,
                                         const Corpus& corpus, std::string_view sep, std::uint64_t seed);

ContextualizedExample build_sent(const BitextPair& pair);

// Text after the first occurrence of sep with leading whitespace removed; the
// whole string when sep does not occur.
std::string split_on_sep(std::string_view output, std::string_view sep);

// One example per line: {"id", "doc_key", "variant", "shuffled", "prefix",
// "sep", "src", "tgt", "input"} plus "context_id" for 2sent. With
// include_text = false only the metadata fields are written (the sidecar of
// the parallel-text output).
void write_example_jsonl(std::ostream& out, const ContextualizedExample& ex, bool include_text = true);
std::vector<ContextualizedExample> read_examples_jsonl(std::istream& in);

// {"doc_key": ..., "keywords": [{"word": ..., "score": ...}]}
void write_keywords_jsonl(std::ostream& out, const std::string& doc_key, const KeywordList& keywords);

}  // namespace salctx
