#include "salctx/contextualize.hpp"

#include <istream>
#include <ostream>
#include <span>

#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "salctx/rng.hpp"
#include "salctx/text.hpp"

namespace salctx {
namespace {

void check_sep(std::string_view sep, std::string_view src) {
  if (sep.empty()) throw PreconditionError("separator must be non-empty");
  if (src.find(sep) != std::string_view::npos)
    throw PreconditionError("separator '" + std::string(sep) + "' occurs in source text");
}

ContextualizedExample base(const BitextPair& pair, Variant variant) {
  ContextualizedExample ex;
  ex.id = pair.id;
  ex.variant = variant;
  ex.src = pair.src;
  ex.tgt = pair.tgt;
  return ex;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kSent: return "sent";
    case Variant::kTwoSent: return "2sent";
    case Variant::kTfidf: return "tfidf";
    case Variant::kYake: return "yake";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::kSent, Variant::kTwoSent, Variant::kTfidf, Variant::kYake})
    if (variant_name(v) == name) return v;
  throw UsageError("unknown variant '" + std::string(name) + "'");
}

std::string ContextualizedExample::render() const {
  if (!sep) return src;
  std::string out;
  for (const auto& w : prefix) {
    out += w;
    out += ' ';
  }
  out += *sep;
  out += ' ';
  out += src;
  return out;
}

ContextualizedExample build_salient_prefix(const BitextPair& pair, const KeywordList& keywords,
                                           std::string_view sep, Variant tag) {
  if (keywords.empty()) throw PreconditionError("no keywords for example " + std::to_string(pair.id));
  if (tag != Variant::kTfidf && tag != Variant::kYake) throw PreconditionError("salient prefix needs a saliency variant");
  check_sep(sep, pair.src);
  auto ex = base(pair, tag);
  for (const auto& k : keywords) {
    if (k.word.find(sep) != std::string::npos)
      throw PreconditionError("keyword '" + k.word + "' contains the separator");
    ex.prefix.push_back(k.word);
  }
  // The first separator in the rendered input must be the real one.
  std::string head = join(ex.prefix, " ") + " " + std::string(sep);
  if (head.find(sep) != head.size() - sep.size())
    throw PreconditionError("keywords would form the separator when joined");
  ex.sep = std::string(sep);
  return ex;
}

ContextualizedExample build_shuffled_prefix(const BitextPair& pair, const KeywordList& keywords,
                                            std::string_view sep, std::uint64_t seed, Variant tag) {
  auto ex = build_salient_prefix(pair, keywords, sep, tag);
  Rng rng = Rng::keyed(seed, pair.id);
  rng.shuffle(std::span<std::string>(ex.prefix));
  ex.shuffled = true;
  return ex;
}

ContextualizedExample build_2sent_prefix(const BitextPair& pair, const PseudoDocument& doc,
                                         const Corpus& corpus, std::string_view sep, std::uint64_t seed) {
  check_sep(sep, pair.src);
  std::vector<PairId> others;
  bool member = false;
  for (PairId id : doc.sentences) {
    if (id == pair.id)
      member = true;
    else
      others.push_back(id);
  }
  if (!member) throw PreconditionError("example " + std::to_string(pair.id) + " is not in document '" + doc.doc_key + "'");
  if (others.empty()) throw PreconditionError("no context sentence available for example " + std::to_string(pair.id));

  Rng rng = Rng::keyed(seed, pair.id);
  PairId chosen = others[rng.below(others.size())];
  const auto& context = corpus.pair(chosen);
  check_sep(sep, context.src);

  auto ex = base(pair, Variant::kTwoSent);
  ex.doc_key = doc.doc_key;
  ex.context_id = chosen;
  ex.prefix = split_whitespace(context.src);
  ex.sep = std::string(sep);
  return ex;
}

ContextualizedExample build_sent(const BitextPair& pair) { return base(pair, Variant::kSent); }

std::string split_on_sep(std::string_view output, std::string_view sep) {
  if (sep.empty()) return std::string(output);
  auto pos = output.find(sep);
  if (pos == std::string_view::npos) return std::string(output);
  std::string_view rest = output.substr(pos + sep.size());
  while (!rest.empty()) {
    std::size_t i = 0;
    char32_t cp = decode_utf8(rest, i);
    if (!is_space(cp)) break;
    rest.remove_prefix(i);
  }
  return std::string(rest);
}

void write_example_jsonl(std::ostream& out, const ContextualizedExample& ex, bool include_text) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["doc_key"] = ex.doc_key;
  j["variant"] = std::string(variant_name(ex.variant));
  j["shuffled"] = ex.shuffled;
  j["prefix"] = ex.prefix;
  j["sep"] = ex.sep ? nlohmann::ordered_json(*ex.sep) : nlohmann::ordered_json(nullptr);
  if (ex.context_id) j["context_id"] = *ex.context_id;
  if (include_text) {
    j["src"] = ex.src;
    j["tgt"] = ex.tgt;
    j["input"] = ex.render();
  }
  out << j.dump() << '\n';
}

std::vector<ContextualizedExample> read_examples_jsonl(std::istream& in) {
  std::vector<ContextualizedExample> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ContextualizedExample ex;
      ex.id = j.at("id").get<PairId>();
      ex.doc_key = j.value("doc_key", std::string());
      ex.variant = parse_variant(j.value("variant", std::string("sent")));
      ex.shuffled = j.value("shuffled", false);
      ex.prefix = j.value("prefix", std::vector<std::string>{});
      if (auto it = j.find("sep"); it != j.end() && !it->is_null()) ex.sep = it->get<std::string>();
      if (auto it = j.find("context_id"); it != j.end() && !it->is_null()) ex.context_id = it->get<PairId>();
      ex.src = j.at("src").get<std::string>();
      ex.tgt = j.value("tgt", std::string());
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad example record: ") + e.what(), n);
    } catch (const UsageError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

void write_keywords_jsonl(std::ostream& out, const std::string& doc_key, const KeywordList& keywords) {
  nlohmann::ordered_json kws = nlohmann::ordered_json::array();
  for (const auto& k : keywords) kws.push_back({{"word", k.word}, {"score", k.score}});
  nlohmann::ordered_json j;
  j["doc_key"] = doc_key;
  j["keywords"] = std::move(kws);
  out << j.dump() << '\n';
}

}  // namespace salctx
