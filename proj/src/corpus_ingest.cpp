#include "salctx/corpus_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "salctx/parallel.hpp"
#include "salctx/text.hpp"

namespace salctx {
namespace {

using nlohmann::json;

std::vector<std::string> split_urls(std::string_view field) {
  std::vector<std::string> urls;
  for (auto part : split(field, ';')) {
    part = trim(part);
    if (!part.empty()) urls.emplace_back(part);
  }
  return urls;
}

std::optional<double> parse_similarity(std::string_view field, std::size_t line) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
    throw ParseError("non-numeric similarity '" + std::string(field) + "'", line);
  if (value < 0.0 || value > 1.0) throw ParseError("similarity outside [0,1]", line);
  return value;
}

std::vector<std::string> json_urls(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  if (it->is_string()) return split_urls(it->get_ref<const std::string&>());
  if (!it->is_array()) throw ParseError(std::string("field '") + key + "' must be a string or array", line);
  std::vector<std::string> urls;
  for (const auto& u : *it) {
    if (!u.is_string()) throw ParseError(std::string("non-string entry in '") + key + "'", line);
    auto t = trim(u.get_ref<const std::string&>());
    if (!t.empty()) urls.emplace_back(t);
  }
  return urls;
}

void check_text(BitextPair& pair, std::size_t line) {
  if (trim(pair.src).empty()) throw ParseError("empty source", line);
  if (trim(pair.tgt).empty()) throw ParseError("empty target", line);
  pair.src = std::string(trim(pair.src));
  pair.tgt = std::string(trim(pair.tgt));
}

bool is_scheme_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '+' ||
         c == '-' || c == '.';
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

BitextPair parse_bitext_record(std::string_view record, InputFormat format, std::size_t line) {
  BitextPair pair;
  if (format == InputFormat::kTsv) {
    if (!record.empty() && record.back() == '\r') record.remove_suffix(1);
    auto fields = split(record, '\t');
    if (fields.size() < 2) throw ParseError("expected at least 2 tab-separated fields", line);
    if (fields.size() > 5) throw ParseError("expected at most 5 tab-separated fields", line);
    pair.src = std::string(fields[0]);
    pair.tgt = std::string(fields[1]);
    if (fields.size() > 2) pair.src_urls = split_urls(fields[2]);
    if (fields.size() > 3) pair.tgt_urls = split_urls(fields[3]);
    if (fields.size() > 4) pair.similarity = parse_similarity(fields[4], line);
  } else {
    json j;
    try {
      j = json::parse(record);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", line);
    for (const char* key : {"src", "tgt"}) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) throw ParseError(std::string("missing string field '") + key + "'", line);
    }
    pair.src = j["src"].get<std::string>();
    pair.tgt = j["tgt"].get<std::string>();
    pair.src_urls = json_urls(j, "src_urls", line);
    pair.tgt_urls = json_urls(j, "tgt_urls", line);
    if (auto it = j.find("similarity"); it != j.end() && !it->is_null()) {
      if (!it->is_number()) throw ParseError("non-numeric similarity", line);
      double v = it->get<double>();
      if (!(v >= 0.0 && v <= 1.0)) throw ParseError("similarity outside [0,1]", line);
      pair.similarity = v;
    }
  }
  check_text(pair, line);
  return pair;
}

ParseResult parse_bitext(std::istream& in, InputFormat format, OnError on_error, unsigned jobs) {
  std::vector<std::string> lines;
  std::vector<std::size_t> line_numbers;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    lines.push_back(std::move(line));
    line_numbers.push_back(n);
  }

  struct Slot {
    std::optional<BitextPair> pair;
    std::optional<ParseError> error;
  };
  std::vector<Slot> slots(lines.size());
  parallel_chunks(lines.size(), jobs, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        slots[i].pair = parse_bitext_record(lines[i], format, line_numbers[i]);
      } catch (const ParseError& e) {
        slots[i].error = e;
      }
    }
  });

  ParseResult result;
  result.pairs.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].pair) {
      if (on_error == OnError::kAbort) throw *slots[i].error;
      result.skipped.push_back({line_numbers[i], slots[i].error->what()});
      continue;
    }
    slots[i].pair->id = result.pairs.size();
    result.pairs.push_back(std::move(*slots[i].pair));
  }
  return result;
}

std::vector<BitextPair> filter_by_similarity(std::vector<BitextPair> pairs, double threshold) {
  std::erase_if(pairs, [&](const BitextPair& p) { return !p.similarity || !(*p.similarity > threshold); });
  return pairs;
}

std::string canonicalize_url(std::string_view url) {
  std::string_view raw = trim(url);
  auto fallback = [&] { return to_lower(raw); };

  std::string_view rest = raw;
  if (auto pos = rest.find("://"); pos != std::string_view::npos && pos > 0 && is_ascii_alpha(rest[0]) &&
                                    std::all_of(rest.begin(), rest.begin() + pos, is_scheme_char)) {
    rest.remove_prefix(pos + 3);
  }
  if (auto pos = rest.find_first_of("?#"); pos != std::string_view::npos) rest = rest.substr(0, pos);

  std::size_t slash = rest.find('/');
  std::string host = to_lower(rest.substr(0, slash));
  std::string_view path = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);

  while (host.starts_with("www.")) host.erase(0, 4);
  bool bad_host = host.empty() || host.back() == ':' ||
                  std::any_of(host.begin(), host.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; });
  if (bad_host || std::any_of(path.begin(), path.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }))
    return fallback();
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);
  return host + std::string(path);
}

std::string doc_key_for(const BitextPair& pair) {
  if (pair.src_urls.empty()) return "#" + std::to_string(pair.id);
  std::vector<std::string> keys;
  keys.reserve(pair.src_urls.size());
  for (const auto& u : pair.src_urls) keys.push_back(canonicalize_url(u));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return join(keys, "|");
}

std::vector<PseudoDocument> group_into_pseudodocs(std::span<const BitextPair> pairs, unsigned jobs) {
  std::vector<std::string> keys(pairs.size());
  parallel_chunks(pairs.size(), jobs, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) keys[i] = doc_key_for(pairs[i]);
  });

  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<PseudoDocument> docs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(keys[i], docs.size());
    if (inserted) docs.push_back({keys[i], {}});
    docs[it->second].sentences.push_back(pairs[i].id);
  }
  std::sort(docs.begin(), docs.end(),
            [](const PseudoDocument& a, const PseudoDocument& b) { return a.doc_key < b.doc_key; });
  return docs;
}

std::vector<PseudoDocument> filter_doc_length(std::vector<PseudoDocument> docs, std::size_t min_len,
                                              std::size_t max_len) {
  std::erase_if(docs, [&](const PseudoDocument& d) {
    return d.sentences.size() < min_len || d.sentences.size() > max_len;
  });
  return docs;
}

Corpus::Corpus(std::vector<BitextPair> pairs, std::vector<PseudoDocument> docs)
    : pairs_(std::move(pairs)), docs_(std::move(docs)) {
  std::sort(pairs_.begin(), pairs_.end(), [](const BitextPair& a, const BitextPair& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!index_.emplace(pairs_[i].id, i).second)
      throw PreconditionError("duplicate pair id " + std::to_string(pairs_[i].id));
  }
  for (const auto& doc : docs_)
    for (PairId id : doc.sentences)
      if (!contains(id)) throw PreconditionError("document '" + doc.doc_key + "' references unknown id " + std::to_string(id));
}

const BitextPair& Corpus::pair(PairId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw PreconditionError("unknown pair id " + std::to_string(id));
  return pairs_[it->second];
}

std::vector<std::string> Corpus::source_sentences(const PseudoDocument& doc) const {
  std::vector<std::string> out;
  out.reserve(doc.sentences.size());
  for (PairId id : doc.sentences) out.push_back(pair(id).src);
  return out;
}

void write_pseudodocs_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.docs()) {
    json sentences = json::array();
    for (PairId id : doc.sentences) {
      const auto& p = corpus.pair(id);
      sentences.push_back({{"id", p.id}, {"src", p.src}, {"tgt", p.tgt}});
    }
    json line = {{"doc_key", doc.doc_key}, {"sentences", std::move(sentences)}};
    out << line.dump() << '\n';
  }
}

Corpus read_pseudodocs_jsonl(std::istream& in) {
  std::vector<BitextPair> pairs;
  std::vector<PseudoDocument> docs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      PseudoDocument doc;
      doc.doc_key = j.at("doc_key").get<std::string>();
      for (const auto& s : j.at("sentences")) {
        BitextPair p;
        p.id = s.at("id").get<PairId>();
        p.src = s.at("src").get<std::string>();
        p.tgt = s.at("tgt").get<std::string>();
        doc.sentences.push_back(p.id);
        pairs.push_back(std::move(p));
      }
      docs.push_back(std::move(doc));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad pseudo-document record: ") + e.what(), n);
    }
  }
  return Corpus(std::move(pairs), std::move(docs));
}

Corpus ingest(std::istream& in, const IngestOptions& options, IngestStats* stats) {
  if (options.min_len < 1 || options.max_len < options.min_len)
    throw PreconditionError("document length bounds require 1 <= min <= max");
  if (!(options.min_similarity >= 0.0 && options.min_similarity <= 1.0))
    throw PreconditionError("similarity threshold must lie in [0,1]");

  ParseResult parsed = parse_bitext(in, options.format, options.on_error, options.jobs);
  IngestStats local;
  local.parsed = parsed.pairs.size();
  local.skipped = parsed.skipped.size();

  auto kept = filter_by_similarity(std::move(parsed.pairs), options.min_similarity);
  local.after_similarity = kept.size();

  auto docs = group_into_pseudodocs(kept, options.jobs);
  local.docs_before_length = docs.size();
  docs = filter_doc_length(std::move(docs), options.min_len, options.max_len);
  local.docs = docs.size();

  std::unordered_map<PairId, bool> retained;
  for (const auto& d : docs)
    for (PairId id : d.sentences) retained[id] = true;
  std::erase_if(kept, [&](const BitextPair& p) { return !retained.count(p.id); });
  local.sentences = kept.size();

  if (stats) *stats = local;
  return Corpus(std::move(kept), std::move(docs));
}

}  // namespace salctx
