#include "salctx/docmucow.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "salctx/aho_corasick.hpp"
#include "salctx/error.hpp"
#include "salctx/parallel.hpp"
#include "salctx/text.hpp"

namespace salctx {
namespace {

constexpr std::size_t kNoDoc = std::numeric_limits<std::size_t>::max();

const std::vector<std::string> kColumns = {"lemma", "cluster_id", "subcorpus", "src", "tgt", "ambiguous_token"};

// One automaton over the needles of a record group, scanned against the
// documents of the same group.
struct Partition {
  std::vector<std::size_t> records;   // indices into the record vector
  std::vector<std::uint32_t> pattern;  // pattern id per entry of `records`
  std::vector<std::size_t> docs;       // corpus indices, ascending
  MultiPatternMatcher matcher;
};

}  // namespace

std::string normalize_for_match(std::string_view text, bool fold_case) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    std::size_t start = i;
    char32_t cp = decode_utf8(text, i);
    if (!is_alnum(cp)) continue;
    if (fold_case)
      append_utf8(out, to_lower(cp));
    else
      out.append(text.substr(start, i - start));
  }
  return out;
}

AssignResult assign_doc_ids(std::vector<MucowRecord> records, std::span<const RawDocument> corpus,
                            const AssignOptions& options) {
  AssignResult result;
  std::map<std::string, Partition> partitions;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.doc_id.reset();
    std::string needle = normalize_for_match(r.src, options.fold_case);
    if (needle.empty()) {
      ++result.empty_needles;
      result.warnings.push_back(fmt::format("record {}: source is empty after normalization", r.id));
      continue;
    }
    auto& part = partitions[options.cross_subcorpus ? std::string() : r.subcorpus];
    part.records.push_back(i);
    part.pattern.push_back(part.matcher.add(needle));
  }
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto it = partitions.find(options.cross_subcorpus ? std::string() : corpus[d].subcorpus);
    if (it != partitions.end()) it->second.docs.push_back(d);
  }

  for (auto& [name, part] : partitions) {
    part.matcher.build();
    const std::size_t patterns = part.matcher.pattern_count();
    struct Hits {
      std::vector<std::size_t> first;  // lowest corpus index matched
      std::vector<std::size_t> count;  // distinct documents matched
    };
    std::vector<Hits> shards(chunk_count(part.docs.size(), options.jobs));
    parallel_chunks(part.docs.size(), options.jobs, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
      Hits& hits = shards[chunk];
      hits.first.assign(patterns, kNoDoc);
      hits.count.assign(patterns, 0);
      std::vector<std::size_t> last_doc(patterns, kNoDoc);
      std::string haystack;
      for (std::size_t k = begin; k < end; ++k) {
        std::size_t d = part.docs[k];
        haystack.clear();
        for (const auto& s : corpus[d].sentences) haystack += normalize_for_match(s, options.fold_case);
        part.matcher.scan(haystack, [&](std::uint32_t p, std::size_t) {
          if (last_doc[p] == d) return;
          last_doc[p] = d;
          ++hits.count[p];
          hits.first[p] = std::min(hits.first[p], d);
        });
      }
    });
    std::vector<std::size_t> first(patterns, kNoDoc), count(patterns, 0);
    for (const auto& h : shards) {
      if (h.first.empty()) continue;
      for (std::size_t p = 0; p < patterns; ++p) {
        first[p] = std::min(first[p], h.first[p]);
        count[p] += h.count[p];
      }
    }
    for (std::size_t j = 0; j < part.records.size(); ++j) {
      std::uint32_t p = part.pattern[j];
      if (first[p] == kNoDoc) continue;
      records[part.records[j]].doc_id = corpus[first[p]].doc_id;
      if (count[p] > 1) ++result.ambiguous;
    }
  }

  for (const auto& r : records) r.doc_id ? ++result.matched : ++result.unmatched;
  result.records = std::move(records);
  return result;
}

TestsetStats docmucow_stats(std::span<const MucowRecord> records) {
  struct Acc {
    std::set<std::string> types;
    std::size_t sentences = 0;
    std::set<std::string> docs;
  };
  std::map<std::string, Acc> per;
  Acc all;
  std::set<std::pair<std::string, std::string>> all_docs;
  TestsetStats stats;
  for (const auto& r : records) {
    if (!r.doc_id) {
      ++stats.unassigned;
      continue;
    }
    auto& a = per[r.subcorpus];
    a.types.insert(r.lemma);
    ++a.sentences;
    a.docs.insert(*r.doc_id);
    all.types.insert(r.lemma);
    ++all.sentences;
    all_docs.emplace(r.subcorpus, *r.doc_id);
  }
  for (const auto& [name, a] : per) stats.rows.push_back({name, a.types.size(), a.sentences, a.docs.size()});
  stats.combined = {"combined", all.types.size(), all.sentences, all_docs.size()};
  return stats;
}

void write_stats_tsv(std::ostream& out, const TestsetStats& stats) {
  out << "subcorpus\ttypes\tsentences\tdoc_ids\n";
  for (const auto& r : stats.rows) out << fmt::format("{}\t{}\t{}\t{}\n", r.subcorpus, r.types, r.sentences, r.doc_ids);
  const auto& c = stats.combined;
  out << fmt::format("{}\t{}\t{}\t{}\n", c.subcorpus, c.types, c.sentences, c.doc_ids);
  out << fmt::format("# unassigned\t{}\n", stats.unassigned);
}

std::vector<MucowRecord> read_records_tsv(std::istream& in) {
  std::vector<MucowRecord> records;
  std::string line;
  std::vector<int> col(8, -1);  // lemma..ambiguous_token, doc_id, id
  bool header_seen = false;
  std::size_t row = 0;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (!header_seen) {
      header_seen = true;
      if (fields[0] == "lemma" || fields[0] == "id") {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          auto it = std::find(kColumns.begin(), kColumns.end(), fields[i]);
          if (it != kColumns.end())
            col[it - kColumns.begin()] = static_cast<int>(i);
          else if (fields[i] == "doc_id")
            col[6] = static_cast<int>(i);
          else if (fields[i] == "id")
            col[7] = static_cast<int>(i);
        }
        for (std::size_t c = 0; c < kColumns.size(); ++c)
          if (col[c] < 0) throw ParseError("records header lacks column '" + kColumns[c] + "'", n);
        continue;
      }
      for (int c = 0; c < 7; ++c) col[c] = c;
    }
    auto get = [&](int c) -> std::string {
      if (col[c] < 0 || static_cast<std::size_t>(col[c]) >= fields.size()) return {};
      return std::string(fields[col[c]]);
    };
    if (fields.size() < 6) throw ParseError("expected at least 6 tab-separated fields", n);
    MucowRecord r;
    r.lemma = get(0);
    r.cluster_id = get(1);
    r.subcorpus = get(2);
    r.src = get(3);
    r.tgt = get(4);
    r.ambiguous_token = get(5);
    if (auto d = get(6); !d.empty()) r.doc_id = d;
    if (col[7] >= 0) {
      try {
        std::size_t used = 0;
        std::string v = get(7);
        r.id = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw ParseError("non-integer id", n);
      }
    } else {
      r.id = row;
    }
    if (r.lemma.empty() || r.src.empty()) throw ParseError("record needs a lemma and a source sentence", n);
    ++row;
    records.push_back(std::move(r));
  }
  std::set<std::uint64_t> ids;
  for (const auto& r : records)
    if (!ids.insert(r.id).second) throw ParseError("duplicate record id " + std::to_string(r.id));
  return records;
}

void write_records_tsv(std::ostream& out, std::span<const MucowRecord> records) {
  out << "id\tlemma\tcluster_id\tsubcorpus\tsrc\ttgt\tambiguous_token\tdoc_id\n";
  for (const auto& r : records)
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.id, r.lemma, r.cluster_id, r.subcorpus, r.src, r.tgt,
                       r.ambiguous_token, r.doc_id.value_or(""));
}

std::vector<RawDocument> read_corpus_jsonl(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RawDocument d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.subcorpus = j.value("subcorpus", std::string());
      d.sentences = j.at("sentences").get<std::vector<std::string>>();
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad corpus document: ") + e.what(), n);
    }
  }
  return docs;
}

std::vector<RawDocument> read_corpus_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw UsageError("corpus directory not found: " + root.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RawDocument> docs;
  for (const auto& f : files) {
    fs::path rel = f.lexically_relative(root);
    RawDocument d;
    d.doc_id = rel.generic_string();
    if (std::distance(rel.begin(), rel.end()) > 1) d.subcorpus = rel.begin()->string();
    std::ifstream in(f);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) d.sentences.push_back(line);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace salctx
