#pragma once

// Document-ID reconstruction for ambiguous-word test records: every record's
// source sentence is searched, after stripping non-alphanumerics, in the
// concatenated text of raw corpus documents.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace salctx {

struct MucowRecord {
  std::uint64_t id = 0;
  std::string lemma;
  std::string cluster_id;
  std::string subcorpus;
  std::string src;
  std::string tgt;
  std::string ambiguous_token;
  std::optional<std::string> doc_id;
};

struct RawDocument {
  std::string doc_id;
  std::string subcorpus;
  std::vector<std::string> sentences;
};

// Removes every code point that is not a Unicode letter or digit. Case is
// kept unless fold_case is set.
std::string normalize_for_match(std::string_view text, bool fold_case = false);

struct AssignOptions {
  bool fold_case = false;
  // Search all documents rather than only those of the record's subcorpus.
  bool cross_subcorpus = false;
  unsigned jobs = 1;
};

struct AssignResult {
  std::vector<MucowRecord> records;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::size_t ambiguous = 0;      // records found in more than one document
  std::size_t empty_needles = 0;  // records whose normalized source is empty
  std::vector<std::string> warnings;
};

// Assigns each record the first document (corpus order) whose normalized
// sentence concatenation contains the normalized source. Existing doc_id
// values are overwritten; unmatched records end with no doc_id. The result is
// independent of options.jobs.
AssignResult assign_doc_ids(std::vector<MucowRecord> records, std::span<const RawDocument> corpus,
                            const AssignOptions& options = {});

struct StatsRow {
  std::string subcorpus;
  std::size_t types = 0;      // distinct lemmas
  std::size_t sentences = 0;
  std::size_t doc_ids = 0;
  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

struct TestsetStats {
  std::vector<StatsRow> rows;  // sorted by subcorpus
  StatsRow combined{"combined"};
  std::size_t unassigned = 0;
};

TestsetStats docmucow_stats(std::span<const MucowRecord> records);
void write_stats_tsv(std::ostream& out, const TestsetStats& stats);

// Records TSV: lemma, cluster_id, subcorpus, src, tgt, ambiguous_token
// [, doc_id]. An optional header row names the columns, in which case an "id"
// column may also be present. Without an id column, ids are 0-based row
// indices.
std::vector<MucowRecord> read_records_tsv(std::istream& in);
// Writes a header row plus one row per record (id column included).
void write_records_tsv(std::ostream& out, std::span<const MucowRecord> records);

// JSONL corpus: {"doc_id": ..., "subcorpus": ..., "sentences": [...]}.
std::vector<RawDocument> read_corpus_jsonl(std::istream& in);
// Directory corpus: one document per regular file (one sentence per line),
// doc_id = path relative to root, subcorpus = first path component for files
// in subdirectories (empty otherwise). Files are visited in sorted path order.
std::vector<RawDocument> read_corpus_dir(const std::filesystem::path& root);

}  // namespace salctx
