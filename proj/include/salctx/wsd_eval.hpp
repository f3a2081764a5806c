#pragma once

// Translation-disambiguation scoring. Each output is reduced to a lemma set s
// and compared to the positive (p) and negative (n) realizations of the
// record's sense cluster:
//   POS  s meets p and misses n
//   NEG  s meets n
//   UNK  otherwise
// P = #pos / (#pos + #neg), R = #pos / (#pos + #neg + #unk), F1 harmonic.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "salctx/docmucow.hpp"

namespace salctx {

enum class EvalLabel { kPos, kNeg, kUnk };

std::string_view label_name(EvalLabel label);
EvalLabel parse_label(std::string_view name);

using LemmaSet = std::set<std::string, std::less<>>;

class SenseInventory {
 public:
  using Key = std::pair<std::string, std::string>;  // (source lemma, cluster id)

  SenseInventory() = default;
  // Throws PreconditionError if a lemma has fewer than two clusters or a
  // cluster is empty.
  explicit SenseInventory(std::map<Key, LemmaSet> clusters);

  // TSV: lemma, cluster_id, comma-separated target lemmas. Repeated
  // (lemma, cluster) rows are merged.
  static SenseInventory load_tsv(std::istream& in);

  const std::map<Key, LemmaSet>& clusters() const { return clusters_; }
  std::vector<std::string> clusters_of(std::string_view lemma) const;
  bool contains(std::string_view lemma, std::string_view cluster) const;
  const LemmaSet& cluster(std::string_view lemma, std::string_view cluster) const;

 private:
  std::map<Key, LemmaSet> clusters_;
};

struct SenseSets {
  LemmaSet positive;
  LemmaSet negative;
};

// p = the record's cluster; n = union of the lemma's other clusters minus p.
SenseSets lookup_sense_sets(const MucowRecord& record, const SenseInventory& inventory);

// Throws PreconditionError("inconsistent inventory") when p and n overlap.
EvalLabel classify(const LemmaSet& output, const LemmaSet& positive, const LemmaSet& negative);

struct WsdReport {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_unk = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  std::size_t total() const { return n_pos + n_neg + n_unk; }
};

// Zero denominators give 0 for the affected metric.
WsdReport report_from_counts(std::size_t n_pos, std::size_t n_neg, std::size_t n_unk);
WsdReport score(std::span<const EvalLabel> labels);

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  // Must return one lemma per input token.
  virtual std::vector<std::string> lemmatize(std::span<const std::string> tokens) const = 0;
};

class IdentityLemmatizer : public Lemmatizer {
 public:
  std::vector<std::string> lemmatize(std::span<const std::string> tokens) const override;
};

// surface -> lemma lookup; unknown surfaces pass through unchanged.
class DictLemmatizer : public Lemmatizer {
 public:
  explicit DictLemmatizer(std::unordered_map<std::string, std::string> table) : table_(std::move(table)) {}
  static DictLemmatizer load_tsv(std::istream& in);
  std::vector<std::string> lemmatize(std::span<const std::string> tokens) const override;

 private:
  std::unordered_map<std::string, std::string> table_;
};

// "identity" or "dict:FILE".
std::unique_ptr<Lemmatizer> make_lemmatizer(std::string_view spec);

// Case-preserving tokenization followed by lemmatization.
LemmaSet output_lemmas(std::string_view output, const Lemmatizer& lemmatizer);

using LabelMap = std::map<std::uint64_t, EvalLabel>;  // record id -> label

struct SystemEvaluation {
  WsdReport report;
  LabelMap labels;
};

// outputs: record id -> translation. Ids must match the records exactly.
SystemEvaluation evaluate_system(const std::map<std::uint64_t, std::string>& outputs,
                                 std::span<const MucowRecord> records, const SenseInventory& inventory,
                                 const Lemmatizer& lemmatizer);

struct SenseFrequency {
  std::size_t count = 0;
  std::size_t lemma_total = 0;
  double frequency = 0.0;
};
using SenseFrequencies = std::map<SenseInventory::Key, SenseFrequency>;

// Counts target-side lemma occurrences of each cluster; a target lemma listed
// in several clusters of one source lemma counts for each (reported through
// `warnings`). Lemmas never observed are omitted.
SenseFrequencies compute_sense_frequencies(std::span<const std::string> target_lines,
                                           const SenseInventory& inventory, const Lemmatizer& lemmatizer,
                                           std::vector<std::string>* warnings = nullptr);

struct BinRow {
  std::string bin;
  std::string system;
  WsdReport report;
  double delta_f1 = 0.0;          // f1 - baseline f1
  long long delta_pos = 0;        // n_pos - baseline n_pos
};

struct BinnedTable {
  std::vector<std::string> bins;
  std::vector<BinRow> rows;  // bin-major, systems in name order
};

using SystemLabels = std::map<std::string, LabelMap>;

// Index of the left-closed bin holding `frequency`; the last bin also holds
// 1.0. A 1e-9 slack absorbs rounding at bin edges (0.6 / 0.2 < 3).
std::size_t sense_frequency_bin(double frequency, double width);

BinnedTable bin_by_sense_frequency(const SystemLabels& systems, std::span<const MucowRecord> records,
                                   const SenseFrequencies& frequencies, const std::string& baseline,
                                   double width = 0.2);

// Edges e0 < e1 < ... ; bin i is [e_i, e_{i+1}); the last edge may be +inf.
// Lengths outside every bin raise PreconditionError.
BinnedTable bin_by_length(const SystemLabels& systems, std::span<const MucowRecord> records,
                          const std::function<std::size_t(std::string_view)>& length_of,
                          std::span<const double> edges, const std::string& baseline);

void write_binned_tsv(std::ostream& out, const BinnedTable& table);

// Labels JSONL: {"id": ..., "label": "POS"|"NEG"|"UNK"}.
void write_labels_jsonl(std::ostream& out, const LabelMap& labels);
LabelMap read_labels_jsonl(std::istream& in);

// ---- significance ----

enum class Metric { kPrecision, kRecall, kF1 };

struct MetricTest {
  double mean_delta = 0.0;  // mean over trials of metric(A) - metric(B)
  double p_value = 1.0;
};

struct SignificanceResult {
  std::size_t trials = 0;
  MetricTest precision, recall, f1;
  const MetricTest& at(Metric m) const;
};

// Paired bootstrap: each trial resamples N example indices with replacement;
// p = fraction of trials with metric(A) <= metric(B) (one-sided, A > B).
// Trial t draws from a generator keyed on (seed, t), so the result does not
// depend on `jobs`.
SignificanceResult paired_bootstrap(std::span<const EvalLabel> a, std::span<const EvalLabel> b,
                                    std::size_t resamples = 5000, std::uint64_t seed = 0, unsigned jobs = 1);

// One-sided paired t-test over `trials` resampled subsets of `samples`
// examples each (with replacement).
SignificanceResult resampled_ttest(std::span<const EvalLabel> a, std::span<const EvalLabel> b,
                                   std::size_t trials = 50, std::size_t samples = 750, std::uint64_t seed = 0);

// Aligns two label maps on their shared id set; throws if the sets differ.
std::pair<std::vector<EvalLabel>, std::vector<EvalLabel>> align_labels(const LabelMap& a, const LabelMap& b);

}  // namespace salctx
