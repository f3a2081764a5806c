#include "salctx/wsd_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "salctx/text.hpp"

namespace salctx {
namespace {

bool intersects(const LemmaSet& a, const LemmaSet& b) {
  const LemmaSet& small = a.size() <= b.size() ? a : b;
  const LemmaSet& large = a.size() <= b.size() ? b : a;
  return std::any_of(small.begin(), small.end(), [&](const std::string& x) { return large.count(x) != 0; });
}

const LabelMap& system_labels(const SystemLabels& systems, const std::string& name) {
  auto it = systems.find(name);
  if (it == systems.end()) throw PreconditionError("baseline system '" + name + "' not present");
  return it->second;
}

EvalLabel label_for(const LabelMap& labels, std::uint64_t id, const std::string& system) {
  auto it = labels.find(id);
  if (it == labels.end()) throw PreconditionError(fmt::format("system '{}' has no label for record {}", system, id));
  return it->second;
}

struct Counts {
  std::size_t pos = 0, neg = 0, unk = 0;
  void add(EvalLabel l) {
    l == EvalLabel::kPos ? ++pos : l == EvalLabel::kNeg ? ++neg : ++unk;
  }
};

// Fills rows from per-bin, per-system counts.
BinnedTable make_table(std::vector<std::string> bins, const SystemLabels& systems,
                       const std::vector<std::map<std::string, Counts>>& counts, const std::string& baseline) {
  BinnedTable table;
  table.bins = std::move(bins);
  for (std::size_t b = 0; b < table.bins.size(); ++b) {
    auto base_it = counts[b].find(baseline);
    Counts base = base_it == counts[b].end() ? Counts{} : base_it->second;
    WsdReport base_report = report_from_counts(base.pos, base.neg, base.unk);
    for (const auto& [name, labels] : systems) {
      auto it = counts[b].find(name);
      Counts c = it == counts[b].end() ? Counts{} : it->second;
      BinRow row;
      row.bin = table.bins[b];
      row.system = name;
      row.report = report_from_counts(c.pos, c.neg, c.unk);
      row.delta_f1 = row.report.f1 - base_report.f1;
      row.delta_pos = static_cast<long long>(c.pos) - static_cast<long long>(base.pos);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string format_edge(double e) {
  if (std::isinf(e)) return "inf";
  return fmt::format("{}", e);
}

}  // namespace

std::string_view label_name(EvalLabel label) {
  switch (label) {
    case EvalLabel::kPos: return "POS";
    case EvalLabel::kNeg: return "NEG";
    case EvalLabel::kUnk: return "UNK";
  }
  return "?";
}

EvalLabel parse_label(std::string_view name) {
  if (name == "POS") return EvalLabel::kPos;
  if (name == "NEG") return EvalLabel::kNeg;
  if (name == "UNK") return EvalLabel::kUnk;
  throw ParseError("unknown label '" + std::string(name) + "'");
}

SenseInventory::SenseInventory(std::map<Key, LemmaSet> clusters) : clusters_(std::move(clusters)) {
  std::map<std::string, std::size_t> per_lemma;
  for (const auto& [key, lemmas] : clusters_) {
    if (lemmas.empty()) throw PreconditionError("empty cluster " + key.second + " for lemma '" + key.first + "'");
    ++per_lemma[key.first];
  }
  for (const auto& [lemma, n] : per_lemma)
    if (n < 2) throw PreconditionError("lemma '" + lemma + "' has fewer than two sense clusters");
}

SenseInventory SenseInventory::load_tsv(std::istream& in) {
  std::map<Key, LemmaSet> clusters;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError("inventory rows need 3 tab-separated fields", n);
    if (n == 1 && fields[0] == "lemma" && fields[1] == "cluster_id") continue;
    auto& set = clusters[{std::string(trim(fields[0])), std::string(trim(fields[1]))}];
    for (auto t : split(fields[2], ',')) {
      t = trim(t);
      if (!t.empty()) set.emplace(t);
    }
  }
  return SenseInventory(std::move(clusters));
}

std::vector<std::string> SenseInventory::clusters_of(std::string_view lemma) const {
  std::vector<std::string> out;
  for (auto it = clusters_.lower_bound({std::string(lemma), std::string()});
       it != clusters_.end() && it->first.first == lemma; ++it)
    out.push_back(it->first.second);
  return out;
}

bool SenseInventory::contains(std::string_view lemma, std::string_view cluster) const {
  return clusters_.count({std::string(lemma), std::string(cluster)}) != 0;
}

const LemmaSet& SenseInventory::cluster(std::string_view lemma, std::string_view cluster) const {
  auto it = clusters_.find({std::string(lemma), std::string(cluster)});
  if (it == clusters_.end())
    throw PreconditionError("no sense cluster " + std::string(cluster) + " for lemma '" + std::string(lemma) + "'");
  return it->second;
}

SenseSets lookup_sense_sets(const MucowRecord& record, const SenseInventory& inventory) {
  if (!inventory.contains(record.lemma, record.cluster_id))
    throw PreconditionError(fmt::format("record {}: unknown (lemma, cluster) ('{}', {})", record.id, record.lemma,
                                        record.cluster_id));
  SenseSets sets;
  sets.positive = inventory.cluster(record.lemma, record.cluster_id);
  for (const auto& c : inventory.clusters_of(record.lemma)) {
    if (c == record.cluster_id) continue;
    for (const auto& l : inventory.cluster(record.lemma, c))
      if (!sets.positive.count(l)) sets.negative.insert(l);
  }
  return sets;
}

EvalLabel classify(const LemmaSet& output, const LemmaSet& positive, const LemmaSet& negative) {
  if (intersects(positive, negative)) throw PreconditionError("inconsistent inventory");
  if (intersects(output, negative)) return EvalLabel::kNeg;
  if (intersects(output, positive)) return EvalLabel::kPos;
  return EvalLabel::kUnk;
}

WsdReport report_from_counts(std::size_t n_pos, std::size_t n_neg, std::size_t n_unk) {
  WsdReport r;
  r.n_pos = n_pos;
  r.n_neg = n_neg;
  r.n_unk = n_unk;
  double pos = static_cast<double>(n_pos);
  if (n_pos + n_neg > 0) r.precision = pos / static_cast<double>(n_pos + n_neg);
  if (r.total() > 0) r.recall = pos / static_cast<double>(r.total());
  if (r.precision + r.recall > 0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

WsdReport score(std::span<const EvalLabel> labels) {
  Counts c;
  for (auto l : labels) c.add(l);
  return report_from_counts(c.pos, c.neg, c.unk);
}

std::vector<std::string> IdentityLemmatizer::lemmatize(std::span<const std::string> tokens) const {
  return {tokens.begin(), tokens.end()};
}

DictLemmatizer DictLemmatizer::load_tsv(std::istream& in) {
  std::unordered_map<std::string, std::string> table;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError("lemma dictionary rows need 2 tab-separated fields", n);
    table[std::string(fields[0])] = std::string(fields[1]);
  }
  return DictLemmatizer(std::move(table));
}

std::vector<std::string> DictLemmatizer::lemmatize(std::span<const std::string> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = table_.find(t);
    out.push_back(it == table_.end() ? t : it->second);
  }
  return out;
}

std::unique_ptr<Lemmatizer> make_lemmatizer(std::string_view spec) {
  if (spec == "identity") return std::make_unique<IdentityLemmatizer>();
  if (spec.starts_with("dict:")) {
    std::string path(spec.substr(5));
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open lemma dictionary: " + path);
    return std::make_unique<DictLemmatizer>(DictLemmatizer::load_tsv(in));
  }
  throw UsageError("unknown lemmatizer '" + std::string(spec) + "' (expected identity or dict:FILE)");
}

LemmaSet output_lemmas(std::string_view output, const Lemmatizer& lemmatizer) {
  auto tokens = tokenize(output, false);
  auto lemmas = lemmatizer.lemmatize(tokens);
  if (lemmas.size() != tokens.size()) throw Error(ErrorKind::kInternal, "lemmatizer changed the token count");
  return LemmaSet(lemmas.begin(), lemmas.end());
}

SystemEvaluation evaluate_system(const std::map<std::uint64_t, std::string>& outputs,
                                 std::span<const MucowRecord> records, const SenseInventory& inventory,
                                 const Lemmatizer& lemmatizer) {
  std::vector<std::uint64_t> missing, extra;
  std::set<std::uint64_t> record_ids;
  for (const auto& r : records) {
    record_ids.insert(r.id);
    if (!outputs.count(r.id)) missing.push_back(r.id);
  }
  for (const auto& [id, text] : outputs)
    if (!record_ids.count(id)) extra.push_back(id);
  if (!missing.empty() || !extra.empty()) {
    auto head = [](const std::vector<std::uint64_t>& v) {
      std::vector<std::uint64_t> h(v.begin(), v.begin() + std::min<std::size_t>(v.size(), 20));
      return fmt::format("{}{}", fmt::join(h, ","), v.size() > 20 ? ",..." : "");
    };
    throw PreconditionError(fmt::format("outputs do not align with records: missing ids [{}], extra ids [{}]",
                                        head(missing), head(extra)));
  }

  SystemEvaluation eval;
  Counts c;
  for (const auto& r : records) {
    auto sets = lookup_sense_sets(r, inventory);
    EvalLabel label = classify(output_lemmas(outputs.at(r.id), lemmatizer), sets.positive, sets.negative);
    eval.labels[r.id] = label;
    c.add(label);
  }
  eval.report = report_from_counts(c.pos, c.neg, c.unk);
  return eval;
}

SenseFrequencies compute_sense_frequencies(std::span<const std::string> target_lines,
                                           const SenseInventory& inventory, const Lemmatizer& lemmatizer,
                                           std::vector<std::string>* warnings) {
  std::unordered_map<std::string, std::vector<SenseInventory::Key>> reverse;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> seen;  // (src lemma, tgt lemma) -> clusters
  for (const auto& [key, lemmas] : inventory.clusters()) {
    for (const auto& l : lemmas) {
      reverse[l].push_back(key);
      seen[{key.first, l}].push_back(key.second);
    }
  }
  if (warnings) {
    for (const auto& [k, clusters] : seen)
      if (clusters.size() > 1)
        warnings->push_back(fmt::format("target lemma '{}' belongs to {} clusters of '{}'; counted for each", k.second,
                                        clusters.size(), k.first));
  }

  std::map<SenseInventory::Key, std::size_t> counts;
  for (const auto& line : target_lines) {
    auto tokens = tokenize(line, false);
    for (const auto& lemma : lemmatizer.lemmatize(tokens)) {
      auto it = reverse.find(lemma);
      if (it == reverse.end()) continue;
      for (const auto& key : it->second) ++counts[key];
    }
  }

  std::map<std::string, std::size_t> totals;
  for (const auto& [key, n] : counts) totals[key.first] += n;

  SenseFrequencies out;
  for (const auto& [key, lemmas] : inventory.clusters()) {
    auto t = totals.find(key.first);
    if (t == totals.end() || t->second == 0) continue;
    std::size_t n = counts.count(key) ? counts.at(key) : 0;
    out[key] = {n, t->second, static_cast<double>(n) / static_cast<double>(t->second)};
  }
  return out;
}

std::size_t sense_frequency_bin(double frequency, double width) {
  if (!(width > 0.0 && width <= 1.0)) throw PreconditionError("bin width must lie in (0, 1]");
  if (!(frequency >= 0.0 && frequency <= 1.0)) throw PreconditionError("frequency outside [0,1]");
  auto bins = static_cast<std::size_t>(std::llround(std::ceil(1.0 / width - 1e-9)));
  auto index = static_cast<std::size_t>(std::floor(frequency / width + 1e-9));
  return std::min(index, bins - 1);
}

BinnedTable bin_by_sense_frequency(const SystemLabels& systems, std::span<const MucowRecord> records,
                                   const SenseFrequencies& frequencies, const std::string& baseline,
                                   double width) {
  system_labels(systems, baseline);
  std::size_t nbins = sense_frequency_bin(1.0, width) + 1;
  std::vector<std::string> names;
  for (std::size_t b = 0; b < nbins; ++b) {
    double lo = std::round(b * width * 100.0), hi = std::min(100.0, std::round((b + 1) * width * 100.0));
    names.push_back(fmt::format("{}-{}%", lo, hi));
  }
  std::vector<std::map<std::string, Counts>> counts(nbins);
  for (const auto& r : records) {
    auto it = frequencies.find({r.lemma, r.cluster_id});
    if (it == frequencies.end())
      throw PreconditionError(fmt::format("no sense frequency for record {} ('{}', {})", r.id, r.lemma, r.cluster_id));
    std::size_t b = sense_frequency_bin(it->second.frequency, width);
    for (const auto& [name, labels] : systems) counts[b][name].add(label_for(labels, r.id, name));
  }
  return make_table(std::move(names), systems, counts, baseline);
}

BinnedTable bin_by_length(const SystemLabels& systems, std::span<const MucowRecord> records,
                          const std::function<std::size_t(std::string_view)>& length_of,
                          std::span<const double> edges, const std::string& baseline) {
  system_labels(systems, baseline);
  if (edges.size() < 2) throw PreconditionError("length binning needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw PreconditionError("bin edges must be strictly increasing");
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    names.push_back(fmt::format("[{},{})", format_edge(edges[i]), format_edge(edges[i + 1])));

  std::vector<std::map<std::string, Counts>> counts(names.size());
  for (const auto& r : records) {
    auto len = static_cast<double>(length_of(r.src));
    auto it = std::upper_bound(edges.begin(), edges.end(), len);
    if (it == edges.begin() || it == edges.end())
      throw PreconditionError(fmt::format("record {} has length {} outside the bin edges", r.id, len));
    std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
    for (const auto& [name, labels] : systems) counts[b][name].add(label_for(labels, r.id, name));
  }
  return make_table(std::move(names), systems, counts, baseline);
}

void write_binned_tsv(std::ostream& out, const BinnedTable& table) {
  out << "bin\tsystem\tn_pos\tn_neg\tn_unk\tprecision\trecall\tf1\tdelta_f1\tdelta_pos\n";
  for (const auto& r : table.rows)
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{:.4f}\t{:.4f}\t{:.4f}\t{:+.4f}\t{:+d}\n", r.bin, r.system, r.report.n_pos,
                       r.report.n_neg, r.report.n_unk, r.report.precision, r.report.recall, r.report.f1, r.delta_f1,
                       r.delta_pos);
}

void write_labels_jsonl(std::ostream& out, const LabelMap& labels) {
  for (const auto& [id, label] : labels)
    out << nlohmann::json{{"id", id}, {"label", std::string(label_name(label))}}.dump() << '\n';
}

LabelMap read_labels_jsonl(std::istream& in) {
  LabelMap labels;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto id = j.at("id").get<std::uint64_t>();
      if (!labels.emplace(id, parse_label(j.at("label").get<std::string>())).second)
        throw ParseError("duplicate id " + std::to_string(id), n);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad label record: ") + e.what(), n);
    } catch (const ParseError& e) {
      if (e.line()) throw;
      throw ParseError(e.what(), n);
    }
  }
  return labels;
}

std::pair<std::vector<EvalLabel>, std::vector<EvalLabel>> align_labels(const LabelMap& a, const LabelMap& b) {
  std::pair<std::vector<EvalLabel>, std::vector<EvalLabel>> out;
  if (a.size() != b.size()) throw PreconditionError("label sets have different sizes");
  auto ia = a.begin();
  for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw PreconditionError(fmt::format("label ids differ ({} vs {})", ia->first, ib->first));
    out.first.push_back(ia->second);
    out.second.push_back(ib->second);
  }
  return out;
}

}  // namespace salctx
