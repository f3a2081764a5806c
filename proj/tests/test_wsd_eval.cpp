#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "salctx/error.hpp"
#include "salctx/rng.hpp"
#include "salctx/text.hpp"
#include "salctx/wsd_eval.hpp"
#include "test_util.hpp"

using namespace salctx;

namespace {

SenseInventory bank_inventory() {
  return SenseInventory({{{"bank", "1"}, {"Bank"}}, {{"bank", "2"}, {"Ufer"}}});
}

MucowRecord rec(std::uint64_t id, std::string cluster, std::string src = "the bank", std::string lemma = "bank") {
  MucowRecord r;
  r.id = id;
  r.lemma = std::move(lemma);
  r.cluster_id = std::move(cluster);
  r.subcorpus = "news";
  r.src = std::move(src);
  r.tgt = "t";
  r.ambiguous_token = "bank";
  return r;
}

std::vector<EvalLabel> labels_of(std::size_t pos, std::size_t neg, std::size_t unk) {
  std::vector<EvalLabel> v;
  v.insert(v.end(), pos, EvalLabel::kPos);
  v.insert(v.end(), neg, EvalLabel::kNeg);
  v.insert(v.end(), unk, EvalLabel::kUnk);
  return v;
}

}  // namespace

TEST_SUITE("wsd_eval") {
  TEST_CASE("sense sets") {
    auto s = lookup_sense_sets(rec(0, "1"), bank_inventory());
    CHECK(s.positive == LemmaSet{"Bank"});
    CHECK(s.negative == LemmaSet{"Ufer"});
    SenseInventory overlap({{{"w", "1"}, {"x", "y"}}, {{"w", "2"}, {"y", "z"}}});
    auto o = lookup_sense_sets(rec(0, "1", "w", "w"), overlap);
    CHECK(o.positive == LemmaSet{"x", "y"});
    CHECK(o.negative == LemmaSet{"z"});
    CHECK_THROWS_WITH_AS(lookup_sense_sets(rec(9, "3"), bank_inventory()), doctest::Contains("record 9"),
                         PreconditionError);
  }

  TEST_CASE("inventory invariants") {
    CHECK_THROWS_AS(SenseInventory({{{"w", "1"}, {"x"}}}), PreconditionError);
    CHECK_THROWS_AS(SenseInventory({{{"w", "1"}, {"x"}}, {{"w", "2"}, {}}}), PreconditionError);
    std::istringstream in("lemma\tcluster_id\ttargets\n# note\nbank\t1\tBank, Geldinstitut\nbank\t2\tUfer\nbank\t1\tKasse\n");
    auto inv = SenseInventory::load_tsv(in);
    CHECK(inv.cluster("bank", "1") == LemmaSet{"Bank", "Geldinstitut", "Kasse"});
    CHECK(inv.clusters_of("bank") == std::vector<std::string>{"1", "2"});
    std::istringstream bad("bank\t1\n");
    CHECK_THROWS_AS(SenseInventory::load_tsv(bad), ParseError);
  }

  TEST_CASE("classification cases") {
    CHECK(classify({"ich", "ging", "bank"}, {"bank"}, {"ufer"}) == EvalLabel::kPos);
    CHECK(classify({"bank", "ufer"}, {"bank"}, {"ufer"}) == EvalLabel::kNeg);
    CHECK(classify({}, {"bank"}, {"ufer"}) == EvalLabel::kUnk);
    CHECK_THROWS_WITH_AS(classify({"a"}, {"a"}, {"a"}), "inconsistent inventory", PreconditionError);
  }

  TEST_CASE("classification truth table over a three-lemma universe") {
    const std::vector<std::string> u = {"a", "b", "c"};
    auto subset = [&](unsigned m) {
      std::set<std::string> s;
      for (unsigned i = 0; i < 3; ++i)
        if (m & (1u << i)) s.insert(u[i]);
      return s;
    };
    for (unsigned p = 0; p < 8; ++p)
      for (unsigned n = 0; n < 8; ++n) {
        if (p & n) continue;
        for (unsigned s = 0; s < 8; ++s) {
          auto S = subset(s), P = subset(p), N = subset(n);
          auto want = oracle::classify(S, P, N);
          auto got = classify(LemmaSet(S.begin(), S.end()), LemmaSet(P.begin(), P.end()), LemmaSet(N.begin(), N.end()));
          CHECK(static_cast<int>(got) == static_cast<int>(want));
        }
      }
  }

  TEST_CASE("scores") {
    auto r = score(labels_of(3, 1, 1));
    CHECK(r.precision == 0.75);
    CHECK(r.recall == 0.6);
    CHECK(r.f1 == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK(r.f1 == 2 * 0.75 * 0.6 / 1.35);
    auto all = score(labels_of(4, 0, 0));
    CHECK(all.precision == 1.0);
    CHECK(all.recall == 1.0);
    CHECK(all.f1 == 1.0);
    auto none = score({});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);
    CHECK(score(labels_of(0, 0, 3)).f1 == 0.0);
  }

  TEST_CASE("metric invariants") {
    for (std::size_t pos = 0; pos < 12; ++pos)
      for (std::size_t neg = 0; neg < 12; ++neg)
        for (std::size_t unk = 0; unk < 12; ++unk) {
          auto r = report_from_counts(pos, neg, unk);
          auto o = oracle::prf(pos, neg, unk);
          CHECK(r.total() == pos + neg + unk);
          CHECK(r.precision == o.p);
          CHECK(r.recall == o.r);
          CHECK(r.f1 == doctest::Approx(o.f).epsilon(1e-15));
          CHECK(r.precision >= r.recall);
          if (unk == 0) CHECK(r.precision == r.recall);
          if (r.precision > 0 && r.recall > 0) {
            CHECK(r.f1 >= std::min(r.precision, r.recall) - 1e-15);
            CHECK(r.f1 <= std::max(r.precision, r.recall) + 1e-15);
          }
        }
  }

  TEST_CASE("evaluate a system") {
    std::vector<MucowRecord> records = {rec(0, "1"), rec(1, "2"), rec(2, "1"), rec(3, "2")};
    std::map<std::uint64_t, std::string> outputs = {
        {0, "Ich ging zur Bank."}, {1, "Am Ufern des Flusses"}, {2, "Keine Ahnung"}, {3, "Die Bank am Ufer"}};
    IdentityLemmatizer id;
    auto e = evaluate_system(outputs, records, bank_inventory(), id);
    CHECK(e.labels.at(0) == EvalLabel::kPos);
    CHECK(e.labels.at(1) == EvalLabel::kUnk);
    CHECK(e.labels.at(2) == EvalLabel::kUnk);
    CHECK(e.labels.at(3) == EvalLabel::kNeg);

    DictLemmatizer dict(std::unordered_map<std::string, std::string>{{"Ufern", "Ufer"}});
    auto d = evaluate_system(outputs, records, bank_inventory(), dict);
    CHECK(d.labels.at(1) == EvalLabel::kPos);
    CHECK(d.report.n_pos == 2);

    // record 1 under cluster 1: "Ufern" lemmatizes into the negative set
    std::vector<MucowRecord> neg = {rec(1, "1")};
    CHECK(evaluate_system({{1, "Ufern"}}, neg, bank_inventory(), dict).labels.at(1) == EvalLabel::kNeg);

    auto missing = outputs;
    missing.erase(2);
    missing[7] = "extra";
    try {
      evaluate_system(missing, records, bank_inventory(), id);
      FAIL("expected an alignment error");
    } catch (const PreconditionError& err) {
      std::string msg = err.what();
      CHECK(msg.find('2') != std::string::npos);
      CHECK(msg.find('7') != std::string::npos);
    }
  }

  TEST_CASE("evaluation is invariant to record order") {
    Rng rng(5);
    std::vector<MucowRecord> records;
    std::map<std::uint64_t, std::string> outputs;
    const char* outs[] = {"Bank", "Ufer", "nichts", "Bank Ufer"};
    for (std::uint64_t i = 0; i < 200; ++i) {
      records.push_back(rec(i, rng.below(2) ? "1" : "2"));
      outputs[i] = outs[rng.below(4)];
    }
    IdentityLemmatizer id;
    auto a = evaluate_system(outputs, records, bank_inventory(), id);
    rng.shuffle(std::span<MucowRecord>(records));
    auto b = evaluate_system(outputs, records, bank_inventory(), id);
    CHECK(a.report.f1 == b.report.f1);
    CHECK(a.labels == b.labels);
  }

  TEST_CASE("lemmatizers") {
    testutil::TempDir tmp;
    testutil::write_file(tmp / "lemmas.tsv", "Ufern\tUfer\nBanken\tBank\n");
    auto lem = make_lemmatizer("dict:" + (tmp / "lemmas.tsv"));
    CHECK(output_lemmas("Die Banken, am Ufern.", *lem) == LemmaSet{",", ".", "Bank", "Die", "Ufer", "am"});
    CHECK(output_lemmas("x y", *make_lemmatizer("identity")) == LemmaSet{"x", "y"});
    CHECK_THROWS_AS(make_lemmatizer("spacy"), UsageError);
    CHECK_THROWS(make_lemmatizer("dict:" + (tmp / "nope.tsv")));
  }

  TEST_CASE("sense frequencies") {
    std::vector<std::string> lines;
    for (int i = 0; i < 80; ++i) lines.push_back("Die Bank ist zu.");
    for (int i = 0; i < 20; ++i) lines.push_back("Am Ufer.");
    IdentityLemmatizer id;
    auto f = compute_sense_frequencies(lines, bank_inventory(), id);
    CHECK(f.at({"bank", "1"}).frequency == 0.8);
    CHECK(f.at({"bank", "2"}).frequency == 0.2);
    CHECK(f.at({"bank", "1"}).count == 80);

    std::vector<std::string> only = {"Bank"};
    auto one = compute_sense_frequencies(only, bank_inventory(), id);
    CHECK(one.at({"bank", "1"}).frequency == 1.0);
    CHECK(one.at({"bank", "2"}).frequency == 0.0);

    SenseInventory shared({{{"w", "1"}, {"x", "y"}}, {{"w", "2"}, {"y"}}, {{"v", "1"}, {"q"}}, {{"v", "2"}, {"r"}}});
    std::vector<std::string> warnings;
    std::vector<std::string> ys = {"y"};
    auto s = compute_sense_frequencies(ys, shared, id, &warnings);
    CHECK(s.at({"w", "1"}).count == 1);
    CHECK(s.at({"w", "2"}).count == 1);
    CHECK(s.at({"w", "1"}).frequency == 0.5);
    CHECK_FALSE(s.count({"v", "1"}));
    CHECK(warnings.size() == 1);
  }

  TEST_CASE("sense-frequency bins are left-closed") {
    CHECK(sense_frequency_bin(0.0, 0.2) == 0);
    CHECK(sense_frequency_bin(0.2, 0.2) == 1);
    CHECK(sense_frequency_bin(0.4, 0.2) == 2);
    CHECK(sense_frequency_bin(0.6, 0.2) == 3);
    CHECK(sense_frequency_bin(0.8, 0.2) == 4);
    CHECK(sense_frequency_bin(1.0, 0.2) == 4);
    CHECK(sense_frequency_bin(0.3999999, 0.2) == 1);
    CHECK(sense_frequency_bin(0.5, 0.25) == 2);
    CHECK_THROWS_AS(sense_frequency_bin(1.5, 0.2), PreconditionError);
  }

  TEST_CASE("sense-frequency table") {
    std::vector<MucowRecord> records = {rec(0, "1"), rec(1, "2"), rec(2, "2")};
    SenseFrequencies freqs = {{{"bank", "1"}, {8, 10, 0.8}}, {{"bank", "2"}, {2, 10, 0.2}}};
    SystemLabels sys = {{"base", {{0, EvalLabel::kPos}, {1, EvalLabel::kNeg}, {2, EvalLabel::kNeg}}},
                        {"ctx", {{0, EvalLabel::kPos}, {1, EvalLabel::kPos}, {2, EvalLabel::kNeg}}}};
    auto t = bin_by_sense_frequency(sys, records, freqs, "base");
    CHECK(t.bins == std::vector<std::string>{"0-20%", "20-40%", "40-60%", "60-80%", "80-100%"});
    REQUIRE(t.rows.size() == 10);
    const auto& ctx20 = t.rows[3];
    CHECK(ctx20.bin == "20-40%");
    CHECK(ctx20.system == "ctx");
    CHECK(ctx20.report.n_pos == 1);
    CHECK(ctx20.delta_f1 == 0.5);
    CHECK(ctx20.delta_pos == 1);
    CHECK(t.rows[0].report.total() == 0);
    CHECK(t.rows[0].report.f1 == 0.0);

    std::ostringstream out;
    write_binned_tsv(out, t);
    const std::string text = out.str();
    auto lines = split(text, '\n');
    CHECK(lines[0] == "bin\tsystem\tn_pos\tn_neg\tn_unk\tprecision\trecall\tf1\tdelta_f1\tdelta_pos");
    CHECK(lines[4] == "20-40%\tctx\t1\t1\t0\t0.5000\t0.5000\t0.5000\t+0.5000\t+1");

    SenseFrequencies partial = {{{"bank", "1"}, {8, 10, 0.8}}};
    CHECK_THROWS_AS(bin_by_sense_frequency(sys, records, partial, "base"), PreconditionError);
    CHECK_THROWS_AS(bin_by_sense_frequency(sys, records, freqs, "nobody"), PreconditionError);
  }

  TEST_CASE("length bins") {
    auto words = [](std::string_view s) { return split_whitespace(s).size(); };
    const double edges[] = {0, 10, 20, std::numeric_limits<double>::infinity()};
    std::vector<MucowRecord> records = {rec(0, "1", "a b c"), rec(1, "1", "a b c d e f g h i j"),
                                        rec(2, "1", std::string(60, 'x') + " y")};
    SystemLabels same = {{"base", {{0, EvalLabel::kPos}, {1, EvalLabel::kNeg}, {2, EvalLabel::kUnk}}}};
    same["sys"] = same["base"];
    auto t = bin_by_length(same, records, words, edges, "base");
    CHECK(t.bins == std::vector<std::string>{"[0,10)", "[10,20)", "[20,inf)"});
    for (const auto& row : t.rows) CHECK(row.delta_pos == 0);
    CHECK(t.rows[2].report.n_neg == 1);  // length 10 -> second bin

    auto plus = same;
    plus["sys"][1] = EvalLabel::kPos;
    auto p = bin_by_length(plus, records, words, edges, "base");
    for (const auto& row : p.rows)
      if (row.system == "sys") CHECK(row.delta_pos == (row.bin == "[10,20)" ? 1 : 0));

    const double narrow[] = {5, 10};
    CHECK_THROWS_AS(bin_by_length(same, records, words, narrow, "base"), PreconditionError);
  }

  TEST_CASE("labels jsonl round trip") {
    LabelMap labels = {{3, EvalLabel::kPos}, {1, EvalLabel::kUnk}, {2, EvalLabel::kNeg}};
    std::ostringstream out;
    write_labels_jsonl(out, labels);
    CHECK(out.str() == "{\"id\":1,\"label\":\"UNK\"}\n{\"id\":2,\"label\":\"NEG\"}\n{\"id\":3,\"label\":\"POS\"}\n");
    std::istringstream in(out.str());
    CHECK(read_labels_jsonl(in) == labels);
    std::istringstream bad("{\"id\":1,\"label\":\"MAYBE\"}\n");
    CHECK_THROWS_WITH_AS(read_labels_jsonl(bad), doctest::Contains("line 1"), ParseError);
  }
}

TEST_SUITE("significance") {
  TEST_CASE("identical systems are never significant") {
    Rng rng(2);
    std::vector<EvalLabel> a(150);
    for (auto& l : a) l = static_cast<EvalLabel>(rng.below(3));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto r = paired_bootstrap(a, a, 500, seed);
      CHECK(r.f1.mean_delta == 0.0);
      CHECK(r.f1.p_value >= 0.05);
      CHECK(r.precision.p_value >= 0.05);
    }
  }

  TEST_CASE("dominating system") {
    std::vector<EvalLabel> pos(100, EvalLabel::kPos), neg(100, EvalLabel::kNeg);
    auto r = paired_bootstrap(pos, neg, 5000, 1);
    CHECK(r.f1.p_value < 0.001);
    CHECK(r.f1.mean_delta == 1.0);
    auto back = paired_bootstrap(neg, pos, 1000, 1);
    CHECK(back.f1.p_value == 1.0);
    auto t = resampled_ttest(pos, neg, 50, 750, 1);
    CHECK(t.f1.p_value < 0.001);
  }

  TEST_CASE("bootstrap is deterministic and independent of jobs") {
    Rng rng(6);
    std::vector<EvalLabel> a(300), b(300);
    for (auto& l : a) l = static_cast<EvalLabel>(rng.below(3));
    for (auto& l : b) l = static_cast<EvalLabel>(rng.below(3));
    auto r1 = paired_bootstrap(a, b, 2000, 9, 1);
    auto r2 = paired_bootstrap(a, b, 2000, 9, 6);
    CHECK(r1.f1.p_value == r2.f1.p_value);
    CHECK(r1.f1.mean_delta == r2.f1.mean_delta);
    CHECK(r1.recall.p_value == r2.recall.p_value);
    auto r3 = paired_bootstrap(a, b, 2000, 10, 1);
    CHECK(r3.trials == 2000);
    CHECK(resampled_ttest(a, b, 50, 750, 3).f1.p_value == resampled_ttest(a, b, 50, 750, 3).f1.p_value);
  }

  TEST_CASE("bootstrap p-value matches a direct recount") {
    // With a single example every resample repeats it; A wins every trial.
    std::vector<EvalLabel> a = {EvalLabel::kPos}, b = {EvalLabel::kUnk};
    CHECK(paired_bootstrap(a, b, 100, 0).recall.p_value == 0.0);
    CHECK(paired_bootstrap(a, b, 100, 0).recall.mean_delta == 1.0);
    // precision of UNK-only is 0 by the zero-denominator rule
    CHECK(paired_bootstrap(a, b, 100, 0).precision.mean_delta == 1.0);
  }

  TEST_CASE("preconditions") {
    std::vector<EvalLabel> a(3, EvalLabel::kPos), b(2, EvalLabel::kPos);
    CHECK_THROWS_AS(paired_bootstrap(a, b), PreconditionError);
    CHECK_THROWS_AS(paired_bootstrap({}, {}), PreconditionError);
    CHECK_THROWS_AS(resampled_ttest(a, a, 1, 10), PreconditionError);
    LabelMap x = {{1, EvalLabel::kPos}}, y = {{2, EvalLabel::kPos}};
    CHECK_THROWS_AS(align_labels(x, y), PreconditionError);
  }
}
