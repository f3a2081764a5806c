#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "salctx/contextualize.hpp"
#include "salctx/error.hpp"
#include "salctx/rng.hpp"

using namespace salctx;
using Tokens = std::vector<std::string>;

namespace {

BitextPair pair_of(PairId id, std::string src, std::string tgt = "T") {
  BitextPair p;
  p.id = id;
  p.src = std::move(src);
  p.tgt = std::move(tgt);
  return p;
}

KeywordList kws(const Tokens& words) {
  KeywordList out;
  double s = 1.0;
  for (const auto& w : words) out.push_back({w, s -= 0.1});
  return out;
}

}  // namespace

TEST_SUITE("contextualize") {
  TEST_CASE("salient prefix rendering") {
    auto ex = build_salient_prefix(pair_of(0, "I went to the bank after lunch."),
                                   kws({"finance", "money", "vault", "checking", "deposit"}), "<SEP>");
    CHECK(ex.render() == "finance money vault checking deposit <SEP> I went to the bank after lunch.");
    CHECK(ex.tgt == "T");
    CHECK(ex.variant == Variant::kTfidf);
    CHECK(build_salient_prefix(pair_of(1, "y"), kws({"x"}), "<SEP>").render() == "x <SEP> y");
    CHECK(build_salient_prefix(pair_of(1, "y"), kws({"x"}), "⟨SEP⟩", Variant::kYake).render() == "x ⟨SEP⟩ y");
  }

  TEST_CASE("salient prefix preconditions") {
    CHECK_THROWS_AS(build_salient_prefix(pair_of(0, "a <SEP> b"), kws({"x"}), "<SEP>"), PreconditionError);
    CHECK_THROWS_AS(build_salient_prefix(pair_of(0, "a"), {}, "<SEP>"), PreconditionError);
    CHECK_THROWS_AS(build_salient_prefix(pair_of(0, "a"), kws({"x"}), ""), PreconditionError);
    CHECK_THROWS_AS(build_salient_prefix(pair_of(0, "a"), kws({"x<SEP>"}), "<SEP>"), PreconditionError);
    // "a b" joined with a space would spell the separator
    CHECK_THROWS_AS(build_salient_prefix(pair_of(0, "z"), kws({"a", "b"}), "a b"), PreconditionError);
    CHECK_THROWS_AS(build_salient_prefix(pair_of(0, "z"), kws({"a"}), "<SEP>", Variant::kSent), PreconditionError);
  }

  TEST_CASE("shuffled prefix") {
    auto p = pair_of(17, "src");
    auto words = kws({"a", "b", "c", "d", "e"});
    auto plain = build_salient_prefix(p, words, "<SEP>");
    auto s1 = build_shuffled_prefix(p, words, "<SEP>", 3);
    auto s2 = build_shuffled_prefix(p, words, "<SEP>", 3);
    CHECK(s1.prefix == s2.prefix);
    CHECK(s1.shuffled);
    auto a = s1.prefix, b = plain.prefix;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    auto single = build_shuffled_prefix(p, kws({"x"}), "<SEP>", 3);
    CHECK(single.render() == build_salient_prefix(p, kws({"x"}), "<SEP>").render());
  }

  TEST_CASE("shuffles of three keywords are roughly uniform") {
    std::map<Tokens, int> counts;
    const int n = 6000;
    for (PairId id = 0; id < n; ++id) counts[build_shuffled_prefix(pair_of(id, "s"), kws({"a", "b", "c"}), "<SEP>", 1).prefix]++;
    REQUIRE(counts.size() == 6);
    double chi2 = 0;
    for (const auto& [perm, c] : counts) chi2 += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
    // 5 degrees of freedom, p = 0.001 critical value
    CHECK(chi2 < 20.515);
  }

  TEST_CASE("2sent prefix") {
    std::vector<BitextPair> pairs = {pair_of(0, "first one"), pair_of(1, "second"), pair_of(2, "third here"),
                                     pair_of(3, "alone")};
    PseudoDocument doc{"d", {0, 1, 2}};
    PseudoDocument pair_doc{"p", {0, 1}};
    PseudoDocument single{"s", {3}};
    Corpus corpus(pairs, {doc, single});

    auto two = build_2sent_prefix(pairs[0], pair_doc, corpus, "<SEP>", 1);
    CHECK(two.render() == "second <SEP> first one");
    CHECK(two.context_id == PairId{1});
    CHECK(two.variant == Variant::kTwoSent);
    CHECK(two.tgt == "T");

    std::map<PairId, int> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto ex = build_2sent_prefix(pairs[1], doc, corpus, "<SEP>", seed);
      REQUIRE(ex.context_id.has_value());
      CHECK(*ex.context_id != 1);
      seen[*ex.context_id]++;
      CHECK(ex.render() == build_2sent_prefix(pairs[1], doc, corpus, "<SEP>", seed).render());
    }
    CHECK(seen.size() == 2);
    CHECK_THROWS_WITH_AS(build_2sent_prefix(pairs[3], single, corpus, "<SEP>", 1),
                         doctest::Contains("no context sentence available"), PreconditionError);
    CHECK_THROWS_AS(build_2sent_prefix(pairs[3], doc, corpus, "<SEP>", 1), PreconditionError);
  }

  TEST_CASE("sent passes the source through") {
    auto ex = build_sent(pair_of(4, "Hello there.", "Hallo."));
    CHECK(ex.render() == "Hello there.");
    CHECK(ex.variant == Variant::kSent);
    CHECK(ex.prefix.empty());
    CHECK_FALSE(ex.sep.has_value());
    CHECK(ex.tgt == "Hallo.");
  }

  TEST_CASE("split on separator") {
    CHECK(split_on_sep("a b <SEP> Hallo Welt", "<SEP>") == "Hallo Welt");
    CHECK(split_on_sep("Hallo Welt", "<SEP>") == "Hallo Welt");
    CHECK(split_on_sep("x <SEP> y <SEP> z", "<SEP>") == "y <SEP> z");
    CHECK(split_on_sep("x <SEP> \t y", "<SEP>") == "y");
    CHECK(split_on_sep("x <SEP>", "<SEP>") == "");
  }

  TEST_CASE("round trip on random inputs") {
    Rng rng(10);
    const std::string chars[] = {"a", "Z", "ö", " ", ".", "<", ">", "S", "-"};
    for (int t = 0; t < 2000; ++t) {
      std::string src;
      for (std::size_t i = 0, n = 1 + rng.below(20); i < n; ++i) src += chars[rng.below(9)];
      auto trimmed = std::string(src.substr(src.find_first_not_of(' ') == std::string::npos ? src.size() : src.find_first_not_of(' ')));
      while (!trimmed.empty() && trimmed.back() == ' ') trimmed.pop_back();
      if (trimmed.empty() || trimmed.find("<SEP>") != std::string::npos) continue;
      Tokens words;
      for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i) words.push_back("w" + std::to_string(rng.below(50)));
      auto ex = build_salient_prefix(pair_of(static_cast<PairId>(t), trimmed), kws(words), "<SEP>");
      CHECK(split_on_sep(ex.render(), "<SEP>") == trimmed);
    }
  }

  TEST_CASE("example jsonl round trip") {
    auto ex = build_shuffled_prefix(pair_of(5, "s \"q\"", "t"), kws({"a", "b"}), "<SEP>", 2);
    ex.doc_key = "a.com/x";
    std::ostringstream out;
    write_example_jsonl(out, ex);
    std::istringstream in(out.str());
    auto back = read_examples_jsonl(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == 5);
    CHECK(back[0].prefix == ex.prefix);
    CHECK(back[0].render() == ex.render());
    CHECK(back[0].shuffled);
    CHECK(back[0].doc_key == "a.com/x");

    std::ostringstream meta;
    write_example_jsonl(meta, build_sent(pair_of(6, "x")), false);
    CHECK(meta.str() == "{\"id\":6,\"doc_key\":\"\",\"variant\":\"sent\",\"shuffled\":false,\"prefix\":[],\"sep\":null}\n");
    std::istringstream bad("{\"id\": 1}\n");
    CHECK_THROWS_AS(read_examples_jsonl(bad), ParseError);
  }

  TEST_CASE("variant names") {
    for (Variant v : {Variant::kSent, Variant::kTwoSent, Variant::kTfidf, Variant::kYake})
      CHECK(parse_variant(variant_name(v)) == v);
    CHECK_THROWS_AS(parse_variant("3sent"), UsageError);
  }
}
