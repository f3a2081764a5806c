#include <doctest.h>

#include <cmath>
#include <sstream>

#include "salctx/cxmi.hpp"
#include "salctx/error.hpp"
#include "salctx/rng.hpp"

using namespace salctx;

namespace {

std::vector<ScoredExample> parse(const std::string& text, double base = 0.0, std::vector<std::string>* w = nullptr) {
  std::istringstream in(text);
  return parse_scores(in, base, w);
}

std::vector<ScoredExample> random_scores(Rng& rng, std::size_t n) {
  std::vector<ScoredExample> out;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back({i, -static_cast<double>(rng.below(1000000)) / 10000.0});
  return out;
}

}  // namespace

TEST_SUITE("cxmi") {
  TEST_CASE("parsing") {
    auto s = parse("{\"id\": 2, \"logprob\": -1.5}\n\n{\"id\": 0, \"logprob\": 0}\n");
    REQUIRE(s.size() == 2);
    CHECK(s[0].id == 2);
    CHECK(s[0].logprob == -1.5);
    CHECK_THROWS_WITH_AS(parse("{\"id\": 1, \"logprob\": \"x\"}\n"), doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_AS(parse("{\"id\": 1, \"logprob\": -1}\n{\"id\": 1, \"logprob\": -2}\n"), ParseError);
    CHECK_THROWS_AS(parse("{\"id\": -1, \"logprob\": -1}\n"), ParseError);
    CHECK_THROWS_AS(parse("not json\n"), ParseError);
  }

  TEST_CASE("small positive values are clamped") {
    std::vector<std::string> warnings;
    auto s = parse("{\"id\": 0, \"logprob\": 5e-7}\n", 0.0, &warnings);
    CHECK(s[0].logprob == 0.0);
    CHECK(warnings.size() == 1);
    CHECK_THROWS_AS(parse("{\"id\": 0, \"logprob\": 0.01}\n"), ParseError);
  }

  TEST_CASE("worked values") {
    std::vector<ScoredExample> base = {{0, -2.0}, {1, -1.0}};
    std::vector<ScoredExample> ctx = {{0, -1.0}, {1, -1.0}};
    auto r = compute_cxmi(base, ctx);
    CHECK(r.value == 0.5);
    CHECK(r.n == 2);
    CHECK(compute_cxmi(ctx, base).value == -0.5);
    std::vector<ScoredExample> one_b = {{4, -0.5}}, one_c = {{4, -1.5}};
    CHECK(compute_cxmi(one_b, one_c).value == -1.0);
    CHECK(compute_cxmi(base, base).value == 0.0);
  }

  TEST_CASE("antisymmetry, shift invariance and order invariance") {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
      auto a = random_scores(rng, 1 + rng.below(200));
      auto b = random_scores(rng, a.size());
      double ab = compute_cxmi(a, b).value;
      CHECK(std::abs(ab + compute_cxmi(b, a).value) <= 1e-12);
      auto a2 = a, b2 = b;
      for (auto& s : a2) s.logprob -= 3.0;
      for (auto& s : b2) s.logprob -= 3.0;
      CHECK(std::abs(ab - compute_cxmi(a2, b2).value) <= 1e-12);
      rng.shuffle(std::span<ScoredExample>(b));
      CHECK(compute_cxmi(a, b).value == ab);
    }
  }

  TEST_CASE("id mismatch and empty input") {
    std::vector<ScoredExample> a = {{0, -1}, {1, -1}}, b = {{0, -1}, {2, -1}};
    CHECK_THROWS_WITH_AS(compute_cxmi(a, b), doctest::Contains("[1,2]"), PreconditionError);
    CHECK_THROWS_AS(compute_cxmi({}, {}), PreconditionError);
  }

  TEST_CASE("log bases") {
    CHECK(parse_log_base("e") == 0.0);
    CHECK(parse_log_base("2") == 2.0);
    CHECK_THROWS_AS(parse_log_base("1"), UsageError);
    CHECK_THROWS_AS(parse_log_base("ten"), UsageError);
    auto s = parse("{\"id\": 0, \"logprob\": -1}\n", 2.0);
    CHECK(s[0].logprob == doctest::Approx(-std::log(2.0)));
    auto d = parse("{\"id\": 0, \"logprob\": -2}\n", 10.0);
    CHECK(d[0].logprob == doctest::Approx(-2 * std::log(10.0)));
  }
}
