#include "salctx/sequence_matcher.hpp"

#include <algorithm>
#include <string>
#include <tuple>
#include <unordered_map>

#include "salctx/text.hpp"

namespace salctx {
namespace {

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) out.push_back(decode_utf8(s, i));
  return out;
}

class Matcher {
 public:
  Matcher(std::u32string_view a, std::u32string_view b) : a_(a), b_(b) {
    for (std::size_t j = 0; j < b_.size(); ++j) b2j_[b_[j]].push_back(j);
    if (b_.size() >= 200) {
      std::size_t ntest = b_.size() / 100 + 1;
      std::erase_if(b2j_, [&](const auto& kv) { return kv.second.size() > ntest; });
    }
  }

  MatchingBlock longest(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) const {
    MatchingBlock best{alo, blo, 0};
    std::unordered_map<std::size_t, std::size_t> j2len, next;
    for (std::size_t i = alo; i < ahi; ++i) {
      next.clear();
      auto it = b2j_.find(a_[i]);
      if (it != b2j_.end()) {
        for (std::size_t j : it->second) {
          if (j < blo) continue;
          if (j >= bhi) break;
          std::size_t k = 1;
          if (j > 0) {
            auto prev = j2len.find(j - 1);
            if (prev != j2len.end()) k = prev->second + 1;
          }
          next[j] = k;
          if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
        }
      }
      std::swap(j2len, next);
    }
    // Popular elements were removed from b2j_; like difflib, extend the match
    // across equal neighbours (no element is junk here).
    while (best.a > alo && best.b > blo && a_[best.a - 1] == b_[best.b - 1]) {
      --best.a, --best.b, ++best.size;
    }
    while (best.a + best.size < ahi && best.b + best.size < bhi &&
           a_[best.a + best.size] == b_[best.b + best.size]) {
      ++best.size;
    }
    return best;
  }

  std::vector<MatchingBlock> blocks() const {
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> queue{{0, a_.size(), 0, b_.size()}};
    std::vector<MatchingBlock> found;
    while (!queue.empty()) {
      auto [alo, ahi, blo, bhi] = queue.back();
      queue.pop_back();
      MatchingBlock m = longest(alo, ahi, blo, bhi);
      if (m.size == 0) continue;
      found.push_back(m);
      if (alo < m.a && blo < m.b) queue.emplace_back(alo, m.a, blo, m.b);
      if (m.a + m.size < ahi && m.b + m.size < bhi) queue.emplace_back(m.a + m.size, ahi, m.b + m.size, bhi);
    }
    std::sort(found.begin(), found.end(),
              [](const MatchingBlock& x, const MatchingBlock& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    // Collapse adjacent blocks.
    std::vector<MatchingBlock> merged;
    for (const auto& m : found) {
      if (!merged.empty() && merged.back().a + merged.back().size == m.a && merged.back().b + merged.back().size == m.b)
        merged.back().size += m.size;
      else
        merged.push_back(m);
    }
    return merged;
  }

 private:
  std::u32string_view a_;
  std::u32string_view b_;
  std::unordered_map<char32_t, std::vector<std::size_t>> b2j_;
};

}  // namespace

std::vector<MatchingBlock> matching_blocks(std::u32string_view a, std::u32string_view b) {
  return Matcher(a, b).blocks();
}

double sequence_match_ratio(std::string_view a, std::string_view b) {
  std::u32string ua = decode(a), ub = decode(b);
  std::size_t total = ua.size() + ub.size();
  if (total == 0) return 1.0;
  std::size_t matches = 0;
  for (const auto& m : matching_blocks(ua, ub)) matches += m.size;
  return 2.0 * static_cast<double>(matches) / static_cast<double>(total);
}

}  // namespace salctx
