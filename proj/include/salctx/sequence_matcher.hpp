#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace salctx {

struct MatchingBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;
};

// Ratcliff/Obershelp matching over Unicode code points, following Python's
// difflib.SequenceMatcher(None, a, b) including its autojunk heuristic for
// sequences of 200+ elements. The result excludes the terminating dummy block.
std::vector<MatchingBlock> matching_blocks(std::u32string_view a, std::u32string_view b);

// 2*M / (|a| + |b|) with M the total size of matching blocks; 1.0 when both
// strings are empty. Not symmetric in rare cases, like difflib.
double sequence_match_ratio(std::string_view a, std::string_view b);

}  // namespace salctx
