#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace salctx {

// Byte-level Aho-Corasick automaton. Identical patterns share one id.
class MultiPatternMatcher {
 public:
  MultiPatternMatcher();

  // Returns the pattern id; empty patterns are rejected with
  // std::invalid_argument. Must be called before build().
  std::uint32_t add(std::string_view pattern);
  void build();

  std::size_t pattern_count() const { return pattern_len_.size(); }
  std::size_t state_count() const { return nodes_.size(); }

  // Calls on_match(pattern_id, end_offset) for every occurrence, end_offset
  // being one past the last matched byte.
  template <typename OnMatch>
  void scan(std::string_view text, OnMatch&& on_match) const {
    std::int32_t state = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      state = step(state, static_cast<unsigned char>(text[i]));
      for (std::int32_t s = nodes_[state].terminal ? state : nodes_[state].output; s > 0; s = nodes_[s].output)
        on_match(nodes_[s].pattern, i + 1);
    }
  }

 private:
  struct Node {
    std::uint32_t edge_begin = 0;  // into edges_ after build()
    std::uint32_t edge_end = 0;
    std::int32_t fail = 0;
    std::int32_t output = 0;  // nearest terminal state on the fail chain; 0 = none
    std::uint32_t pattern = 0;
    bool terminal = false;
  };
  struct Edge {
    unsigned char byte;
    std::int32_t target;
  };

  std::int32_t child(std::int32_t state, unsigned char byte) const;
  std::int32_t step(std::int32_t state, unsigned char byte) const {
    if (state == 0) return root_[byte];
    while (true) {
      std::int32_t next = child(state, byte);
      if (next >= 0) return next;
      if (state == 0) return 0;
      state = nodes_[state].fail;
      if (state == 0) return root_[byte];
    }
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Edge>> pending_;  // per-node edges while building
  std::vector<std::int32_t> root_;          // dense root transitions
  std::vector<std::size_t> pattern_len_;
  bool built_ = false;
};

}  // namespace salctx
