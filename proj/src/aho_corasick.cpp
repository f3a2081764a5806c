#include "salctx/aho_corasick.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace salctx {

MultiPatternMatcher::MultiPatternMatcher() : nodes_(1), pending_(1), root_(256, 0) {}

std::uint32_t MultiPatternMatcher::add(std::string_view pattern) {
  if (built_) throw std::logic_error("MultiPatternMatcher::add after build");
  if (pattern.empty()) throw std::invalid_argument("empty pattern");
  std::int32_t state = 0;
  for (char ch : pattern) {
    auto byte = static_cast<unsigned char>(ch);
    auto& edges = pending_[state];
    auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.byte == byte; });
    if (it != edges.end()) {
      state = it->target;
      continue;
    }
    auto next = static_cast<std::int32_t>(nodes_.size());
    edges.push_back({byte, next});
    nodes_.emplace_back();
    pending_.emplace_back();
    state = next;
  }
  Node& node = nodes_[state];
  if (!node.terminal) {
    node.terminal = true;
    node.pattern = static_cast<std::uint32_t>(pattern_len_.size());
    pattern_len_.push_back(pattern.size());
  }
  return node.pattern;
}

std::int32_t MultiPatternMatcher::child(std::int32_t state, unsigned char byte) const {
  const Node& n = nodes_[state];
  auto first = edges_.begin() + n.edge_begin, last = edges_.begin() + n.edge_end;
  auto it = std::lower_bound(first, last, byte, [](const Edge& e, unsigned char b) { return e.byte < b; });
  return (it != last && it->byte == byte) ? it->target : -1;
}

void MultiPatternMatcher::build() {
  if (built_) return;
  // Flatten edges into sorted per-node ranges.
  for (std::size_t s = 0; s < nodes_.size(); ++s) {
    auto& edges = pending_[s];
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.byte < b.byte; });
    nodes_[s].edge_begin = static_cast<std::uint32_t>(edges_.size());
    edges_.insert(edges_.end(), edges.begin(), edges.end());
    nodes_[s].edge_end = static_cast<std::uint32_t>(edges_.size());
  }
  pending_.clear();
  pending_.shrink_to_fit();

  for (const Edge& e : std::vector<Edge>(edges_.begin() + nodes_[0].edge_begin, edges_.begin() + nodes_[0].edge_end))
    root_[e.byte] = e.target;

  std::queue<std::int32_t> bfs;
  for (std::uint32_t i = nodes_[0].edge_begin; i < nodes_[0].edge_end; ++i) {
    std::int32_t t = edges_[i].target;
    nodes_[t].fail = 0;
    nodes_[t].output = 0;
    bfs.push(t);
  }
  while (!bfs.empty()) {
    std::int32_t s = bfs.front();
    bfs.pop();
    for (std::uint32_t i = nodes_[s].edge_begin; i < nodes_[s].edge_end; ++i) {
      auto [byte, t] = edges_[i];
      std::int32_t f = nodes_[s].fail;
      std::int32_t target = 0;
      while (true) {
        std::int32_t next = f == 0 ? root_[byte] : child(f, byte);
        if (next >= 0 && next != t) {
          target = next;
          break;
        }
        if (f == 0) break;
        f = nodes_[f].fail;
      }
      nodes_[t].fail = target;
      nodes_[t].output = nodes_[target].terminal ? target : nodes_[target].output;
      bfs.push(t);
    }
  }
  built_ = true;
}

}  // namespace salctx
