#pragma once

// Rule-based stand-in translator. Ambiguous source words are rendered by the
// sense whose cue words appear in the example's prefix; everything else is
// copied. Used to drive the evaluation pipeline end to end.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "salctx/contextualize.hpp"

namespace salctx {

struct MockSense {
  std::string cluster_id;
  std::string target;
  std::vector<std::string> cues;  // lowercase
};

struct MockLexicon {
  // Lowercase source word -> senses; the first sense is the default.
  std::map<std::string, std::vector<MockSense>> entries;

  // Throws PreconditionError on fewer than two senses or overlapping cues.
  void validate() const;
  // JSONL: {"word": ..., "senses": [{"cluster_id": ..., "target": ..., "cues": [...]}]}
  static MockLexicon load_jsonl(std::istream& in);
};

enum class MockMode { kContextAware, kContextAgnostic };

MockMode parse_mock_mode(const std::string& name);

// Output tokens are the case-preserved source tokens joined by single spaces.
std::string mock_translate(const ContextualizedExample& example, const MockLexicon& lexicon, MockMode mode);

}  // namespace salctx
