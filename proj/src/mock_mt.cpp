#include "salctx/mock_mt.hpp"

#include <istream>
#include <set>

#include <nlohmann/json.hpp>

#include "salctx/error.hpp"
#include "salctx/text.hpp"

namespace salctx {

void MockLexicon::validate() const {
  for (const auto& [word, senses] : entries) {
    if (senses.size() < 2) throw PreconditionError("mock lexicon word '" + word + "' needs at least two senses");
    std::set<std::string> cues;
    for (const auto& s : senses)
      for (const auto& c : s.cues)
        if (!cues.insert(c).second) throw PreconditionError("cue '" + c + "' shared by senses of '" + word + "'");
  }
}

MockLexicon MockLexicon::load_jsonl(std::istream& in) {
  MockLexicon lex;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::vector<MockSense> senses;
      for (const auto& s : j.at("senses")) {
        MockSense sense;
        sense.cluster_id = s.at("cluster_id").is_string() ? s.at("cluster_id").get<std::string>()
                                                          : s.at("cluster_id").dump();
        sense.target = s.at("target").get<std::string>();
        for (const auto& c : s.value("cues", std::vector<std::string>{})) sense.cues.push_back(to_lower(c));
        senses.push_back(std::move(sense));
      }
      std::string word = to_lower(j.at("word").get<std::string>());
      if (!lex.entries.emplace(word, std::move(senses)).second)
        throw ParseError("duplicate lexicon word '" + word + "'", n);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad lexicon entry: ") + e.what(), n);
    }
  }
  lex.validate();
  return lex;
}

MockMode parse_mock_mode(const std::string& name) {
  if (name == "context_aware" || name == "context-aware") return MockMode::kContextAware;
  if (name == "context_agnostic" || name == "context-agnostic") return MockMode::kContextAgnostic;
  throw UsageError("unknown mock mode '" + name + "'");
}

std::string mock_translate(const ContextualizedExample& example, const MockLexicon& lexicon, MockMode mode) {
  std::set<std::string> prefix;
  if (mode == MockMode::kContextAware)
    for (const auto& w : example.prefix) prefix.insert(to_lower(w));

  std::vector<std::string> out;
  for (auto& tok : tokenize(example.src, false)) {
    auto it = lexicon.entries.find(to_lower(tok));
    if (it == lexicon.entries.end()) {
      out.push_back(std::move(tok));
      continue;
    }
    const MockSense* chosen = &it->second.front();
    for (const auto& sense : it->second) {
      bool cued = false;
      for (const auto& c : sense.cues)
        if (prefix.count(c)) cued = true;
      if (cued) {
        chosen = &sense;
        break;
      }
    }
    out.push_back(chosen->target);
  }
  return join(out, " ");
}

}  // namespace salctx
