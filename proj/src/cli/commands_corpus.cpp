#include <algorithm>
#include <map>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "salctx/contextualize.hpp"
#include "salctx/corpus_ingest.hpp"
#include "salctx/error.hpp"
#include "salctx/mock_mt.hpp"
#include "salctx/parallel.hpp"
#include "salctx/rng.hpp"
#include "salctx/saliency.hpp"
#include "salctx/text.hpp"
#include "stage.hpp"

namespace salctx::cli {
namespace {

Corpus load_corpus(StageContext& ctx, const std::string& path) {
  auto in = ctx.open_input(path);
  return read_pseudodocs_jsonl(in);
}

std::vector<TokenizedDoc> tokenize_docs(const Corpus& corpus, std::span<const std::size_t> which, bool keep_punct,
                                        unsigned jobs) {
  std::vector<TokenizedDoc> out(which.size());
  parallel_chunks(which.size(), jobs, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      auto sents = corpus.source_sentences(corpus.docs()[which[i]]);
      out[i] = TokenizedDoc::from_sentences(sents, !keep_punct);
    }
  });
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// keywords JSONL -> doc_key -> ranked words
std::map<std::string, KeywordList, std::less<>> read_keywords(std::istream& in) {
  std::map<std::string, KeywordList, std::less<>> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      KeywordList kws;
      for (const auto& k : j.at("keywords")) kws.push_back({k.at("word").get<std::string>(), k.value("score", 0.0)});
      auto key = j.at("doc_key").get<std::string>();
      if (!out.emplace(key, std::move(kws)).second) throw ParseError("duplicate doc_key " + key, n);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad keyword record: ") + e.what(), n);
    }
  }
  return out;
}

void add_ingest(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("ingest", "Parse bitext, filter by similarity, group into pseudo-documents");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string in, out, format = "tsv", on_error = "abort";
    double min_sim = 0.85;
    std::size_t min_len = 2, max_len = 10;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--in", o->in, "Bitext file (TSV or JSONL)")->required();
  sub->add_option("--out", o->out, "Pseudo-document JSONL (stdout if omitted)");
  sub->add_option("--format", o->format, "Input format")->check(CLI::IsMember({"tsv", "jsonl"}))->capture_default_str();
  sub->add_option("--min-sim", o->min_sim, "Keep pairs with similarity strictly above this")->capture_default_str();
  sub->add_option("--min-len", o->min_len, "Minimum sentences per document")->capture_default_str();
  sub->add_option("--max-len", o->max_len, "Maximum sentences per document")->capture_default_str();
  sub->add_option("--on-error", o->on_error, "Malformed records: abort or skip")
      ->check(CLI::IsMember({"abort", "skip"}))
      ->capture_default_str();
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      IngestOptions opts;
                      opts.format = o->format == "jsonl" ? InputFormat::kJsonl : InputFormat::kTsv;
                      opts.on_error = o->on_error == "skip" ? OnError::kSkip : OnError::kAbort;
                      opts.min_similarity = o->min_sim;
                      opts.min_len = o->min_len;
                      opts.max_len = o->max_len;
                      opts.jobs = settings->jobs;
                      if (opts.min_len > opts.max_len) throw UsageError("--min-len exceeds --max-len");
                      auto in = ctx.open_input(o->in);
                      IngestStats stats;
                      Corpus corpus = ingest(in, opts, &stats);
                      if (stats.skipped) ctx.warn(fmt::format("skipped {} malformed records", stats.skipped));
                      ctx.info(fmt::format("{} pairs parsed, {} above similarity, {} of {} documents kept ({} sentences)",
                                           stats.parsed, stats.after_similarity, stats.docs,
                                           stats.docs_before_length, stats.sentences));
                      write_pseudodocs_jsonl(ctx.open_output(o->out), corpus);
                    }});
}

void add_fit_tfidf(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("fit-tfidf", "Fit document frequencies over a sample of pseudo-documents");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string docs, out;
    std::size_t sample = 0;
    bool keep_punct = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--docs", o->docs, "Pseudo-document JSONL")->required();
  sub->add_option("--out", o->out, "Model JSONL (stdout if omitted)");
  sub->add_option("--sample", o->sample, "Documents to sample without replacement (0 = all)")->capture_default_str();
  sub->add_flag("--keep-punct", o->keep_punct, "Keep punctuation-only tokens");
  add_run_settings(sub, settings, true);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      Corpus corpus = load_corpus(ctx, o->docs);
                      auto idx = all_indices(corpus.docs().size());
                      if (o->sample > 0 && o->sample < idx.size()) {
                        // Partial Fisher-Yates; the chosen prefix is sorted so
                        // tokenization order does not depend on the draw.
                        Rng rng(settings->seed);
                        for (std::size_t i = 0; i < o->sample; ++i) {
                          std::size_t j = i + rng.below(idx.size() - i);
                          std::swap(idx[i], idx[j]);
                        }
                        idx.resize(o->sample);
                        std::sort(idx.begin(), idx.end());
                      }
                      auto docs = tokenize_docs(corpus, idx, o->keep_punct, settings->jobs);
                      auto model = TfidfModel::fit(docs, settings->jobs);
                      ctx.info(fmt::format("{} documents, {} types", model.num_docs(), model.df_map().size()));
                      model.save(ctx.open_output(o->out));
                    }});
}

void add_extract(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("extract", "Extract the top-k salient words of each pseudo-document");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string docs, out, fn = "tfidf", model, stoplist;
    std::size_t k = 10, window = 1;
    std::optional<double> dedup_ratio;
    bool keep_punct = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--docs", o->docs, "Pseudo-document JSONL")->required();
  sub->add_option("--out", o->out, "Keyword JSONL (stdout if omitted)");
  sub->add_option("--fn", o->fn, "Saliency function")->check(CLI::IsMember({"tfidf", "yake"}))->capture_default_str();
  sub->add_option("--model", o->model, "Model from fit-tfidf (tfidf; default: fit on --docs)");
  sub->add_option("--k", o->k, "Keywords per document")->capture_default_str();
  sub->add_option("--dedup-ratio", o->dedup_ratio,
                  "Drop keywords this similar to a better one (yake default 0.9; tfidf off unless given)");
  sub->add_option("--window", o->window, "Co-occurrence window (yake)")->capture_default_str();
  sub->add_option("--stoplist", o->stoplist, "Stopword file, one per line (yake)");
  sub->add_flag("--keep-punct", o->keep_punct, "Keep punctuation-only tokens");
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      if (o->k == 0) throw UsageError("--k must be positive");
                      if (o->dedup_ratio && (*o->dedup_ratio <= 0.0 || *o->dedup_ratio > 1.0))
                        throw UsageError("--dedup-ratio must lie in (0, 1]");
                      Corpus corpus = load_corpus(ctx, o->docs);
                      auto idx = all_indices(corpus.docs().size());
                      auto docs = tokenize_docs(corpus, idx, o->keep_punct, settings->jobs);

                      TfidfModel model;
                      YakeOptions yake;
                      bool use_tfidf = o->fn == "tfidf";
                      if (use_tfidf) {
                        if (!o->model.empty()) {
                          auto in = ctx.open_input(o->model);
                          model = TfidfModel::load(in);
                        } else {
                          model = TfidfModel::fit(docs, settings->jobs);
                        }
                      } else {
                        yake.window = o->window;
                        if (o->dedup_ratio) yake.dedup_ratio = *o->dedup_ratio;
                        if (!o->stoplist.empty()) {
                          auto in = ctx.open_input(o->stoplist);
                          yake.stopwords = load_stopwords(in);
                        }
                      }

                      std::vector<KeywordList> results(docs.size());
                      parallel_chunks(docs.size(), settings->jobs, [&](std::size_t b, std::size_t e, std::size_t) {
                        for (std::size_t i = b; i < e; ++i) {
                          if (use_tfidf) {
                            if (o->dedup_ratio) {
                              auto all = tfidf_extract(docs[i], static_cast<std::size_t>(-1), model);
                              results[i] = dedup_keywords(all, *o->dedup_ratio, o->k);
                            } else {
                              results[i] = tfidf_extract(docs[i], o->k, model);
                            }
                          } else {
                            results[i] = yake_extract(docs[i], o->k, yake);
                          }
                        }
                      });
                      auto& out = ctx.open_output(o->out);
                      for (std::size_t i = 0; i < docs.size(); ++i)
                        write_keywords_jsonl(out, corpus.docs()[i].doc_key, results[i]);
                    }});
}

void add_contextualize(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("contextualize", "Build model inputs for a context variant");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string docs, out, variant = "sent", keywords, sep{kDefaultSep}, emit = "jsonl";
    std::size_t k = 0;
    bool shuffle = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--docs", o->docs, "Pseudo-document JSONL")->required();
  sub->add_option("--out", o->out,
                  "Output path; with --emit text, OUT.src, OUT.tgt and OUT.meta.jsonl are written")
      ->required();
  sub->add_option("--variant", o->variant, "Context variant")
      ->check(CLI::IsMember({"sent", "2sent", "tfidf", "yake"}))
      ->capture_default_str();
  sub->add_option("--keywords", o->keywords, "Keyword JSONL from extract (tfidf, yake)");
  sub->add_option("--k", o->k, "Truncate keyword lists to k (0 = keep all)")->capture_default_str();
  sub->add_flag("--shuffle", o->shuffle, "Randomly permute the keyword prefix");
  sub->add_option("--sep", o->sep, "Separator token")->capture_default_str();
  sub->add_option("--emit", o->emit, "Output layout")->check(CLI::IsMember({"text", "jsonl"}))->capture_default_str();
  add_run_settings(sub, settings, true);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      Variant variant = parse_variant(o->variant);
                      bool salient = variant == Variant::kTfidf || variant == Variant::kYake;
                      if (salient && o->keywords.empty()) throw UsageError("--keywords is required for " + o->variant);
                      if (!salient && o->shuffle) throw UsageError("--shuffle applies to tfidf and yake only");
                      Corpus corpus = load_corpus(ctx, o->docs);
                      std::map<std::string, KeywordList, std::less<>> keywords;
                      if (salient) {
                        auto in = ctx.open_input(o->keywords);
                        keywords = read_keywords(in);
                      }

                      const auto& docs = corpus.docs();
                      std::vector<std::vector<ContextualizedExample>> per_doc(docs.size());
                      parallel_chunks(docs.size(), settings->jobs, [&](std::size_t b, std::size_t e, std::size_t) {
                        for (std::size_t d = b; d < e; ++d) {
                          const auto& doc = docs[d];
                          KeywordList kws;
                          if (salient) {
                            auto it = keywords.find(doc.doc_key);
                            if (it == keywords.end())
                              throw PreconditionError("no keywords for document " + doc.doc_key);
                            kws = it->second;
                            if (o->k > 0 && kws.size() > o->k) kws.resize(o->k);
                          }
                          for (PairId id : doc.sentences) {
                            const auto& pair = corpus.pair(id);
                            ContextualizedExample ex;
                            switch (variant) {
                              case Variant::kSent: ex = build_sent(pair); break;
                              case Variant::kTwoSent:
                                ex = build_2sent_prefix(pair, doc, corpus, o->sep, settings->seed);
                                break;
                              default:
                                ex = o->shuffle ? build_shuffled_prefix(pair, kws, o->sep, settings->seed, variant)
                                                : build_salient_prefix(pair, kws, o->sep, variant);
                            }
                            ex.doc_key = doc.doc_key;
                            per_doc[d].push_back(std::move(ex));
                          }
                        }
                      });
                      std::vector<ContextualizedExample> examples;
                      for (auto& v : per_doc)
                        for (auto& ex : v) examples.push_back(std::move(ex));
                      std::sort(examples.begin(), examples.end(),
                                [](const auto& a, const auto& b) { return a.id < b.id; });

                      if (o->emit == "jsonl") {
                        auto& out = ctx.open_output(o->out);
                        for (const auto& ex : examples) write_example_jsonl(out, ex, true);
                      } else {
                        auto& src = ctx.open_output(o->out + ".src");
                        auto& tgt = ctx.open_output(o->out + ".tgt");
                        auto& meta = ctx.open_output(o->out + ".meta.jsonl");
                        for (const auto& ex : examples) {
                          src << ex.render() << '\n';
                          tgt << ex.tgt << '\n';
                          write_example_jsonl(meta, ex, false);
                        }
                      }
                      ctx.info(fmt::format("{} examples from {} documents", examples.size(), docs.size()));
                    }});
}

void add_mock_translate(CLI::App& app, std::vector<Stage>& stages) {
  auto* sub = app.add_subcommand("mock-translate", "Translate contextualized examples with a rule-based lexicon");
  auto settings = std::make_shared<RunSettings>();
  struct Opts {
    std::string lexicon, mode = "context_aware", in, out;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--lexicon", o->lexicon, "Lexicon JSONL")->required();
  sub->add_option("--mode", o->mode, "context_aware or context_agnostic")->capture_default_str();
  sub->add_option("--in", o->in, "Contextualized JSONL")->required();
  sub->add_option("--out", o->out, "Hypothesis JSONL {id, text} (stdout if omitted)");
  add_run_settings(sub, settings, false);
  stages.push_back({sub, [o, settings](StageContext& ctx) {
                      MockMode mode = parse_mock_mode(o->mode);
                      MockLexicon lexicon;
                      {
                        auto in = ctx.open_input(o->lexicon);
                        lexicon = MockLexicon::load_jsonl(in);
                      }
                      lexicon.validate();
                      std::vector<ContextualizedExample> examples;
                      {
                        auto in = ctx.open_input(o->in);
                        examples = read_examples_jsonl(in);
                      }
                      std::vector<std::string> texts(examples.size());
                      parallel_chunks(examples.size(), settings->jobs, [&](std::size_t b, std::size_t e, std::size_t) {
                        for (std::size_t i = b; i < e; ++i) texts[i] = mock_translate(examples[i], lexicon, mode);
                      });
                      auto& out = ctx.open_output(o->out);
                      for (std::size_t i = 0; i < examples.size(); ++i) {
                        nlohmann::ordered_json j;
                        j["id"] = examples[i].id;
                        j["text"] = texts[i];
                        out << j.dump() << '\n';
                      }
                    }});
}

}  // namespace

void register_corpus_stages(CLI::App& app, std::vector<Stage>& stages) {
  add_ingest(app, stages);
  add_fit_tfidf(app, stages);
  add_extract(app, stages);
  add_contextualize(app, stages);
  add_mock_translate(app, stages);
}

}  // namespace salctx::cli
