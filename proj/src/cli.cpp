#include "attnseek/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "attnseek/bundle.hpp"
#include "attnseek/corpus.hpp"
#include "attnseek/errors.hpp"
#include "attnseek/evaluation.hpp"
#include "attnseek/log.hpp"
#include "attnseek/pipeline.hpp"
#include "attnseek/relevance_report.hpp"

namespace attnseek {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  fs::path bundle_dir;
  fs::path corpus_path;
  fs::path out_dir = "out";
  std::string dataset;
  std::string method_name = "attention_seeker";
  std::string orientation_name = "literal";
  std::string top_k_text = "5,10,15";
  std::vector<int> top_k;
  int jobs = 1;
  bool ablate = false;

  bool no_vector_relevance = false;
  bool no_sam_relevance = false;
  bool no_filter = false;
  int passes = 2;
  bool no_segment_relevance = false;
  bool binary_segment_hyp = false;
  bool stem_match = false;

  ScoringOptions options;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_top_k(const std::string& text) {
  std::vector<int> ks;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--top-k: '{}' is not an integer", item));
    }
    if (used != item.size() || k <= 0) throw UsageError(fmt::format("--top-k: '{}' is not a positive integer", item));
    ks.push_back(k);
  }
  if (ks.empty()) throw UsageError("--top-k needs at least one value");
  return ks;
}

// Checks flag combinations and fills config.options; nothing is read yet.
void resolve(RunConfig& config) {
  auto method = parse_method(config.method_name);
  if (!method) throw UsageError(fmt::format("unknown method '{}'", config.method_name));
  auto orientation = parse_orientation(config.orientation_name);
  if (!orientation) throw UsageError(fmt::format("unknown proportional orientation '{}'", config.orientation_name));
  config.top_k = parse_top_k(config.top_k_text);
  if (config.jobs < 1) throw UsageError("--jobs must be >= 1");
  if (config.passes < 1) throw UsageError("--passes must be >= 1");

  const bool scorer_flags = config.no_vector_relevance || config.no_sam_relevance || config.no_filter ||
                            config.passes != 2 || config.no_segment_relevance ||
                            config.binary_segment_hyp || config.stem_match;
  if (*method != Method::attention_seeker && scorer_flags) {
    throw UsageError("scorer ablation flags only apply to --method attention_seeker");
  }
  if (config.binary_segment_hyp && config.no_segment_relevance) {
    throw UsageError("--binary-segment-hyp needs segment relevance enabled");
  }

  config.options.method = *method;
  config.options.orientation = *orientation;
  config.options.short_config = {!config.no_vector_relevance, !config.no_sam_relevance, !config.no_filter,
                                 config.passes};
  config.options.long_config = {!config.no_sam_relevance, !config.no_segment_relevance,
                                config.binary_segment_hyp, config.stem_match};
  if (config.dataset.empty() && !config.corpus_path.empty()) {
    config.dataset = config.corpus_path.stem().string();
  }
}

std::string config_label(const ScoringOptions& o) {
  if (o.method != Method::attention_seeker) {
    return o.method == Method::samrank_global ? "G"
           : o.orientation == ProportionalOrientation::literal ? "literal"
                                                               : "transposed";
  }
  if (o.short_config == AblationConfig::full() && o.long_config == LongConfig::full()) return "full";
  return fmt::format("S={}|R={}|f={}|passes={}|T={}|Tb={}|stem={}", int(o.short_config.use_vector_relevance),
                     int(o.short_config.use_sam_relevance), int(o.short_config.use_filter),
                     o.short_config.passes, int(o.long_config.use_segment_relevance),
                     int(o.long_config.binary_segment_hyp), int(o.long_config.match_by_stem));
}

std::string file_safe(std::string_view id) {
  std::string out(id);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw io_error(fmt::format("cannot create {}", tmp.string()));
    out << content;
    if (!out) throw io_error(fmt::format("write failed on {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

// A document to process: where its bundle should be and, with a corpus, its gold keys.
struct Job {
  std::string doc_id;
  fs::path manifest;
  const CorpusDocument* corpus_doc = nullptr;
};

std::vector<Job> collect_jobs(const RunConfig& config, const std::vector<CorpusDocument>& corpus) {
  std::vector<Job> jobs;
  if (!config.corpus_path.empty()) {
    for (const auto& doc : corpus) {
      fs::path manifest = config.bundle_dir / doc.doc_id;
      manifest += kManifestExtension;
      jobs.push_back({doc.doc_id, std::move(manifest), &doc});
    }
    return jobs;
  }
  if (!fs::is_directory(config.bundle_dir)) {
    throw io_error(fmt::format("bundle directory {} does not exist", config.bundle_dir.string()));
  }
  for (const auto& entry : fs::directory_iterator(config.bundle_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == kManifestExtension) {
      jobs.push_back({entry.path().stem().string(), entry.path(), nullptr});
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.manifest < b.manifest; });
  return jobs;
}

struct Loaded {
  LoadedBundle bundle;
  CandidateSet candidates;
};

// Runs fn over [0, count) on `jobs` threads; results keep index order.
template <typename Result>
std::vector<Result> parallel_map(std::size_t count, int jobs, const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) results[i] = fn(i);
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (threads <= 1) {
    worker();
    return results;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return results;
}

struct Outcome {
  std::optional<Loaded> loaded;
  std::string failure;
};

std::vector<Outcome> load_all(const std::vector<Job>& jobs, int threads) {
  return parallel_map<Outcome>(jobs.size(), threads, [&](std::size_t i) {
    Outcome o;
    try {
      if (!fs::exists(jobs[i].manifest)) {
        o.failure = fmt::format("missing bundle {}", jobs[i].manifest.string());
        return o;
      }
      auto bundle = read_bundle(jobs[i].manifest);
      auto candidates = build_candidates(bundle.document);
      o.loaded = Loaded{std::move(bundle), std::move(candidates)};
    } catch (const std::exception& e) {
      o.failure = e.what();
    }
    return o;
  });
}

int report_failures(const std::vector<Job>& jobs, const std::map<std::size_t, std::string>& failures,
                    std::ostream& out) {
  if (failures.empty()) return kExitOk;
  out << "failures:\n";
  for (const auto& [i, why] : failures) out << "  " << jobs[i].doc_id << ": " << why << '\n';
  return kExitPartialFailure;
}

std::string ranking_tsv(const RankedKeyphrases& ranking) {
  std::string text = "rank\tstem\tsurface\tscore\n";
  for (std::size_t r = 0; r < ranking.entries.size(); ++r) {
    const auto& e = ranking.entries[r];
    text += fmt::format("{}\t{}\t{}\t{:.10g}\n", r + 1, e.stem_key, e.surface, e.score);
  }
  return text;
}

int cmd_score(const RunConfig& config, std::ostream& out) {
  std::vector<CorpusDocument> corpus;
  if (!config.corpus_path.empty()) corpus = load_corpus(config.corpus_path);
  const auto jobs = collect_jobs(config, corpus);
  if (jobs.empty()) throw degenerate_input_error("no documents to score");
  fs::create_directories(config.out_dir);

  auto failures_vec = parallel_map<std::string>(jobs.size(), config.jobs, [&](std::size_t i) -> std::string {
    try {
      if (!fs::exists(jobs[i].manifest)) return fmt::format("missing bundle {}", jobs[i].manifest.string());
      auto loaded = read_bundle(jobs[i].manifest);
      auto ranking = rank_document(loaded, config.options);
      write_atomically(config.out_dir / (file_safe(loaded.bundle.doc_id) + ".tsv"), ranking_tsv(ranking));
      return {};
    } catch (const std::exception& e) {
      return e.what();
    }
  });
  std::map<std::size_t, std::string> failures;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!failures_vec[i].empty()) failures[i] = failures_vec[i];
  }
  out << fmt::format("scored {} of {} documents into {}\n", jobs.size() - failures.size(), jobs.size(),
                     config.out_dir.string());
  return report_failures(jobs, failures, out);
}

EvalReport evaluate_rows(const std::vector<const Loaded*>& docs, const std::vector<const CorpusDocument*>& gold,
                         const ScoringOptions& options, const std::vector<int>& ks, int threads) {
  auto per_doc = parallel_map<std::optional<std::vector<PrecisionRecallF1>>>(
      docs.size(), threads, [&](std::size_t i) {
        auto ranking = rank_document(docs[i]->bundle.bundle, docs[i]->bundle.document, docs[i]->candidates, options);
        return evaluate(ranking, gold[i]->gold_keys, ks);
      });
  EvalAccumulator acc(ks);
  for (const auto& m : per_doc) {
    if (m) {
      acc.add(*m);
    } else {
      acc.skip();
    }
  }
  return acc.report();
}

int cmd_eval_or_ablate(const RunConfig& config, bool ablate, std::ostream& out) {
  const auto corpus = load_corpus(config.corpus_path);
  if (corpus.empty()) throw degenerate_input_error(fmt::format("corpus {} is empty", config.corpus_path.string()));
  const auto jobs = collect_jobs(config, corpus);
  const auto outcomes = load_all(jobs, config.jobs);

  std::map<std::size_t, std::string> failures;
  std::vector<const Loaded*> short_docs, long_docs, all_docs;
  std::vector<const CorpusDocument*> short_gold, long_gold, all_gold;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!outcomes[i].loaded) {
      failures[i] = outcomes[i].failure;
      continue;
    }
    const Loaded* l = &*outcomes[i].loaded;
    all_docs.push_back(l);
    all_gold.push_back(jobs[i].corpus_doc);
    if (l->bundle.bundle.is_long()) {
      long_docs.push_back(l);
      long_gold.push_back(jobs[i].corpus_doc);
    } else {
      short_docs.push_back(l);
      short_gold.push_back(jobs[i].corpus_doc);
    }
  }
  if (all_docs.empty()) {
    report_failures(jobs, failures, out);
    throw degenerate_input_error("no document could be loaded");
  }

  std::vector<EvalRow> rows;
  std::string stem;
  if (ablate) {
    stem = "ablation";
    if (!short_docs.empty()) {
      for (const auto& row : short_ablation_rows()) {
        rows.push_back({config.dataset, "ablation-short", row.name,
                        evaluate_rows(short_docs, short_gold, row.options, config.top_k, config.jobs)});
      }
    }
    if (!long_docs.empty()) {
      for (const auto& row : long_ablation_rows()) {
        rows.push_back({config.dataset, "ablation-long", row.name,
                        evaluate_rows(long_docs, long_gold, row.options, config.top_k, config.jobs)});
      }
    }
  } else {
    stem = "eval";
    rows.push_back({config.dataset, std::string(to_string(config.options.method)), config_label(config.options),
                    evaluate_rows(all_docs, all_gold, config.options, config.top_k, config.jobs)});
  }

  fs::create_directories(config.out_dir);
  const std::string csv = eval_csv(rows);
  write_atomically(config.out_dir / (stem + ".csv"), csv);
  write_atomically(config.out_dir / (stem + ".json"), eval_json(rows));
  out << csv;
  return report_failures(jobs, failures, out);
}

int cmd_report(const RunConfig& config, std::ostream& out) {
  std::vector<CorpusDocument> corpus;
  if (!config.corpus_path.empty()) corpus = load_corpus(config.corpus_path);
  const auto jobs = collect_jobs(config, corpus);
  if (jobs.empty()) throw degenerate_input_error("no documents to report on");
  const auto outcomes = load_all(jobs, config.jobs);

  std::map<std::size_t, std::string> failures;
  std::vector<DocumentRelevance> docs;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!outcomes[i].loaded) {
      failures[i] = outcomes[i].failure;
      continue;
    }
    try {
      docs.push_back(document_relevance(outcomes[i].loaded->bundle.bundle, outcomes[i].loaded->candidates));
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  if (docs.empty()) {
    report_failures(jobs, failures, out);
    throw degenerate_input_error("no document produced relevance scores");
  }
  emit_report(docs, config.out_dir);
  out << fmt::format("wrote relevance report for {} documents into {}\n", docs.size(), config.out_dir.string());
  return report_failures(jobs, failures, out);
}

void add_common(CLI::App* sub, RunConfig& config, bool corpus_required) {
  sub->add_option("--bundles", config.bundle_dir, "Directory of <doc_id>.manifest/.samb bundles")->required();
  auto* corpus = sub->add_option("--corpus", config.corpus_path, "JSON Lines corpus with gold keys");
  if (corpus_required) corpus->required();
  sub->add_option("--out", config.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--jobs", config.jobs, "Documents processed in parallel")->capture_default_str();
}

void add_scoring(CLI::App* sub, RunConfig& config) {
  sub->add_option("--method", config.method_name,
                  "attention_seeker | samrank_global | samrank_proportional | samrank_final")
      ->capture_default_str();
  sub->add_flag("--no-vector-relevance", config.no_vector_relevance, "Replace per-vector scores S by 1");
  sub->add_flag("--no-sam-relevance", config.no_sam_relevance, "Replace per-map scores R by 1");
  sub->add_flag("--no-filter", config.no_filter, "Keep S on non-candidate rows");
  sub->add_option("--passes", config.passes, "Hypothesis refinement passes (short documents)")->capture_default_str();
  sub->add_flag("--no-segment-relevance", config.no_segment_relevance, "Use T = 1 for every segment");
  sub->add_flag("--binary-segment-hyp", config.binary_segment_hyp, "Binary abstract hypothesis for T");
  sub->add_flag("--stem-match", config.stem_match, "Match abstract tokens by Porter stem");
  sub->add_option("--proportional-orientation", config.orientation_name, "literal | transposed")
      ->capture_default_str();
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keyphrase extraction from self-attention maps", "attnseek"};
  app.require_subcommand(1);
  RunConfig config;

  auto* score = app.add_subcommand("score", "Rank candidate keyphrases of every bundle");
  add_common(score, config, false);
  add_scoring(score, config);

  auto* eval = app.add_subcommand("eval", "Score and evaluate F1@k against gold keys");
  add_common(eval, config, true);
  add_scoring(eval, config);
  eval->add_option("--top-k", config.top_k_text, "Comma-separated cutoffs")->capture_default_str();
  eval->add_option("--dataset", config.dataset, "Dataset name for the report (default: corpus stem)");
  eval->add_flag("--ablate", config.ablate, "Evaluate every ablation configuration instead");

  auto* ablate = app.add_subcommand("ablate", "Evaluate every ablation configuration");
  add_common(ablate, config, true);
  ablate->add_option("--top-k", config.top_k_text, "Comma-separated cutoffs")->capture_default_str();
  ablate->add_option("--dataset", config.dataset, "Dataset name for the report (default: corpus stem)");

  auto* report = app.add_subcommand("report", "Per-layer relevance distributions as CSV");
  add_common(report, config, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    resolve(config);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (score->parsed()) return cmd_score(config, out);
    if (eval->parsed()) return cmd_eval_or_ablate(config, config.ablate, out);
    if (ablate->parsed()) return cmd_eval_or_ablate(config, true, out);
    return cmd_report(config, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartialFailure;
  }
}

}  // namespace attnseek
