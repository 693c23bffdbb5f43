#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attnseek/ranking.hpp"

namespace attnseek {

inline const std::vector<int> kDefaultTopK{5, 10, 15};

struct PrecisionRecallF1 {
  int k = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Stems, case-folds and dedups gold keys (order of first appearance).
std::vector<std::string> gold_stem_keys(std::span<const std::string> gold);

// Exact stem-sequence matching of the top-k predictions against gold. The
// precision denominator is the number of predictions actually available
// (at most k). Returns nullopt, with a warning, when gold is empty.
std::optional<std::vector<PrecisionRecallF1>> evaluate(const RankedKeyphrases& predictions,
                                                       std::span<const std::string> gold,
                                                       std::span<const int> ks = kDefaultTopK);

// Macro-averaged metrics over documents.
struct EvalReport {
  std::vector<PrecisionRecallF1> metrics;
  std::size_t documents = 0;
  std::size_t skipped = 0;
};

class EvalAccumulator {
 public:
  explicit EvalAccumulator(std::vector<int> ks = kDefaultTopK);

  void add(const std::vector<PrecisionRecallF1>& document_metrics);
  void skip() { ++skipped_; }
  EvalReport report() const;

 private:
  std::vector<int> ks_;
  std::vector<PrecisionRecallF1> sums_;
  std::size_t documents_ = 0;
  std::size_t skipped_ = 0;
};

struct EvalRow {
  std::string dataset;
  std::string method;
  std::string config;
  EvalReport report;
};

// "dataset,method,config,F1@5,F1@10,F1@15" with F1 x 100 to two decimals.
std::string eval_csv(std::span<const EvalRow> rows);
// Full precision/recall/F1 per k, as JSON.
std::string eval_json(std::span<const EvalRow> rows);

}  // namespace attnseek
