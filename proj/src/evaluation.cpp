#include "attnseek/evaluation.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "attnseek/log.hpp"
#include "attnseek/porter.hpp"

namespace attnseek {

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  for (std::string w; in >> w;) words.push_back(std::move(w));
  return words;
}

}  // namespace

std::vector<std::string> gold_stem_keys(std::span<const std::string> gold) {
  std::vector<std::string> keys;
  std::unordered_set<std::string> seen;
  for (const auto& g : gold) {
    auto words = split_words(g);
    if (words.empty()) continue;
    std::string key = make_stem_key(words);
    if (seen.insert(key).second) keys.push_back(std::move(key));
  }
  return keys;
}

std::optional<std::vector<PrecisionRecallF1>> evaluate(const RankedKeyphrases& predictions,
                                                       std::span<const std::string> gold,
                                                       std::span<const int> ks) {
  const auto gold_keys = gold_stem_keys(gold);
  if (gold_keys.empty()) {
    log().warn("document without gold keys skipped from evaluation");
    return std::nullopt;
  }
  const std::unordered_set<std::string> gold_set(gold_keys.begin(), gold_keys.end());

  // Predictions are stem-deduplicated before truncation.
  std::vector<std::string> ranked;
  std::unordered_set<std::string> seen;
  for (const auto& e : predictions.entries) {
    if (seen.insert(e.stem_key).second) ranked.push_back(e.stem_key);
  }

  std::vector<PrecisionRecallF1> out;
  for (int k : ks) {
    const std::size_t take = std::min(ranked.size(), static_cast<std::size_t>(std::max(k, 0)));
    std::size_t matches = 0;
    for (std::size_t r = 0; r < take; ++r) matches += gold_set.count(ranked[r]);
    PrecisionRecallF1 m{k};
    if (take > 0) m.precision = static_cast<double>(matches) / static_cast<double>(take);
    m.recall = static_cast<double>(matches) / static_cast<double>(gold_keys.size());
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    out.push_back(m);
  }
  return out;
}

EvalAccumulator::EvalAccumulator(std::vector<int> ks) : ks_(std::move(ks)) {
  for (int k : ks_) sums_.push_back({k});
}

void EvalAccumulator::add(const std::vector<PrecisionRecallF1>& document_metrics) {
  for (std::size_t i = 0; i < sums_.size() && i < document_metrics.size(); ++i) {
    sums_[i].precision += document_metrics[i].precision;
    sums_[i].recall += document_metrics[i].recall;
    sums_[i].f1 += document_metrics[i].f1;
  }
  ++documents_;
}

EvalReport EvalAccumulator::report() const {
  EvalReport r;
  r.documents = documents_;
  r.skipped = skipped_;
  r.metrics = sums_;
  if (documents_ > 0) {
    const double d = static_cast<double>(documents_);
    for (auto& m : r.metrics) {
      m.precision /= d;
      m.recall /= d;
      m.f1 /= d;
    }
  }
  return r;
}

std::string eval_csv(std::span<const EvalRow> rows) {
  std::string out = "dataset,method,config";
  if (!rows.empty()) {
    for (const auto& m : rows.front().report.metrics) out += fmt::format(",F1@{}", m.k);
  }
  out += '\n';
  for (const auto& row : rows) {
    out += fmt::format("{},{},{}", row.dataset, row.method, row.config);
    for (const auto& m : row.report.metrics) out += fmt::format(",{:.2f}", m.f1 * 100.0);
    out += '\n';
  }
  return out;
}

std::string eval_json(std::span<const EvalRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json metrics = nlohmann::ordered_json::array();
    for (const auto& m : row.report.metrics) {
      metrics.push_back({{"k", m.k}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}});
    }
    arr.push_back({{"dataset", row.dataset},
                   {"method", row.method},
                   {"config", row.config},
                   {"documents", row.report.documents},
                   {"skipped", row.report.skipped},
                   {"metrics", std::move(metrics)}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace attnseek
