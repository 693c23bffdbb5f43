#include "attnseek/scorer_short.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "attnseek/errors.hpp"
#include "attnseek/log.hpp"

namespace attnseek {

const std::array<NamedAblation, 7>& short_ablations() {
  static const std::array<NamedAblation, 7> table{{
      {"Base", {false, false, false, 1}},
      {"B+S", {true, false, false, 1}},
      {"B+R", {false, true, false, 1}},
      {"B+f", {false, false, true, 1}},
      {"B+S+R", {true, true, false, 1}},
      {"B+S+R+f", {true, true, true, 1}},
      {"Attention-Seeker", {true, true, true, 2}},
  }};
  return table;
}

HypothesisVector make_binary_hypothesis(const TokenMask& mask) {
  HypothesisVector h;
  h.values.reserve(mask.size());
  for (bool m : mask) h.values.push_back(m ? 1.0 : 0.0);
  return h;
}

std::vector<double> vector_relevance(SamView map, const HypothesisVector& hypothesis, bool filter,
                                     const TokenMask& mask) {
  const std::size_t n = map.n();
  if (hypothesis.values.size() != n || mask.size() != n) {
    throw dimension_error(fmt::format("vector_relevance: map is {}x{}, H has {}, mask has {}", n, n,
                                      hypothesis.values.size(), mask.size()));
  }
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (filter && !mask[i]) continue;
    const auto row = map.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += static_cast<double>(row[j]) * hypothesis.values[j];
    s[i] = acc;
  }
  return s;
}

double sam_relevance(std::span<const double> vector_scores) {
  if (vector_scores.empty()) throw degenerate_input_error("sam_relevance: n = 0");
  double total = 0.0;
  for (double v : vector_scores) total += v;
  return total / static_cast<double>(vector_scores.size());
}

RelevanceScores relevance_scores(const SegmentTensor& segment, const HypothesisVector& hypothesis,
                                 bool filter, const TokenMask& mask) {
  const std::size_t n = segment.n();
  RelevanceScores out;
  out.n = n;
  out.sam_scores = LayerHeadMatrix(segment.layers(), segment.heads());
  out.vector_scores.resize(segment.map_count() * n);
  for (std::size_t l = 0; l < segment.layers(); ++l) {
    for (std::size_t h = 0; h < segment.heads(); ++h) {
      auto s = vector_relevance(segment.map(l, h), hypothesis, filter, mask);
      out.sam_scores(l, h) = sam_relevance(s);
      std::copy(s.begin(), s.end(), out.vector_scores_of(l, h).begin());
    }
  }
  return out;
}

RelevanceScores apply_ablation(RelevanceScores scores, const AblationConfig& config,
                               const TokenMask& mask) {
  if (mask.size() != scores.n) throw dimension_error("apply_ablation: mask length differs from n");
  if (!config.use_vector_relevance) {
    for (std::size_t k = 0; k < scores.vector_scores.size(); ++k) {
      const std::size_t i = k % scores.n;
      scores.vector_scores[k] = (config.use_filter && !mask[i]) ? 0.0 : 1.0;
    }
  }
  if (!config.use_sam_relevance) {
    for (double& r : scores.sam_scores.values()) r = 1.0;
  }
  return scores;
}

AttentionScoreVector aggregate_attention(const SegmentTensor& segment, const RelevanceScores& scores) {
  const std::size_t n = segment.n();
  if (scores.n != n || scores.sam_scores.layers() != segment.layers() ||
      scores.sam_scores.heads() != segment.heads() ||
      scores.vector_scores.size() != segment.map_count() * n) {
    throw dimension_error("aggregate_attention: relevance scores do not match the segment shape");
  }
  AttentionScoreVector b;
  b.values.assign(n, 0.0);
  double* out = b.values.data();
  for (std::size_t l = 0; l < segment.layers(); ++l) {
    for (std::size_t h = 0; h < segment.heads(); ++h) {
      const double r = scores.sam_scores(l, h);
      if (r == 0.0) continue;
      const SamView map = segment.map(l, h);
      const auto s = scores.vector_scores_of(l, h);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = s[i] * r;
        if (w == 0.0) continue;
        const float* row = map.row(i).data();
        for (std::size_t j = 0; j < n; ++j) out[j] += static_cast<double>(row[j]) * w;
      }
    }
  }
  return b;
}

HypothesisVector refine_hypothesis(const AttentionScoreVector& scores, const TokenMask& mask) {
  if (scores.values.size() != mask.size()) {
    throw dimension_error("refine_hypothesis: score and mask lengths differ");
  }
  HypothesisVector h;
  h.values.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) h.values[i] = mask[i] ? scores.values[i] : 0.0;
  return h;
}

ShortScoring score_short_detailed(const SegmentTensor& segment, const TokenMask& mask,
                                  const AblationConfig& config) {
  if (config.passes < 1) throw config_error("passes must be >= 1");
  if (mask.size() != segment.n()) {
    throw dimension_error(fmt::format("score_short: mask has {} entries, segment has n = {}",
                                      mask.size(), segment.n()));
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool m) { return m; })) {
    log().warn("no candidate tokens in segment; attention scores are all zero");
    ShortScoring empty;
    empty.scores.values.assign(segment.n(), 0.0);
    empty.scores.pass = config.passes;
    empty.first_pass.n = segment.n();
    empty.first_pass.sam_scores = LayerHeadMatrix(segment.layers(), segment.heads());
    empty.first_pass.vector_scores.assign(segment.map_count() * segment.n(), 0.0);
    return empty;
  }

  ShortScoring result;
  HypothesisVector hypothesis = make_binary_hypothesis(mask);
  for (int pass = 1; pass <= config.passes; ++pass) {
    auto scores = apply_ablation(relevance_scores(segment, hypothesis, config.use_filter, mask),
                                 config, mask);
    result.scores = aggregate_attention(segment, scores);
    result.scores.pass = pass;
    if (pass == 1) result.first_pass = std::move(scores);
    if (pass < config.passes) hypothesis = refine_hypothesis(result.scores, mask);
  }
  return result;
}

AttentionScoreVector score_short(const SegmentTensor& segment, const TokenMask& mask,
                                 const AblationConfig& config) {
  return score_short_detailed(segment, mask, config).scores;
}

}  // namespace attnseek
