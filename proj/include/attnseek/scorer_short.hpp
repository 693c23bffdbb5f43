#pragma once

// Attention scores for single-segment documents.
//
// Pass 1 starts from a binary hypothesis H over candidate tokens. Each
// attention vector (SAM row) i of map (l, h) gets a relevance
// S[l][h][i] = A_i . H, optionally zeroed for non-candidate rows; each map
// gets R[l][h] = mean_i S[l][h][i]. The score vector is
//
//   B[j] = sum_{l,h} sum_i A[l][h][i][j] * S[l][h][i] * R[l][h]
//
// The full method then rebuilds H from B restricted to candidate tokens and
// runs one more pass.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "attnseek/bundle.hpp"
#include "attnseek/candidates.hpp"
#include "attnseek/matrix.hpp"

namespace attnseek {

struct HypothesisVector {
  std::vector<double> values;
};

struct AttentionScoreVector {
  std::vector<double> values;
  int pass = 1;
};

// Per-vector scores S[l][h][i] and per-map scores R[l][h].
struct RelevanceScores {
  std::size_t n = 0;
  std::vector<double> vector_scores;  // [L][H][n], row-major
  LayerHeadMatrix sam_scores;         // [L][H]

  std::span<const double> vector_scores_of(std::size_t layer, std::size_t head) const {
    return {vector_scores.data() + (layer * sam_scores.heads() + head) * n, n};
  }
  std::span<double> vector_scores_of(std::size_t layer, std::size_t head) {
    return {vector_scores.data() + (layer * sam_scores.heads() + head) * n, n};
  }
};

// Which relevance terms take part. A disabled term is replaced by the
// constant 1, so {false, false, false, 1} is the uniform "Base" average.
struct AblationConfig {
  bool use_vector_relevance = true;  // S
  bool use_sam_relevance = true;     // R
  bool use_filter = true;            // zero S on non-candidate rows
  int passes = 2;

  static AblationConfig full() { return {}; }
  static AblationConfig base() { return {false, false, false, 1}; }

  bool operator==(const AblationConfig&) const = default;
};

struct NamedAblation {
  std::string_view name;
  AblationConfig config;
};

// Base, B+S, B+R, B+f, B+S+R, B+S+R+f and the two-pass full method.
const std::array<NamedAblation, 7>& short_ablations();

HypothesisVector make_binary_hypothesis(const TokenMask& mask);

// S[i] = sum_j A[i][j] * H[j]; zeroed where mask is false when filter is set.
std::vector<double> vector_relevance(SamView map, const HypothesisVector& hypothesis, bool filter,
                                     const TokenMask& mask);

// R = (1/n) * sum_i S[i]. Throws degenerate_input_error for n = 0.
double sam_relevance(std::span<const double> vector_scores);

// S and R for every map of the segment.
RelevanceScores relevance_scores(const SegmentTensor& segment, const HypothesisVector& hypothesis,
                                 bool filter, const TokenMask& mask);

// Replaces disabled terms by 1 (or by the candidate mask for S when only the
// filter is on). R is left as computed from the real S.
RelevanceScores apply_ablation(RelevanceScores scores, const AblationConfig& config,
                               const TokenMask& mask);

// B[j] = sum_{l,h} sum_i maps[l][h][i][j] * S[l][h][i] * R[l][h], in float64,
// accumulated in (l, h, i, j) order.
AttentionScoreVector aggregate_attention(const SegmentTensor& segment, const RelevanceScores& scores);

// H[i] = B[i] on candidate tokens, 0 elsewhere. No rescaling.
HypothesisVector refine_hypothesis(const AttentionScoreVector& scores, const TokenMask& mask);

struct ShortScoring {
  AttentionScoreVector scores;
  RelevanceScores first_pass;  // after ablation substitution
};

ShortScoring score_short_detailed(const SegmentTensor& segment, const TokenMask& mask,
                                  const AblationConfig& config);

AttentionScoreVector score_short(const SegmentTensor& segment, const TokenMask& mask,
                                 const AblationConfig& config);

}  // namespace attnseek
