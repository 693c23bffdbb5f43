#pragma once

// Attention scores for long documents: an abstract segment followed by body
// segments, each scored independently.
//
// Per segment s: R[l][h] = mean_i (A_i . H) with the segment's binary
// candidate hypothesis, l1-normalized into weights; the weighted average of
// the maps is again row-stochastic, and its column sums give B^s. Segment
// relevance T^s = B^s . H^s, where H^s carries the abstract's B^0 value for
// every token whose surface matches a candidate token of the abstract.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "attnseek/bundle.hpp"
#include "attnseek/candidates.hpp"
#include "attnseek/matrix.hpp"
#include "attnseek/scorer_short.hpp"

namespace attnseek {

struct LongConfig {
  bool use_sam_relevance = true;      // R; uniform weights when off
  bool use_segment_relevance = true;  // T; T^s = 1 for every segment when off
  bool binary_segment_hyp = false;    // T_b: H^s is 1 on matches instead of B^0
  bool match_by_stem = false;         // compare Porter stems instead of surfaces

  static LongConfig full() { return {}; }

  bool operator==(const LongConfig&) const = default;
};

struct SegmentScore {
  std::size_t segment = 0;
  AttentionScoreVector scores;  // B^s
  double relevance = 1.0;       // T^s
};

struct NormalizedSamWeights {
  LayerHeadMatrix weights;
};

// R[l][h] = (1/n) sum_i A_i . H, unfiltered.
LayerHeadMatrix segment_sam_relevance(const SegmentTensor& segment, const HypothesisVector& hypothesis);

// R / sum(R). Falls back to uniform 1/(L*H) with a warning when sum(R) = 0.
NormalizedSamWeights normalize_weights(const LayerHeadMatrix& relevance);

// sum_{l,h} maps[l][h] * w[l][h].
SquareMatrix weighted_average_sam(const SegmentTensor& segment, const NormalizedSamWeights& weights);

// Column sums: B[j] = sum_i M[i][j].
AttentionScoreVector segment_attention(const SquareMatrix& averaged);

// Case-folded token surface with leading byte-level BPE / sentencepiece
// space markers removed.
std::string normalize_token(std::string_view token);

// H^s[i] = max B^0[j] over abstract candidate tokens j whose normalized
// surface equals that of segment token i (1 instead of B^0 when binary).
HypothesisVector abstract_hypothesis(const AttentionScoreVector& abstract_scores,
                                     const SegmentText& abstract_text, const TokenMask& abstract_mask,
                                     const SegmentText& segment_text, bool binary, bool match_by_stem);

// T^s = B^s . H^s.
double segment_relevance(const AttentionScoreVector& scores, const HypothesisVector& hypothesis);

// One SegmentScore per segment, in order. Throws config_error when segment
// relevance is enabled but segment 0 is not an abstract.
std::vector<SegmentScore> score_long(const AttentionBundle& bundle, const TokenizedDocument& document,
                                     const CandidateSet& candidates, const LongConfig& config);

}  // namespace attnseek
