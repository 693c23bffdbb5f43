#include "attnseek/scorer_long.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "attnseek/errors.hpp"
#include "attnseek/log.hpp"
#include "attnseek/porter.hpp"

namespace attnseek {

LayerHeadMatrix segment_sam_relevance(const SegmentTensor& segment, const HypothesisVector& hypothesis) {
  const std::size_t n = segment.n();
  if (hypothesis.values.size() != n) {
    throw dimension_error(fmt::format("segment_sam_relevance: H has {} entries, n = {}",
                                      hypothesis.values.size(), n));
  }
  if (n == 0) throw degenerate_input_error("segment_sam_relevance: n = 0");
  LayerHeadMatrix r(segment.layers(), segment.heads());
  const double* hv = hypothesis.values.data();
  for (std::size_t l = 0; l < segment.layers(); ++l) {
    for (std::size_t h = 0; h < segment.heads(); ++h) {
      const SamView map = segment.map(l, h);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const float* row = map.row(i).data();
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += static_cast<double>(row[j]) * hv[j];
        total += acc;
      }
      r(l, h) = total / static_cast<double>(n);
    }
  }
  return r;
}

NormalizedSamWeights normalize_weights(const LayerHeadMatrix& relevance) {
  NormalizedSamWeights out{relevance};
  for (double v : relevance.values()) {
    if (v < 0.0) throw validation_error("normalize_weights: negative relevance");
  }
  const double total = relevance.sum();
  if (total <= 0.0) {
    log().warn("all map relevances are zero; falling back to uniform weights");
    const double uniform = 1.0 / static_cast<double>(relevance.size());
    for (double& v : out.weights.values()) v = uniform;
    return out;
  }
  for (double& v : out.weights.values()) v /= total;
  return out;
}

SquareMatrix weighted_average_sam(const SegmentTensor& segment, const NormalizedSamWeights& weights) {
  if (weights.weights.layers() != segment.layers() || weights.weights.heads() != segment.heads()) {
    throw dimension_error("weighted_average_sam: weight table does not match the segment");
  }
  const std::size_t n = segment.n();
  SquareMatrix avg(n);
  double* out = avg.values().data();
  for (std::size_t l = 0; l < segment.layers(); ++l) {
    for (std::size_t h = 0; h < segment.heads(); ++h) {
      const double w = weights.weights(l, h);
      if (w == 0.0) continue;
      const float* src = segment.map(l, h).values().data();
      for (std::size_t k = 0; k < n * n; ++k) out[k] += static_cast<double>(src[k]) * w;
    }
  }
  return avg;
}

AttentionScoreVector segment_attention(const SquareMatrix& averaged) {
  AttentionScoreVector b;
  b.values.assign(averaged.n(), 0.0);
  for (std::size_t i = 0; i < averaged.n(); ++i) {
    const auto row = averaged.row(i);
    for (std::size_t j = 0; j < averaged.n(); ++j) b.values[j] += row[j];
  }
  return b;
}

std::string normalize_token(std::string_view token) {
  constexpr std::string_view kByteLevelSpace = "\xC4\xA0";       // U+0120
  constexpr std::string_view kSentencePieceSpace = "\xE2\x96\x81";  // U+2581
  for (;;) {
    if (token.starts_with(kByteLevelSpace)) {
      token.remove_prefix(kByteLevelSpace.size());
    } else if (token.starts_with(kSentencePieceSpace)) {
      token.remove_prefix(kSentencePieceSpace.size());
    } else if (!token.empty() && (token.front() == ' ' || token.front() == '\t')) {
      token.remove_prefix(1);
    } else {
      break;
    }
  }
  std::string out(token);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

namespace {

std::string match_key(std::string_view token, bool by_stem) {
  std::string key = normalize_token(token);
  return by_stem && !key.empty() ? porter_stem(key) : key;
}

}  // namespace

HypothesisVector abstract_hypothesis(const AttentionScoreVector& abstract_scores,
                                     const SegmentText& abstract_text, const TokenMask& abstract_mask,
                                     const SegmentText& segment_text, bool binary, bool match_by_stem) {
  const std::size_t n0 = abstract_text.tokens.size();
  if (abstract_scores.values.size() != n0 || abstract_mask.size() != n0) {
    throw dimension_error("abstract_hypothesis: abstract scores, mask and tokens differ in length");
  }
  std::unordered_map<std::string, double> best;
  for (std::size_t j = 0; j < n0; ++j) {
    if (!abstract_mask[j]) continue;
    std::string key = match_key(abstract_text.tokens[j], match_by_stem);
    if (key.empty()) continue;
    const double value = binary ? 1.0 : abstract_scores.values[j];
    auto [it, inserted] = best.try_emplace(std::move(key), value);
    if (!inserted) it->second = std::max(it->second, value);
  }
  HypothesisVector h;
  h.values.assign(segment_text.tokens.size(), 0.0);
  for (std::size_t i = 0; i < segment_text.tokens.size(); ++i) {
    auto it = best.find(match_key(segment_text.tokens[i], match_by_stem));
    if (it != best.end()) h.values[i] = it->second;
  }
  return h;
}

double segment_relevance(const AttentionScoreVector& scores, const HypothesisVector& hypothesis) {
  if (scores.values.size() != hypothesis.values.size()) {
    throw dimension_error("segment_relevance: B^s and H^s differ in length");
  }
  double t = 0.0;
  for (std::size_t i = 0; i < scores.values.size(); ++i) t += scores.values[i] * hypothesis.values[i];
  return t;
}

std::vector<SegmentScore> score_long(const AttentionBundle& bundle, const TokenizedDocument& document,
                                     const CandidateSet& candidates, const LongConfig& config) {
  if (bundle.segments.empty()) throw degenerate_input_error("score_long: bundle has no segments");
  if (candidates.masks.size() != bundle.segments.size() ||
      document.segments.size() != bundle.segments.size()) {
    throw dimension_error("score_long: candidate masks, text and tensor segments differ in count");
  }
  if (config.use_segment_relevance && bundle.segments.front().role() != SegmentRole::abstract) {
    throw config_error("segment relevance needs an abstract as segment 0");
  }

  std::vector<SegmentScore> out;
  out.reserve(bundle.segments.size());
  for (std::size_t s = 0; s < bundle.segments.size(); ++s) {
    const SegmentTensor& seg = bundle.segments[s];
    LayerHeadMatrix r(seg.layers(), seg.heads(), 1.0);
    if (config.use_sam_relevance) {
      r = segment_sam_relevance(seg, make_binary_hypothesis(candidates.masks[s]));
    }
    SegmentScore score;
    score.segment = s;
    score.scores = segment_attention(weighted_average_sam(seg, normalize_weights(r)));
    out.push_back(std::move(score));
  }

  if (config.use_segment_relevance) {
    const auto& abstract_scores = out.front().scores;
    for (auto& score : out) {
      auto h = abstract_hypothesis(abstract_scores, document.segments.front(), candidates.masks.front(),
                                   document.segments[score.segment], config.binary_segment_hyp,
                                   config.match_by_stem);
      score.relevance = segment_relevance(score.scores, h);
    }
  }
  return out;
}

}  // namespace attnseek
