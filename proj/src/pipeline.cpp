#include "attnseek/pipeline.hpp"

namespace attnseek {

std::optional<Method> parse_method(std::string_view name) {
  if (name == "attention_seeker") return Method::attention_seeker;
  if (name == "samrank_global") return Method::samrank_global;
  if (name == "samrank_proportional") return Method::samrank_proportional;
  if (name == "samrank_final") return Method::samrank_final;
  return std::nullopt;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::attention_seeker: return "attention_seeker";
    case Method::samrank_global: return "samrank_global";
    case Method::samrank_proportional: return "samrank_proportional";
    case Method::samrank_final: return "samrank_final";
  }
  return "attention_seeker";
}

std::vector<SegmentScore> samrank_segment_scores(const AttentionBundle& bundle, SamrankScore which,
                                                 ProportionalOrientation orientation) {
  std::vector<SegmentScore> out;
  for (std::size_t s = 0; s < bundle.segments.size(); ++s) {
    SegmentScore score;
    score.segment = s;
    score.scores.values = samrank_scores(bundle.segments[s], which, orientation);
    out.push_back(std::move(score));
  }
  return out;
}

RankedKeyphrases rank_document(const AttentionBundle& bundle, const TokenizedDocument& document,
                               const CandidateSet& candidates, const ScoringOptions& options) {
  if (options.method != Method::attention_seeker) {
    SamrankScore which = SamrankScore::global;
    if (options.method == Method::samrank_proportional) which = SamrankScore::proportional;
    if (options.method == Method::samrank_final) which = SamrankScore::final;
    auto scores = samrank_segment_scores(bundle, which, options.orientation);
    if (!bundle.is_long()) return score_candidates_short(scores.front().scores.values, candidates);
    return score_candidates_long(scores, candidates);
  }
  if (!bundle.is_long()) {
    auto b = score_short(bundle.segments.front(), candidates.masks.front(), options.short_config);
    return score_candidates_short(b.values, candidates);
  }
  return score_candidates_long(score_long(bundle, document, candidates, options.long_config), candidates);
}

RankedKeyphrases rank_document(const LoadedBundle& loaded, const ScoringOptions& options) {
  return rank_document(loaded.bundle, loaded.document, build_candidates(loaded.document), options);
}

std::vector<AblationRow> short_ablation_rows() {
  std::vector<AblationRow> rows;
  for (const auto& a : short_ablations()) {
    ScoringOptions options;
    options.short_config = a.config;
    rows.push_back({std::string(a.name), options});
  }
  return rows;
}

std::vector<AblationRow> long_ablation_rows() {
  auto long_row = [](std::string name, LongConfig config) {
    ScoringOptions options;
    options.long_config = config;
    return AblationRow{std::move(name), options};
  };
  ScoringOptions base;
  base.method = Method::samrank_global;
  return {
      {"Base", base},
      long_row("B_as", {false, false, false, false}),
      long_row("B_as+R", {true, false, false, false}),
      long_row("B_as+T_b", {false, true, true, false}),
      long_row("B_as+T", {false, true, false, false}),
      long_row("Attention-Seeker", LongConfig::full()),
  };
}

}  // namespace attnseek
