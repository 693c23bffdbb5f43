#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attnseek/bundle.hpp"
#include "attnseek/candidates.hpp"
#include "attnseek/ranking.hpp"
#include "attnseek/samrank.hpp"
#include "attnseek/scorer_long.hpp"
#include "attnseek/scorer_short.hpp"

namespace attnseek {

enum class Method { attention_seeker, samrank_global, samrank_proportional, samrank_final };

std::optional<Method> parse_method(std::string_view name);
std::string_view to_string(Method method);

// Everything needed to score one document. The short or long path is chosen
// from the bundle's segment roles, so both configurations are carried.
struct ScoringOptions {
  Method method = Method::attention_seeker;
  AblationConfig short_config = AblationConfig::full();
  LongConfig long_config = LongConfig::full();
  ProportionalOrientation orientation = ProportionalOrientation::literal;
};

// Token scores of every segment under a SAMRank score, T^s = 1 throughout.
std::vector<SegmentScore> samrank_segment_scores(const AttentionBundle& bundle, SamrankScore which,
                                                 ProportionalOrientation orientation);

RankedKeyphrases rank_document(const AttentionBundle& bundle, const TokenizedDocument& document,
                               const CandidateSet& candidates, const ScoringOptions& options);

RankedKeyphrases rank_document(const LoadedBundle& loaded, const ScoringOptions& options);

struct AblationRow {
  std::string name;
  ScoringOptions options;
};

// Base, B+S, B+R, B+f, B+S+R, B+S+R+f, Attention-Seeker.
std::vector<AblationRow> short_ablation_rows();
// Base (SAMRank global summed over segments), B_as, B_as+R, B_as+T_b,
// B_as+T, Attention-Seeker.
std::vector<AblationRow> long_ablation_rows();

}  // namespace attnseek
