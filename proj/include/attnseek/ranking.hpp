#pragma once

#include <span>
#include <string>
#include <vector>

#include "attnseek/candidates.hpp"
#include "attnseek/scorer_long.hpp"

namespace attnseek {

struct RankedEntry {
  std::string stem_key;
  std::string surface;
  double score = 0.0;
};

// Non-increasing scores, unique stem keys, ties in first-occurrence order.
struct RankedKeyphrases {
  std::vector<RankedEntry> entries;
};

// Candidate score = sum of B over the tokens of all its occurrences; single
// words are divided by their occurrence count. Only segment 0 is used.
RankedKeyphrases score_candidates_short(std::span<const double> scores, const CandidateSet& candidates);

// Same rule per segment with T^s * B^s, summed over segments. Single words
// are divided by their total occurrence count in the document. Throws
// alignment_error when an occurrence lies in a segment with no score.
RankedKeyphrases score_candidates_long(std::span<const SegmentScore> segment_scores,
                                       const CandidateSet& candidates);

// Keeps the first entry for every stem key.
RankedKeyphrases deduplicate(RankedKeyphrases ranking);

}  // namespace attnseek
