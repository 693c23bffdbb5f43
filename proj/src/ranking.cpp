#include "attnseek/ranking.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

#include "attnseek/errors.hpp"

namespace attnseek {

namespace {

double occurrence_sum(const Occurrence& occ, std::span<const double> scores) {
  double total = 0.0;
  for (std::size_t t : occ.token_indices) {
    if (t >= scores.size()) {
      throw alignment_error(fmt::format("token {} outside a score vector of length {}", t, scores.size()));
    }
    total += scores[t];
  }
  return total;
}

RankedKeyphrases sorted(RankedKeyphrases ranking) {
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
  return ranking;
}

}  // namespace

RankedKeyphrases score_candidates_short(std::span<const double> scores, const CandidateSet& candidates) {
  RankedKeyphrases out;
  out.entries.reserve(candidates.phrases.size());
  for (const auto& phrase : candidates.phrases) {
    double total = 0.0;
    for (const auto& occ : phrase.occurrences) {
      if (occ.segment != 0) {
        throw alignment_error(fmt::format("'{}' occurs in segment {} of a single-segment score",
                                          phrase.display_surface(), occ.segment));
      }
      total += occurrence_sum(occ, scores);
    }
    if (phrase.is_single_word()) total /= static_cast<double>(phrase.occurrence_count());
    out.entries.push_back({phrase.stem_key, phrase.display_surface(), total});
  }
  return sorted(std::move(out));
}

RankedKeyphrases score_candidates_long(std::span<const SegmentScore> segment_scores,
                                       const CandidateSet& candidates) {
  RankedKeyphrases out;
  out.entries.reserve(candidates.phrases.size());
  for (const auto& phrase : candidates.phrases) {
    // Per-segment sums first, then T^s weighting in segment order.
    std::vector<double> per_segment(segment_scores.size(), 0.0);
    for (const auto& occ : phrase.occurrences) {
      auto it = std::find_if(segment_scores.begin(), segment_scores.end(),
                             [&](const SegmentScore& s) { return s.segment == occ.segment; });
      if (it == segment_scores.end()) {
        throw alignment_error(fmt::format("'{}' occurs in segment {} which has no score",
                                          phrase.display_surface(), occ.segment));
      }
      per_segment[static_cast<std::size_t>(it - segment_scores.begin())] +=
          occurrence_sum(occ, it->scores.values);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < segment_scores.size(); ++k) {
      if (per_segment[k] != 0.0) total += segment_scores[k].relevance * per_segment[k];
    }
    if (phrase.is_single_word()) total /= static_cast<double>(phrase.occurrence_count());
    out.entries.push_back({phrase.stem_key, phrase.display_surface(), total});
  }
  return sorted(std::move(out));
}

RankedKeyphrases deduplicate(RankedKeyphrases ranking) {
  std::unordered_set<std::string> seen;
  std::erase_if(ranking.entries, [&](const RankedEntry& e) { return !seen.insert(e.stem_key).second; });
  return ranking;
}

}  // namespace attnseek
