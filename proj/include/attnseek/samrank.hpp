#pragma once

// Non-parametric SAMRank: token scores from the uniform average of every
// attention map instead of one hand-picked map.
//
// The global score is the attention a token receives, i.e. the column sums
// G[j] = sum_i Aav[i][j], which conserves sum_j G[j] = n.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "attnseek/bundle.hpp"
#include "attnseek/matrix.hpp"

namespace attnseek {

enum class SamrankScore { global, proportional, final };

// literal: zero column 0, column-normalize, take row sums.
// transposed: zero column 0, row-normalize, take column sums.
enum class ProportionalOrientation { literal, transposed };

std::optional<ProportionalOrientation> parse_orientation(std::string_view text);

// Elementwise mean over all (layer, head) maps.
SquareMatrix average_all(const SegmentTensor& segment);

std::vector<double> global_score(const SquareMatrix& averaged);

std::vector<double> proportional_score(const SquareMatrix& averaged,
                                       ProportionalOrientation orientation = ProportionalOrientation::literal);

std::vector<double> final_score(std::span<const double> global, std::span<const double> proportional);

std::vector<double> samrank_scores(const SegmentTensor& segment, SamrankScore which,
                                   ProportionalOrientation orientation = ProportionalOrientation::literal);

}  // namespace attnseek
