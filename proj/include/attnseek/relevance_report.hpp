#pragma once

// Per-layer distributions of map relevance R[l][h] across documents, as
// plot-ready CSV files:
//
//   layer_dist.csv        doc_id,layer,relevance_pct
//   head_grid_<doc>.csv   layer,head,R
//   layer_rank.csv        layer,median_pct,rank

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attnseek/bundle.hpp"
#include "attnseek/candidates.hpp"
#include "attnseek/matrix.hpp"

namespace attnseek {

inline constexpr double kOutlierFraction = 0.05;

// 100 * sum_h R[l][h] / sum_{l,h} R[l][h]. Throws degenerate_input_error
// when R is all zero.
std::vector<double> layer_relevance(const LayerHeadMatrix& relevance);

// Drops the ceil(top_fraction * count) largest values; among equal values
// the lower index goes first. Order of the survivors is preserved.
std::vector<double> filter_outliers(std::span<const double> values, double top_fraction = kOutlierFraction);

struct DocumentRelevance {
  std::string doc_id;
  LayerHeadMatrix relevance;  // R[l][h]
  std::vector<double> layer_pct;
};

// Pass-1 R of the full short-document scorer (with the candidate filter),
// summed over segments for long documents.
DocumentRelevance document_relevance(const AttentionBundle& bundle, const CandidateSet& candidates);

struct LayerRank {
  std::size_t layer = 0;
  double median_pct = 0.0;
  std::size_t rank = 0;  // 1 = most relevant
};

// Median of each layer's outlier-filtered distribution across documents,
// ranked in decreasing order (ties broken by layer index).
std::vector<LayerRank> rank_layers(std::span<const DocumentRelevance> documents,
                                   double top_fraction = kOutlierFraction);

// Writes the three CSV kinds above into out_dir. Throws on empty input.
void emit_report(std::span<const DocumentRelevance> documents, const std::filesystem::path& out_dir);

}  // namespace attnseek
