#include "attnseek/relevance_report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "attnseek/errors.hpp"
#include "attnseek/log.hpp"
#include "attnseek/scorer_short.hpp"

namespace attnseek {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string file_safe(std::string_view id) {
  std::string out(id);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error(fmt::format("cannot create {}", path.string()));
  out << content;
  if (!out) throw io_error(fmt::format("write failed on {}", path.string()));
}

}  // namespace

std::vector<double> layer_relevance(const LayerHeadMatrix& relevance) {
  const double total = relevance.sum();
  if (!(total > 0.0)) throw degenerate_input_error("layer_relevance: all relevance scores are zero");
  std::vector<double> pct(relevance.layers(), 0.0);
  for (std::size_t l = 0; l < relevance.layers(); ++l) {
    double layer_total = 0.0;
    for (std::size_t h = 0; h < relevance.heads(); ++h) layer_total += relevance(l, h);
    pct[l] = 100.0 * layer_total / total;
  }
  return pct;
}

std::vector<double> filter_outliers(std::span<const double> values, double top_fraction) {
  // The epsilon keeps 0.05 * 20 from rounding up to 2.
  const auto drop = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(values.size()) - 1e-9));
  if (drop >= values.size() && !values.empty()) {
    log().warn("outlier filter removes all {} values", values.size());
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  std::vector<bool> removed(values.size(), false);
  for (std::size_t k = 0; k < std::min(drop, values.size()); ++k) removed[order[k]] = true;
  std::vector<double> kept;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!removed[i]) kept.push_back(values[i]);
  }
  return kept;
}

DocumentRelevance document_relevance(const AttentionBundle& bundle, const CandidateSet& candidates) {
  if (bundle.segments.empty()) throw degenerate_input_error("document_relevance: no segments");
  DocumentRelevance out;
  out.doc_id = bundle.doc_id;
  out.relevance = LayerHeadMatrix(bundle.segments.front().layers(), bundle.segments.front().heads());
  for (std::size_t s = 0; s < bundle.segments.size(); ++s) {
    const auto& mask = candidates.masks.at(s);
    auto scores = relevance_scores(bundle.segments[s], make_binary_hypothesis(mask), true, mask);
    for (std::size_t k = 0; k < out.relevance.size(); ++k) {
      out.relevance.values()[k] += scores.sam_scores.values()[k];
    }
  }
  out.layer_pct = layer_relevance(out.relevance);
  return out;
}

std::vector<LayerRank> rank_layers(std::span<const DocumentRelevance> documents, double top_fraction) {
  if (documents.empty()) throw degenerate_input_error("rank_layers: no documents");
  const std::size_t layers = documents.front().layer_pct.size();
  std::vector<LayerRank> ranks(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<double> values;
    for (const auto& d : documents) values.push_back(d.layer_pct.at(l));
    auto kept = filter_outliers(values, top_fraction);
    // A single document leaves nothing after filtering; rank on the raw value.
    ranks[l] = {l, median(kept.empty() ? values : kept), 0};
  }
  std::vector<std::size_t> order(layers);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks[a].median_pct > ranks[b].median_pct; });
  for (std::size_t r = 0; r < layers; ++r) ranks[order[r]].rank = r + 1;
  return ranks;
}

void emit_report(std::span<const DocumentRelevance> documents, const std::filesystem::path& out_dir) {
  if (documents.empty()) throw degenerate_input_error("emit_report: no documents");
  std::filesystem::create_directories(out_dir);

  std::string dist = "doc_id,layer,relevance_pct\n";
  for (const auto& d : documents) {
    for (std::size_t l = 0; l < d.layer_pct.size(); ++l) {
      dist += fmt::format("{},{},{:.9g}\n", d.doc_id, l, d.layer_pct[l]);
    }
    std::string grid = "layer,head,R\n";
    for (std::size_t l = 0; l < d.relevance.layers(); ++l) {
      for (std::size_t h = 0; h < d.relevance.heads(); ++h) {
        grid += fmt::format("{},{},{:.9g}\n", l, h, d.relevance(l, h));
      }
    }
    write_file(out_dir / fmt::format("head_grid_{}.csv", file_safe(d.doc_id)), grid);
  }
  write_file(out_dir / "layer_dist.csv", dist);

  std::string rank = "layer,median_pct,rank\n";
  for (const auto& r : rank_layers(documents)) {
    rank += fmt::format("{},{:.9g},{}\n", r.layer, r.median_pct, r.rank);
  }
  write_file(out_dir / "layer_rank.csv", rank);
}

}  // namespace attnseek
