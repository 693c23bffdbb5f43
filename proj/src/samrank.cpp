#include "attnseek/samrank.hpp"

#include "attnseek/errors.hpp"

namespace attnseek {

std::optional<ProportionalOrientation> parse_orientation(std::string_view text) {
  if (text == "literal") return ProportionalOrientation::literal;
  if (text == "transposed") return ProportionalOrientation::transposed;
  return std::nullopt;
}

SquareMatrix average_all(const SegmentTensor& segment) {
  if (segment.map_count() == 0) throw degenerate_input_error("average_all: empty attention stack");
  const std::size_t n = segment.n();
  SquareMatrix avg(n);
  double* out = avg.values().data();
  for (std::size_t l = 0; l < segment.layers(); ++l) {
    for (std::size_t h = 0; h < segment.heads(); ++h) {
      const float* src = segment.map(l, h).values().data();
      for (std::size_t k = 0; k < n * n; ++k) out[k] += static_cast<double>(src[k]);
    }
  }
  const double count = static_cast<double>(segment.map_count());
  for (double& v : avg.values()) v /= count;
  return avg;
}

std::vector<double> global_score(const SquareMatrix& averaged) {
  const std::size_t n = averaged.n();
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = averaged.row(i);
    for (std::size_t j = 0; j < n; ++j) g[j] += row[j];
  }
  return g;
}

std::vector<double> proportional_score(const SquareMatrix& averaged, ProportionalOrientation orientation) {
  const std::size_t n = averaged.n();
  std::vector<double> p(n, 0.0);
  if (n == 0) return p;

  if (orientation == ProportionalOrientation::literal) {
    std::vector<double> col_sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j < n; ++j) col_sum[j] += averaged(i, j);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j < n; ++j) {
        if (col_sum[j] > 0.0) p[i] += averaged(i, j) / col_sum[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 1; j < n; ++j) row_sum += averaged(i, j);
      if (row_sum <= 0.0) continue;
      for (std::size_t j = 1; j < n; ++j) p[j] += averaged(i, j) / row_sum;
    }
  }
  return p;
}

std::vector<double> final_score(std::span<const double> global, std::span<const double> proportional) {
  if (global.size() != proportional.size()) {
    throw dimension_error("final_score: G and P differ in length");
  }
  std::vector<double> s(global.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = global[i] + proportional[i];
  return s;
}

std::vector<double> samrank_scores(const SegmentTensor& segment, SamrankScore which,
                                   ProportionalOrientation orientation) {
  const SquareMatrix avg = average_all(segment);
  switch (which) {
    case SamrankScore::global: return global_score(avg);
    case SamrankScore::proportional: return proportional_score(avg, orientation);
    case SamrankScore::final: return final_score(global_score(avg), proportional_score(avg, orientation));
  }
  return global_score(avg);
}

}  // namespace attnseek
