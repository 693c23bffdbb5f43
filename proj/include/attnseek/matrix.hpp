#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attnseek {

// Dense [layers][heads] table of doubles, used for the per-map relevance
// scores and their normalized weights.
class LayerHeadMatrix {
 public:
  LayerHeadMatrix() = default;
  LayerHeadMatrix(std::size_t layers, std::size_t heads, double fill = 0.0)
      : layers_(layers), heads_(heads), values_(layers * heads, fill) {}

  std::size_t layers() const { return layers_; }
  std::size_t heads() const { return heads_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t layer, std::size_t head) { return values_[layer * heads_ + head]; }
  double operator()(std::size_t layer, std::size_t head) const { return values_[layer * heads_ + head]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double sum() const;

 private:
  std::size_t layers_ = 0;
  std::size_t heads_ = 0;
  std::vector<double> values_;
};

// Row-major n x n matrix of doubles (averaged attention maps).
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}

  std::size_t n() const { return n_; }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * n_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * n_ + col]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

inline double LayerHeadMatrix::sum() const {
  double total = 0.0;
  for (double v : values_) total += v;
  return total;
}

}  // namespace attnseek
