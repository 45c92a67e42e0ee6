#pragma once

// Dense tanh network over a flat parameter vector. Layer l holds W (out x in,
// row-major in the flat vector) followed by b (out). Hidden layers use tanh,
// the output layer is linear. Batches are column-major: one sample per column.

#include <Eigen/Dense>

#include <vector>

#include "avr/core/errors.hpp"
#include "avr/core/rng.hpp"

namespace avr::learn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class MlpLayout {
 public:
  MlpLayout() = default;
  explicit MlpLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ValidationError("network needs at least input and output sizes");
    for (int s : sizes_) {
      if (s <= 0) throw ValidationError("layer sizes must be positive");
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(off);
      off += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
    }
    count_ = off;
  }

  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t layers() const { return sizes_.size() - 1; }
  std::size_t parameter_count() const { return count_; }
  int input() const { return sizes_.front(); }
  int output() const { return sizes_.back(); }

  Eigen::Map<const RowMajorMatrix> weight(const double* theta, std::size_t l) const {
    return {theta + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<RowMajorMatrix> weight(double* theta, std::size_t l) const {
    return {theta + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<const Vector> bias(const double* theta, std::size_t l) const {
    return {theta + offsets_[l] + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
  }
  Eigen::Map<Vector> bias(double* theta, std::size_t l) const {
    return {theta + offsets_[l] + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
  }

  /// Gaussian init with std 1/sqrt(fan_in); the output layer is scaled by
  /// `output_gain`. Biases start at zero.
  void initialize(double* theta, Rng& rng, double output_gain) const {
    for (std::size_t l = 0; l < layers(); ++l) {
      auto W = weight(theta, l);
      const double scale = (l + 1 == layers() ? output_gain : 1.0) / std::sqrt(static_cast<double>(sizes_[l]));
      for (Eigen::Index i = 0; i < W.rows(); ++i) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = scale * standard_normal(rng);
      }
      bias(theta, l).setZero();
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t count_ = 0;
};

/// Activations kept for backprop: acts[0] = input, acts[l+1] = output of layer l.
struct MlpTrace {
  std::vector<Matrix> acts;
  const Matrix& output() const { return acts.back(); }
};

inline MlpTrace mlp_forward(const MlpLayout& net, const double* theta, const Matrix& x) {
  if (x.rows() != net.input()) {
    throw DimensionMismatch(static_cast<std::size_t>(net.input()), static_cast<std::size_t>(x.rows()));
  }
  MlpTrace tr;
  tr.acts.reserve(net.layers() + 1);
  tr.acts.push_back(x);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    Matrix z = net.weight(theta, l) * tr.acts.back();
    z.colwise() += net.bias(theta, l);
    if (l + 1 < net.layers()) z = z.array().tanh().matrix();
    tr.acts.push_back(std::move(z));
  }
  return tr;
}

/// Accumulates dL/dtheta into `grad` given dL/doutput.
inline void mlp_backward(const MlpLayout& net, const double* theta, const MlpTrace& tr, Matrix delta,
                         double* grad) {
  for (std::size_t l = net.layers(); l-- > 0;) {
    net.weight(grad, l) += delta * tr.acts[l].transpose();
    net.bias(grad, l) += delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = net.weight(theta, l).transpose() * delta;
    delta = back.array() * (1.0 - tr.acts[l].array().square());
  }
}

}  // namespace avr::learn
