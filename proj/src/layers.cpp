#include "eegdgr/layers.hpp"

#include <cmath>

namespace eegdgr::net {

FeatureMap conv2d_forward(const ConvLayer& layer, const Matrix& x) {
  if (layer.filters.cols() != 4 || layer.bias.size() != layer.filters.rows()) {
    throw NetError("convolution layer needs D x 4 filters and D biases");
  }
  if (!x.allFinite()) throw NetError("convolution input is not finite");
  const int rows = static_cast<int>(x.rows());
  const int cols = static_cast<int>(x.cols());
  const int depth = layer.depth();
  FeatureMap y{rows, cols, depth, Vector(static_cast<Eigen::Index>(rows) * cols * depth)};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double x00 = x(i, j);
      const double x01 = j + 1 < cols ? x(i, j + 1) : 0.0;
      const double x10 = i + 1 < rows ? x(i + 1, j) : 0.0;
      const double x11 = (i + 1 < rows && j + 1 < cols) ? x(i + 1, j + 1) : 0.0;
      for (int d = 0; d < depth; ++d) {
        const double z = layer.bias[d] + layer.filters(d, 0) * x00 + layer.filters(d, 1) * x01 +
                         layer.filters(d, 2) * x10 + layer.filters(d, 3) * x11;
        y.at(i, j, d) = std::tanh(z);
      }
    }
  }
  return y;
}

ConvGrads conv2d_backward(const ConvLayer& layer, const Matrix& x, const FeatureMap& y, const FeatureMap& upstream) {
  if (upstream.values.size() != y.values.size() || y.rows != x.rows() || y.cols != x.cols()) {
    throw NetError("convolution backward: shape mismatch");
  }
  const int rows = y.rows;
  const int cols = y.cols;
  const int depth = y.depth;
  ConvGrads g{Matrix::Zero(depth, 4), Vector::Zero(depth), Matrix::Zero(rows, cols)};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const bool right = j + 1 < cols;
      const bool down = i + 1 < rows;
      const double x00 = x(i, j);
      const double x01 = right ? x(i, j + 1) : 0.0;
      const double x10 = down ? x(i + 1, j) : 0.0;
      const double x11 = (down && right) ? x(i + 1, j + 1) : 0.0;
      for (int d = 0; d < depth; ++d) {
        const double out = y.at(i, j, d);
        const double dz = upstream.at(i, j, d) * (1.0 - out * out);
        if (dz == 0.0) continue;
        g.grad_bias[d] += dz;
        g.grad_filters(d, 0) += dz * x00;
        g.grad_filters(d, 1) += dz * x01;
        g.grad_filters(d, 2) += dz * x10;
        g.grad_filters(d, 3) += dz * x11;
        g.grad_input(i, j) += dz * layer.filters(d, 0);
        if (right) g.grad_input(i, j + 1) += dz * layer.filters(d, 1);
        if (down) g.grad_input(i + 1, j) += dz * layer.filters(d, 2);
        if (down && right) g.grad_input(i + 1, j + 1) += dz * layer.filters(d, 3);
      }
    }
  }
  return g;
}

Vector softmax(const Vector& logits) {
  const double top = logits.maxCoeff();
  Vector e = (logits.array() - top).exp();
  return e / e.sum();
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
  if (x.rows() != layer.weights.cols()) {
    throw NetError("dense layer expects input length " + std::to_string(layer.weights.cols()) + ", got " +
                   std::to_string(x.rows()));
  }
  Matrix z = layer.weights * x;
  z.colwise() += layer.bias;
  switch (layer.activation) {
    case Activation::none:
      return z;
    case Activation::tanh:
      return z.array().tanh();
    case Activation::softmax:
      for (Eigen::Index c = 0; c < z.cols(); ++c) z.col(c) = softmax(z.col(c));
      return z;
  }
  return z;
}

DenseGrads dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& y, const Matrix& upstream) {
  if (upstream.rows() != y.rows() || upstream.cols() != y.cols() || x.cols() != y.cols()) {
    throw NetError("dense backward: shape mismatch");
  }
  Matrix dz;
  switch (layer.activation) {
    case Activation::none:
      dz = upstream;
      break;
    case Activation::tanh:
      dz = upstream.array() * (1.0 - y.array().square());
      break;
    case Activation::softmax: {
      dz.resize(y.rows(), y.cols());
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        const double dot = upstream.col(c).dot(y.col(c));
        dz.col(c) = y.col(c).array() * (upstream.col(c).array() - dot);
      }
      break;
    }
  }
  return {dz * x.transpose(), dz.rowwise().sum(), layer.weights.transpose() * dz};
}

XentResult softmax_xent(const Vector& p, int target) {
  if (target < 0 || target >= p.size()) {
    throw NetError("target class index " + std::to_string(target) + " out of range");
  }
  XentResult r;
  r.loss = -std::log(std::max(p[target], kProbabilityFloor));
  r.grad_logits = p;
  r.grad_logits[target] -= 1.0;
  return r;
}

DropoutResult dropout(const Matrix& x, double rate, SplitMix64& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw NetError("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return {x, Matrix::Ones(x.rows(), x.cols())};
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return {x.cwiseProduct(mask), mask};
}

void adam_step(std::span<ParamSlot> params, AdamState& state, const AdamConfig& config) {
  for (const auto& p : params) {
    if (p.value.rows() != p.grad.rows() || p.value.cols() != p.grad.cols()) {
      throw NetError("gradient shape mismatch for parameter '" + std::string(p.name) + "'");
    }
    if (!p.grad.allFinite()) throw NetError("non-finite gradient for parameter '" + std::string(p.name) + "'");
  }
  if (state.first_moment.size() != params.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& p : params) {
      state.first_moment.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      state.second_moment.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    const auto& g = params[i].grad;
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    params[i].value.array() -=
        config.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + config.epsilon);
  }
}

void glorot_uniform(Matrix& m, int fan_in, int fan_out, SplitMix64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
  }
}

}  // namespace eegdgr::net
