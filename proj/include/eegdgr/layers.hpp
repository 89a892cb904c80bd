#pragma once

#include "eegdgr/linalg.hpp"
#include "eegdgr/random.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eegdgr::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// D kernels of 2x2, stride 1, "same" zero padding aligned pad-after: output
// (i, j) reads inputs (i..i+1, j..j+1), missing rows/cols read as zero.
// filters is D x 4 with each row holding f00 f01 f10 f11.
struct ConvLayer {
  Matrix filters;
  Vector bias;

  int depth() const { return static_cast<int>(filters.rows()); }
};

// rows x cols x depth activations, flattened as ((i * cols + j) * depth + d).
struct FeatureMap {
  int rows = 0;
  int cols = 0;
  int depth = 0;
  Vector values;

  double& at(int i, int j, int d) { return values[(static_cast<Eigen::Index>(i) * cols + j) * depth + d]; }
  double at(int i, int j, int d) const { return values[(static_cast<Eigen::Index>(i) * cols + j) * depth + d]; }
};

struct ConvGrads {
  Matrix grad_filters;
  Vector grad_bias;
  Matrix grad_input;
};

// tanh(conv(x) + b).
FeatureMap conv2d_forward(const ConvLayer& layer, const Matrix& x);
ConvGrads conv2d_backward(const ConvLayer& layer, const Matrix& x, const FeatureMap& y, const FeatureMap& upstream);

enum class Activation { none, tanh, softmax };

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
  Activation activation = Activation::none;
};

struct DenseGrads {
  Matrix grad_weights;
  Vector grad_bias;
  Matrix grad_input;  // in x batch
};

// Columns of x are samples.
Matrix dense_forward(const DenseLayer& layer, const Matrix& x);
// `y` is the forward output; gradients are summed over the batch columns.
DenseGrads dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& y, const Matrix& upstream);

Vector softmax(const Vector& logits);

inline constexpr double kProbabilityFloor = 1e-12;

struct XentResult {
  double loss = 0.0;
  Vector grad_logits;  // p - y for the combined softmax + cross-entropy
};

// -log p[target], with p[target] floored at kProbabilityFloor. target is a
// 0-based index into p.
XentResult softmax_xent(const Vector& p, int target);

struct DropoutResult {
  Matrix y;
  Matrix mask;  // 0 or 1/(1-rate); all ones when inactive
};

// Inverted dropout; identity at inference or when rate is 0.
DropoutResult dropout(const Matrix& x, double rate, SplitMix64& rng, bool training);

struct AdamConfig {
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

struct ParamSlot {
  std::string_view name;
  Eigen::Ref<Matrix> value;
  Eigen::Ref<const Matrix> grad;
};

// One bias-corrected Adam update over all slots; the step counter advances
// once per call. Any non-finite gradient aborts before anything changes.
void adam_step(std::span<ParamSlot> params, AdamState& state, const AdamConfig& config);

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix& m, int fan_in, int fan_out, SplitMix64& rng);

}  // namespace eegdgr::net
