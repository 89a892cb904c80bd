#pragma once

#include "eegdgr/csp.hpp"
#include "eegdgr/dgr.hpp"
#include "eegdgr/layers.hpp"
#include "eegdgr/pipeline.hpp"

#include <cstdint>
#include <vector>

namespace eegdgr::net {

struct TrainConfig {
  double learning_rate = 0.0005;
  int epochs = 100;
  int patience = 20;  // early stop on test accuracy; 0 disables
  double dropout_rate = 0.5;
  int conv_depth = 10;
  int hidden = 120;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
  void validate() const;
};

// The deployable unit: normalization, CSP, graph layer and CNN.
struct ClassifierModel {
  NormStats norm;
  csp::CspModel csp;
  dgr::Adjacency adjacency;
  ConvLayer conv;
  DenseLayer fc_hidden;  // tanh
  DenseLayer fc_out;     // softmax
  TrainConfig hyper;
  std::vector<int> class_order;
  int window = 0;

  int num_channels() const { return csp.num_channels; }
  int num_classes() const { return static_cast<int>(class_order.size()); }
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  ClassifierModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0 when no training happened
};

// Trainable parameters' gradients, shaped like the parameters.
struct Gradients {
  Matrix adjacency;
  Matrix conv_filters;
  Vector conv_bias;
  Matrix hidden_weights;
  Vector hidden_bias;
  Matrix out_weights;
  Vector out_bias;
};

// Fresh network weights for the given CSP/normalization, seeded from config.
ClassifierModel init_model(const NormStats& norm, const csp::CspModel& csp, int window, int num_classes,
                           const TrainConfig& config);

// Mean cross-entropy over a batch of CSP-filtered inputs (labels 1..K), with
// gradients averaged over the batch. Dropout is applied when dropout_rng is
// non-null and the model's rate is positive.
double batch_loss(const ClassifierModel& model, const std::vector<Matrix>& csp_inputs, const std::vector<int>& labels,
                  Gradients* grads, SplitMix64* dropout_rng);

// Fits normalization and CSP on the union of the training batches, then
// trains CSP -> DGR -> conv -> dense -> dense with Adam. The returned model
// holds the parameters from the epoch with the best test accuracy.
TrainResult train_model(const std::vector<std::vector<Epoch>>& train_batches, const std::vector<Epoch>& test,
                        const TrainConfig& config);

// Normalization + CSP + DGR for one raw epoch.
Matrix graph_features(const ClassifierModel& model, const Matrix& raw_epoch);
// CNN on graph features; returns class probabilities.
Vector cnn_probabilities(const ClassifierModel& model, const Matrix& features);

// Inference on a raw epoch (no dropout). Sums to 1.
Vector predict(const ClassifierModel& model, const Matrix& raw_epoch);

// Class id (from class_order) with the highest probability.
int predicted_class(const ClassifierModel& model, const Vector& probabilities);

double accuracy(const ClassifierModel& model, const std::vector<Epoch>& epochs);

}  // namespace eegdgr::net
