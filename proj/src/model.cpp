#include "eegdgr/model.hpp"

#include <cmath>
#include <string>

namespace eegdgr::net {

namespace {

// Dropout masks come from their own stream so that changing the network size
// does not shift the split or the initialization.
constexpr std::uint64_t kDropoutStream = 0xD1B54A32D192ED03ULL;

int flat_size(int channels, int window, int depth) { return channels * window * depth; }

std::vector<Matrix> csp_inputs(const ClassifierModel& model, const std::vector<Epoch>& epochs) {
  std::vector<Matrix> out;
  out.reserve(epochs.size());
  for (const auto& ep : epochs) out.push_back(csp::apply_csp(model.csp, zscore_apply(model.norm, ep.data)));
  return out;
}

std::vector<int> labels_of(const std::vector<Epoch>& epochs) {
  std::vector<int> out;
  out.reserve(epochs.size());
  for (const auto& ep : epochs) out.push_back(ep.label);
  return out;
}

double accuracy_on_inputs(const ClassifierModel& model, const std::vector<Matrix>& inputs,
                          const std::vector<int>& labels) {
  if (inputs.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Vector p = cnn_probabilities(model, dgr::dgr_forward(model.adjacency, inputs[i]));
    if (predicted_class(model, p) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw NetError("learning rate must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw NetError("dropout rate must lie in [0, 1)");
  if (epochs < 0) throw NetError("epoch count must be non-negative");
  if (conv_depth < 1) throw NetError("convolution depth must be at least 1");
  if (hidden < 1) throw NetError("hidden layer needs at least one unit");
  if (patience < 0) throw NetError("patience must be non-negative");
}

void ClassifierModel::validate() const {
  const int m = num_channels();
  const int k = num_classes();
  if (m < 1 || window < 1 || k < 1) throw NetError("model dimensions must be positive");
  if (csp.w.rows() != m || csp.w.cols() != m) throw NetError("CSP filter bank must be M x M");
  if (norm.mean.size() != m || norm.std.size() != m) throw NetError("normalization stats must have M entries");
  if (adjacency.order() != m) throw NetError("adjacency must be M x M");
  const int d = conv.depth();
  if (d < 1 || conv.filters.cols() != 4 || conv.bias.size() != d) throw NetError("convolution layer malformed");
  if (fc_hidden.weights.cols() != flat_size(m, window, d) || fc_hidden.bias.size() != fc_hidden.weights.rows()) {
    throw NetError("hidden layer does not match the M*L*D flatten");
  }
  if (fc_out.weights.rows() != k || fc_out.weights.cols() != fc_hidden.weights.rows() || fc_out.bias.size() != k) {
    throw NetError("output layer does not match hidden size and class count");
  }
}

ClassifierModel init_model(const NormStats& norm, const csp::CspModel& csp, int window, int num_classes,
                           const TrainConfig& config) {
  config.validate();
  SplitMix64 rng(config.seed);
  ClassifierModel model;
  model.norm = norm;
  model.csp = csp;
  model.window = window;
  model.hyper = config;
  model.class_order = csp.class_order;
  if (static_cast<int>(model.class_order.size()) != num_classes) {
    model.class_order.clear();
    for (int k = 1; k <= num_classes; ++k) model.class_order.push_back(k);
  }
  const int m = csp.num_channels;
  const int d = config.conv_depth;
  model.adjacency = dgr::Adjacency(m);

  model.conv.filters.resize(d, 4);
  glorot_uniform(model.conv.filters, 4, 4 * d, rng);
  model.conv.bias = Vector::Zero(d);

  const int flat = flat_size(m, window, d);
  model.fc_hidden.weights.resize(config.hidden, flat);
  glorot_uniform(model.fc_hidden.weights, flat, config.hidden, rng);
  model.fc_hidden.bias = Vector::Zero(config.hidden);
  model.fc_hidden.activation = Activation::tanh;

  model.fc_out.weights.resize(num_classes, config.hidden);
  glorot_uniform(model.fc_out.weights, config.hidden, num_classes, rng);
  model.fc_out.bias = Vector::Zero(num_classes);
  model.fc_out.activation = Activation::softmax;
  return model;
}

double batch_loss(const ClassifierModel& model, const std::vector<Matrix>& inputs, const std::vector<int>& labels,
                  Gradients* grads, SplitMix64* dropout_rng) {
  if (inputs.empty() || inputs.size() != labels.size()) throw NetError("batch is empty or labels misaligned");
  const auto batch = static_cast<Eigen::Index>(inputs.size());
  const int m = model.num_channels();
  const int flat = flat_size(m, model.window, model.conv.depth());

  std::vector<Matrix> graph(inputs.size());
  std::vector<FeatureMap> maps(inputs.size());
  Matrix h0(flat, batch);
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    if (inputs[b].rows() != m || inputs[b].cols() != model.window) {
      throw NetError("input " + std::to_string(b) + " has shape " + std::to_string(inputs[b].rows()) + "x" +
                     std::to_string(inputs[b].cols()) + ", model expects " + std::to_string(m) + "x" +
                     std::to_string(model.window));
    }
    graph[b] = dgr::dgr_forward(model.adjacency, inputs[b]);
    maps[b] = conv2d_forward(model.conv, graph[b]);
    h0.col(static_cast<Eigen::Index>(b)) = maps[b].values;
  }

  SplitMix64 unused(0);
  const bool training = dropout_rng != nullptr;
  const DropoutResult drop = dropout(h0, model.hyper.dropout_rate, training ? *dropout_rng : unused, training);
  const Matrix h1 = dense_forward(model.fc_hidden, drop.y);
  const Matrix probs = dense_forward(model.fc_out, h1);

  double loss = 0.0;
  Matrix dlogits(probs.rows(), batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int label = labels[static_cast<std::size_t>(b)];
    int target = -1;
    for (std::size_t k = 0; k < model.class_order.size(); ++k) {
      if (model.class_order[k] == label) target = static_cast<int>(k);
    }
    if (target < 0) throw NetError("label " + std::to_string(label) + " is not a model class");
    const XentResult x = softmax_xent(probs.col(b), target);
    loss += x.loss;
    dlogits.col(b) = x.grad_logits;
  }
  const double scale = 1.0 / static_cast<double>(batch);
  loss *= scale;
  if (!grads) return loss;

  dlogits *= scale;
  grads->out_weights = dlogits * h1.transpose();
  grads->out_bias = dlogits.rowwise().sum();
  const Matrix dh1 = model.fc_out.weights.transpose() * dlogits;

  DenseGrads hidden = dense_backward(model.fc_hidden, drop.y, h1, dh1);
  grads->hidden_weights = std::move(hidden.grad_weights);
  grads->hidden_bias = std::move(hidden.grad_bias);
  const Matrix dh0 = hidden.grad_input.cwiseProduct(drop.mask);

  grads->adjacency = Matrix::Zero(m, m);
  grads->conv_filters = Matrix::Zero(model.conv.depth(), 4);
  grads->conv_bias = Vector::Zero(model.conv.depth());
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    FeatureMap up{maps[b].rows, maps[b].cols, maps[b].depth, dh0.col(static_cast<Eigen::Index>(b))};
    const ConvGrads cg = conv2d_backward(model.conv, graph[b], maps[b], up);
    grads->conv_filters += cg.grad_filters;
    grads->conv_bias += cg.grad_bias;
    grads->adjacency += dgr::dgr_grad(model.adjacency, inputs[b], cg.grad_input).grad_adj;
  }
  return loss;
}

TrainResult train_model(const std::vector<std::vector<Epoch>>& train_batches, const std::vector<Epoch>& test,
                        const TrainConfig& config) {
  config.validate();
  std::vector<Epoch> pool;
  for (const auto& batch : train_batches) pool.insert(pool.end(), batch.begin(), batch.end());
  if (pool.empty()) throw NetError("no training epochs");
  int num_classes = 0;
  for (const auto& ep : pool) {
    if (ep.label < 1) throw NetError("labels must be 1-based class ids");
    num_classes = std::max(num_classes, ep.label);
  }
  const int window = static_cast<int>(pool.front().data.cols());

  const NormStats norm = zscore_fit(pool);
  std::vector<Epoch> normalized;
  normalized.reserve(pool.size());
  for (const auto& ep : pool) normalized.push_back(zscore_apply(norm, ep));
  const csp::CspModel csp = csp::fit_csp(normalized, num_classes);

  TrainResult result;
  result.model = init_model(norm, csp, window, num_classes, config);
  ClassifierModel& model = result.model;

  std::vector<std::vector<Matrix>> batch_inputs;
  std::vector<std::vector<int>> batch_labels;
  for (const auto& batch : train_batches) {
    if (batch.empty()) continue;
    batch_inputs.push_back(csp_inputs(model, batch));
    batch_labels.push_back(labels_of(batch));
  }
  const auto test_inputs = csp_inputs(model, test);
  const auto test_labels = labels_of(test);

  SplitMix64 dropout_rng(config.seed ^ kDropoutStream);
  AdamState adam;
  const AdamConfig adam_config = config.adam();
  Matrix adjacency_raw = model.adjacency.matrix();

  ClassifierModel best = model;
  double best_accuracy = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch_inputs.size(); ++b) {
      Gradients g;
      const double loss = batch_loss(model, batch_inputs[b], batch_labels[b], &g, &dropout_rng);
      if (!std::isfinite(loss)) {
        throw NetError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      loss_sum += loss;
      std::vector<ParamSlot> slots{
          {"dgr.adjacency", adjacency_raw, g.adjacency},
          {"conv.filters", model.conv.filters, g.conv_filters},
          {"conv.bias", model.conv.bias, g.conv_bias},
          {"fc_hidden.weights", model.fc_hidden.weights, g.hidden_weights},
          {"fc_hidden.bias", model.fc_hidden.bias, g.hidden_bias},
          {"fc_out.weights", model.fc_out.weights, g.out_weights},
          {"fc_out.bias", model.fc_out.bias, g.out_bias},
      };
      adam_step(slots, adam, adam_config);
      model.adjacency = dgr::project_adjacency(adjacency_raw);
      adjacency_raw = model.adjacency.matrix();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batch_inputs.size());
    rec.test_accuracy = accuracy_on_inputs(model, test_inputs, test_labels);
    result.history.push_back(rec);

    if (test.empty() || rec.test_accuracy > best_accuracy) {
      best_accuracy = rec.test_accuracy;
      best = model;
      result.best_epoch = epoch;
    }
    if (config.patience > 0 && !test.empty() && epoch - result.best_epoch >= config.patience) break;
  }
  if (result.best_epoch > 0) model = std::move(best);
  return result;
}

Matrix graph_features(const ClassifierModel& model, const Matrix& raw_epoch) {
  if (raw_epoch.rows() != model.num_channels()) {
    throw NetError("model expects " + std::to_string(model.num_channels()) + " channels, got " +
                   std::to_string(raw_epoch.rows()));
  }
  if (raw_epoch.cols() != model.window) {
    throw NetError("model expects windows of " + std::to_string(model.window) + " samples, got " +
                   std::to_string(raw_epoch.cols()));
  }
  return dgr::dgr_forward(model.adjacency, csp::apply_csp(model.csp, zscore_apply(model.norm, raw_epoch)));
}

Vector cnn_probabilities(const ClassifierModel& model, const Matrix& features) {
  const FeatureMap map = conv2d_forward(model.conv, features);
  const Matrix h1 = dense_forward(model.fc_hidden, map.values);
  return dense_forward(model.fc_out, h1).col(0);
}

Vector predict(const ClassifierModel& model, const Matrix& raw_epoch) {
  return cnn_probabilities(model, graph_features(model, raw_epoch));
}

int predicted_class(const ClassifierModel& model, const Vector& probabilities) {
  Eigen::Index best = 0;
  probabilities.maxCoeff(&best);
  return model.class_order.at(static_cast<std::size_t>(best));
}

double accuracy(const ClassifierModel& model, const std::vector<Epoch>& epochs) {
  if (epochs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ep : epochs) {
    if (predicted_class(model, predict(model, ep.data)) == ep.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(epochs.size());
}

}  // namespace eegdgr::net
