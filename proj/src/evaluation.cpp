#include "eegdgr/evaluation.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace eegdgr {

using nlohmann::json;

Evaluation evaluate(const net::ClassifierModel& model, const std::vector<Epoch>& epochs) {
  Evaluation e;
  for (const auto& ep : epochs) {
    e.probabilities.push_back(net::predict(model, ep.data));
    e.predictions.push_back(net::predicted_class(model, e.probabilities.back()));
    e.labels.push_back(ep.label);
  }
  e.confusion = metrics::confusion_matrix(e.predictions, e.labels, model.num_classes());
  e.report = metrics::prf1(e.confusion);
  e.roc = metrics::roc_auc_ovr(e.probabilities, e.labels, model.num_classes());
  return e;
}

metrics::LatencyReport latency_report(const net::ClassifierModel& model, double sampling_rate, int runs) {
  Matrix epoch = Matrix::Zero(model.num_channels(), model.window);
  SplitMix64 rng(1);
  for (Eigen::Index i = 0; i < epoch.size(); ++i) epoch.data()[i] = rng.normal();
  Matrix features;
  Vector probs;
  const std::vector<metrics::Stage> stages{
      {"acquisition", nullptr, model.window / sampling_rate},
      {"csp+dgr", [&] { features = net::graph_features(model, epoch); }, std::nullopt},
      {"cnn", [&] { probs = net::cnn_probabilities(model, features); }, std::nullopt},
  };
  return metrics::latency_probe(stages, runs);
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stage_json(const metrics::StageStats& s) { return {{"name", s.name}, {"mean_s", s.mean_s}, {"p95_s", s.p95_s}}; }

}  // namespace

std::string evaluation_json(const Evaluation& e, int indent) {
  json classes = json::array();
  for (std::size_t k = 0; k < e.report.per_class.size(); ++k) {
    const auto& c = e.report.per_class[k];
    classes.push_back({{"class", k + 1},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"auc", optional_number(e.roc.per_class[k].auc)}});
  }
  const json j{{"epochs", e.labels.size()},
               {"accuracy", e.report.accuracy},
               {"macro_precision", e.report.macro_precision},
               {"macro_recall", e.report.macro_recall},
               {"macro_f1", e.report.macro_f1},
               {"macro_auc", optional_number(e.roc.macro_auc)},
               {"per_class", classes},
               {"confusion", e.confusion.counts}};
  return j.dump(indent);
}

std::string latency_json(const metrics::LatencyReport& r, int indent) {
  json stages = json::array();
  for (const auto& s : r.stages) stages.push_back(stage_json(s));
  return json{{"stages", stages}, {"total", stage_json(r.total)}}.dump(indent);
}

std::string history_json(const net::TrainResult& r, int indent) {
  json epochs = json::array();
  for (const auto& h : r.history) {
    epochs.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"test_accuracy", h.test_accuracy}});
  }
  const auto& hp = r.model.hyper;
  return json{{"best_epoch", r.best_epoch},
              {"history", epochs},
              {"config",
               {{"learning_rate", hp.learning_rate},
                {"epochs", hp.epochs},
                {"patience", hp.patience},
                {"dropout_rate", hp.dropout_rate},
                {"conv_depth", hp.conv_depth},
                {"hidden", hp.hidden},
                {"seed", hp.seed}}}}
      .dump(indent);
}

std::string report_csv(const Evaluation& e) {
  std::ostringstream out;
  out << std::setprecision(17) << "class,precision,recall,f1,support,auc\n";
  for (std::size_t k = 0; k < e.report.per_class.size(); ++k) {
    const auto& c = e.report.per_class[k];
    out << k + 1 << ',' << c.precision << ',' << c.recall << ',' << c.f1 << ',' << c.support << ',';
    if (e.roc.per_class[k].auc) out << *e.roc.per_class[k].auc;
    out << '\n';
  }
  return out.str();
}

}  // namespace eegdgr
