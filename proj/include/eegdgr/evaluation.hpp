#pragma once

#include "eegdgr/metrics.hpp"
#include "eegdgr/model.hpp"

#include <string>
#include <vector>

namespace eegdgr {

struct Evaluation {
  std::vector<int> labels;
  std::vector<int> predictions;
  std::vector<Vector> probabilities;
  metrics::ConfusionMatrix confusion;
  metrics::ClassificationReport report;
  metrics::RocReport roc;
};

// Throws net::NetError when epoch shapes do not match the model.
Evaluation evaluate(const net::ClassifierModel& model, const std::vector<Epoch>& epochs);

// Stage decomposition for one window: acquisition (window / sampling rate),
// csp+dgr and cnn.
metrics::LatencyReport latency_report(const net::ClassifierModel& model, double sampling_rate,
                                      int runs = metrics::kMinLatencyRuns);

std::string evaluation_json(const Evaluation& e, int indent = 2);
std::string latency_json(const metrics::LatencyReport& r, int indent = 2);
std::string history_json(const net::TrainResult& r, int indent = 2);
// One row per class: class,precision,recall,f1,support,auc
std::string report_csv(const Evaluation& e);

}  // namespace eegdgr
