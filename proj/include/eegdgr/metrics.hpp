#pragma once

#include "eegdgr/linalg.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdgr::metrics {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// counts[t][p]: true class t+1 predicted as p+1.
struct ConfusionMatrix {
  std::vector<std::vector<long>> counts;

  int num_classes() const { return static_cast<int>(counts.size()); }
  long total() const;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& preds, const std::vector<int>& labels, int num_classes);

struct ClassReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
  // Set when the corresponding denominator was zero and the metric was
  // reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct ClassificationReport {
  std::vector<ClassReport> per_class;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

ClassificationReport prf1(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold = 0.0;  // +-infinity at the endpoints
  double fpr = 0.0;
  double tpr = 0.0;
};

struct ClassRoc {
  std::vector<RocPoint> points;  // thresholds descending
  std::optional<double> auc;     // empty when the class (or its complement) is absent
};

struct RocReport {
  std::vector<ClassRoc> per_class;
  std::optional<double> macro_auc;  // mean over classes with a defined AUC
};

// One-vs-rest. prob_rows[i][k] is the score of class k+1 for sample i; AUC
// is the Mann-Whitney statistic with ties counted as 1/2.
RocReport roc_auc_ovr(const std::vector<Vector>& prob_rows, const std::vector<int>& labels, int num_classes);

// Area under the piecewise-linear curve through the ROC points.
double trapezoid_auc(const std::vector<RocPoint>& points);

struct StageStats {
  std::string name;
  double mean_s = 0.0;
  double p95_s = 0.0;
  std::vector<double> samples_s;
};

struct LatencyReport {
  std::vector<StageStats> stages;
  StageStats total;
};

// A stage is either timed (fn) or a fixed, computed duration (for example
// the acquisition time of a window, L / sampling rate).
struct Stage {
  std::string name;
  std::function<void()> fn;
  std::optional<double> fixed_seconds;
};

inline constexpr int kMinLatencyRuns = 20;

// Runs all stages in order `runs` times (at least kMinLatencyRuns). total is
// the per-run sum of fixed durations plus wall time across all timed stages.
LatencyReport latency_probe(const std::vector<Stage>& stages, int runs = kMinLatencyRuns);

std::string confusion_csv(const ConfusionMatrix& cm);
std::string roc_csv(const ClassRoc& roc);

}  // namespace eegdgr::metrics
