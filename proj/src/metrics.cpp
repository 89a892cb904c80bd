#include "eegdgr/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace eegdgr::metrics {

namespace {

double percentile95(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  // Nearest-rank.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

StageStats summarize(std::string name, std::vector<double> samples) {
  StageStats s;
  s.name = std::move(name);
  s.mean_s = samples.empty() ? 0.0 : std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  s.p95_s = percentile95(samples);
  s.samples_s = std::move(samples);
  return s;
}

}  // namespace

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& preds, const std::vector<int>& labels, int num_classes) {
  if (preds.size() != labels.size()) throw MetricsError("predictions and labels differ in length");
  if (num_classes < 1) throw MetricsError("need at least one class");
  ConfusionMatrix cm;
  cm.counts.assign(static_cast<std::size_t>(num_classes), std::vector<long>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int t = labels[i];
    const int p = preds[i];
    if (t < 1 || t > num_classes) throw MetricsError("label " + std::to_string(t) + " out of range");
    if (p < 1 || p > num_classes) throw MetricsError("prediction " + std::to_string(p) + " out of range");
    ++cm.counts[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(p - 1)];
  }
  return cm;
}

ClassificationReport prf1(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  const long total = cm.total();
  if (k == 0 || total == 0) throw MetricsError("confusion matrix is empty");
  ClassificationReport r;
  long diagonal = 0;
  for (int c = 0; c < k; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    long row = 0;
    long col = 0;
    for (int o = 0; o < k; ++o) {
      row += cm.counts[ci][static_cast<std::size_t>(o)];
      col += cm.counts[static_cast<std::size_t>(o)][ci];
    }
    const long tp = cm.counts[ci][ci];
    diagonal += tp;
    ClassReport cr;
    cr.support = row;
    cr.precision_undefined = col == 0;
    cr.recall_undefined = row == 0;
    cr.precision = col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
    cr.recall = row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
    const double denom = cr.precision + cr.recall;
    cr.f1 = denom == 0.0 ? 0.0 : 2.0 * cr.precision * cr.recall / denom;
    r.macro_precision += cr.precision;
    r.macro_recall += cr.recall;
    r.macro_f1 += cr.f1;
    r.per_class.push_back(cr);
  }
  r.macro_precision /= k;
  r.macro_recall /= k;
  r.macro_f1 /= k;
  r.accuracy = static_cast<double>(diagonal) / static_cast<double>(total);
  return r;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  }
  return area;
}

RocReport roc_auc_ovr(const std::vector<Vector>& prob_rows, const std::vector<int>& labels, int num_classes) {
  if (prob_rows.size() != labels.size()) throw MetricsError("score rows and labels differ in length");
  const std::size_t n = labels.size();
  RocReport report;
  double auc_sum = 0.0;
  int auc_count = 0;
  for (int c = 1; c <= num_classes; ++c) {
    std::vector<std::pair<double, bool>> scored(n);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (prob_rows[i].size() != num_classes) throw MetricsError("score row has the wrong class count");
      scored[i] = {prob_rows[i][c - 1], labels[i] == c};
      if (labels[i] == c) ++positives;
    }
    const std::size_t negatives = n - positives;
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    ClassRoc roc;
    constexpr double inf = std::numeric_limits<double>::infinity();
    roc.points.push_back({inf, 0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    // Mann-Whitney with midranks over tied groups, computed on the sorted
    // order: each positive earns the count of negatives strictly below plus
    // half of those tied with it.
    double wins = 0.0;
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      std::size_t group_pos = 0;
      std::size_t group_neg = 0;
      while (j < n && scored[j].first == scored[i].first) {
        (scored[j].second ? group_pos : group_neg) += 1;
        ++j;
      }
      const std::size_t neg_below = negatives - fp - group_neg;
      wins += static_cast<double>(group_pos) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(group_neg));
      tp += group_pos;
      fp += group_neg;
      roc.points.push_back({scored[i].first, negatives ? static_cast<double>(fp) / static_cast<double>(negatives) : 0.0,
                            positives ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0});
      i = j;
    }
    roc.points.push_back({-inf, 1.0, 1.0});
    if (positives > 0 && negatives > 0) {
      roc.auc = wins / (static_cast<double>(positives) * static_cast<double>(negatives));
      auc_sum += *roc.auc;
      ++auc_count;
    }
    report.per_class.push_back(std::move(roc));
  }
  if (auc_count > 0) report.macro_auc = auc_sum / auc_count;
  return report;
}

LatencyReport latency_probe(const std::vector<Stage>& stages, int runs) {
  using clock = std::chrono::steady_clock;
  runs = std::max(runs, kMinLatencyRuns);
  std::vector<std::vector<double>> per_stage(stages.size());
  std::vector<double> totals;
  for (int r = 0; r < runs; ++r) {
    double total = 0.0;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      double elapsed = 0.0;
      if (stages[s].fixed_seconds) {
        elapsed = *stages[s].fixed_seconds;
      } else if (stages[s].fn) {
        const auto t0 = clock::now();
        stages[s].fn();
        elapsed = std::chrono::duration<double>(clock::now() - t0).count();
      }
      per_stage[s].push_back(elapsed);
      total += elapsed;
    }
    totals.push_back(total);
  }
  LatencyReport report;
  for (std::size_t s = 0; s < stages.size(); ++s) report.stages.push_back(summarize(stages[s].name, per_stage[s]));
  report.total = summarize("total", totals);
  return report;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream os;
  for (const auto& row : cm.counts) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
    os << '\n';
  }
  return os.str();
}

std::string roc_csv(const ClassRoc& roc) {
  std::ostringstream os;
  os.precision(17);
  os << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points) {
    if (std::isinf(p.threshold)) {
      os << (p.threshold > 0 ? "inf" : "-inf");
    } else {
      os << p.threshold;
    }
    os << ',' << p.fpr << ',' << p.tpr << '\n';
  }
  return os.str();
}

}  // namespace eegdgr::metrics
