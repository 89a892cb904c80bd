#include "eegdgr/pipeline.hpp"

#include "eegdgr/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eegdgr {

LabelMap numeric_label_map(int num_classes) {
  LabelMap m;
  for (int k = 1; k <= num_classes; ++k) m[std::to_string(k)] = k;
  return m;
}

int step_for(int window, double overlap) {
  return static_cast<int>(std::lround(window * (1.0 - overlap)));
}

std::size_t windows_in_interval(std::size_t interval_samples, int window, int step) {
  const auto w = static_cast<std::size_t>(window);
  if (interval_samples < w) return 0;
  return (interval_samples - w) / static_cast<std::size_t>(step) + 1;
}

std::vector<Epoch> segment(const Recording& recording, int window, double overlap, const LabelMap& labels) {
  if (window < 2) throw PipelineError("window must be at least 2 samples, got " + std::to_string(window));
  if (!(overlap >= 0.0 && overlap < 1.0)) throw PipelineError("overlap must lie in [0, 1)");
  const int step = step_for(window, overlap);
  if (step < 1) throw PipelineError("window/overlap combination gives a step below one sample");

  const double fs = recording.sampling_rate;
  const auto total = static_cast<std::size_t>(recording.num_samples());
  std::vector<Epoch> out;
  for (std::size_t e = 0; e < recording.events.size(); ++e) {
    const auto& ev = recording.events[e];
    const auto it = labels.find(ev.text);
    if (it == labels.end()) continue;

    const auto begin = static_cast<std::size_t>(std::llround(ev.onset_s * fs));
    std::size_t end;
    if (ev.duration_s > 0.0) {
      end = begin + static_cast<std::size_t>(std::llround(ev.duration_s * fs));
    } else {
      // Zero-duration marker: the interval runs to the next marker.
      end = total;
      for (std::size_t n = e + 1; n < recording.events.size(); ++n) {
        const auto next = static_cast<std::size_t>(std::llround(recording.events[n].onset_s * fs));
        if (next > begin) {
          end = next;
          break;
        }
      }
    }
    end = std::min(end, total);
    if (end <= begin) continue;

    const std::size_t count = windows_in_interval(end - begin, window, step);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t start = begin + k * static_cast<std::size_t>(step);
      Epoch ep;
      ep.data = recording.data.middleCols(static_cast<Eigen::Index>(start), window);
      ep.label = it->second;
      ep.subject_id = recording.source;
      ep.t0 = static_cast<double>(start) / fs;
      out.push_back(std::move(ep));
    }
  }
  return out;
}

NormStats zscore_fit(const std::vector<Epoch>& epochs, std::vector<int>* floored) {
  if (epochs.empty()) throw PipelineError("zscore_fit needs at least one epoch");
  const Eigen::Index m = epochs.front().data.rows();
  Vector sum = Vector::Zero(m);
  double count = 0.0;
  for (const auto& ep : epochs) {
    if (ep.data.rows() != m) throw PipelineError("epochs disagree on channel count");
    sum += ep.data.rowwise().sum();
    count += static_cast<double>(ep.data.cols());
  }
  NormStats stats;
  stats.mean = sum / count;
  Vector sq = Vector::Zero(m);
  for (const auto& ep : epochs) {
    sq += (ep.data.colwise() - stats.mean).rowwise().squaredNorm();
  }
  stats.std = (sq / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (stats.std[i] < kEpsStd) {
      stats.std[i] = kEpsStd;
      if (floored) floored->push_back(static_cast<int>(i));
    }
  }
  return stats;
}

Matrix zscore_apply(const NormStats& stats, const Matrix& data) {
  if (data.rows() != stats.mean.size()) {
    throw PipelineError("normalization expects " + std::to_string(stats.mean.size()) + " channels, got " +
                        std::to_string(data.rows()));
  }
  return (data.colwise() - stats.mean).array().colwise() / stats.std.array();
}

Epoch zscore_apply(const NormStats& stats, const Epoch& epoch) {
  Epoch out = epoch;
  out.data = zscore_apply(stats, epoch.data);
  return out;
}

SplitResult split_and_batch(const std::vector<Epoch>& epochs, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw PipelineError("train_fraction must lie in (0, 1)");
  }
  if (spec.num_batches < 1) throw PipelineError("num_batches must be at least 1");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < epochs.size(); ++i) by_class[epochs[i].label].push_back(i);
  const std::size_t k = by_class.size();
  const std::size_t needed = static_cast<std::size_t>(spec.num_batches) * std::max<std::size_t>(k, 1);
  if (epochs.empty() || epochs.size() < needed) {
    throw PipelineError("too few epochs to split: have " + std::to_string(epochs.size()) + ", need at least " +
                        std::to_string(needed) + " (" + std::to_string(spec.num_batches) + " batches x " +
                        std::to_string(k) + " classes)");
  }

  SplitMix64 rng(spec.seed);
  const double test_share = 1.0 - spec.train_fraction;
  const auto test_total = static_cast<std::size_t>(std::llround(static_cast<double>(epochs.size()) * test_share));

  struct Quota {
    std::size_t count;
    double remainder;
    int label;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (auto& [label, idx] : by_class) {
    shuffle(std::span<std::size_t>(idx), rng);
    const double exact = static_cast<double>(idx.size()) * test_share;
    const auto base = static_cast<std::size_t>(std::floor(exact));
    quotas.push_back({base, exact - static_cast<double>(base), label});
    assigned += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  for (std::size_t i = 0; assigned < test_total && i < order.size(); ++i) {
    auto& q = quotas[order[i]];
    if (q.count < by_class[q.label].size()) {
      ++q.count;
      ++assigned;
    }
  }

  std::vector<std::size_t> test_idx;
  std::vector<std::size_t> train_idx;
  for (const auto& q : quotas) {
    const auto& idx = by_class[q.label];
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(q.count));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(q.count), idx.end());
  }
  shuffle(std::span<std::size_t>(test_idx), rng);
  shuffle(std::span<std::size_t>(train_idx), rng);
  if (train_idx.size() < static_cast<std::size_t>(spec.num_batches)) {
    throw PipelineError("training share too small for " + std::to_string(spec.num_batches) + " batches");
  }

  SplitResult out;
  for (std::size_t i : test_idx) out.test.push_back(epochs[i]);
  const std::size_t nb = static_cast<std::size_t>(spec.num_batches);
  const std::size_t base = train_idx.size() / nb;
  const std::size_t extra = train_idx.size() % nb;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    std::vector<Epoch> batch;
    batch.reserve(size);
    for (std::size_t j = 0; j < size; ++j) batch.push_back(epochs[train_idx[pos + j]]);
    pos += size;
    out.train_batches.push_back(std::move(batch));
  }
  return out;
}

}  // namespace eegdgr
