#pragma once

#include "eegdgr/recording.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdgr {

// One training sample: channels x window matrix plus its class (1..K).
struct Epoch {
  Matrix data;
  int label = 0;
  std::string subject_id;
  double t0 = 0.0;
};

struct NormStats {
  Vector mean;
  Vector std;
};

struct SplitSpec {
  double train_fraction = 0.8;
  int num_batches = 4;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<std::vector<Epoch>> train_batches;
  std::vector<Epoch> test;
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kEpsStd = 1e-8;

// Maps event text to class id. Events whose text is absent are ignored.
using LabelMap = std::map<std::string, int>;

// Label map that reads event texts "1".."K" as class ids.
LabelMap numeric_label_map(int num_classes);

// Cuts windows of `window` samples, advancing by round(window*(1-overlap)),
// strictly inside each labeled event interval.
std::vector<Epoch> segment(const Recording& recording, int window, double overlap, const LabelMap& labels);

std::size_t windows_in_interval(std::size_t interval_samples, int window, int step);
int step_for(int window, double overlap);

// Per-channel mean/std pooled over all epochs and time points. Channels with
// std below kEpsStd are floored; `floored` (optional) receives their indices.
NormStats zscore_fit(const std::vector<Epoch>& epochs, std::vector<int>* floored = nullptr);
Matrix zscore_apply(const NormStats& stats, const Matrix& data);
Epoch zscore_apply(const NormStats& stats, const Epoch& epoch);

// Stratified deterministic split: per-class Fisher-Yates shuffles under the
// seed, a largest-remainder allocation of the test share, then the training
// pool shuffled and dealt into num_batches near-equal contiguous batches.
SplitResult split_and_batch(const std::vector<Epoch>& epochs, const SplitSpec& spec);

}  // namespace eegdgr
