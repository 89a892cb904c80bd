#pragma once

#include "eegdgr/pipeline.hpp"
#include "eegdgr/random.hpp"
#include "eegdgr/recording.hpp"

#include <cstdint>
#include <vector>

namespace eegdgr::synthetic {

// Zero-mean Gaussian sources mixed through a class-specific spatial matrix:
// x_t = A_k z_t. Each A_k is a shared random orthonormal basis with a
// class-specific set of boosted source directions, so the classes differ
// only in their spatial covariance. Sources are stationary unit-variance
// AR(1) processes, z_t = phi z_{t-1} + sqrt(1 - phi^2) e_t.
struct SyntheticSpec {
  int channels = 14;
  int classes = 4;
  int window = 16;
  double sampling_rate = 128.0;
  int epochs_per_class = 100;
  double boost = 20.0;           // gain on the class's own directions
  int directions_per_class = 3;  // boosted directions per class
  double ar_coefficient = 0.995;
  std::uint64_t seed = 7;
};

struct Mixing {
  std::vector<Matrix> per_class;  // channels x channels
  double ar_coefficient = 0.0;
};

Mixing make_mixing(const SyntheticSpec& spec);

// channels x samples signal for one class.
Matrix draw_signal(const Mixing& mixing, int class_id, int samples, SplitMix64& rng);

// epochs_per_class windows per class, interleaved by class.
std::vector<Epoch> synthetic_epochs(const SyntheticSpec& spec);

// Continuous recording of consecutive class blocks with one event per block
// (text = class id).
Recording synthetic_recording(const SyntheticSpec& spec, const std::vector<int>& class_sequence,
                              int samples_per_block, std::uint64_t stream_seed);

}  // namespace eegdgr::synthetic
