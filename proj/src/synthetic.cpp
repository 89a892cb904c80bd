#include "eegdgr/synthetic.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>
#include <string>

namespace eegdgr::synthetic {

Mixing make_mixing(const SyntheticSpec& spec) {
  if (spec.channels < 1 || spec.classes < 1) throw std::invalid_argument("synthetic spec needs channels and classes");
  if (spec.classes * spec.directions_per_class > spec.channels) {
    throw std::invalid_argument("classes x directions_per_class exceeds the channel count");
  }
  SplitMix64 rng(spec.seed);
  Matrix g(spec.channels, spec.channels);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  }
  const Matrix basis = Eigen::HouseholderQR<Matrix>(g).householderQ();

  if (!(spec.ar_coefficient >= 0.0 && spec.ar_coefficient < 1.0)) {
    throw std::invalid_argument("ar_coefficient must lie in [0, 1)");
  }
  Mixing m;
  m.ar_coefficient = spec.ar_coefficient;
  for (int k = 0; k < spec.classes; ++k) {
    Vector gain = Vector::Ones(spec.channels);
    for (int d = 0; d < spec.directions_per_class; ++d) gain[k * spec.directions_per_class + d] = spec.boost;
    m.per_class.push_back(basis * gain.asDiagonal());
  }
  return m;
}

Matrix draw_signal(const Mixing& mixing, int class_id, int samples, SplitMix64& rng) {
  if (class_id < 1 || class_id > static_cast<int>(mixing.per_class.size())) {
    throw std::invalid_argument("class " + std::to_string(class_id) + " has no mixing matrix");
  }
  const Matrix& a = mixing.per_class[static_cast<std::size_t>(class_id - 1)];
  const double phi = mixing.ar_coefficient;
  const double innovation = std::sqrt(1.0 - phi * phi);
  Matrix z(a.cols(), samples);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double v = rng.normal();
    for (Eigen::Index t = 0; t < z.cols(); ++t) {
      if (t > 0) v = phi * v + innovation * rng.normal();
      z(i, t) = v;
    }
  }
  return a * z;
}

std::vector<Epoch> synthetic_epochs(const SyntheticSpec& spec) {
  const Mixing mixing = make_mixing(spec);
  SplitMix64 rng(spec.seed ^ 0x5EED5EED5EED5EEDULL);
  std::vector<Epoch> out;
  out.reserve(static_cast<std::size_t>(spec.classes * spec.epochs_per_class));
  for (int i = 0; i < spec.epochs_per_class; ++i) {
    for (int k = 1; k <= spec.classes; ++k) {
      Epoch e;
      e.data = draw_signal(mixing, k, spec.window, rng);
      e.label = k;
      e.subject_id = "synthetic";
      e.t0 = static_cast<double>(out.size() * static_cast<std::size_t>(spec.window)) / spec.sampling_rate;
      out.push_back(std::move(e));
    }
  }
  return out;
}

Recording synthetic_recording(const SyntheticSpec& spec, const std::vector<int>& class_sequence,
                              int samples_per_block, std::uint64_t stream_seed) {
  const Mixing mixing = make_mixing(spec);
  SplitMix64 rng(stream_seed);
  Recording rec;
  rec.sampling_rate = spec.sampling_rate;
  rec.source = "synthetic";
  for (int c = 0; c < spec.channels; ++c) rec.channel_labels.push_back("S" + std::to_string(c + 1));
  rec.data.resize(spec.channels, static_cast<Eigen::Index>(class_sequence.size()) * samples_per_block);
  for (std::size_t b = 0; b < class_sequence.size(); ++b) {
    const auto col = static_cast<Eigen::Index>(b) * samples_per_block;
    rec.data.middleCols(col, samples_per_block) = draw_signal(mixing, class_sequence[b], samples_per_block, rng);
    rec.events.push_back({static_cast<double>(col) / spec.sampling_rate,
                          static_cast<double>(samples_per_block) / spec.sampling_rate,
                          std::to_string(class_sequence[b])});
  }
  return rec;
}

}  // namespace eegdgr::synthetic
