#pragma once

#include "eegdgr/linalg.hpp"

#include <string>
#include <vector>

namespace eegdgr {

struct Annotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::string text;

  bool operator==(const Annotation&) const = default;
};

// Multichannel time series in physical units. data is channels x samples.
struct Recording {
  std::vector<std::string> channel_labels;
  double sampling_rate = 0.0;
  Matrix data;
  std::vector<Annotation> events;
  std::string source;  // file name or subject tag, informational

  Eigen::Index num_channels() const { return data.rows(); }
  Eigen::Index num_samples() const { return data.cols(); }
};

// Non-fatal problems met while parsing a file.
struct ParseReport {
  std::size_t clamped_samples = 0;
  std::size_t skipped_annotations = 0;
  std::vector<std::string> warnings;
};

}  // namespace eegdgr
