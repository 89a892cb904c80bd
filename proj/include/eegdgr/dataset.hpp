#pragma once

#include "eegdgr/pipeline.hpp"
#include "eegdgr/recording.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdgr {

enum class DatasetKind { edf_dir, csv };

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

DatasetKind parse_dataset_kind(const std::string& s);
const char* dataset_kind_name(DatasetKind k);
// 64 for eegmmidb EDF directories, 16 for local CSV recordings.
int default_window(DatasetKind k);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::csv;
  std::filesystem::path path;  // directory, or a single .csv file
  int window = 0;              // 0: default_window(kind)
  double overlap = 0.5;
  std::string subject;         // edf-dir only; empty keeps every subject
  std::vector<int> runs;       // edf-dir only; empty: imagery runs
};

struct Dataset {
  std::vector<Epoch> epochs;
  int num_channels = 0;
  int num_classes = 0;
  int window = 0;
  double sampling_rate = 0.0;
  std::vector<std::string> channel_labels;
  std::vector<std::filesystem::path> files;
};

// Reads every matching file and segments it. Recordings must agree on
// channel count and sampling rate.
Dataset load_dataset(const DatasetSpec& spec);

// Recordings only, unsegmented, in file-name order.
std::vector<Recording> load_recordings(const DatasetSpec& spec, std::vector<std::filesystem::path>* files = nullptr);

}  // namespace eegdgr
