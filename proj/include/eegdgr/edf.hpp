#pragma once

#include "eegdgr/recording.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdgr::edf {

enum class EdfErrorKind {
  short_input,
  bad_number,
  header_size_mismatch,
  bad_signal_range,
  truncated_payload,
  unsupported_layout,
  io,
};

class EdfError : public std::runtime_error {
 public:
  EdfError(EdfErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  EdfErrorKind kind() const { return kind_; }

 private:
  EdfErrorKind kind_;
};

inline constexpr std::string_view kAnnotationLabel = "EDF Annotations";

struct SignalHeader {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;
  int samples_per_record = 0;

  bool is_annotation() const { return label == kAnnotationLabel; }
  // Affine digital -> physical map.
  double to_physical(int digital) const;
};

struct EdfHeader {
  std::string version;
  std::string patient_id;
  std::string recording_id;
  std::string start_date;  // dd.mm.yy
  std::string start_time;  // hh.mm.ss
  int header_bytes = 0;
  std::string reserved;  // "EDF+C" / "EDF+D" for EDF+
  long num_records = 0;
  double record_duration_s = 0.0;
  int num_signals = 0;
  std::vector<SignalHeader> signals;

  std::size_t record_bytes() const;
};

using Bytes = std::span<const std::uint8_t>;

EdfHeader parse_edf_header(Bytes bytes);

// Raw 16-bit samples per signal (annotation signals included), in file order.
std::vector<std::vector<std::int16_t>> decode_digital(Bytes bytes, const EdfHeader& header);

// Decodes data signals to physical units. Annotation signals are excluded
// from data and routed through parse_tal into events. Out-of-range digital
// values are clamped and counted in the report.
Recording read_signal_data(Bytes bytes, const EdfHeader& header, ParseReport* report = nullptr);

std::vector<Annotation> parse_tal(Bytes annotation_bytes, ParseReport* report = nullptr);

Recording read_edf_file(const std::filesystem::path& path, ParseReport* report = nullptr);

// eegmmidb task runs. Runs {3,4,7,8,11,12}: T1 -> 1 (left hand), T2 -> 2
// (right hand). Runs {5,6,9,10,13,14}: T1 -> 3 (both hands), T2 -> 4 (both
// feet). Other runs (baselines) yield an empty map.
std::map<std::string, int> eegmmidb_label_map(int run);

// Imagined-movement runs used by default.
inline const std::vector<int> kEegmmidbImageryRuns{4, 6, 8, 10, 12, 14};

// Parses "S001R04.edf" -> {subject "S001", run 4}; run is -1 when the name
// does not follow that pattern.
struct EegmmidbName {
  std::string subject;
  int run = -1;
};
EegmmidbName parse_eegmmidb_name(const std::string& filename);

}  // namespace eegdgr::edf
