#pragma once

#include "eegdgr/recording.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>

namespace eegdgr {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sidecar next to "name.csv" is "name.cfg":
//   sampling_rate = 128
//   label.<raw> = <class id>     (optional; when present, unmapped labels drop)
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

// Reads a comma-separated recording with a header row of channel names and
// one "label" column. Rows labeled 0 are dropped; each contiguous run of an
// equal label becomes one event whose text is the class id. A sampling_rate
// argument overrides the sidecar.
Recording load_local_csv(const std::filesystem::path& path, std::optional<double> sampling_rate = std::nullopt);

// Writes the CSV plus its sidecar. Samples outside every event get label 0;
// event texts must be integer class ids.
void write_local_csv(const std::filesystem::path& path, const Recording& rec);

}  // namespace eegdgr
