#include "eegdgr/csv_recording.hpp"

#include "eegdgr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string_view>
#include <vector>

namespace eegdgr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  std::string_view s = cell;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw CsvError("row " + std::to_string(row) + ", column " + std::to_string(col) + ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".cfg");
  return p;
}

Recording load_local_csv(const std::filesystem::path& path, std::optional<double> sampling_rate) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open CSV file " + path.string());

  KeyValues cfg;
  if (const auto side = sidecar_path(path); std::filesystem::exists(side)) cfg = read_key_values(side);
  if (!sampling_rate) sampling_rate = get_double(cfg, "sampling_rate");
  if (!sampling_rate || !(*sampling_rate > 0.0)) {
    throw CsvError("no positive sampling rate for " + path.string() + " (set sampling_rate in " +
                   sidecar_path(path).string() + ")");
  }
  std::map<long long, long long> label_map;
  for (const auto& [key, value] : cfg) {
    if (key.rfind("label.", 0) == 0) {
      label_map[std::stoll(key.substr(6))] = std::stoll(value);
    }
  }

  std::string line;
  if (!std::getline(in, line)) throw CsvError(path.string() + ": no header row");
  const auto header = split_csv_line(line);
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") label_col = c;
  }
  if (label_col == header.size()) throw CsvError(path.string() + ": missing 'label' column");

  Recording rec;
  rec.sampling_rate = *sampling_rate;
  rec.source = path.filename().string();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) rec.channel_labels.push_back(header[c]);
  }
  const std::size_t channels = rec.channel_labels.size();
  if (channels == 0) throw CsvError(path.string() + ": no channel columns");

  std::vector<double> values;  // sample-major
  std::vector<long long> labels;
  std::vector<bool> breaks;  // a dropped row precedes this kept row
  bool pending_break = false;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw CsvError(path.string() + ": ragged row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                     " cells, expected " + std::to_string(header.size()));
    }
    const double raw_label = parse_cell(cells[label_col], row, label_col);
    if (raw_label != std::floor(raw_label)) {
      throw CsvError(path.string() + ": row " + std::to_string(row) + " has non-integer label");
    }
    long long label = static_cast<long long>(raw_label);
    if (!label_map.empty() && label != 0) {
      const auto it = label_map.find(label);
      label = it == label_map.end() ? 0 : it->second;
    }
    if (label == 0) {
      pending_break = true;
      continue;
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c != label_col) values.push_back(parse_cell(cells[c], row, c));
    }
    labels.push_back(label);
    breaks.push_back(pending_break);
    pending_break = false;
  }
  if (labels.empty()) throw CsvError(path.string() + ": no samples");

  const auto total = static_cast<Eigen::Index>(labels.size());
  rec.data.resize(static_cast<Eigen::Index>(channels), total);
  for (Eigen::Index t = 0; t < total; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      rec.data(static_cast<Eigen::Index>(c), t) = values[static_cast<std::size_t>(t) * channels + c];
    }
  }
  std::size_t run_start = 0;
  for (std::size_t t = 1; t <= labels.size(); ++t) {
    if (t == labels.size() || labels[t] != labels[run_start] || breaks[t]) {
      rec.events.push_back(Annotation{static_cast<double>(run_start) / rec.sampling_rate,
                                      static_cast<double>(t - run_start) / rec.sampling_rate,
                                      std::to_string(labels[run_start])});
      run_start = t;
    }
  }
  return rec;
}

void write_local_csv(const std::filesystem::path& path, const Recording& rec) {
  std::vector<long long> labels(static_cast<std::size_t>(rec.num_samples()), 0);
  for (const auto& ev : rec.events) {
    const long long id = std::stoll(ev.text);
    const auto begin = static_cast<std::size_t>(std::llround(ev.onset_s * rec.sampling_rate));
    const auto end = std::min(labels.size(),
                              static_cast<std::size_t>(std::llround((ev.onset_s + ev.duration_s) * rec.sampling_rate)));
    for (std::size_t t = begin; t < end; ++t) labels[t] = id;
  }

  std::ofstream out(path);
  if (!out) throw CsvError("cannot write CSV file " + path.string());
  for (const auto& name : rec.channel_labels) out << name << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (Eigen::Index t = 0; t < rec.num_samples(); ++t) {
    for (Eigen::Index c = 0; c < rec.num_channels(); ++c) out << rec.data(c, t) << ',';
    out << labels[static_cast<std::size_t>(t)] << '\n';
  }

  std::ofstream side(sidecar_path(path));
  if (!side) throw CsvError("cannot write sidecar " + sidecar_path(path).string());
  side << std::setprecision(17) << "sampling_rate = " << rec.sampling_rate << '\n';
}

}  // namespace eegdgr
