#include "eegdgr/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <regex>

namespace eegdgr::edf {

namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kSignalHeaderBytes = 256;

constexpr std::uint8_t kTalEnd = 0x00;
constexpr std::uint8_t kTalSep = 0x14;
constexpr std::uint8_t kTalDuration = 0x15;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string field(Bytes bytes, std::size_t offset, std::size_t width) {
  const auto* p = reinterpret_cast<const char*>(bytes.data() + offset);
  return trim(std::string_view(p, width));
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

template <typename T>
T numeric_field(Bytes bytes, std::size_t offset, std::size_t width, const std::string& name) {
  const std::string text = field(bytes, offset, width);
  T value{};
  if (!parse_number(text, value)) {
    throw EdfError(EdfErrorKind::bad_number, "EDF header field '" + name + "' is not numeric: '" + text + "'");
  }
  return value;
}

void warn(ParseReport* report, std::string message) {
  if (report) report->warnings.push_back(std::move(message));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

double SignalHeader::to_physical(int digital) const {
  return physical_min + (static_cast<double>(digital) - digital_min) * (physical_max - physical_min) /
                            (static_cast<double>(digital_max) - digital_min);
}

std::size_t EdfHeader::record_bytes() const {
  std::size_t total = 0;
  for (const auto& s : signals) total += static_cast<std::size_t>(s.samples_per_record) * 2;
  return total;
}

EdfHeader parse_edf_header(Bytes bytes) {
  if (bytes.size() < kFixedHeaderBytes) {
    throw EdfError(EdfErrorKind::short_input,
                   "EDF input too short: " + std::to_string(bytes.size()) + " bytes, need at least 256");
  }
  EdfHeader h;
  h.version = field(bytes, 0, 8);
  h.patient_id = field(bytes, 8, 80);
  h.recording_id = field(bytes, 88, 80);
  h.start_date = field(bytes, 168, 8);
  h.start_time = field(bytes, 176, 8);
  h.header_bytes = numeric_field<int>(bytes, 184, 8, "header bytes");
  h.reserved = field(bytes, 192, 44);
  h.num_records = numeric_field<long>(bytes, 236, 8, "number of data records");
  h.record_duration_s = numeric_field<double>(bytes, 244, 8, "record duration");
  h.num_signals = numeric_field<int>(bytes, 252, 4, "number of signals");

  if (h.num_signals < 1) {
    throw EdfError(EdfErrorKind::bad_number, "EDF header declares " + std::to_string(h.num_signals) + " signals");
  }
  const auto ns = static_cast<std::size_t>(h.num_signals);
  const std::size_t expected = kFixedHeaderBytes * (1 + ns);
  if (static_cast<std::size_t>(h.header_bytes) != expected) {
    throw EdfError(EdfErrorKind::header_size_mismatch,
                   "EDF header bytes field is " + std::to_string(h.header_bytes) + " but " +
                       std::to_string(h.num_signals) + " signals require " + std::to_string(expected));
  }
  if (bytes.size() < expected) {
    throw EdfError(EdfErrorKind::short_input, "EDF input too short for " + std::to_string(ns) +
                                                  " signal headers: " + std::to_string(bytes.size()) +
                                                  " bytes, need " + std::to_string(expected));
  }

  h.signals.resize(ns);
  std::size_t offset = kFixedHeaderBytes;
  auto each = [&](std::size_t width, auto&& assign) {
    for (std::size_t i = 0; i < ns; ++i) assign(h.signals[i], offset + i * width, width, i);
    offset += width * ns;
  };
  const auto label_of = [&](std::size_t i) { return "signal " + std::to_string(i); };
  each(16, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t) { s.label = field(bytes, o, w); });
  each(80, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t) { s.transducer = field(bytes, o, w); });
  each(8, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t) {
    s.physical_dimension = field(bytes, o, w);
  });
  each(8, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t i) {
    s.physical_min = numeric_field<double>(bytes, o, w, label_of(i) + " physical minimum");
  });
  each(8, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t i) {
    s.physical_max = numeric_field<double>(bytes, o, w, label_of(i) + " physical maximum");
  });
  each(8, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t i) {
    s.digital_min = numeric_field<int>(bytes, o, w, label_of(i) + " digital minimum");
  });
  each(8, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t i) {
    s.digital_max = numeric_field<int>(bytes, o, w, label_of(i) + " digital maximum");
  });
  each(80, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t) {
    s.prefiltering = field(bytes, o, w);
  });
  each(8, [&](SignalHeader& s, std::size_t o, std::size_t w, std::size_t i) {
    s.samples_per_record = numeric_field<int>(bytes, o, w, label_of(i) + " samples per record");
  });

  for (std::size_t i = 0; i < ns; ++i) {
    const auto& s = h.signals[i];
    if (s.digital_min >= s.digital_max) {
      throw EdfError(EdfErrorKind::bad_signal_range, "signal '" + s.label + "' has digital_min >= digital_max");
    }
    if (!s.is_annotation() && s.physical_min == s.physical_max) {
      throw EdfError(EdfErrorKind::bad_signal_range, "signal '" + s.label + "' has physical_min == physical_max");
    }
    if (s.samples_per_record < 1) {
      throw EdfError(EdfErrorKind::bad_number, "signal '" + s.label + "' has no samples per record");
    }
  }
  return h;
}

std::vector<std::vector<std::int16_t>> decode_digital(Bytes bytes, const EdfHeader& header) {
  const std::size_t record_bytes = header.record_bytes();
  const std::size_t start = static_cast<std::size_t>(header.header_bytes);
  if (bytes.size() < start) {
    throw EdfError(EdfErrorKind::short_input, "EDF input shorter than its header");
  }
  const std::size_t available = bytes.size() - start;
  std::size_t records = 0;
  if (header.num_records < 0) {
    records = available / record_bytes;
  } else {
    records = static_cast<std::size_t>(header.num_records);
    if (available < records * record_bytes) {
      throw EdfError(EdfErrorKind::truncated_payload,
                     "EDF payload truncated: " + std::to_string(available) + " bytes for " + std::to_string(records) +
                         " records of " + std::to_string(record_bytes) + " bytes");
    }
  }

  std::vector<std::vector<std::int16_t>> out(header.signals.size());
  for (std::size_t s = 0; s < header.signals.size(); ++s) {
    out[s].reserve(records * static_cast<std::size_t>(header.signals[s].samples_per_record));
  }
  std::size_t pos = start;
  for (std::size_t r = 0; r < records; ++r) {
    for (std::size_t s = 0; s < header.signals.size(); ++s) {
      for (int k = 0; k < header.signals[s].samples_per_record; ++k) {
        const auto lo = static_cast<std::uint16_t>(bytes[pos]);
        const auto hi = static_cast<std::uint16_t>(bytes[pos + 1]);
        out[s].push_back(static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8))));
        pos += 2;
      }
    }
  }
  return out;
}

Recording read_signal_data(Bytes bytes, const EdfHeader& header, ParseReport* report) {
  const auto digital = decode_digital(bytes, header);

  std::vector<std::size_t> data_signals;
  std::vector<std::uint8_t> tal_bytes;
  for (std::size_t s = 0; s < header.signals.size(); ++s) {
    if (header.signals[s].is_annotation()) continue;
    data_signals.push_back(s);
  }
  if (data_signals.empty()) {
    throw EdfError(EdfErrorKind::unsupported_layout, "EDF file has no data signals");
  }
  const int spr = header.signals[data_signals.front()].samples_per_record;
  for (std::size_t s : data_signals) {
    if (header.signals[s].samples_per_record != spr) {
      throw EdfError(EdfErrorKind::unsupported_layout,
                     "data signals with different sampling rates are not supported ('" + header.signals[s].label + "')");
    }
  }

  Recording rec;
  rec.sampling_rate = spr / header.record_duration_s;
  if (!(rec.sampling_rate > 0.0) || !std::isfinite(rec.sampling_rate)) {
    throw EdfError(EdfErrorKind::bad_number, "EDF record duration yields no valid sampling rate");
  }
  const auto total = static_cast<Eigen::Index>(digital[data_signals.front()].size());
  rec.data.resize(static_cast<Eigen::Index>(data_signals.size()), total);
  for (std::size_t row = 0; row < data_signals.size(); ++row) {
    const auto& sig = header.signals[data_signals[row]];
    rec.channel_labels.push_back(sig.label);
    const auto& samples = digital[data_signals[row]];
    for (Eigen::Index t = 0; t < total; ++t) {
      int d = samples[static_cast<std::size_t>(t)];
      if (d < sig.digital_min || d > sig.digital_max) {
        d = std::clamp(d, sig.digital_min, sig.digital_max);
        if (report) ++report->clamped_samples;
      }
      rec.data(static_cast<Eigen::Index>(row), t) = sig.to_physical(d);
    }
  }

  // TAL bytes are concatenated record by record; parse_tal handles the
  // zero padding between records.
  for (std::size_t s = 0; s < header.signals.size(); ++s) {
    if (!header.signals[s].is_annotation()) continue;
    const std::size_t spr_a = static_cast<std::size_t>(header.signals[s].samples_per_record);
    const std::size_t records = digital[s].size() / spr_a;
    for (std::size_t r = 0; r < records; ++r) {
      for (std::size_t k = 0; k < spr_a; ++k) {
        const auto v = static_cast<std::uint16_t>(digital[s][r * spr_a + k]);
        tal_bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
        tal_bytes.push_back(static_cast<std::uint8_t>(v >> 8));
      }
      tal_bytes.push_back(kTalEnd);
    }
  }
  rec.events = parse_tal(tal_bytes, report);
  return rec;
}

std::vector<Annotation> parse_tal(Bytes annotation_bytes, ParseReport* report) {
  std::vector<Annotation> events;
  const std::string_view all(reinterpret_cast<const char*>(annotation_bytes.data()), annotation_bytes.size());

  std::size_t start = 0;
  while (start < all.size()) {
    auto end = all.find(static_cast<char>(kTalEnd), start);
    if (end == std::string_view::npos) end = all.size();
    const std::string_view tal = all.substr(start, end - start);
    start = end + 1;
    if (tal.empty()) continue;

    const auto parts = split(tal, static_cast<char>(kTalSep));
    // parts[0] is "onset[\x15duration]"; the rest are annotation texts (the
    // trailing \x14 leaves an empty last element).
    const auto time_parts = split(parts[0], static_cast<char>(kTalDuration));
    std::vector<std::string_view> times;
    for (auto p : time_parts) {
      if (!p.empty()) times.push_back(p);
    }
    double onset = 0.0;
    if (times.empty() || !parse_number(times[0], onset) || !std::isfinite(onset)) {
      if (report) ++report->skipped_annotations;
      warn(report, "TAL with malformed onset '" + std::string(parts[0]) + "' skipped");
      continue;
    }
    if (onset < 0.0) {
      if (report) ++report->skipped_annotations;
      warn(report, "TAL with negative onset " + std::string(times[0]) + " skipped");
      continue;
    }
    double duration = 0.0;
    if (times.size() > 1 && !parse_number(times[1], duration)) {
      warn(report, "TAL duration '" + std::string(times[1]) + "' is not numeric, using 0");
      duration = 0.0;
    }
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (parts[i].empty()) continue;
      events.push_back(Annotation{onset, duration, std::string(parts[i])});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Annotation& a, const Annotation& b) { return a.onset_s < b.onset_s; });
  return events;
}

Recording read_edf_file(const std::filesystem::path& path, ParseReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EdfError(EdfErrorKind::io, "cannot open EDF file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const EdfHeader header = parse_edf_header(bytes);
  Recording rec = read_signal_data(bytes, header, report);
  rec.source = path.filename().string();
  return rec;
}

std::map<std::string, int> eegmmidb_label_map(int run) {
  switch (run) {
    case 3: case 4: case 7: case 8: case 11: case 12:
      return {{"T1", 1}, {"T2", 2}};
    case 5: case 6: case 9: case 10: case 13: case 14:
      return {{"T1", 3}, {"T2", 4}};
    default:
      return {};
  }
}

EegmmidbName parse_eegmmidb_name(const std::string& filename) {
  static const std::regex pattern(R"((S\d{3})R(\d{2})\.edf)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(filename, m, pattern)) return {};
  return {m[1].str(), std::stoi(m[2].str())};
}

}  // namespace eegdgr::edf
