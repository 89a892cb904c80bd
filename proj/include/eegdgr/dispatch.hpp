#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdgr::stream {

class DispatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogEntry {
  std::string object;
  std::filesystem::path model_path;
};

using Catalog = std::map<int, CatalogEntry>;

// {1: Mario, 2: car, 3: boat, 4: PinkiePie} with models/<name>.stl paths.
Catalog default_catalog();

// JSON object keyed by class id:
//   {"1": {"object": "Mario", "model": "models/mario.stl"}, ...}
Catalog parse_catalog(const std::string& json_text);
Catalog load_catalog(const std::filesystem::path& path);

struct DispatchRecord {
  int class_id = 0;
  std::string object;
  std::filesystem::path model_path;
  std::uint64_t timestamp_us = 0;
};

std::string to_ndjson(const DispatchRecord& r);

// Steady-clock microseconds.
std::uint64_t monotonic_us();

// Append-only NDJSON sink shared across threads. Timestamps assigned by the
// log are strictly increasing in append order.
class DispatchLog {
 public:
  explicit DispatchLog(std::ostream* out = nullptr) : out_(out) {}

  DispatchRecord append(DispatchRecord r);
  std::vector<DispatchRecord> records() const;

 private:
  mutable std::mutex mu_;
  std::ostream* out_;
  std::vector<DispatchRecord> records_;
  std::uint64_t last_us_ = 0;
};

// Resolves the class in the catalog and appends the record to the log when
// one is given.
DispatchRecord dispatch(int class_id, const Catalog& catalog, DispatchLog* log = nullptr);

}  // namespace eegdgr::stream
