#include "eegdgr/dispatch.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace eegdgr::stream {

using json = nlohmann::json;

Catalog default_catalog() {
  return {
      {1, {"Mario", "models/mario.stl"}},
      {2, {"car", "models/car.stl"}},
      {3, {"boat", "models/boat.stl"}},
      {4, {"PinkiePie", "models/pinkiepie.stl"}},
  };
}

Catalog parse_catalog(const std::string& json_text) {
  Catalog catalog;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw DispatchError("catalog must be a JSON object keyed by class id");
    for (const auto& [key, value] : j.items()) {
      std::size_t used = 0;
      int id = 0;
      try {
        id = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || id < 1) throw DispatchError("catalog key '" + key + "' is not a class id");
      CatalogEntry e;
      e.object = value.at("object").get<std::string>();
      e.model_path = value.value("model", std::string{});
      if (e.object.empty()) throw DispatchError("catalog entry " + key + " has an empty object name");
      catalog[id] = std::move(e);
    }
  } catch (const json::exception& e) {
    throw DispatchError(std::string("malformed catalog: ") + e.what());
  }
  if (catalog.empty()) throw DispatchError("catalog is empty");
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DispatchError("cannot open catalog " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

std::string to_ndjson(const DispatchRecord& r) {
  return json{{"event", "dispatch"},
              {"class", r.class_id},
              {"object", r.object},
              {"model", r.model_path.string()},
              {"timestamp_us", r.timestamp_us}}
      .dump();
}

std::uint64_t monotonic_us() {
  const auto now = std::chrono::steady_clock::now().time_since_epoch();
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(now).count());
}

DispatchRecord DispatchLog::append(DispatchRecord r) {
  std::lock_guard lock(mu_);
  r.timestamp_us = std::max(monotonic_us(), last_us_ + 1);
  last_us_ = r.timestamp_us;
  if (out_) {
    *out_ << to_ndjson(r) << '\n';
    out_->flush();
  }
  records_.push_back(r);
  return r;
}

std::vector<DispatchRecord> DispatchLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

DispatchRecord dispatch(int class_id, const Catalog& catalog, DispatchLog* log) {
  const auto it = catalog.find(class_id);
  if (it == catalog.end()) throw DispatchError("class " + std::to_string(class_id) + " is not in the catalog");
  DispatchRecord r;
  r.class_id = class_id;
  r.object = it->second.object;
  r.model_path = it->second.model_path;
  if (log) return log->append(std::move(r));
  r.timestamp_us = monotonic_us();
  return r;
}

}  // namespace eegdgr::stream
