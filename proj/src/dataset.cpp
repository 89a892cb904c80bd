#include "eegdgr/dataset.hpp"

#include "eegdgr/csv_recording.hpp"
#include "eegdgr/edf.hpp"

#include <algorithm>

namespace eegdgr {

namespace fs = std::filesystem;

DatasetKind parse_dataset_kind(const std::string& s) {
  if (s == "edf-dir" || s == "edf") return DatasetKind::edf_dir;
  if (s == "csv") return DatasetKind::csv;
  throw DatasetError("unknown dataset kind '" + s + "' (expected edf-dir or csv)");
}

const char* dataset_kind_name(DatasetKind k) { return k == DatasetKind::edf_dir ? "edf-dir" : "csv"; }

int default_window(DatasetKind k) { return k == DatasetKind::edf_dir ? 64 : 16; }

namespace {

std::vector<fs::path> matching_files(const DatasetSpec& spec) {
  if (!fs::exists(spec.path)) throw DatasetError("dataset path does not exist: " + spec.path.string());
  const std::string ext = spec.kind == DatasetKind::edf_dir ? ".edf" : ".csv";
  std::vector<fs::path> out;
  if (fs::is_regular_file(spec.path)) {
    out.push_back(spec.path);
  } else {
    for (const auto& entry : fs::directory_iterator(spec.path)) {
      if (!entry.is_regular_file()) continue;
      std::string e = entry.path().extension().string();
      std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (e == ext) out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (spec.kind == DatasetKind::edf_dir) {
    const auto runs = spec.runs.empty() ? edf::kEegmmidbImageryRuns : spec.runs;
    std::erase_if(out, [&](const fs::path& p) {
      const auto name = edf::parse_eegmmidb_name(p.filename().string());
      if (name.run < 0) return true;
      if (!spec.subject.empty() && name.subject != spec.subject) return true;
      return std::find(runs.begin(), runs.end(), name.run) == runs.end();
    });
  }
  if (out.empty()) {
    throw DatasetError("no " + std::string(dataset_kind_name(spec.kind)) + " recordings found under " +
                       spec.path.string());
  }
  return out;
}

}  // namespace

std::vector<Recording> load_recordings(const DatasetSpec& spec, std::vector<fs::path>* files) {
  const auto paths = matching_files(spec);
  std::vector<Recording> recs;
  for (const auto& p : paths) {
    recs.push_back(spec.kind == DatasetKind::edf_dir ? edf::read_edf_file(p) : load_local_csv(p));
  }
  if (files) *files = paths;
  return recs;
}

Dataset load_dataset(const DatasetSpec& spec) {
  Dataset ds;
  ds.window = spec.window > 0 ? spec.window : default_window(spec.kind);
  const auto recs = load_recordings(spec, &ds.files);

  std::vector<LabelMap> maps;
  if (spec.kind == DatasetKind::edf_dir) {
    ds.num_classes = 4;
    for (const auto& p : ds.files) {
      const auto m = edf::eegmmidb_label_map(edf::parse_eegmmidb_name(p.filename().string()).run);
      maps.emplace_back(m.begin(), m.end());
    }
  } else {
    for (const auto& r : recs) {
      for (const auto& ev : r.events) {
        try {
          ds.num_classes = std::max(ds.num_classes, std::stoi(ev.text));
        } catch (const std::exception&) {
          throw DatasetError("CSV event label '" + ev.text + "' is not a class id");
        }
      }
    }
    if (ds.num_classes < 1) throw DatasetError("no labelled samples in " + spec.path.string());
    maps.assign(recs.size(), numeric_label_map(ds.num_classes));
  }

  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Recording& r = recs[i];
    if (i == 0) {
      ds.num_channels = static_cast<int>(r.num_channels());
      ds.sampling_rate = r.sampling_rate;
      ds.channel_labels = r.channel_labels;
    } else if (r.num_channels() != ds.num_channels || r.sampling_rate != ds.sampling_rate) {
      throw DatasetError(ds.files[i].string() + " has " + std::to_string(r.num_channels()) + " channels at " +
                         std::to_string(r.sampling_rate) + " Hz, expected " + std::to_string(ds.num_channels) +
                         " at " + std::to_string(ds.sampling_rate));
    }
    auto epochs = segment(r, ds.window, spec.overlap, maps[i]);
    ds.epochs.insert(ds.epochs.end(), std::make_move_iterator(epochs.begin()), std::make_move_iterator(epochs.end()));
  }
  if (ds.epochs.empty()) throw DatasetError("segmentation produced no epochs from " + spec.path.string());
  return ds;
}

}  // namespace eegdgr
