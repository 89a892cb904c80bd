#pragma once

#include "eegdgr/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdgr::net {

// Container layout:
//   "B2O1" | u32 LE manifest length | UTF-8 JSON manifest | tensor blobs
// Blobs are f64 LE, row-major; manifest offsets are relative to the first
// blob byte.
inline constexpr char kModelMagic[4] = {'B', '2', 'O', '1'};
inline constexpr int kModelFormatVersion = 1;

enum class ModelIoErrorKind { bad_magic, version_mismatch, length_mismatch, malformed_manifest, io };

class ModelIoError : public std::runtime_error {
 public:
  ModelIoError(ModelIoErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ModelIoErrorKind kind() const { return kind_; }

 private:
  ModelIoErrorKind kind_;
};

std::vector<std::uint8_t> serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace eegdgr::net
