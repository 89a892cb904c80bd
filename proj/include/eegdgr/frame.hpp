#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace eegdgr::stream {

// Header: magic 0xB2 | version 0x01 | kind | u32 LE payload length.
inline constexpr std::uint8_t kFrameMagic = 0xB2;
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 7;
inline constexpr std::uint32_t kMaxPayload = 1u << 20;

enum class FrameKind : std::uint8_t { sample = 1, decision = 2, hello = 3, error = 4 };

struct SampleFrame {
  std::vector<float> values;  // one value per channel
};

struct DecisionFrame {
  std::uint16_t class_id = 0;
  float confidence = 0.0f;
  std::uint16_t votes = 0;
  std::uint64_t timestamp_us = 0;  // monotonic clock
};

struct HelloFrame {
  std::uint8_t version = kWireVersion;
  std::uint16_t channels = 0;
  float sampling_rate = 0.0f;
};

enum class ErrorCode : std::uint16_t {
  malformed_frame = 1,
  version_mismatch = 2,
  channel_mismatch = 3,
  unexpected_frame = 4,
  internal = 5,
};

struct ErrorFrame {
  ErrorCode code = ErrorCode::internal;
  std::string message;
};

// Float fields compare bitwise so NaN payloads round-trip as equal.
bool operator==(const SampleFrame& a, const SampleFrame& b);
bool operator==(const DecisionFrame& a, const DecisionFrame& b);
bool operator==(const HelloFrame& a, const HelloFrame& b);
bool operator==(const ErrorFrame& a, const ErrorFrame& b);

using Frame = std::variant<SampleFrame, DecisionFrame, HelloFrame, ErrorFrame>;

FrameKind kind_of(const Frame& f);
const char* kind_name(FrameKind k);

enum class FrameErrorKind { truncated_header, bad_magic, bad_version, unknown_kind, length_mismatch, payload_too_large };

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FrameErrorKind kind() const { return kind_; }

 private:
  FrameErrorKind kind_;
};

struct FrameHeader {
  FrameKind kind;
  std::uint32_t payload_length;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);

// Validates magic, version, kind and the length cap of a 7-byte header.
FrameHeader decode_header(std::span<const std::uint8_t> header);
Frame decode_payload(FrameKind kind, std::span<const std::uint8_t> payload);

// Decodes exactly one frame; trailing or missing bytes are a length mismatch.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Incremental decoder for a byte stream.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  // Next complete frame, if buffered. Throws FrameError on malformed input.
  std::optional<Frame> next();
  std::size_t buffered() const { return buffer_.size() - start_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t start_ = 0;
};

}  // namespace eegdgr::stream
