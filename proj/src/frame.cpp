#include "eegdgr/frame.hpp"

#include <bit>
#include <cstring>

namespace eegdgr::stream {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  using U = std::make_unsigned_t<T>;
  const auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  return v;
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }

bool same_bits(float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }

FrameError length_error(FrameKind kind, std::size_t got, const std::string& expected) {
  return FrameError(FrameErrorKind::length_mismatch, std::string(kind_name(kind)) + " payload has " +
                                                         std::to_string(got) + " bytes, expected " + expected);
}

}  // namespace

bool operator==(const SampleFrame& a, const SampleFrame& b) {
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (!same_bits(a.values[i], b.values[i])) return false;
  }
  return true;
}

bool operator==(const DecisionFrame& a, const DecisionFrame& b) {
  return a.class_id == b.class_id && same_bits(a.confidence, b.confidence) && a.votes == b.votes &&
         a.timestamp_us == b.timestamp_us;
}

bool operator==(const HelloFrame& a, const HelloFrame& b) {
  return a.version == b.version && a.channels == b.channels && same_bits(a.sampling_rate, b.sampling_rate);
}

bool operator==(const ErrorFrame& a, const ErrorFrame& b) { return a.code == b.code && a.message == b.message; }

FrameKind kind_of(const Frame& f) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SampleFrame>) return FrameKind::sample;
        if constexpr (std::is_same_v<T, DecisionFrame>) return FrameKind::decision;
        if constexpr (std::is_same_v<T, HelloFrame>) return FrameKind::hello;
        if constexpr (std::is_same_v<T, ErrorFrame>) return FrameKind::error;
      },
      f);
}

const char* kind_name(FrameKind k) {
  switch (k) {
    case FrameKind::sample: return "SAMPLE";
    case FrameKind::decision: return "DECISION";
    case FrameKind::hello: return "HELLO";
    case FrameKind::error: return "ERROR";
  }
  return "UNKNOWN";
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> payload;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SampleFrame>) {
          if (v.values.size() > 0xFFFF) throw FrameError(FrameErrorKind::payload_too_large, "too many channels");
          put_le(payload, static_cast<std::uint16_t>(v.values.size()));
          for (float x : v.values) put_f32(payload, x);
        } else if constexpr (std::is_same_v<T, DecisionFrame>) {
          put_le(payload, v.class_id);
          put_f32(payload, v.confidence);
          put_le(payload, v.votes);
          put_le(payload, v.timestamp_us);
        } else if constexpr (std::is_same_v<T, HelloFrame>) {
          put_le(payload, v.version);
          put_le(payload, v.channels);
          put_f32(payload, v.sampling_rate);
        } else {
          put_le(payload, static_cast<std::uint16_t>(v.code));
          payload.insert(payload.end(), v.message.begin(), v.message.end());
        }
      },
      f);
  if (payload.size() > kMaxPayload) throw FrameError(FrameErrorKind::payload_too_large, "payload exceeds 1 MiB");

  std::vector<std::uint8_t> out{kFrameMagic, kWireVersion, static_cast<std::uint8_t>(kind_of(f))};
  out.reserve(kHeaderSize + payload.size());
  put_le(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

FrameHeader decode_header(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) {
    throw FrameError(FrameErrorKind::truncated_header,
                     "frame header needs 7 bytes, got " + std::to_string(header.size()));
  }
  if (header[0] != kFrameMagic) throw FrameError(FrameErrorKind::bad_magic, "bad frame magic");
  if (header[1] != kWireVersion) {
    throw FrameError(FrameErrorKind::bad_version, "unsupported wire version " + std::to_string(header[1]));
  }
  const std::uint8_t kind = header[2];
  if (kind < 1 || kind > 4) throw FrameError(FrameErrorKind::unknown_kind, "unknown frame kind " + std::to_string(kind));
  const auto length = get_le<std::uint32_t>(header.data() + 3);
  if (length > kMaxPayload) {
    throw FrameError(FrameErrorKind::payload_too_large, "payload length " + std::to_string(length) + " exceeds cap");
  }
  return {static_cast<FrameKind>(kind), length};
}

Frame decode_payload(FrameKind kind, std::span<const std::uint8_t> p) {
  switch (kind) {
    case FrameKind::sample: {
      if (p.size() < 2) throw length_error(kind, p.size(), "at least 2");
      const auto n = get_le<std::uint16_t>(p.data());
      if (p.size() != 2 + 4 * static_cast<std::size_t>(n)) {
        throw length_error(kind, p.size(), std::to_string(2 + 4 * static_cast<std::size_t>(n)) + " for " +
                                               std::to_string(n) + " channels");
      }
      SampleFrame s;
      s.values.resize(n);
      for (std::size_t i = 0; i < n; ++i) s.values[i] = get_f32(p.data() + 2 + 4 * i);
      return s;
    }
    case FrameKind::decision: {
      if (p.size() != 16) throw length_error(kind, p.size(), "16");
      DecisionFrame d;
      d.class_id = get_le<std::uint16_t>(p.data());
      d.confidence = get_f32(p.data() + 2);
      d.votes = get_le<std::uint16_t>(p.data() + 6);
      d.timestamp_us = get_le<std::uint64_t>(p.data() + 8);
      return d;
    }
    case FrameKind::hello: {
      if (p.size() != 7) throw length_error(kind, p.size(), "7");
      HelloFrame h;
      h.version = p[0];
      h.channels = get_le<std::uint16_t>(p.data() + 1);
      h.sampling_rate = get_f32(p.data() + 3);
      return h;
    }
    case FrameKind::error: {
      if (p.size() < 2) throw length_error(kind, p.size(), "at least 2");
      ErrorFrame e;
      e.code = static_cast<ErrorCode>(get_le<std::uint16_t>(p.data()));
      e.message.assign(p.begin() + 2, p.end());
      return e;
    }
  }
  throw FrameError(FrameErrorKind::unknown_kind, "unknown frame kind");
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  const FrameHeader h = decode_header(bytes);
  const std::size_t have = bytes.size() - kHeaderSize;
  if (have != h.payload_length) {
    throw FrameError(FrameErrorKind::length_mismatch, "header declares " + std::to_string(h.payload_length) +
                                                          " payload bytes, frame carries " + std::to_string(have));
  }
  return decode_payload(h.kind, bytes.subspan(kHeaderSize));
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  if (start_ > 0 && start_ * 2 >= buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(start_));
    start_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameReader::next() {
  const std::span<const std::uint8_t> view(buffer_.data() + start_, buffered());
  // Reject a bad header as soon as its fixed prefix is visible.
  if (!view.empty() && view[0] != kFrameMagic) throw FrameError(FrameErrorKind::bad_magic, "bad frame magic");
  if (view.size() < kHeaderSize) return std::nullopt;
  const FrameHeader h = decode_header(view);
  if (view.size() < kHeaderSize + h.payload_length) return std::nullopt;
  Frame f = decode_payload(h.kind, view.subspan(kHeaderSize, h.payload_length));
  start_ += kHeaderSize + h.payload_length;
  return f;
}

}  // namespace eegdgr::stream
