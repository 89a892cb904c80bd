#pragma once

#include "eegdgr/dispatch.hpp"
#include "eegdgr/frame.hpp"
#include "eegdgr/model.hpp"
#include "eegdgr/voting.hpp"

#include <cstdint>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace eegdgr::stream {

struct SessionConfig {
  int window = 0;  // 0: the model's window
  int step = 0;    // 0: window / 2
  std::size_t vote_window = kVoteWindow;
  int vote_threshold = kVoteThreshold;
};

struct DecisionEvent {
  std::uint64_t session = 0;
  int class_id = 0;
  int votes = 0;
  double confidence = 0.0;
  std::uint64_t timestamp_us = 0;
  std::uint64_t sample_index = 0;  // samples received when the decision fired
  std::uint64_t predictions = 0;   // predictions made in the session so far
};

std::string to_ndjson(const DecisionEvent& e);

// Shared NDJSON audit sink.
class AuditLog {
 public:
  explicit AuditLog(std::ostream* out = nullptr) : out_(out) {}
  void record(const DecisionEvent& e);
  std::vector<DecisionEvent> events() const;

 private:
  mutable std::mutex mu_;
  std::ostream* out_;
  std::vector<DecisionEvent> events_;
};

struct SessionStats {
  std::uint64_t samples = 0;
  std::uint64_t predictions = 0;
  std::uint64_t decisions = 0;
  double compute_seconds = 0.0;  // summed wall time of window classification
  double sampling_rate = 0.0;
};

// Protocol state machine for one connection, independent of the socket.
// Frames go in; frames to send back come out. After an ERROR reply the
// session is closed and ignores further input.
class SessionEngine {
 public:
  SessionEngine(const net::ClassifierModel& model, SessionConfig config, std::uint64_t session_id = 0,
                AuditLog* audit = nullptr, const Catalog* catalog = nullptr, DispatchLog* dispatch_log = nullptr);

  std::vector<Frame> handle(const Frame& frame);
  // Reply for input that failed to decode.
  std::vector<Frame> reject(const std::string& reason);

  bool closed() const { return closed_; }
  bool greeted() const { return greeted_; }
  const SessionStats& stats() const { return stats_; }
  const std::vector<DecisionEvent>& decisions() const { return decisions_; }
  int window() const { return window_; }
  int step() const { return step_; }
  // Mean seconds from window completion to prediction, and the acquisition
  // time of one window (L / sampling rate).
  double mean_compute_seconds() const;
  double acquisition_seconds() const;

 private:
  std::vector<Frame> fail(ErrorCode code, const std::string& message);
  std::optional<Frame> on_sample(const SampleFrame& s);

  const net::ClassifierModel& model_;
  int window_;
  int step_;
  std::uint64_t session_id_;
  AuditLog* audit_;
  const Catalog* catalog_;
  DispatchLog* dispatch_log_;
  DecisionWindow votes_;
  Matrix ring_;  // channels x window, circular
  std::size_t head_ = 0;
  std::uint64_t since_prediction_ = 0;
  bool greeted_ = false;
  bool closed_ = false;
  SessionStats stats_;
  std::vector<DecisionEvent> decisions_;
};

}  // namespace eegdgr::stream
