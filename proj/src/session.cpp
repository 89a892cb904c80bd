#include "eegdgr/session.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

namespace eegdgr::stream {

std::string to_ndjson(const DecisionEvent& e) {
  return nlohmann::json{{"event", "decision"},
                        {"session", e.session},
                        {"class", e.class_id},
                        {"votes", e.votes},
                        {"confidence", e.confidence},
                        {"timestamp_us", e.timestamp_us},
                        {"sample_index", e.sample_index},
                        {"predictions", e.predictions}}
      .dump();
}

void AuditLog::record(const DecisionEvent& e) {
  std::lock_guard lock(mu_);
  if (out_) {
    *out_ << to_ndjson(e) << '\n';
    out_->flush();
  }
  events_.push_back(e);
}

std::vector<DecisionEvent> AuditLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

SessionEngine::SessionEngine(const net::ClassifierModel& model, SessionConfig config, std::uint64_t session_id,
                             AuditLog* audit, const Catalog* catalog, DispatchLog* dispatch_log)
    : model_(model),
      window_(config.window > 0 ? config.window : model.window),
      step_(config.step > 0 ? config.step : std::max(1, (config.window > 0 ? config.window : model.window) / 2)),
      session_id_(session_id),
      audit_(audit),
      catalog_(catalog),
      dispatch_log_(dispatch_log),
      votes_(std::max(1, model.num_classes()), config.vote_window, config.vote_threshold) {
  if (window_ != model.window) {
    throw net::NetError("session window " + std::to_string(window_) + " differs from the model's " +
                        std::to_string(model.window));
  }
  ring_ = Matrix::Zero(model.num_channels(), window_);
}

std::vector<Frame> SessionEngine::fail(ErrorCode code, const std::string& message) {
  closed_ = true;
  return {ErrorFrame{code, message}};
}

std::vector<Frame> SessionEngine::reject(const std::string& reason) {
  if (closed_) return {};
  return fail(ErrorCode::malformed_frame, reason);
}

std::vector<Frame> SessionEngine::handle(const Frame& frame) {
  if (closed_) return {};
  if (const auto* hello = std::get_if<HelloFrame>(&frame)) {
    if (greeted_) return fail(ErrorCode::unexpected_frame, "duplicate HELLO");
    if (hello->version != kWireVersion) {
      return fail(ErrorCode::version_mismatch, "protocol version " + std::to_string(hello->version) +
                                                   " not supported, server speaks " + std::to_string(kWireVersion));
    }
    if (hello->channels != model_.num_channels()) {
      return fail(ErrorCode::channel_mismatch, "client announced " + std::to_string(hello->channels) +
                                                   " channels, model expects " +
                                                   std::to_string(model_.num_channels()));
    }
    if (!(hello->sampling_rate > 0.0f) || !std::isfinite(hello->sampling_rate)) {
      return fail(ErrorCode::malformed_frame, "sampling rate must be positive");
    }
    greeted_ = true;
    stats_.sampling_rate = hello->sampling_rate;
    return {HelloFrame{kWireVersion, static_cast<std::uint16_t>(model_.num_channels()), hello->sampling_rate}};
  }
  if (!greeted_) return fail(ErrorCode::unexpected_frame, "expected HELLO first");
  if (const auto* sample = std::get_if<SampleFrame>(&frame)) {
    if (sample->values.size() != static_cast<std::size_t>(model_.num_channels())) {
      return fail(ErrorCode::channel_mismatch, "sample carries " + std::to_string(sample->values.size()) +
                                                   " channels, session has " +
                                                   std::to_string(model_.num_channels()));
    }
    if (auto reply = on_sample(*sample)) return {std::move(*reply)};
    return {};
  }
  return fail(ErrorCode::unexpected_frame, std::string("client may not send ") + kind_name(kind_of(frame)));
}

std::optional<Frame> SessionEngine::on_sample(const SampleFrame& s) {
  for (Eigen::Index c = 0; c < ring_.rows(); ++c) ring_(c, static_cast<Eigen::Index>(head_)) = s.values[c];
  head_ = (head_ + 1) % static_cast<std::size_t>(window_);
  ++stats_.samples;
  ++since_prediction_;
  if (stats_.samples < static_cast<std::uint64_t>(window_) ||
      since_prediction_ < static_cast<std::uint64_t>(step_)) {
    return std::nullopt;
  }
  since_prediction_ = 0;

  const auto t0 = std::chrono::steady_clock::now();
  // Oldest sample sits at head_.
  Matrix window(ring_.rows(), window_);
  const auto tail = static_cast<Eigen::Index>(window_) - static_cast<Eigen::Index>(head_);
  window.leftCols(tail) = ring_.rightCols(tail);
  window.rightCols(static_cast<Eigen::Index>(head_)) = ring_.leftCols(static_cast<Eigen::Index>(head_));
  const Vector probs = net::predict(model_, window);
  const int pred = net::predicted_class(model_, probs);
  stats_.compute_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ++stats_.predictions;

  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  const auto decision = votes_.update(pred, probs[best]);
  if (!decision) return std::nullopt;

  ++stats_.decisions;
  DecisionEvent e;
  e.session = session_id_;
  e.class_id = decision->class_id;
  e.votes = decision->votes;
  e.confidence = decision->confidence;
  e.timestamp_us = monotonic_us();
  e.sample_index = stats_.samples;
  e.predictions = stats_.predictions;
  decisions_.push_back(e);
  if (audit_) audit_->record(e);
  if (catalog_ && catalog_->count(e.class_id)) dispatch(e.class_id, *catalog_, dispatch_log_);

  return DecisionFrame{static_cast<std::uint16_t>(e.class_id), static_cast<float>(e.confidence),
                       static_cast<std::uint16_t>(e.votes), e.timestamp_us};
}

double SessionEngine::mean_compute_seconds() const {
  return stats_.predictions ? stats_.compute_seconds / static_cast<double>(stats_.predictions) : 0.0;
}

double SessionEngine::acquisition_seconds() const {
  return stats_.sampling_rate > 0.0 ? window_ / stats_.sampling_rate : 0.0;
}

}  // namespace eegdgr::stream
