#pragma once

#include "eegdgr/recording.hpp"
#include "eegdgr/session.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace eegdgr::stream {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// FIFO handoff between a connection's reader and its decision loop.
template <typename T>
class BlockingQueue {
 public:
  void push(T v) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      items_.push_back(std::move(v));
    }
    cv_.notify_one();
  }

  // Empty once the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

// Blocking socket helpers. read_frame returns nullopt on a clean EOF at a
// frame boundary and throws FrameError on malformed input.
void write_all(int fd, const std::vector<std::uint8_t>& bytes);
std::optional<Frame> read_frame(int fd);
void send_frame(int fd, const Frame& f);

struct ServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0: ephemeral
  SessionConfig session;
  int max_sessions = 0;  // stop after this many sessions end; 0 runs until stop()
};

class Server {
 public:
  Server(const net::ClassifierModel& model, ServerConfig config, AuditLog* audit = nullptr,
         const Catalog* catalog = nullptr, DispatchLog* dispatch_log = nullptr);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens; throws TransportError (for example when the port is
  // in use).
  void bind();
  std::uint16_t port() const { return port_; }
  // Accept loop; returns after stop() or max_sessions.
  void run();
  void stop();
  int sessions_finished() const { return finished_.load(); }

 private:
  void serve_connection(int fd, std::uint64_t id);

  const net::ClassifierModel& model_;
  ServerConfig config_;
  AuditLog* audit_;
  const Catalog* catalog_;
  DispatchLog* dispatch_log_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<int> finished_{0};
  std::mutex conn_mu_;
  std::list<std::thread> workers_;
  std::vector<int> open_fds_;
};

enum class ReplaySpeed { realtime, max };

struct SimulateOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  ReplaySpeed speed = ReplaySpeed::max;
  std::uint8_t protocol_version = kWireVersion;
};

struct SimulateResult {
  std::vector<DecisionFrame> decisions;
  std::optional<ErrorFrame> error;  // server rejected the session
  std::uint64_t samples_sent = 0;
};

// Streams the recording's samples to a server and collects its replies.
SimulateResult simulate(const Recording& recording, const SimulateOptions& options);

}  // namespace eegdgr::stream
