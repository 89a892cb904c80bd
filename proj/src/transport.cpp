#include "eegdgr/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

namespace eegdgr::stream {

namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

// Reads exactly n bytes. Returns false on EOF before the first byte.
bool read_exact(int fd, std::uint8_t* dst, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, dst + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw FrameError(FrameErrorKind::length_mismatch, "connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw TransportError("bad IPv4 address " + host);
  return addr;
}

}  // namespace

void write_all(int fd, const std::vector<std::uint8_t>& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t r = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(r);
  }
}

void send_frame(int fd, const Frame& f) { write_all(fd, encode_frame(f)); }

std::optional<Frame> read_frame(int fd) {
  std::uint8_t header[kHeaderSize];
  if (!read_exact(fd, header, 1)) return std::nullopt;
  if (header[0] != kFrameMagic) throw FrameError(FrameErrorKind::bad_magic, "bad frame magic");
  if (!read_exact(fd, header + 1, kHeaderSize - 1)) {
    throw FrameError(FrameErrorKind::truncated_header, "connection closed mid-header");
  }
  const FrameHeader h = decode_header(header);
  std::vector<std::uint8_t> payload(h.payload_length);
  if (h.payload_length > 0 && !read_exact(fd, payload.data(), payload.size())) {
    throw FrameError(FrameErrorKind::length_mismatch, "connection closed before payload");
  }
  return decode_payload(h.kind, payload);
}

Server::Server(const net::ClassifierModel& model, ServerConfig config, AuditLog* audit, const Catalog* catalog,
               DispatchLog* dispatch_log)
    : model_(model),
      config_(std::move(config)),
      audit_(audit),
      catalog_(catalog),
      dispatch_log_(dispatch_log) {}

Server::~Server() {
  stop();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::bind() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const sockaddr_in addr = make_addr(config_.host, config_.port);
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    const std::string msg = errno_text("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError(msg);
  }
  if (::listen(listen_fd_, 16) < 0) throw TransportError(errno_text("listen"));
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

void Server::run() {
  if (listen_fd_ < 0) bind();
  std::uint64_t next_id = 1;
  while (!stopping_) {
    if (config_.max_sessions > 0 && finished_.load() >= config_.max_sessions) break;
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    if (ready < 0 && errno != EINTR) throw TransportError(errno_text("poll"));
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(conn_mu_);
    open_fds_.push_back(fd);
    workers_.emplace_back(&Server::serve_connection, this, fd, next_id++);
  }
  // Let in-flight sessions finish.
  std::list<std::thread> workers;
  {
    std::lock_guard lock(conn_mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

void Server::stop() {
  stopping_ = true;
  std::lock_guard lock(conn_mu_);
  for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
}

void Server::serve_connection(int fd, std::uint64_t id) {
  // Reader thread decodes frames; this thread runs the session.
  struct Item {
    std::optional<Frame> frame;
    std::string error;
  };
  BlockingQueue<Item> queue;
  std::thread reader([&] {
    try {
      while (auto f = read_frame(fd)) queue.push({std::move(f), {}});
    } catch (const std::exception& e) {
      queue.push({std::nullopt, e.what()});
    }
    queue.close();
  });

  try {
    SessionEngine engine(model_, config_.session, id, audit_, catalog_, dispatch_log_);
    while (auto item = queue.pop()) {
      const auto replies = item->frame ? engine.handle(*item->frame) : engine.reject(item->error);
      for (const auto& r : replies) send_frame(fd, r);
      if (engine.closed()) break;
    }
  } catch (const std::exception& e) {
    try {
      send_frame(fd, ErrorFrame{ErrorCode::internal, e.what()});
    } catch (const std::exception&) {
    }
  }
  ::shutdown(fd, SHUT_RDWR);
  reader.join();
  {
    std::lock_guard lock(conn_mu_);
    open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  }
  ::close(fd);
  ++finished_;
}

SimulateResult simulate(const Recording& recording, const SimulateOptions& options) {
  if (recording.num_channels() == 0 || recording.num_channels() > 0xFFFF) {
    throw TransportError("recording must have 1..65535 channels");
  }
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(errno_text("socket"));
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};
  const sockaddr_in addr = make_addr(options.host, options.port);
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    throw TransportError(errno_text("cannot connect to " + options.host + ":" + std::to_string(options.port)));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  SimulateResult result;
  send_frame(fd, HelloFrame{options.protocol_version, static_cast<std::uint16_t>(recording.num_channels()),
                            static_cast<float>(recording.sampling_rate)});
  const auto ack = read_frame(fd);
  if (!ack) throw TransportError("server closed the connection during the handshake");
  if (const auto* err = std::get_if<ErrorFrame>(&*ack)) {
    result.error = *err;
    return result;
  }
  if (!std::holds_alternative<HelloFrame>(*ack)) throw TransportError("server did not acknowledge HELLO");

  std::atomic<bool> rejected{false};
  std::thread reader([&] {
    try {
      while (auto f = read_frame(fd)) {
        if (auto* d = std::get_if<DecisionFrame>(&*f)) result.decisions.push_back(*d);
        if (auto* e = std::get_if<ErrorFrame>(&*f)) {
          result.error = *e;
          rejected = true;
        }
      }
    } catch (const std::exception&) {
    }
  });

  const auto period = std::chrono::duration<double>(1.0 / recording.sampling_rate);
  const auto start = std::chrono::steady_clock::now();
  try {
    SampleFrame s;
    s.values.resize(static_cast<std::size_t>(recording.num_channels()));
    for (Eigen::Index t = 0; t < recording.data.cols() && !rejected; ++t) {
      if (options.speed == ReplaySpeed::realtime) {
        std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                  period * static_cast<double>(t)));
      }
      for (Eigen::Index c = 0; c < recording.data.rows(); ++c) {
        s.values[static_cast<std::size_t>(c)] = static_cast<float>(recording.data(c, t));
      }
      send_frame(fd, s);
      ++result.samples_sent;
    }
  } catch (const TransportError&) {
    // The server closed the stream; the reader has its reason.
  }
  ::shutdown(fd, SHUT_WR);
  reader.join();
  return result;
}

}  // namespace eegdgr::stream
