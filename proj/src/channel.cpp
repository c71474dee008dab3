#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <future>

#include "secdot/transport.hpp"

namespace secdot {

void FrameQueue::push(Bytes frame) {
  {
    std::lock_guard lock(mu_);
    frames_.push_back(std::move(frame));
  }
  cv_.notify_one();
}

Bytes FrameQueue::pop(const std::string& who) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !frames_.empty() || closed_; });
  if (frames_.empty()) fail(ErrorKind::kTransport, who + ": peer closed the channel");
  Bytes f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

void FrameQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

namespace {

class LoopbackEndpoint final : public Endpoint {
 public:
  LoopbackEndpoint(std::shared_ptr<FrameQueue> in, std::shared_ptr<FrameQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~LoopbackEndpoint() override { close(); }

  void send(const Bytes& frame) override { out_->push(frame); }
  Bytes recv() override { return in_->pop("loopback"); }
  void close() override { out_->close(); }

 private:
  std::shared_ptr<FrameQueue> in_;
  std::shared_ptr<FrameQueue> out_;
};

std::string describe(const std::string& host, std::uint16_t port) {
  return host + ":" + std::to_string(port);
}

[[noreturn]] void sys_fail(const std::string& what, const std::string& addr) {
  fail(ErrorKind::kTransport, what + " " + addr + ": " + std::strerror(errno));
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    fail(ErrorKind::kTransport, "invalid IPv4 address " + describe(host, port));
  }
  return addr;
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  while (n > 0) {
    ssize_t got = ::recv(fd, buf, n, 0);
    if (got == 0) return false;
    if (got < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += got;
    n -= static_cast<std::size_t>(got);
  }
  return true;
}

// Socket plus a reader thread that drains incoming frames into a queue, so
// a send never waits on the peer's progress.
class TcpEndpoint final : public Endpoint {
 public:
  TcpEndpoint(int fd, std::string addr) : fd_(fd), addr_(std::move(addr)) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    reader_ = std::thread([this] { read_loop(); });
  }
  ~TcpEndpoint() override {
    closed_ = true;
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  void send(const Bytes& frame) override {
    std::lock_guard lock(send_mu_);
    const std::uint8_t* p = frame.data();
    std::size_t n = frame.size();
    while (n > 0) {
      ssize_t put = ::send(fd_, p, n, MSG_NOSIGNAL);
      if (put < 0) {
        if (errno == EINTR) continue;
        sys_fail("send to", addr_);
      }
      p += put;
      n -= static_cast<std::size_t>(put);
    }
  }

  Bytes recv() override { return inbox_.pop("tcp " + addr_); }

  // Half-close: the peer's reader sees EOF once our frames are delivered.
  void close() override {
    if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_WR);
  }

 private:
  void read_loop() {
    for (;;) {
      Bytes frame(kFrameHeaderBytes);
      if (!read_exact(fd_, frame.data(), kFrameHeaderBytes)) break;
      std::uint64_t len = frame_payload_length(frame);
      frame.resize(kFrameHeaderBytes + len);
      if (!read_exact(fd_, frame.data() + kFrameHeaderBytes, len)) break;
      inbox_.push(std::move(frame));
    }
    inbox_.close();
  }

  int fd_;
  std::string addr_;
  std::mutex send_mu_;
  std::atomic<bool> closed_{false};
  FrameQueue inbox_;
  std::thread reader_;
};

}  // namespace

TcpListener::TcpListener(const TcpConfig& config) : host_(config.host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) sys_fail("socket for", describe(config.host, config.port));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = make_addr(config.host, config.port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    int saved = errno;
    ::close(fd_);
    errno = saved;
    sys_fail("bind", describe(config.host, config.port));
  }
  if (::listen(fd_, 16) < 0) {
    int saved = errno;
    ::close(fd_);
    errno = saved;
    sys_fail("listen", describe(config.host, config.port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<Endpoint> TcpListener::accept() {
  for (;;) {
    int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) return std::make_unique<TcpEndpoint>(fd, describe(host_, port_));
    if (errno != EINTR) sys_fail("accept on", describe(host_, port_));
  }
}

std::unique_ptr<Endpoint> tcp_connect(const TcpConfig& config) {
  const std::string addr_str = describe(config.host, config.port);
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) sys_fail("socket for", addr_str);
  sockaddr_in addr = make_addr(config.host, config.port);
  for (;;) {
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) break;
    if (errno == EINTR) continue;
    int saved = errno;
    ::close(fd);
    errno = saved;
    sys_fail("connect to", addr_str);
  }
  return std::make_unique<TcpEndpoint>(fd, addr_str);
}

std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> channel_pair(
    TransportKind kind, const TcpConfig& config) {
  if (kind == TransportKind::kLoopback) {
    auto ab = std::make_shared<FrameQueue>();
    auto ba = std::make_shared<FrameQueue>();
    return {std::make_unique<LoopbackEndpoint>(ba, ab),
            std::make_unique<LoopbackEndpoint>(ab, ba)};
  }
  TcpListener listener(config);
  TcpConfig peer = config;
  peer.port = listener.port();
  auto accepted = std::async(std::launch::async, [&] { return listener.accept(); });
  auto connected = tcp_connect(peer);
  return {accepted.get(), std::move(connected)};
}

}  // namespace secdot
