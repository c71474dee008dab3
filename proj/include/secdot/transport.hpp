#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "secdot/error.hpp"
#include "secdot/linalg.hpp"
#include "secdot/scalar.hpp"

namespace secdot {

// ---------------------------------------------------------------------------
// Wire format
//
//   offset 0   u8   message kind
//   offset 1   u16  sender id        (little-endian)
//   offset 3   u16  receiver id      (little-endian)
//   offset 5   u64  payload length   (little-endian)
//   offset 13  payload
//
// A payload is a sequence of blocks: u32 rows, u32 cols, then rows*cols
// 8-byte little-endian words, row-major. Field elements travel as their
// canonical value, doubles as their IEEE-754 binary64 bit pattern.
// Party ids are 1..M; the function-party is id 0.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFrameHeaderBytes = 13;
inline constexpr std::uint16_t kFunctionPartyId = 0;

enum class MessageKind : std::uint8_t {
  kHello = 0x01,         // [1x1 sample count]
  kMaskedData = 0x02,    // [X - a]
  kMaskedMask = 0x03,    // [alpha * a]
  kReRandoms = 0x04,     // [(n_a n_b) x 3f  r_a r_b r_d per leaf]
  kReComponents = 0x05,  // [1x1 peer id][(n_a n_b) x 3f | 2f]
  kPairResult = 0x06,    // [1x1 peer id][A1] or [1x1 peer id][B1][B2]
  kSelfGram = 0x07,      // [X^T X]
  kAlpha = 0x08,         // [1x1 alpha]
  kDone = 0x09,          // empty
};

inline constexpr std::uint8_t kMaxMessageKind = 0x09;

std::string to_string(MessageKind kind);

struct WireBlock {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint64_t> words;
  friend bool operator==(const WireBlock&, const WireBlock&) = default;
};

struct Frame {
  MessageKind kind = MessageKind::kDone;
  std::uint16_t sender = 0;
  std::uint16_t receiver = 0;
  std::vector<WireBlock> blocks;
  friend bool operator==(const Frame&, const Frame&) = default;
};

using Bytes = std::vector<std::uint8_t>;

Bytes frame_encode(const Frame& frame);
Frame frame_decode(std::span<const std::uint8_t> bytes);

// Payload length announced by a complete 13-byte header.
std::uint64_t frame_payload_length(std::span<const std::uint8_t> header);

std::uint64_t payload_elements(const Frame& frame);

// Elements that count toward protocol communication cost. Peer-id tags,
// HELLO, DONE and SELF_GRAM are excluded.
std::uint64_t protocol_elements(const Frame& frame);

template <class T>
WireBlock to_block(const Matrix<T>& m) {
  WireBlock b;
  b.rows = static_cast<std::uint32_t>(m.rows());
  b.cols = static_cast<std::uint32_t>(m.cols());
  b.words.reserve(m.size());
  for (const T& v : m.data()) b.words.push_back(ScalarTraits<T>::to_wire(v));
  return b;
}

template <class T>
Matrix<T> from_block(const WireBlock& b) {
  std::vector<T> data;
  data.reserve(b.words.size());
  for (std::uint64_t w : b.words) data.push_back(ScalarTraits<T>::from_wire(w));
  return Matrix<T>(b.rows, b.cols, std::move(data));
}

inline WireBlock scalar_block(std::uint64_t word) { return {1, 1, {word}}; }

// ---------------------------------------------------------------------------
// Endpoints
// ---------------------------------------------------------------------------

// One end of a reliable, ordered, duplex frame stream. send() never blocks
// on the peer; recv() blocks until a frame arrives or the peer closes.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void send(const Bytes& frame) = 0;
  virtual Bytes recv() = 0;
  virtual void close() = 0;
};

enum class TransportKind { kLoopback, kTcp };

struct TcpConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
};

std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> channel_pair(
    TransportKind kind, const TcpConfig& config = {});

class TcpListener {
 public:
  explicit TcpListener(const TcpConfig& config);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Endpoint> accept();
  void close();

 private:
  int fd_ = -1;
  std::string host_;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Endpoint> tcp_connect(const TcpConfig& config);

// Thread-safe FIFO of frames shared by in-process endpoints and the
// reader thread of TCP endpoints.
class FrameQueue {
 public:
  void push(Bytes frame);
  // Throws a transport error if the queue is closed and drained.
  Bytes pop(const std::string& who);
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> frames_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

enum class Phase { kIpIp = 0, kIpFp = 1 };

struct FrameRecord {
  std::uint64_t seq = 0;  // per (sender, receiver) channel
  std::uint16_t sender = 0;
  std::uint16_t receiver = 0;
  MessageKind kind = MessageKind::kDone;
  std::uint64_t bytes = 0;
  std::uint64_t elements = 0;  // protocol_elements()
  std::uint64_t self_gram_elements = 0;
  Phase phase = Phase::kIpIp;
  double time_ms = 0.0;  // since transcript creation; not part of canonical form
  Bytes frame;
};

struct TranscriptTotals {
  std::map<std::pair<std::uint16_t, std::uint16_t>, std::uint64_t> channel_bytes;
  std::uint64_t phase_bytes[2] = {0, 0};
  std::uint64_t phase_elements[2] = {0, 0};
  std::map<MessageKind, std::uint64_t> kind_elements;
  std::map<MessageKind, std::uint64_t> kind_frames;
  std::uint64_t self_gram_elements = 0;
  std::uint64_t frames = 0;

  std::uint64_t total_bytes() const { return phase_bytes[0] + phase_bytes[1]; }
  std::uint64_t total_elements() const { return phase_elements[0] + phase_elements[1]; }
  friend bool operator==(const TranscriptTotals&, const TranscriptTotals&) = default;
};

// Records every frame sent during a run. Safe for concurrent writers.
// The canonical order is (sender, receiver, seq), which does not depend on
// thread scheduling or transport.
class Transcript {
 public:
  Transcript();
  Transcript(const Transcript& other);
  Transcript& operator=(const Transcript& other);

  void record(const Bytes& frame);
  void merge(const Transcript& other);

  std::vector<FrameRecord> frames() const;
  TranscriptTotals totals() const;
  Bytes canonical_bytes() const;
  std::string checksum() const;  // SHA-256 hex of canonical_bytes()

  // Frame metadata and payload digests; no payload bodies.
  std::string to_json() const;

  // Lossless form used to ship a child process's transcript to its parent.
  Bytes serialize() const;
  static Transcript deserialize(std::span<const std::uint8_t> bytes);

 private:
  mutable std::mutex mu_;
  std::vector<FrameRecord> records_;
  std::map<std::pair<std::uint16_t, std::uint16_t>, std::uint64_t> next_seq_;
  std::chrono::steady_clock::time_point start_;
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Endpoint wrapper owned by one party: frames it sends are recorded.
class PartyLink {
 public:
  PartyLink(std::unique_ptr<Endpoint> endpoint, Transcript* transcript)
      : endpoint_(std::move(endpoint)), transcript_(transcript) {}

  void send(const Frame& frame);
  Frame recv();
  Frame recv_expect(MessageKind kind);
  void close() { endpoint_->close(); }

 private:
  std::unique_ptr<Endpoint> endpoint_;
  Transcript* transcript_;
};

}  // namespace secdot
