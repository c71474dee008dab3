#include <openssl/evp.h>

#include <algorithm>
#include <tuple>
#include <cstdio>
#include <json.hpp>

#include "secdot/transport.hpp"

namespace secdot {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::kIo, "sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

Transcript::Transcript() : start_(std::chrono::steady_clock::now()) {}

Transcript::Transcript(const Transcript& other) {
  std::lock_guard lock(other.mu_);
  records_ = other.records_;
  next_seq_ = other.next_seq_;
  start_ = other.start_;
}

Transcript& Transcript::operator=(const Transcript& other) {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    records_ = other.records_;
    next_seq_ = other.next_seq_;
    start_ = other.start_;
  }
  return *this;
}

void Transcript::record(const Bytes& bytes) {
  Frame f = frame_decode(bytes);
  FrameRecord rec;
  rec.sender = f.sender;
  rec.receiver = f.receiver;
  rec.kind = f.kind;
  rec.bytes = bytes.size();
  rec.elements = protocol_elements(f);
  rec.self_gram_elements = f.kind == MessageKind::kSelfGram ? payload_elements(f) : 0;
  rec.phase = (f.sender == kFunctionPartyId || f.receiver == kFunctionPartyId)
                  ? Phase::kIpFp
                  : Phase::kIpIp;
  rec.frame = bytes;
  std::lock_guard lock(mu_);
  rec.time_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
  rec.seq = next_seq_[{rec.sender, rec.receiver}]++;
  records_.push_back(std::move(rec));
}

void Transcript::merge(const Transcript& other) {
  std::vector<FrameRecord> theirs = other.frames();
  std::lock_guard lock(mu_);
  for (auto& rec : theirs) {
    auto& next = next_seq_[{rec.sender, rec.receiver}];
    if (rec.seq < next) {
      fail(ErrorKind::kProtocol, "transcript merge: channel " + std::to_string(rec.sender) +
                                     "->" + std::to_string(rec.receiver) +
                                     " recorded twice");
    }
    next = rec.seq + 1;
    records_.push_back(std::move(rec));
  }
}

std::vector<FrameRecord> Transcript::frames() const {
  std::vector<FrameRecord> out;
  {
    std::lock_guard lock(mu_);
    out = records_;
  }
  std::sort(out.begin(), out.end(), [](const FrameRecord& x, const FrameRecord& y) {
    return std::tie(x.sender, x.receiver, x.seq) < std::tie(y.sender, y.receiver, y.seq);
  });
  return out;
}

TranscriptTotals Transcript::totals() const {
  TranscriptTotals t;
  for (const auto& rec : frames()) {
    const int phase = static_cast<int>(rec.phase);
    t.channel_bytes[{rec.sender, rec.receiver}] += rec.bytes;
    t.phase_bytes[phase] += rec.bytes;
    t.phase_elements[phase] += rec.elements;
    t.kind_elements[rec.kind] += rec.elements;
    t.kind_frames[rec.kind] += 1;
    t.self_gram_elements += rec.self_gram_elements;
    t.frames += 1;
  }
  return t;
}

Bytes Transcript::canonical_bytes() const {
  Bytes out;
  for (const auto& rec : frames()) out.insert(out.end(), rec.frame.begin(), rec.frame.end());
  return out;
}

std::string Transcript::checksum() const { return sha256_hex(canonical_bytes()); }

std::string Transcript::to_json() const {
  using nlohmann::json;
  json frames_json = json::array();
  for (const auto& rec : frames()) {
    frames_json.push_back({
        {"seq", rec.seq},
        {"sender", rec.sender},
        {"receiver", rec.receiver},
        {"kind", to_string(rec.kind)},
        {"bytes", rec.bytes},
        {"elements", rec.elements},
        {"phase", rec.phase == Phase::kIpIp ? "ip_ip" : "ip_fp"},
        {"time_ms", rec.time_ms},
        {"payload_sha256",
         sha256_hex(std::span(rec.frame).subspan(kFrameHeaderBytes))},
    });
  }
  TranscriptTotals t = totals();
  json channels = json::array();
  for (const auto& [key, bytes] : t.channel_bytes) {
    channels.push_back({{"sender", key.first}, {"receiver", key.second}, {"bytes", bytes}});
  }
  json doc = {
      {"schema", "secdot.transcript/1"},
      {"frames", frames_json},
      {"channels", channels},
      {"ip_ip", {{"bytes", t.phase_bytes[0]}, {"elements", t.phase_elements[0]}}},
      {"ip_fp", {{"bytes", t.phase_bytes[1]}, {"elements", t.phase_elements[1]}}},
      {"checksum", checksum()},
  };
  return doc.dump(2);
}

namespace {
void put64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint64_t get64(std::span<const std::uint8_t> in, std::size_t& off) {
  if (in.size() - off < 8) fail(ErrorKind::kFraming, "truncated transcript");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{in[off + i]} << (8 * i);
  off += 8;
  return v;
}
}  // namespace

// Layout per record: seq, time_ms bits, frame length, frame bytes.
Bytes Transcript::serialize() const {
  Bytes out;
  for (const auto& rec : frames()) {
    put64(out, rec.seq);
    put64(out, ScalarTraits<double>::to_wire(rec.time_ms));
    put64(out, rec.frame.size());
    out.insert(out.end(), rec.frame.begin(), rec.frame.end());
  }
  return out;
}

Transcript Transcript::deserialize(std::span<const std::uint8_t> bytes) {
  Transcript t;
  std::size_t off = 0;
  while (off < bytes.size()) {
    std::uint64_t seq = get64(bytes, off);
    double time_ms = ScalarTraits<double>::from_wire(get64(bytes, off));
    std::uint64_t len = get64(bytes, off);
    if (bytes.size() - off < len) fail(ErrorKind::kFraming, "truncated transcript");
    Bytes frame(bytes.begin() + off, bytes.begin() + off + len);
    off += len;
    Transcript one;
    one.record(frame);
    FrameRecord rec = one.records_.front();
    rec.seq = seq;
    rec.time_ms = time_ms;
    auto& next = t.next_seq_[{rec.sender, rec.receiver}];
    next = std::max(next, seq + 1);
    t.records_.push_back(std::move(rec));
  }
  return t;
}

void PartyLink::send(const Frame& frame) {
  Bytes bytes = frame_encode(frame);
  if (transcript_ != nullptr) transcript_->record(bytes);
  endpoint_->send(bytes);
}

Frame PartyLink::recv() { return frame_decode(endpoint_->recv()); }

Frame PartyLink::recv_expect(MessageKind kind) {
  Frame f = recv();
  if (f.kind != kind) {
    fail(ErrorKind::kProtocol, "expected " + to_string(kind) + " from party " +
                                   std::to_string(f.sender) + ", got " + to_string(f.kind));
  }
  return f;
}

}  // namespace secdot
