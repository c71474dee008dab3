#include <sstream>

#include "secdot/transport.hpp"

namespace secdot {

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kHello: return "HELLO";
    case MessageKind::kMaskedData: return "MASKED_DATA";
    case MessageKind::kMaskedMask: return "MASKED_MASK";
    case MessageKind::kReRandoms: return "RE_RANDOMS";
    case MessageKind::kReComponents: return "RE_COMPONENTS";
    case MessageKind::kPairResult: return "PAIR_RESULT";
    case MessageKind::kSelfGram: return "SELF_GRAM";
    case MessageKind::kAlpha: return "ALPHA";
    case MessageKind::kDone: return "DONE";
  }
  return "UNKNOWN";
}

namespace {

void put_le(Bytes& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t off, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{in[off + i]} << (8 * i);
  return v;
}

[[noreturn]] void truncated(std::size_t offset, std::size_t need, std::size_t have) {
  std::ostringstream os;
  os << "truncated frame at byte offset " << offset << ": need " << need
     << " bytes, have " << have;
  fail(ErrorKind::kFraming, os.str());
}

}  // namespace

Bytes frame_encode(const Frame& frame) {
  std::uint64_t payload = 0;
  for (const auto& b : frame.blocks) {
    if (b.words.size() != std::uint64_t{b.rows} * b.cols) {
      fail(ErrorKind::kDimension, "wire block word count does not match its dims");
    }
    payload += 8 + 8 * b.words.size();
  }
  Bytes out;
  out.reserve(kFrameHeaderBytes + payload);
  out.push_back(static_cast<std::uint8_t>(frame.kind));
  put_le(out, frame.sender, 2);
  put_le(out, frame.receiver, 2);
  put_le(out, payload, 8);
  for (const auto& b : frame.blocks) {
    put_le(out, b.rows, 4);
    put_le(out, b.cols, 4);
    for (std::uint64_t w : b.words) put_le(out, w, 8);
  }
  return out;
}

std::uint64_t frame_payload_length(std::span<const std::uint8_t> header) {
  if (header.size() < kFrameHeaderBytes) truncated(0, kFrameHeaderBytes, header.size());
  return get_le(header, 5, 8);
}

Frame frame_decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderBytes) truncated(0, kFrameHeaderBytes, bytes.size());
  const std::uint8_t tag = bytes[0];
  if (tag == 0 || tag > kMaxMessageKind) {
    std::ostringstream os;
    os << "unknown message tag 0x" << std::hex << int(tag) << " (unsupported protocol version)";
    fail(ErrorKind::kProtocolVersion, os.str());
  }
  Frame f;
  f.kind = static_cast<MessageKind>(tag);
  f.sender = static_cast<std::uint16_t>(get_le(bytes, 1, 2));
  f.receiver = static_cast<std::uint16_t>(get_le(bytes, 3, 2));
  const std::uint64_t payload = get_le(bytes, 5, 8);
  if (bytes.size() - kFrameHeaderBytes < payload) {
    truncated(kFrameHeaderBytes, payload, bytes.size() - kFrameHeaderBytes);
  }
  if (bytes.size() - kFrameHeaderBytes > payload) {
    fail(ErrorKind::kFraming, "trailing bytes after frame payload at byte offset " +
                                  std::to_string(kFrameHeaderBytes + payload));
  }
  std::size_t off = kFrameHeaderBytes;
  const std::size_t end = kFrameHeaderBytes + payload;
  while (off < end) {
    if (end - off < 8) truncated(off, 8, end - off);
    WireBlock b;
    b.rows = static_cast<std::uint32_t>(get_le(bytes, off, 4));
    b.cols = static_cast<std::uint32_t>(get_le(bytes, off + 4, 4));
    off += 8;
    const std::uint64_t count = std::uint64_t{b.rows} * b.cols;
    if ((end - off) / 8 < count) truncated(off, count * 8, end - off);
    b.words.resize(count);
    for (std::uint64_t k = 0; k < count; ++k, off += 8) b.words[k] = get_le(bytes, off, 8);
    f.blocks.push_back(std::move(b));
  }
  return f;
}

std::uint64_t payload_elements(const Frame& frame) {
  std::uint64_t n = 0;
  for (const auto& b : frame.blocks) n += b.words.size();
  return n;
}

std::uint64_t protocol_elements(const Frame& frame) {
  switch (frame.kind) {
    case MessageKind::kHello:
    case MessageKind::kDone:
    case MessageKind::kSelfGram:
      return 0;
    case MessageKind::kReComponents:
    case MessageKind::kPairResult: {
      std::uint64_t n = payload_elements(frame);
      return frame.blocks.empty() ? 0 : n - frame.blocks.front().words.size();
    }
    default:
      return payload_elements(frame);
  }
}

}  // namespace secdot
