#include "secdot/scalar.hpp"

#include <cmath>
#include <sstream>

namespace secdot {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kProtocolIncomplete: return "protocol-incomplete";
    case ErrorKind::kFraming: return "framing";
    case ErrorKind::kProtocolVersion: return "protocol-version";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kOverflow: return "overflow";
    case ErrorKind::kData: return "data";
    case ErrorKind::kAudit: return "audit";
    case ErrorKind::kVerification: return "verification";
  }
  return "unknown";
}

FixedPointCodec::FixedPointCodec(unsigned scale_bits) : scale_bits_(scale_bits) {
  if (scale_bits > 29) {
    // 2*scale_bits must stay below 60 for decode_dot to have any headroom.
    fail(ErrorKind::kDomain, "scale_bits must be at most 29");
  }
}

Fp FixedPointCodec::encode(double x) const {
  if (!std::isfinite(x) || std::fabs(x) >= max_magnitude()) {
    std::ostringstream os;
    os << "fixed-point overflow: |" << x << "| >= 2^" << (60 - int(scale_bits_));
    fail(ErrorKind::kOverflow, os.str());
  }
  double scaled = std::round(std::ldexp(x, int(scale_bits_)));
  return Fp::from_signed(static_cast<std::int64_t>(scaled));
}

double FixedPointCodec::decode(Fp x) const {
  return std::ldexp(static_cast<double>(x.to_signed()), -int(scale_bits_));
}

double FixedPointCodec::decode_dot(Fp x) const {
  return std::ldexp(static_cast<double>(x.to_signed()), -2 * int(scale_bits_));
}

}  // namespace secdot
