#pragma once

// Closed-form communication cost, counted in scalar elements, and the audit
// that checks a recorded transcript against it.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "secdot/transport.hpp"

namespace secdot {

enum class Protocol { kEscaped, kRe };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& name);

struct ElementCounts {
  std::uint64_t among_ips = 0;
  std::uint64_t ip_fp = 0;
  std::uint64_t total() const { return among_ips + ip_fp; }
  friend bool operator==(const ElementCounts&, const ElementCounts&) = default;
};

struct CostPrediction {
  Protocol protocol = Protocol::kEscaped;
  int parties = 0;
  std::size_t features = 0;
  std::optional<std::size_t> samples;  // set when all parties have equal size
  // Published closed forms with M parties of n samples each:
  //   ESCAPED: 3 C(M,2) f n among IPs, 3 C(M,2) n^2 to the FP
  //   RE:      4 C(M,2) f n^2 among IPs, 5 C(M,2) f n^2 to the FP
  // Unset when party sizes differ.
  std::optional<ElementCounts> published;
  // Exact counts for this implementation: RE transfers 3 randoms per leaf
  // among IPs, and ESCAPED adds one mask scalar per party acting as Alice.
  ElementCounts artifact;
  std::map<MessageKind, std::uint64_t> artifact_by_kind;
};

CostPrediction cost_model(Protocol protocol, int parties, std::size_t features,
                          std::size_t samples);
CostPrediction cost_model(Protocol protocol, std::size_t features,
                          std::span<const std::size_t> sizes);

double published_ratio_re_over_escaped(int parties, std::size_t features, std::size_t samples);

struct AuditReport {
  ElementCounts measured;
  ElementCounts predicted;
  bool match = false;
  std::vector<std::string> offending_kinds;
  // ESCAPED only: measured matrix elements (ALPHA excluded) equal the
  // published form.
  std::optional<bool> published_form_match;
  // Published RE total over published ESCAPED total at the same shape.
  std::optional<double> published_ratio_re_over_escaped;
};

AuditReport transcript_audit(const TranscriptTotals& totals, const CostPrediction& predicted);

// Throws an audit error listing the offending kinds when counts differ.
void require_audit(const AuditReport& report);

}  // namespace secdot
