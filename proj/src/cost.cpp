#include "secdot/cost.hpp"

namespace secdot {

std::string to_string(Protocol p) { return p == Protocol::kEscaped ? "escaped" : "re"; }

Protocol parse_protocol(const std::string& name) {
  if (name == "escaped") return Protocol::kEscaped;
  if (name == "re") return Protocol::kRe;
  fail(ErrorKind::kConfig, "unknown protocol '" + name + "' (expected escaped|re)");
}

namespace {

bool is_among_ips(MessageKind k) {
  return k == MessageKind::kMaskedData || k == MessageKind::kMaskedMask ||
         k == MessageKind::kReRandoms;
}

std::optional<ElementCounts> published_form(Protocol protocol, std::uint64_t pairs,
                                        std::uint64_t f, std::uint64_t n) {
  if (protocol == Protocol::kEscaped) return ElementCounts{3 * pairs * f * n, 3 * pairs * n * n};
  return ElementCounts{4 * pairs * f * n * n, 5 * pairs * f * n * n};
}

}  // namespace

CostPrediction cost_model(Protocol protocol, std::size_t features,
                          std::span<const std::size_t> sizes) {
  const std::size_t m = sizes.size();
  if (m < 2) fail(ErrorKind::kDomain, "cost model needs at least 2 parties");
  if (features < 1) fail(ErrorKind::kDomain, "cost model needs at least 1 feature");
  CostPrediction p;
  p.protocol = protocol;
  const std::uint64_t f = features;
  auto& by = p.artifact_by_kind;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::uint64_t na = sizes[i];
      const std::uint64_t nb = sizes[j];
      if (protocol == Protocol::kEscaped) {
        by[MessageKind::kMaskedData] += f * na + f * nb;
        by[MessageKind::kMaskedMask] += f * na;
        by[MessageKind::kPairResult] += 3 * na * nb;
      } else {
        by[MessageKind::kReRandoms] += 3 * f * na * nb;
        by[MessageKind::kReComponents] += 5 * f * na * nb;
      }
    }
  }
  if (protocol == Protocol::kEscaped) by[MessageKind::kAlpha] = m - 1;
  for (const auto& [kind, n] : by) {
    (is_among_ips(kind) ? p.artifact.among_ips : p.artifact.ip_fp) += n;
  }
  bool equal = true;
  for (std::size_t s : sizes) equal = equal && s == sizes.front();
  p.parties = static_cast<int>(m);
  p.features = features;
  if (equal) {
    p.samples = sizes.front();
    p.published = published_form(protocol, m * (m - 1) / 2, f, sizes.front());
  }
  return p;
}

CostPrediction cost_model(Protocol protocol, int parties, std::size_t features,
                          std::size_t samples) {
  if (parties < 2) fail(ErrorKind::kDomain, "cost model needs at least 2 parties");
  if (samples < 1) fail(ErrorKind::kDomain, "cost model needs at least 1 sample per party");
  std::vector<std::size_t> sizes(static_cast<std::size_t>(parties), samples);
  return cost_model(protocol, features, sizes);
}

double published_ratio_re_over_escaped(int parties, std::size_t features, std::size_t samples) {
  const std::uint64_t pairs = std::uint64_t(parties) * (parties - 1) / 2;
  return double(published_form(Protocol::kRe, pairs, features, samples)->total()) /
         double(published_form(Protocol::kEscaped, pairs, features, samples)->total());
}

AuditReport transcript_audit(const TranscriptTotals& totals, const CostPrediction& predicted) {
  AuditReport r;
  r.measured = {totals.phase_elements[0], totals.phase_elements[1]};
  r.predicted = predicted.artifact;
  std::map<MessageKind, std::uint64_t> kinds = predicted.artifact_by_kind;
  for (const auto& [kind, n] : totals.kind_elements) kinds.try_emplace(kind, 0);
  for (const auto& [kind, want] : kinds) {
    auto it = totals.kind_elements.find(kind);
    const std::uint64_t got = it == totals.kind_elements.end() ? 0 : it->second;
    auto pit = predicted.artifact_by_kind.find(kind);
    const std::uint64_t expect = pit == predicted.artifact_by_kind.end() ? 0 : pit->second;
    if (got != expect) {
      r.offending_kinds.push_back(to_string(kind) + " (measured " + std::to_string(got) +
                                  ", predicted " + std::to_string(expect) + ")");
    }
  }
  r.match = r.offending_kinds.empty() && r.measured == r.predicted;
  if (predicted.published && predicted.protocol == Protocol::kEscaped) {
    auto it = totals.kind_elements.find(MessageKind::kAlpha);
    const std::uint64_t alpha = it == totals.kind_elements.end() ? 0 : it->second;
    ElementCounts matrix_only{r.measured.among_ips, r.measured.ip_fp - alpha};
    r.published_form_match = matrix_only == *predicted.published;
  }
  if (predicted.samples) {
    r.published_ratio_re_over_escaped =
        published_ratio_re_over_escaped(predicted.parties, predicted.features, *predicted.samples);
  }
  return r;
}

void require_audit(const AuditReport& report) {
  if (report.match) return;
  std::string msg = "communication audit failed:";
  for (const auto& k : report.offending_kinds) msg += " " + k + ";";
  if (report.offending_kinds.empty()) msg += " phase totals differ";
  fail(ErrorKind::kAudit, msg);
}

}  // namespace secdot
