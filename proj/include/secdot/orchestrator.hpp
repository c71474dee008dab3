#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "secdot/cost.hpp"
#include "secdot/kernel.hpp"
#include "secdot/linalg.hpp"
#include "secdot/scalar.hpp"
#include "secdot/transport.hpp"

namespace secdot {

struct RunConfig {
  Protocol protocol = Protocol::kEscaped;
  int parties = 2;
  std::size_t features = 4;
  std::vector<std::size_t> samples{2, 2};  // one entry per party
  ScalarDomain domain = ScalarDomain::field();
  TransportKind transport = TransportKind::kLoopback;
  std::uint16_t base_port = 0;  // tcp only; 0 uses ephemeral ports
  std::uint64_t seed = 1;
  std::optional<double> sigma;
  bool verify = false;
  // Empty for synthetic data. Otherwise one features x samples CSV per
  // party; with csv_transpose each line is a sample.
  std::vector<std::string> csv_paths;
  bool csv_transpose = false;
};

// Throws a config error on M < 2, empty parties, f = 0 or mismatched CSVs.
void validate(const RunConfig& config);

// Per-party data: uniform in [-1, 1] from the data stream of `seed`.
std::vector<Matrix<double>> synthetic_data(std::size_t features,
                                           const std::vector<std::size_t>& samples,
                                           std::uint64_t seed);

struct Verification {
  bool passed = false;
  double max_deviation = 0.0;
  double bound = 0.0;
};

struct RunTiming {
  double protocol_ms = 0.0;
  double assembly_ms = 0.0;
  double kernel_ms = 0.0;
  double verify_ms = 0.0;
  double total_ms = 0.0;
};

struct RunReport {
  RunConfig config;
  std::vector<std::uint64_t> data_seeds;  // empty for CSV input
  Matrix<double> gram;                    // decoded to reals for the field domain
  std::string gram_checksum;              // SHA-256 over the wire words of the raw gram
  Transcript transcript;
  TranscriptTotals totals;
  CostPrediction prediction;
  AuditReport audit;
  std::optional<Verification> verification;  // with --verify
  std::optional<KernelMatrix> kernel;        // with --sigma
  std::optional<double> kernel_deviation;    // with --sigma and --verify
  RunTiming timing;

  bool passed() const { return audit.match && (!verification || verification->passed); }

  // Timing is omitted unless requested so that equal configs produce equal
  // documents.
  std::string to_json(bool include_timing = true) const;
};

RunReport run(const RunConfig& config);

// Writes party_<i>.csv (features x samples) into out_dir and returns the paths.
std::vector<std::string> gen_data(std::size_t features, const std::vector<std::size_t>& samples,
                                  std::uint64_t seed, const std::string& out_dir);

struct CompareResult {
  std::vector<RunReport> reports;  // escaped, re
  bool grams_identical = false;
  double max_gram_difference = 0.0;

  std::string table() const;
  std::string to_json(bool include_timing = true) const;
};

// Runs both protocols on `config` (its protocol field is ignored). Throws a
// verification error when the grams disagree.
CompareResult compare(const RunConfig& config);

}  // namespace secdot
