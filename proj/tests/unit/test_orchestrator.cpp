#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "oracles.hpp"
#include "secdot/orchestrator.hpp"

using namespace secdot;
using nlohmann::json;

namespace {

RunConfig config(Protocol p, int m, std::size_t f, std::size_t n, std::uint64_t seed = 1) {
  RunConfig c;
  c.protocol = p;
  c.parties = m;
  c.features = f;
  c.samples.assign(m, n);
  c.seed = seed;
  c.verify = true;
  return c;
}

// Plain-double gram of the synthetic data, columns in party order.
std::vector<std::vector<double>> oracle_gram(const RunConfig& c) {
  std::vector<std::vector<double>> cols;
  for (const auto& block : synthetic_data(c.features, c.samples, c.seed))
    for (std::size_t j = 0; j < block.cols(); ++j) cols.push_back(block.col(j));
  return oracle::gram(cols);
}

}  // namespace

TEST(Run, EscapedSmallExample) {
  auto r = run(config(Protocol::kEscaped, 2, 4, 2));
  ASSERT_TRUE(r.verification);
  EXPECT_TRUE(r.verification->passed);
  EXPECT_EQ(r.verification->max_deviation, 0.0);
  EXPECT_TRUE(r.audit.match);
  EXPECT_EQ(r.gram.rows(), 4u);
  EXPECT_EQ(r.totals.phase_elements[0], 24u);
  EXPECT_EQ(r.totals.phase_elements[1], 13u);
  EXPECT_TRUE(r.passed());
}

TEST(Run, ReThreePartiesAuditMatches) {
  auto r = run(config(Protocol::kRe, 3, 8, 3));
  EXPECT_TRUE(r.audit.match);
  EXPECT_TRUE(r.verification->passed);
  EXPECT_EQ(r.totals.phase_elements[0], 3u * 3u * 8u * 9u);
  EXPECT_EQ(r.totals.phase_elements[1], 3u * 5u * 8u * 9u);
}

TEST(Run, GramMatchesPlainOracle) {
  for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
    RunConfig c = config(p, 3, 6, 0, 5);
    c.samples = {2, 3, 1};
    auto r = run(c);
    auto want = oracle_gram(c);
    const double tol = 6 * std::ldexp(1.0, 1 - 16);
    for (std::size_t i = 0; i < want.size(); ++i)
      for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(r.gram(i, j), want[i][j], tol);
    auto doc = json::parse(r.to_json());
    EXPECT_EQ(doc["cost_model"]["published"], "n/a");
  }
}

TEST(Run, ConfigErrors) {
  auto expect_config = [](RunConfig c) {
    try {
      run(c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
      EXPECT_EQ(e.exit_code(), 2);
    }
  };
  expect_config(config(Protocol::kEscaped, 1, 4, 2));
  RunConfig c = config(Protocol::kEscaped, 2, 0, 2);
  expect_config(c);
  c = config(Protocol::kEscaped, 3, 4, 2);
  c.samples = {2, 2};
  expect_config(c);
}

TEST(Run, ZeroSamplePartyIsRejected) {
  RunConfig c = config(Protocol::kEscaped, 2, 4, 2);
  c.samples = {2, 0};
  EXPECT_THROW(run(c), Error);
}

TEST(Run, DeterministicReports) {
  for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
    auto c = config(p, 3, 5, 2, 99);
    c.sigma = 1.5;
    EXPECT_EQ(run(c).to_json(false), run(c).to_json(false));
  }
  auto a = run(config(Protocol::kEscaped, 2, 4, 2, 1));
  auto b = run(config(Protocol::kEscaped, 2, 4, 2, 2));
  EXPECT_NE(a.transcript.checksum(), b.transcript.checksum());
}

TEST(Run, ReportSchema) {
  auto c = config(Protocol::kEscaped, 2, 4, 2);
  c.sigma = 1.0;
  auto doc = json::parse(run(c).to_json());
  for (const char* key : {"schema", "config", "seeds", "gram", "verification", "transcript",
                          "cost_model", "audit", "passed", "kernel", "timing_ms"})
    EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_EQ(doc["schema"], "secdot.run-report/1");
  EXPECT_EQ(doc["seeds"]["data"].size(), 2u);
  EXPECT_EQ(doc["audit"]["published_form_match"], true);
  EXPECT_FALSE(json::parse(run(c).to_json(false)).contains("timing_ms"));
}

TEST(Run, KernelStep) {
  auto c = config(Protocol::kRe, 2, 3, 4);
  c.sigma = 0.8;
  auto r = run(c);
  ASSERT_TRUE(r.kernel);
  ASSERT_TRUE(r.kernel_deviation);
  // Fixed-point error of the gram propagates through exp(-d2 / 2 sigma^2).
  EXPECT_LT(*r.kernel_deviation, 4 * 3 * std::ldexp(1.0, -16) / (2 * 0.8 * 0.8));
}

TEST(Run, FloatDomain) {
  for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
    auto c = config(p, 3, 6, 3, 7);
    c.domain = ScalarDomain::float64();
    auto r = run(c);
    EXPECT_TRUE(r.verification->passed) << r.verification->max_deviation;
    EXPECT_TRUE(r.audit.match);
    auto want = oracle_gram(c);
    for (std::size_t i = 0; i < want.size(); ++i)
      for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(r.gram(i, j), want[i][j], 1e-9);
  }
}

TEST(Run, TcpMatchesLoopback) {
  for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
    auto c = config(p, 3, 4, 2, 3);
    auto loop = run(c);
    c.transport = TransportKind::kTcp;
    auto tcp = run(c);
    EXPECT_EQ(tcp.gram_checksum, loop.gram_checksum);
    EXPECT_EQ(tcp.transcript.canonical_bytes(), loop.transcript.canonical_bytes());
  }
}

TEST(Run, CsvInputMatchesSynthetic) {
  auto dir = std::filesystem::temp_directory_path() / ("secdot_orch_" + std::to_string(::getpid()));
  std::vector<std::size_t> sizes{3, 2};
  auto paths = gen_data(5, sizes, 42, dir.string());
  ASSERT_EQ(paths.size(), 2u);
  auto synth = synthetic_data(5, sizes, 42);
  for (std::size_t i = 0; i < 2; ++i) {
    auto loaded = load_csv_real(paths[i]);
    EXPECT_EQ(loaded, synth[i]);
  }
  RunConfig from_csv = config(Protocol::kEscaped, 2, 5, 0, 42);
  from_csv.samples = sizes;
  RunConfig from_seed = from_csv;
  from_csv.csv_paths = paths;
  EXPECT_EQ(run(from_csv).gram_checksum, run(from_seed).gram_checksum);
  // Shapes come from the files; a file with a different feature count is rejected.
  store_csv(synthetic_data(4, {2}, 1)[0], (dir / "short.csv").string());
  from_csv.csv_paths[1] = (dir / "short.csv").string();
  try {
    run(from_csv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  std::filesystem::remove_all(dir);
}

TEST(Compare, GramsIdentical) {
  auto c = config(Protocol::kEscaped, 3, 20, 5);
  auto res = compare(c);
  EXPECT_TRUE(res.grams_identical);
  EXPECT_EQ(res.max_gram_difference, 0.0);
  ASSERT_EQ(res.reports.size(), 2u);
  EXPECT_EQ(res.reports[0].gram_checksum, res.reports[1].gram_checksum);
  auto doc = json::parse(res.to_json());
  EXPECT_EQ(doc["schema"], "secdot.compare-report/1");
  EXPECT_GT(doc["byte_ratio_re_over_escaped"].get<double>(), 1.0);
  EXPECT_NE(res.table().find("escaped"), std::string::npos);
}

TEST(Compare, ByteRatioGrowsWithSamples) {
  double last = 0.0;
  for (std::size_t n : {2, 4, 8}) {
    auto res = compare(config(Protocol::kEscaped, 3, 10, n));
    const double ratio = double(res.reports[1].totals.total_bytes()) /
                         double(res.reports[0].totals.total_bytes());
    EXPECT_GT(ratio, last);
    last = ratio;
    EXPECT_TRUE(res.reports[0].prediction.published);
    EXPECT_TRUE(res.reports[1].prediction.published);
  }
}

TEST(Fuzz, SmallGrid) {
  std::uint64_t seed = 100;
  for (int m = 2; m <= 4; ++m)
    for (std::size_t f : {1, 3})
      for (std::size_t n : {1, 2})
        for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
          auto r = run(config(p, m, f, n, seed++));
          EXPECT_TRUE(r.passed()) << to_string(p) << " M=" << m << " f=" << f << " n=" << n;
        }
}

TEST(Fuzz, EscapedCostIsLinearInFnPlusQuadraticInN) {
  // Fit among-IP and FP element counts to c1 f n and c2 n^2 per pair.
  for (std::size_t f : {2, 5})
    for (std::size_t n : {1, 3, 4}) {
      auto r = run(config(Protocol::kEscaped, 2, f, n));
      EXPECT_EQ(r.totals.phase_elements[0], 3 * f * n);
      EXPECT_EQ(r.totals.phase_elements[1] - 1, 3 * n * n);
    }
}
