// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "secdot/dare.hpp"
#include "secdot/escaped.hpp"
#include "secdot/orchestrator.hpp"
#include "secdot/regen.hpp"

#ifndef SECDOT_CLI_PATH
#define SECDOT_CLI_PATH "secdot"
#endif

using namespace secdot;
using F5 = ModInt<5>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string run_cli(const std::string& args, int& status) {
  std::string cmd = std::string(SECDOT_CLI_PATH) + " " + args;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) {
    status = -1;
    return {};
  }
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  status = ::pclose(p);
  return out;
}

std::vector<oracle::PrintedLeaf> as_printed(const ReScheme& s) {
  std::vector<oracle::PrintedLeaf> out;
  for (const auto& l : s.leaves) {
    oracle::PrintedLeaf p{l.a, l.b, l.c, l.d, {}};
    for (const auto& t : l.offline) p.offline.emplace_back(t.index, t.sign);
    out.push_back(p);
  }
  return out;
}

RunConfig field_config(Protocol p, int m, std::size_t f, std::size_t n, std::uint64_t seed) {
  RunConfig c;
  c.protocol = p;
  c.parties = m;
  c.features = f;
  c.samples.assign(m, n);
  c.seed = seed;
  return c;
}

std::vector<std::uint64_t> to_words(const std::vector<Fp>& v) {
  std::vector<std::uint64_t> out;
  for (Fp x : v) out.push_back(x.value());
  return out;
}

// 1
Outcome sample_encoding() {
  int status = 0;
  std::string text = run_cli("dump-scheme --d 7", status);
  if (status != 0) return {false, "dump-scheme exited with " + std::to_string(status)};
  ReScheme s = parse_scheme_dump(text);
  if (s.leaves.size() != 7 || s.total_randoms != 34)
    return {false, fmt("%zu leaves, %zu randoms", s.leaves.size(), s.total_randoms)};
  std::string why;
  auto mine = as_printed(s);
  auto map = oracle::find_bijection(mine, oracle::corrected_sample_encoding_d7(), why);
  if (!map) return {false, "no bijection to the sample table: " + why};
  std::string literal_why;
  const bool literal = oracle::find_bijection(mine, oracle::printed_sample_encoding_d7(), literal_why)
                           .has_value();
  // The two printed +r_13 / +r_17 signs make the literal table fail to decode.
  Rng rng(7);
  std::vector<std::uint64_t> x(7), y(7), r(34);
  for (auto& v : x) v = rng() % oracle::kP61;
  for (auto& v : y) v = rng() % oracle::kP61;
  for (auto& v : r) v = rng() % oracle::kP61;
  const std::uint64_t want = oracle::dot_mod(x, y);
  const bool corrected_ok =
      oracle::decode_printed(oracle::corrected_sample_encoding_d7(), x, y, r, oracle::kP61) == want;
  const bool printed_ok =
      oracle::decode_printed(oracle::printed_sample_encoding_d7(), x, y, r, oracle::kP61) == want;
  if (!corrected_ok) return {false, "corrected table does not decode"};
  return {true, fmt("bijection over %zu indices to the sign-corrected table; literal table %s, "
                    "%s",
                    map->size(), literal ? "also matches" : "differs at +r_13 and +r_17",
                    printed_ok ? "decodes" : "does not decode")};
}

// 2
Outcome count_law() {
  for (std::size_t d = 1; d <= 128; ++d) {
    const std::size_t want = d == 1 ? 4 : 5 * d - 1;
    const std::size_t got = regen(d).total_randoms;
    if (got != want) return {false, fmt("d=%zu: %zu randoms, want %zu", d, got, want)};
  }
  return {true, "d = 1..128"};
}

// 3
Outcome re_decode_oracle() {
  Rng rng(derive_seed(3, SeedTag::kData, 0));
  std::map<std::size_t, ReScheme> schemes;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng() % 64;
    auto& s = schemes.try_emplace(d, regen(d)).first->second;
    std::vector<Fp> x(d), y(d);
    for (auto& v : x) v = ScalarTraits<Fp>::sample(rng);
    for (auto& v : y) v = ScalarTraits<Fp>::sample(rng);
    auto r = re_sample_randoms<Fp>(s, rng());
    auto xc = re_encode_x<Fp>(x, s, r);
    auto bob = re_bob_randoms<Fp>(s, r);
    auto yc = re_encode_y<Fp>(y, s, bob);
    auto off = re_offline<Fp>(s, r);
    Fp got = re_decode<Fp>(xc, yc, off);
    if (got.value() != oracle::dot_mod(to_words(x), to_words(y)))
      return {false, fmt("trial %d (d=%zu) decodes wrong", trial, d)};
  }
  return {true, "1000 instances, d <= 64"};
}

// 4
Outcome escaped_correctness() {
  Rng rng(4);
  int runs = 0;
  auto one = [&](int m) {
    RunConfig c = field_config(Protocol::kEscaped, m, 1 + rng() % 8, 1, rng());
    for (auto& n : c.samples) n = 1 + rng() % 4;
    c.verify = true;
    RunReport r = run(c);
    ++runs;
    return r.verification->passed && r.verification->max_deviation == 0.0;
  };
  for (int i = 0; i < 1000; ++i)
    if (!one(2)) return {false, fmt("M=2 run %d deviates", i)};
  for (int i = 0; i < 100; ++i)
    if (!one(3 + i % 3)) return {false, fmt("M=%d run %d deviates", 3 + i % 3, i)};
  return {true, fmt("%d runs exact", runs)};
}

// 5
Outcome cross_protocol() {
  for (int i = 0; i < 20; ++i) {
    RunConfig c = field_config(Protocol::kEscaped, 2 + i % 4, 1 + (i * 7) % 16, 1 + i % 5,
                               1000 + i);
    CompareResult res = compare(c);
    if (!res.grams_identical) return {false, fmt("config %d differs", i)};
  }
  return {true, "20 configs identical"};
}

// 6
Outcome dare_indistinguishability() {
  using Key = std::tuple<int, int, int, int, int>;
  auto key = [](const MulAddEncoding<F5>& e) {
    return Key{int(e.c1.value()), int(e.c2.value()), int(e.c3.value()), int(e.c4.value()),
               int(e.c5.value())};
  };
  const int triples[10][3] = {{0, 0, 0}, {1, 2, 3}, {4, 4, 4}, {2, 3, 0}, {3, 2, 0},
                              {0, 4, 1}, {1, 1, 4}, {2, 2, 1}, {4, 1, 3}, {3, 3, 2}};
  for (const auto& t : triples) {
    std::map<Key, int> real, sim;
    for (int r = 0; r < 625; ++r) {
      F5 r1(r % 5), r2(r / 5 % 5), r3(r / 25 % 5), r4(r / 125);
      real[key(muladd_encode(F5(t[0]), F5(t[1]), F5(t[2]), r1, r2, r3, r4))]++;
      sim[key(muladd_simulate(F5(t[0]) * F5(t[1]) + F5(t[2]), r1, r2, r3, r4))]++;
    }
    if (real != sim) return {false, fmt("triple (%d,%d,%d) histograms differ", t[0], t[1], t[2])};
  }
  return {true, "10 triples, 625 tuples each"};
}

// 7
Outcome mask_uniformity() {
  auto histogram = [](int x0, int x1) {
    std::map<std::pair<int, int>, int> h;
    for (int a0 = 0; a0 < 5; ++a0)
      for (int a1 = 0; a1 < 5; ++a1) {
        PartyState<F5> s;
        s.party_id = 1;
        s.data = Matrix<F5>(1, 2, {F5(x0), F5(x1)});
        s.mask = Matrix<F5>(1, 2, {F5(a0), F5(a1)});
        Matrix<F5> m = bob_round1(s);
        h[{int(m(0, 0).value()), int(m(0, 1).value())}]++;
      }
    return h;
  };
  auto h1 = histogram(0, 0);
  auto h2 = histogram(3, 1);
  bool uniform = h1.size() == 25;
  for (const auto& [k, c] : h1) uniform = uniform && c == 1;
  if (!uniform) return {false, "X - a not uniform"};
  if (h1 != h2) return {false, "distribution depends on X"};
  return {true, "25 masks, X in {(0,0), (3,1)}"};
}

// 8
Outcome communication() {
  double worst = 0.0;
  std::vector<std::tuple<double, double, double>> re_points;  // log f, log n, log elements
  for (int m = 2; m <= 5; ++m)
    for (std::size_t f : {1, 8, 64})
      for (std::size_t n : {1, 4, 16})
        for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
          RunReport r = run(field_config(p, m, f, n, 8));
          if (!r.audit.match)
            return {false, fmt("%s M=%d f=%zu n=%zu artifact mismatch", to_string(p).c_str(), m,
                               f, n)};
          if (p == Protocol::kEscaped && r.audit.published_form_match != true)
            return {false, fmt("escaped M=%d f=%zu n=%zu published form mismatch", m, f, n)};
          if (p == Protocol::kRe && m == 3)
            re_points.emplace_back(std::log(double(f)), std::log(double(n)),
                                   std::log(double(r.totals.total_elements())));
        }
  // Least squares log E = c + a log f + b log n over the M=3 RE points.
  double s[3][4] = {};
  for (auto [lf, ln, le] : re_points) {
    const double row[3] = {1.0, lf, ln};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) s[i][j] += row[i] * row[j];
      s[i][3] += row[i] * le;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int k = i + 1; k < 3; ++k) {
      const double q = s[k][i] / s[i][i];
      for (int j = i; j < 4; ++j) s[k][j] -= q * s[i][j];
    }
  double coef[3];
  for (int i = 2; i >= 0; --i) {
    coef[i] = s[i][3];
    for (int j = i + 1; j < 3; ++j) coef[i] -= s[i][j] * coef[j];
    coef[i] /= s[i][i];
  }
  worst = std::max(std::abs(coef[1] - 1.0), std::abs(coef[2] - 2.0));
  if (worst > 0.05) return {false, fmt("re slopes f %.3f n %.3f", coef[1], coef[2])};
  return {true, fmt("72 runs exact; re slopes f %.3f n %.3f", coef[1], coef[2])};
}

// 9
Outcome rotation() {
  Matrix<double> d = random_matrix<double>(20, 12, 9);
  double worst_residual = 0.0, least_distance = INFINITY;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RotationCheck c = rotation_nonuniqueness_check(d, seed);
    worst_residual = std::max(worst_residual, c.residual);
    least_distance = std::min(least_distance, c.distance);
  }
  const bool ok = worst_residual < 1e-8 && least_distance > 1e-3;
  return {ok, fmt("max residual %.2e, min distance %.3f", worst_residual, least_distance)};
}

// 10
Outcome rbf() {
  const double sigma = 1.3;
  const std::size_t f = 8;
  RunConfig c = field_config(Protocol::kEscaped, 2, f, 25, 10);
  c.sigma = sigma;
  c.verify = true;
  RunReport field = run(c);
  c.domain = ScalarDomain::float64();
  RunReport real = run(c);
  // Per-entry encoding error 2^-(s+1) on |x| <= 1 gives a gram error below
  // f 2^-s, a squared-distance error below 4 f 2^-s, and exp is 1-Lipschitz
  // on the negative axis.
  const double bound = 4.0 * double(f) * std::ldexp(1.0, -16) / (2 * sigma * sigma);
  const double fd = *field.kernel_deviation, rd = *real.kernel_deviation;
  const bool ok = field.kernel->entries.rows() == 50 && rd <= 1e-9 && fd <= bound;
  return {ok, fmt("float %.2e (<= 1e-9), field %.2e (<= %.2e)", rd, fd, bound)};
}

// 11
Outcome relative_performance() {
  CompareResult res = compare(field_config(Protocol::kEscaped, 3, 100, 10, 11));
  const RunReport& e = res.reports[0];
  const RunReport& r = res.reports[1];
  const double ratio = double(r.totals.total_bytes()) / double(e.totals.total_bytes());
  const bool ok = res.grams_identical && e.timing.total_ms < r.timing.total_ms &&
                  e.totals.total_bytes() < r.totals.total_bytes() && ratio > 10.0;
  return {ok, fmt("escaped %.1f ms %llu B, re %.1f ms %llu B, byte ratio %.1f", e.timing.total_ms,
                  (unsigned long long)e.totals.total_bytes(), r.timing.total_ms,
                  (unsigned long long)r.totals.total_bytes(), ratio)};
}

// 12
Outcome transports() {
  for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
    RunConfig c = field_config(p, 3, 6, 3, 12);
    RunReport loop = run(c);
    c.transport = TransportKind::kTcp;
    RunReport tcp = run(c);
    if (loop.transcript.canonical_bytes() != tcp.transcript.canonical_bytes())
      return {false, to_string(p) + " transcripts differ"};
  }
  return {true, "escaped and re, M=3"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "sample-encoding fidelity", 1, sample_encoding},
      {2, "random-count law", 1, count_law},
      {3, "re decode oracle", 10, re_decode_oracle},
      {4, "escaped correctness", 30, escaped_correctness},
      {5, "cross-protocol agreement", 60, cross_protocol},
      {6, "dare indistinguishability (Z5)", 5, dare_indistinguishability},
      {7, "mask uniformity (Z5)", 1, mask_uniformity},
      {8, "communication accounting", 120, communication},
      {9, "rotation non-uniqueness", 5, rotation},
      {10, "rbf equivalence", 10, rbf},
      {11, "relative performance direction", 60, relative_performance},
      {12, "tcp/loopback equivalence", 30, transports},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += fmt("; over time limit %.0f s", c.limit_s);
    }
    std::printf("%s  %2d %-32s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
