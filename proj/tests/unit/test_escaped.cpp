#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "../oracles.hpp"
#include "secdot/escaped.hpp"
#include "secdot/orchestrator.hpp"
#include "secdot/protocol.hpp"

using namespace secdot;
using F5 = ModInt<5>;
using F251 = ModInt<251>;

namespace {

template <class T>
PartyState<T> manual_state(std::uint16_t id, Matrix<T> x, Matrix<T> a, T alpha) {
  PartyState<T> s;
  s.party_id = id;
  s.data = std::move(x);
  s.mask = std::move(a);
  s.mask_scalar = alpha;
  return s;
}

template <class T>
Matrix<T> scalar_matrix(std::uint64_t v) {
  return Matrix<T>(1, 1, {T(v)});
}

Matrix<Fp> plain_gram(const Matrix<Fp>& a, const Matrix<Fp>& b) {
  Matrix<Fp> out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::vector<std::uint64_t> x, y;
      for (std::size_t k = 0; k < a.rows(); ++k) {
        x.push_back(a(k, i).value());
        y.push_back(b(k, j).value());
      }
      out(i, j) = Fp(oracle::dot_mod(x, y));
    }
  }
  return out;
}

}  // namespace

TEST(AliceRound1, DegenerateMasks) {
  Matrix<Fp> x = random_matrix<Fp>(3, 2, 1);
  auto s = manual_state<Fp>(1, x, Matrix<Fp>(3, 2), Fp(1));
  auto m = alice_round1(s);
  EXPECT_EQ(m.masked_data, x);
  EXPECT_EQ(m.masked_mask, Matrix<Fp>(3, 2));
  EXPECT_EQ(bob_round1(s), x);
}

TEST(WorkedExample, SingleFeatureOverZ251) {
  auto alice = manual_state<F251>(1, scalar_matrix<F251>(5), scalar_matrix<F251>(2), F251(3));
  auto bob = manual_state<F251>(2, scalar_matrix<F251>(7), scalar_matrix<F251>(4), F251(1));
  auto am = alice_round1(alice);
  EXPECT_EQ(am.masked_data, scalar_matrix<F251>(3));
  EXPECT_EQ(am.masked_mask, scalar_matrix<F251>(6));
  Matrix<F251> bm = bob_round1(bob);
  EXPECT_EQ(bm, scalar_matrix<F251>(3));
  Matrix<F251> a1 = alice_compute(alice, bm);
  EXPECT_EQ(a1, scalar_matrix<F251>(6));
  auto [b1, b2] = bob_compute(bob, am.masked_data, am.masked_mask);
  EXPECT_EQ(b1, scalar_matrix<F251>(21));
  EXPECT_EQ(b2, scalar_matrix<F251>(24));
  EXPECT_EQ(F251(3).inv(), F251(84));
  EXPECT_EQ(F251(84) * F251(24), F251(8));
  PairResult<F251> pr{1, 2, a1, b1, b2, F251(3)};
  EXPECT_EQ(fp_combine(pr), scalar_matrix<F251>(5 * 7));
}

TEST(AliceCompute, ZeroMaskAndOracle) {
  auto s = manual_state<Fp>(1, random_matrix<Fp>(4, 2, 1), Matrix<Fp>(4, 2), Fp(5));
  EXPECT_EQ(alice_compute(s, random_matrix<Fp>(4, 3, 2)), Matrix<Fp>(2, 3));
  auto t = PartyState<Fp>::create(1, random_matrix<Fp>(6, 3, 3), 77);
  Matrix<Fp> yb = random_matrix<Fp>(6, 5, 4);
  EXPECT_EQ(alice_compute(t, yb), plain_gram(t.mask, yb));
  EXPECT_THROW(alice_compute(t, random_matrix<Fp>(5, 5, 4)), Error);
}

TEST(BobCompute, ZeroMaskAndShapes) {
  auto bob = manual_state<Fp>(2, random_matrix<Fp>(4, 2, 5), Matrix<Fp>(4, 2), Fp(1));
  auto [b1, b2] = bob_compute(bob, random_matrix<Fp>(4, 3, 6), random_matrix<Fp>(4, 3, 7));
  EXPECT_EQ(b2, Matrix<Fp>(3, 2));
  try {
    bob_compute(bob, random_matrix<Fp>(4, 3, 6), random_matrix<Fp>(4, 2, 7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
}

TEST(FpCombine, ZeroMasksGivePlainProduct) {
  Matrix<Fp> x = random_matrix<Fp>(5, 2, 8), y = random_matrix<Fp>(5, 3, 9);
  auto alice = manual_state<Fp>(1, x, Matrix<Fp>(5, 2), Fp(1));
  auto bob = manual_state<Fp>(2, y, Matrix<Fp>(5, 3), Fp(1));
  auto pr = run_pair(alice, bob);
  EXPECT_EQ(pr.a1, Matrix<Fp>(2, 3));
  EXPECT_EQ(pr.b2, Matrix<Fp>(2, 3));
  EXPECT_EQ(pr.b1, plain_gram(x, y));
  EXPECT_EQ(fp_combine(pr), plain_gram(x, y));
}

TEST(FpCombine, ZeroAlphaIsProtocolError) {
  PairResult<Fp> pr{1, 2, Matrix<Fp>(1, 1), Matrix<Fp>(1, 1), Matrix<Fp>(1, 1), Fp(0)};
  try {
    fp_combine(pr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
  auto s = manual_state<Fp>(1, Matrix<Fp>(1, 1), Matrix<Fp>(1, 1), Fp(0));
  EXPECT_THROW(alice_round1(s), Error);
  auto bad = manual_state<Fp>(1, Matrix<Fp>(2, 1), Matrix<Fp>(1, 1), Fp(1));
  EXPECT_THROW(bob_round1(bad), Error);
}

TEST(FpCombine, FuzzTwoParties) {
  Rng rng(10);
  for (int t = 0; t < 300; ++t) {
    const std::size_t f = 1 + rng() % 32, na = 1 + rng() % 8, nb = 1 + rng() % 8;
    auto alice = PartyState<Fp>::create(1, random_matrix<Fp>(f, na, rng), rng());
    auto bob = PartyState<Fp>::create(2, random_matrix<Fp>(f, nb, rng), rng());
    EXPECT_EQ(fp_combine(run_pair(alice, bob)), plain_gram(alice.data, bob.data));
  }
}

TEST(FpCombine, FloatWithinRelativeTolerance) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    auto alice = PartyState<double>::create(1, random_matrix<double>(16, 3, rng), rng());
    auto bob = PartyState<double>::create(2, random_matrix<double>(16, 4, rng), rng());
    Matrix<double> got = fp_combine(run_pair(alice, bob));
    Matrix<double> want = gram_t(alice.data, bob.data);
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got.data()[i], want.data()[i], 1e-9 * std::max(1.0, std::fabs(want.data()[i])));
  }
}

TEST(PartyStateCreate, MaskScalarNonzeroAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = PartyState<F5>::create(1, Matrix<F5>(1, 1), seed);
    EXPECT_FALSE(s.mask_scalar.is_zero());
  }
  auto a = PartyState<Fp>::create(2, random_matrix<Fp>(3, 3, 1), 5);
  auto b = PartyState<Fp>::create(2, random_matrix<Fp>(3, 3, 1), 5);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.mask_scalar, b.mask_scalar);
  auto c = PartyState<Fp>::create(3, random_matrix<Fp>(3, 3, 1), 5);
  EXPECT_NE(a.mask, c.mask);
}

TEST(PairSchedule, Examples) {
  EXPECT_EQ(pair_schedule(2), (std::vector<PartyPair>{{1, 2}}));
  EXPECT_EQ(pair_schedule(3), (std::vector<PartyPair>{{1, 2}, {1, 3}, {2, 3}}));
  EXPECT_EQ(pair_schedule(4).size(), 6u);
  try {
    pair_schedule(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(PairSchedule, RoundsAreDisjointAndComplete) {
  for (int m = 2; m <= 9; ++m) {
    auto rounds = schedule_rounds(m);
    EXPECT_EQ(rounds.size(), std::size_t(m % 2 == 0 ? m - 1 : m));
    std::set<PartyPair> all;
    for (const auto& round : rounds) {
      std::set<int> busy;
      for (const auto& [a, b] : round) {
        EXPECT_LT(a, b);
        EXPECT_TRUE(busy.insert(a).second);
        EXPECT_TRUE(busy.insert(b).second);
        EXPECT_TRUE(all.insert({a, b}).second);
      }
      if (m % 2 == 1) EXPECT_EQ(busy.size(), std::size_t(m - 1));
    }
    auto flat = pair_schedule(m);
    EXPECT_EQ(all, std::set<PartyPair>(flat.begin(), flat.end()));
  }
  auto four = schedule_rounds(4);
  ASSERT_EQ(four.size(), 3u);
  for (const auto& r : four) EXPECT_EQ(r.size(), 2u);
}

TEST(AssembleGram, ThreePartiesMatchPlaintext) {
  Rng rng(12);
  Matrix<Fp> all = random_matrix<Fp>(6, 9, rng);
  std::vector<PartyState<Fp>> parties;
  for (int i = 0; i < 3; ++i) {
    Matrix<Fp> part(6, 3);
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 3; ++c) part(r, c) = all(r, 3 * i + c);
    parties.push_back(PartyState<Fp>::create(std::uint16_t(i + 1), part, 99));
  }
  std::vector<Matrix<Fp>> self;
  for (const auto& p : parties) self.push_back(gram_t(p.data, p.data));
  std::vector<PairResult<Fp>> results;
  for (const auto& [a, b] : pair_schedule(3)) results.push_back(run_pair(parties[a - 1], parties[b - 1]));
  auto g = assemble_gram<Fp>(self, results);
  EXPECT_EQ(g.full, plain_gram(all, all));
  EXPECT_EQ(g.full, transpose(g.full));
  EXPECT_EQ(g.cross_blocks.size(), 3u);
  EXPECT_EQ(g.self_blocks.size(), 3u);

  results.pop_back();
  try {
    assemble_gram<Fp>(self, results);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocolIncomplete);
    EXPECT_NE(std::string(e.what()).find("(2,3)"), std::string::npos);
  }
}

TEST(AssembleGram, SinglePartyIsSelfBlock) {
  Matrix<Fp> x = random_matrix<Fp>(3, 4, 13);
  auto g = assemble_gram<Fp>({gram_t(x, x)}, {});
  EXPECT_EQ(g.full, gram_t(x, x));
}

TEST(MaskUniformity, MaskedDataExhaustiveZ5) {
  // f = 1, n = 2: all 25 masks; X - a is uniform and the same for every X.
  std::map<std::pair<int, int>, int> first;
  for (int x0 = 0; x0 < 5; ++x0) {
    for (int x1 = 0; x1 < 5; ++x1) {
      std::map<std::pair<int, int>, int> hist;
      for (int a0 = 0; a0 < 5; ++a0) {
        for (int a1 = 0; a1 < 5; ++a1) {
          auto s = manual_state<F5>(1, Matrix<F5>(1, 2, {F5(x0), F5(x1)}),
                                    Matrix<F5>(1, 2, {F5(a0), F5(a1)}), F5(1));
          Matrix<F5> m = bob_round1(s);
          hist[{int(m(0, 0).value()), int(m(0, 1).value())}]++;
        }
      }
      EXPECT_EQ(hist.size(), 25u);
      for (const auto& [k, c] : hist) EXPECT_EQ(c, 1);
      if (first.empty()) first = hist;
      EXPECT_EQ(hist, first);
    }
  }
}

TEST(MaskUniformity, JointMaskedPairLeaksOnlyThroughZeroMaskZ5) {
  // Bob sees (u, v) = (X - a, alpha a). For a = 0 that is (X, 0); otherwise
  // u != X and v != 0, each such pair once. Views for distinct X are
  // therefore 2/p apart in total variation, not identical.
  const int p = 5;
  std::map<int, std::map<std::pair<int, int>, int>> hists;
  for (int x = 0; x < p; ++x) {
    auto& hist = hists[x];
    for (int a = 0; a < p; ++a) {
      for (int alpha = 1; alpha < p; ++alpha) {
        auto s = manual_state<F5>(1, Matrix<F5>(1, 1, {F5(x)}), Matrix<F5>(1, 1, {F5(a)}),
                                  F5(alpha));
        auto m = alice_round1(s);
        hist[{int(m.masked_data(0, 0).value()), int(m.masked_mask(0, 0).value())}]++;
      }
    }
    EXPECT_EQ(hist[std::make_pair(x, 0)], p - 1);
    for (int u = 0; u < p; ++u)
      for (int v = 1; v < p; ++v) EXPECT_EQ(hist[std::make_pair(u, v)], u == x ? 0 : 1);
  }
  for (int x = 1; x < p; ++x) {
    double tv = 0.0;
    for (int u = 0; u < p; ++u)
      for (int v = 0; v < p; ++v)
        tv += std::abs(hists[0][{u, v}] - hists[x][{u, v}]) / double(p * (p - 1));
    EXPECT_DOUBLE_EQ(tv / 2, 2.0 / p);
  }
}

TEST(LeakageView, ThreePartyRunMatchesPrivateState) {
  RunConfig c;
  c.protocol = Protocol::kEscaped;
  c.parties = 3;
  c.features = 5;
  c.samples = {2, 3, 2};
  c.seed = 17;
  RunReport r = run(c);
  auto view = leakage_view<Fp>(r.transcript, 3);

  auto real = synthetic_data(c.features, c.samples, c.seed);
  std::vector<PartyState<Fp>> states;
  for (int i = 0; i < 3; ++i)
    states.push_back(PartyState<Fp>::create(std::uint16_t(i + 1),
                                            encode_matrix(real[i], c.domain.codec()), c.seed));
  EXPECT_TRUE(leakage_matches<Fp>(view, states));
  EXPECT_EQ(view.mask_data.at({2, 3}), plain_gram(states[1].mask, states[2].data));
  EXPECT_EQ(view.alphas.size(), 2u);
  EXPECT_EQ(view.alphas.count(3), 0u);

  // Index k < 3 is X_{k+1}, 3 + k is a_{k+1}.
  auto grid = view.availability(3);
  const std::vector<std::vector<int>> expected = {
      {1, 1, 1, 0, 0, 0},
      {1, 1, 1, 1, 0, 0},
      {1, 1, 1, 1, 1, 0},
      {0, 1, 1, 0, 1, 1},
      {0, 0, 1, 1, 0, 1},
      {0, 0, 0, 1, 1, 0},
  };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) EXPECT_EQ(int(grid[i][j]), expected[i][j]) << i << "," << j;

  // Changing a mask breaks the match.
  states[0].mask.data()[0] += Fp(1);
  EXPECT_FALSE(leakage_matches<Fp>(view, states));
}

TEST(LeakageView, ZeroMasksRevealPlainBlocks) {
  Matrix<Fp> x = random_matrix<Fp>(3, 2, 1), y = random_matrix<Fp>(3, 2, 2);
  auto alice = manual_state<Fp>(1, x, Matrix<Fp>(3, 2), Fp(1));
  auto bob = manual_state<Fp>(2, y, Matrix<Fp>(3, 2), Fp(1));
  auto am = alice_round1(alice);
  EXPECT_EQ(am.masked_data, x);
  auto [b1, b2] = bob_compute(bob, am.masked_data, am.masked_mask);
  EXPECT_EQ(b1, gram_t(x, y));
}

TEST(Rotation, IdentityLeavesDataUnchanged) {
  Matrix<double> d = random_matrix<double>(5, 4, 1);
  auto r = rotation_check(d, Matrix<double>::identity(5));
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_EQ(r.rotated, d);
  EXPECT_THROW(rotation_nonuniqueness_check(Matrix<double>(5, 4), 1), Error);
}

TEST(Rotation, RandomOrthogonalReproducesGram) {
  Matrix<double> d = random_matrix<double>(20, 12, 2);
  std::vector<Matrix<double>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto r = rotation_nonuniqueness_check(d, seed);
    EXPECT_LT(r.residual, 1e-8);
    EXPECT_GT(r.distance, 1e-3);
    for (const auto& e : seen) EXPECT_NE(e, r.rotated);
    seen.push_back(r.rotated);
  }
  Matrix<double> q = random_orthogonal(20, 3);
  Matrix<double> qtq = gram_t(q, q);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(qtq(i, j), i == j ? 1.0 : 0.0, 1e-12);
  EXPECT_THROW(rotation_check(d, Matrix<double>::identity(3)), Error);
}
