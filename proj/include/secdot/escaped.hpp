#pragma once

// Pairwise masking protocol. For a pair (Alice = smaller id, Bob):
//   Alice -> Bob : X - a, alpha a          Bob -> Alice : Y - b
//   Alice -> FP  : A1 = a^T (Y - b), alpha
//   Bob   -> FP  : B1 = (X - a)^T Y, B2 = (alpha a)^T b
//   FP           : A1 + B1 + alpha^-1 B2 = X^T Y
// Each party samples its mask matrix and mask scalar once per run and reuses
// them for every pair it takes part in.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secdot/error.hpp"
#include "secdot/linalg.hpp"
#include "secdot/scalar.hpp"

namespace secdot {

template <class T>
struct PartyState {
  std::uint16_t party_id = 0;
  Matrix<T> data;  // f x n_i
  Matrix<T> mask;  // f x n_i
  T mask_scalar = ScalarTraits<T>::one();

  // Uniform mask and nonzero mask scalar from per-party streams of run_seed.
  static PartyState create(std::uint16_t id, Matrix<T> data, std::uint64_t run_seed) {
    PartyState s;
    s.party_id = id;
    Rng mask_rng(derive_seed(run_seed, SeedTag::kMask, id));
    s.mask = random_matrix<T>(data.rows(), data.cols(), mask_rng);
    Rng alpha_rng(derive_seed(run_seed, SeedTag::kAlpha, id));
    s.mask_scalar = ScalarTraits<T>::sample_nonzero(alpha_rng);
    s.data = std::move(data);
    return s;
  }
};

template <class T>
struct AliceMessage {
  Matrix<T> masked_data;  // X - a
  Matrix<T> masked_mask;  // alpha a
};

template <class T>
struct PairResult {
  std::uint16_t alice_id = 0;
  std::uint16_t bob_id = 0;
  Matrix<T> a1;
  Matrix<T> b1;
  Matrix<T> b2;
  T alpha = ScalarTraits<T>::one();
};

namespace detail {
template <class T>
void check_party(const PartyState<T>& s) {
  if (s.mask.rows() != s.data.rows() || s.mask.cols() != s.data.cols()) {
    fail(ErrorKind::kProtocol, "party " + std::to_string(s.party_id) +
                                   ": mask shape " + s.mask.shape_string() +
                                   " does not match data shape " + s.data.shape_string());
  }
  if (ScalarTraits<T>::is_zero(s.mask_scalar)) {
    fail(ErrorKind::kProtocol, "party " + std::to_string(s.party_id) + ": mask scalar is zero");
  }
}
}  // namespace detail

template <class T>
AliceMessage<T> alice_round1(const PartyState<T>& s) {
  detail::check_party(s);
  return {mat_sub(s.data, s.mask), mat_scale(s.mask_scalar, s.mask)};
}

template <class T>
Matrix<T> bob_round1(const PartyState<T>& s) {
  detail::check_party(s);
  return mat_sub(s.data, s.mask);
}

// A1 = a^T (Y - b)
template <class T>
Matrix<T> alice_compute(const PartyState<T>& s, const Matrix<T>& bob_masked) {
  return gram_t(s.mask, bob_masked);
}

// B1 = (X - a)^T Y, B2 = (alpha a)^T b
template <class T>
std::pair<Matrix<T>, Matrix<T>> bob_compute(const PartyState<T>& s,
                                            const Matrix<T>& alice_masked,
                                            const Matrix<T>& alice_scaled_mask) {
  if (alice_masked.rows() != alice_scaled_mask.rows() ||
      alice_masked.cols() != alice_scaled_mask.cols()) {
    fail(ErrorKind::kDimension, "bob_compute: masked data " + alice_masked.shape_string() +
                                    " and masked mask " + alice_scaled_mask.shape_string() +
                                    " differ");
  }
  return {gram_t(alice_masked, s.data), gram_t(alice_scaled_mask, s.mask)};
}

template <class T>
Matrix<T> fp_combine(const PairResult<T>& pr) {
  if (ScalarTraits<T>::is_zero(pr.alpha)) {
    fail(ErrorKind::kProtocol, "pair (" + std::to_string(pr.alice_id) + "," +
                                   std::to_string(pr.bob_id) + "): mask scalar is zero");
  }
  return mat_add(mat_add(pr.a1, pr.b1), mat_scale(ScalarTraits<T>::inv(pr.alpha), pr.b2));
}

// Runs one pair entirely in memory.
template <class T>
PairResult<T> run_pair(const PartyState<T>& alice, const PartyState<T>& bob) {
  AliceMessage<T> am = alice_round1(alice);
  Matrix<T> bm = bob_round1(bob);
  PairResult<T> pr;
  pr.alice_id = alice.party_id;
  pr.bob_id = bob.party_id;
  pr.a1 = alice_compute(alice, bm);
  std::tie(pr.b1, pr.b2) = bob_compute(bob, am.masked_data, am.masked_mask);
  pr.alpha = alice.mask_scalar;
  return pr;
}

using PartyPair = std::pair<std::uint16_t, std::uint16_t>;

// All C(M,2) pairs (alice < bob), in lexicographic order.
std::vector<PartyPair> pair_schedule(int parties);

// Round-robin (circle method) rounds; every round pairs disjoint parties.
// With odd M one party idles per round.
std::vector<std::vector<PartyPair>> schedule_rounds(int parties);

template <class T>
struct GramAssembly {
  std::vector<Matrix<T>> self_blocks;         // index 0 is party 1
  std::map<PartyPair, Matrix<T>> cross_blocks;  // (i, j) with i < j
  std::vector<std::size_t> offsets;           // first sample index per party
  Matrix<T> full;
};

// Stacks blocks into the (sum n) x (sum n) gram matrix; block (j, i) is the
// transpose of block (i, j).
template <class T>
GramAssembly<T> assemble_blocks(std::vector<Matrix<T>> self_blocks,
                                std::map<PartyPair, Matrix<T>> cross_blocks) {
  const int m = static_cast<int>(self_blocks.size());
  GramAssembly<T> g;
  std::size_t total = 0;
  for (int i = 0; i < m; ++i) {
    const auto& sb = self_blocks[i];
    if (sb.rows() != sb.cols()) {
      fail(ErrorKind::kDimension, "self block of party " + std::to_string(i + 1) +
                                      " is not square");
    }
    g.offsets.push_back(total);
    total += sb.rows();
  }
  g.full = Matrix<T>(total, total);
  auto place = [&](int bi, int bj, const Matrix<T>& blk, bool transposed) {
    for (std::size_t r = 0; r < blk.rows(); ++r)
      for (std::size_t c = 0; c < blk.cols(); ++c) {
        if (transposed) {
          g.full(g.offsets[bj] + c, g.offsets[bi] + r) = blk(r, c);
        } else {
          g.full(g.offsets[bi] + r, g.offsets[bj] + c) = blk(r, c);
        }
      }
  };
  for (int i = 0; i < m; ++i) place(i, i, self_blocks[i], false);
  for (int i = 1; i <= m; ++i) {
    for (int j = i + 1; j <= m; ++j) {
      auto it = cross_blocks.find(
          PartyPair(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j)));
      if (it == cross_blocks.end()) {
        fail(ErrorKind::kProtocolIncomplete, "missing gram block for pair (" +
                                                 std::to_string(i) + "," + std::to_string(j) + ")");
      }
      const auto& blk = it->second;
      if (blk.rows() != self_blocks[i - 1].rows() || blk.cols() != self_blocks[j - 1].rows()) {
        fail(ErrorKind::kDimension, "gram block (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") has shape " + blk.shape_string());
      }
      place(i - 1, j - 1, blk, false);
      place(i - 1, j - 1, blk, true);
    }
  }
  g.self_blocks = std::move(self_blocks);
  g.cross_blocks = std::move(cross_blocks);
  return g;
}

template <class T>
GramAssembly<T> assemble_gram(std::vector<Matrix<T>> self_blocks,
                              std::span<const PairResult<T>> pair_results) {
  std::map<PartyPair, Matrix<T>> cross;
  for (const auto& pr : pair_results) cross[{pr.alice_id, pr.bob_id}] = fp_combine(pr);
  return assemble_blocks(std::move(self_blocks), std::move(cross));
}

// Everything the function-party can compute from the messages it received.
// Blocks are indexed by party id; `mask_data` holds a_i^T X_j and
// `mask_mask` a_i^T a_j, both for i < j only.
template <class T>
struct LeakageView {
  std::map<std::uint16_t, Matrix<T>> self_grams;
  std::map<PartyPair, Matrix<T>> data_data;
  std::map<PartyPair, Matrix<T>> mask_mask;
  std::map<PartyPair, Matrix<T>> mask_data;
  std::map<std::uint16_t, T> alphas;

  // Availability of the blocks of D^T D for D = [X_1..X_M, a_1..a_M];
  // index k < M is X_{k+1}, index M + k is a_{k+1}.
  std::vector<std::vector<bool>> availability(int parties) const {
    const std::size_t n = 2 * static_cast<std::size_t>(parties);
    std::vector<std::vector<bool>> grid(n, std::vector<bool>(n, false));
    auto mark = [&](std::size_t r, std::size_t c) { grid[r][c] = grid[c][r] = true; };
    const std::size_t m = static_cast<std::size_t>(parties);
    for (const auto& [id, g] : self_grams) mark(id - 1, id - 1);
    for (const auto& [key, g] : data_data) mark(key.first - 1, key.second - 1);
    for (const auto& [key, g] : mask_mask) mark(m + key.first - 1, m + key.second - 1);
    for (const auto& [key, g] : mask_data) mark(m + key.first - 1, key.second - 1);
    return grid;
  }
};

// True when every derived block equals the direct computation from the
// parties' private state.
template <class T>
bool leakage_matches(const LeakageView<T>& view, std::span<const PartyState<T>> parties) {
  auto party = [&](std::uint16_t id) -> const PartyState<T>& {
    for (const auto& p : parties)
      if (p.party_id == id) return p;
    fail(ErrorKind::kProtocol, "no party " + std::to_string(id));
  };
  for (const auto& [id, g] : view.self_grams)
    if (!(g == gram_t(party(id).data, party(id).data))) return false;
  for (const auto& [key, g] : view.data_data)
    if (!(g == gram_t(party(key.first).data, party(key.second).data))) return false;
  for (const auto& [key, g] : view.mask_mask)
    if (!(g == gram_t(party(key.first).mask, party(key.second).mask))) return false;
  for (const auto& [key, g] : view.mask_data)
    if (!(g == gram_t(party(key.first).mask, party(key.second).data))) return false;
  for (const auto& [id, a] : view.alphas)
    if (!(a == party(id).mask_scalar)) return false;
  return true;
}

// Orthogonal rotation check on real data: E = Q^T D reproduces D^T D.
struct RotationCheck {
  double residual = 0.0;       // max |E^T E - D^T D|
  double distance = 0.0;       // max |E - D|
  Matrix<double> rotated;      // E
};

Matrix<double> random_orthogonal(std::size_t n, std::uint64_t seed);
RotationCheck rotation_check(const Matrix<double>& d, const Matrix<double>& q);
RotationCheck rotation_nonuniqueness_check(const Matrix<double>& d, std::uint64_t seed);

}  // namespace secdot
