#include "secdot/escaped.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

namespace secdot {

std::vector<PartyPair> pair_schedule(int parties) {
  if (parties < 2) fail(ErrorKind::kDomain, "pair schedule needs at least 2 parties");
  std::vector<PartyPair> out;
  for (int i = 1; i <= parties; ++i)
    for (int j = i + 1; j <= parties; ++j)
      out.emplace_back(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j));
  return out;
}

std::vector<std::vector<PartyPair>> schedule_rounds(int parties) {
  if (parties < 2) fail(ErrorKind::kDomain, "pair schedule needs at least 2 parties");
  // Circle method; with odd M the extra slot is a bye.
  const int slots = parties % 2 == 0 ? parties : parties + 1;
  std::vector<int> ring(slots);
  for (int k = 0; k < slots; ++k) ring[k] = k + 1;
  std::vector<std::vector<PartyPair>> rounds;
  for (int r = 0; r < slots - 1; ++r) {
    std::vector<PartyPair> round;
    for (int k = 0; k < slots / 2; ++k) {
      int x = ring[k];
      int y = ring[slots - 1 - k];
      if (x > parties || y > parties) continue;
      round.emplace_back(static_cast<std::uint16_t>(std::min(x, y)),
                         static_cast<std::uint16_t>(std::max(x, y)));
    }
    std::sort(round.begin(), round.end());
    rounds.push_back(std::move(round));
    std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
  }
  return rounds;
}

Matrix<double> random_orthogonal(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, SeedTag::kRotation));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix makes Q Haar-distributed.
  for (Eigen::Index k = 0; k < q.cols(); ++k)
    if (rmat(k, k) < 0) q.col(k) *= -1.0;
  Matrix<double> out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) = q(Eigen::Index(r), Eigen::Index(c));
  return out;
}

RotationCheck rotation_check(const Matrix<double>& d, const Matrix<double>& q) {
  if (q.rows() != d.rows() || q.cols() != d.rows()) {
    fail(ErrorKind::kDimension, "rotation must be " + std::to_string(d.rows()) + "x" +
                                    std::to_string(d.rows()) + ", got " + q.shape_string());
  }
  RotationCheck out;
  out.rotated = gram_t(q, d);  // Q^T D
  Matrix<double> k = gram_t(d, d);
  Matrix<double> ke = gram_t(out.rotated, out.rotated);
  for (std::size_t i = 0; i < k.size(); ++i)
    out.residual = std::max(out.residual, std::fabs(ke.data()[i] - k.data()[i]));
  for (std::size_t i = 0; i < d.size(); ++i)
    out.distance = std::max(out.distance, std::fabs(out.rotated.data()[i] - d.data()[i]));
  return out;
}

RotationCheck rotation_nonuniqueness_check(const Matrix<double>& d, std::uint64_t seed) {
  RotationCheck out = rotation_check(d, random_orthogonal(d.rows(), seed));
  if (out.distance == 0.0 && !d.empty()) {
    fail(ErrorKind::kVerification, "rotation left the data unchanged");
  }
  return out;
}

}  // namespace secdot
