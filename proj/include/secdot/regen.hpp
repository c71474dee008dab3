#pragma once

// Randomized-encoding scheme for a length-d dot product. The sum of the d
// products is split recursively at the largest power of two below the
// current length; each split injects one random value with opposite signs
// into the two halves, and each leaf is a multiplication-addition encoding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "secdot/error.hpp"
#include "secdot/scalar.hpp"

namespace secdot {

struct OfflineTerm {
  std::uint32_t index = 0;
  int sign = +1;
  friend bool operator==(const OfflineTerm&, const OfflineTerm&) = default;
};

// One multiplication node. a, b, c, d are the leaf's r1..r4, indices into
// the run's random vector. `offline` lists the terms of c5, including
// (c, -1) and (d, -1).
struct LeafPlan {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;
  std::uint32_t d = 0;
  std::vector<OfflineTerm> offline;
  friend bool operator==(const LeafPlan&, const LeafPlan&) = default;
};

struct ReScheme {
  std::size_t d = 0;
  std::size_t total_randoms = 0;
  std::vector<LeafPlan> leaves;

  // Index lists exactly as the generator builds them:
  //   raw_eX[i] = [0, b, a, a, b, c], raw_eY[i] = [0, a, b, d]
  // where the leading 0 is positional: the constant 1 coefficient of the
  // input. It is never looked up in the random vector.
  std::vector<std::vector<std::uint32_t>> raw_eX;
  std::vector<std::vector<std::uint32_t>> raw_eY;
  std::vector<std::vector<std::uint32_t>> raw_eO;
  std::vector<std::vector<int>> raw_eOS;

  friend bool operator==(const ReScheme&, const ReScheme&) = default;
};

// Builds the scheme for length d >= 1. `start` is the first random index.
ReScheme regen(std::size_t d, std::uint32_t start = 0);

std::string dump_scheme(const ReScheme& scheme);
ReScheme parse_scheme_dump(const std::string& text);

// Per-leaf components. Alice holds (c1, c2) and the offline c5; Bob (c3, c4).
template <class T>
struct ReXLeaf {
  T c1{};
  T c2{};
  friend bool operator==(const ReXLeaf&, const ReXLeaf&) = default;
};
template <class T>
struct ReYLeaf {
  T c3{};
  T c4{};
  friend bool operator==(const ReYLeaf&, const ReYLeaf&) = default;
};
template <class T>
using ReXComponents = std::vector<ReXLeaf<T>>;
template <class T>
using ReYComponents = std::vector<ReYLeaf<T>>;
template <class T>
using ReOffline = std::vector<T>;

// What Alice transmits to Bob for one sample pair: r[a], r[b], r[d] per leaf.
template <class T>
struct BobLeafRandoms {
  T ra{};
  T rb{};
  T rd{};
  friend bool operator==(const BobLeafRandoms&, const BobLeafRandoms&) = default;
};

// Seed for the random vector of sample pair (i, j) between parties
// alice/bob. Distinct pairs get independent streams.
inline std::uint64_t re_pair_seed(std::uint64_t run_seed, std::uint32_t alice,
                                  std::uint32_t bob, std::size_t i, std::size_t j) {
  return run_seed ^ derive_seed(static_cast<std::uint64_t>(SeedTag::kReRandoms),
                                alice, bob, i, j);
}

template <class T>
std::vector<T> re_sample_randoms(const ReScheme& scheme, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> r(scheme.total_randoms);
  for (auto& v : r) v = ScalarTraits<T>::sample(rng);
  return r;
}

namespace detail {
inline void require_len(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    fail(ErrorKind::kDimension, std::string(what) + ": length " +
                                    std::to_string(got) + " does not match scheme length " +
                                    std::to_string(want));
  }
}
}  // namespace detail

template <class T>
ReXComponents<T> re_encode_x(std::span<const T> x, const ReScheme& scheme,
                             std::span<const T> r) {
  detail::require_len(x.size(), scheme.d, "re_encode_x");
  detail::require_len(r.size(), scheme.total_randoms, "re_encode_x randoms");
  ReXComponents<T> out(scheme.d);
  for (std::size_t i = 0; i < scheme.d; ++i) {
    const LeafPlan& leaf = scheme.leaves[i];
    out[i].c1 = x[i] - r[leaf.a];
    out[i].c2 = x[i] * r[leaf.b] - r[leaf.a] * r[leaf.b] + r[leaf.c];
  }
  return out;
}

template <class T>
std::vector<BobLeafRandoms<T>> re_bob_randoms(const ReScheme& scheme,
                                              std::span<const T> r) {
  detail::require_len(r.size(), scheme.total_randoms, "re_bob_randoms");
  std::vector<BobLeafRandoms<T>> out(scheme.d);
  for (std::size_t i = 0; i < scheme.d; ++i) {
    const LeafPlan& leaf = scheme.leaves[i];
    out[i] = {r[leaf.a], r[leaf.b], r[leaf.d]};
  }
  return out;
}

template <class T>
ReYComponents<T> re_encode_y(std::span<const T> y, const ReScheme& scheme,
                             std::span<const BobLeafRandoms<T>> subset) {
  detail::require_len(y.size(), scheme.d, "re_encode_y");
  if (subset.size() != scheme.d) {
    fail(ErrorKind::kProtocol, "re_encode_y: received randoms for " +
                                   std::to_string(subset.size()) + " leaves, scheme has " +
                                   std::to_string(scheme.d));
  }
  ReYComponents<T> out(scheme.d);
  for (std::size_t i = 0; i < scheme.d; ++i) {
    out[i].c3 = y[i] - subset[i].rb;
    out[i].c4 = y[i] * subset[i].ra + subset[i].rd;
  }
  return out;
}

template <class T>
ReOffline<T> re_offline(const ReScheme& scheme, std::span<const T> r) {
  detail::require_len(r.size(), scheme.total_randoms, "re_offline randoms");
  ReOffline<T> out(scheme.d, ScalarTraits<T>::zero());
  for (std::size_t i = 0; i < scheme.d; ++i) {
    for (const OfflineTerm& t : scheme.leaves[i].offline) {
      if (t.sign > 0) {
        out[i] += r[t.index];
      } else {
        out[i] -= r[t.index];
      }
    }
  }
  return out;
}

template <class T>
T re_decode(std::span<const ReXLeaf<T>> xc, std::span<const ReYLeaf<T>> yc,
            std::span<const T> off) {
  if (xc.size() != yc.size() || xc.size() != off.size()) {
    fail(ErrorKind::kDimension, "re_decode: component lengths differ");
  }
  T acc = ScalarTraits<T>::zero();
  for (std::size_t i = 0; i < xc.size(); ++i) {
    acc += xc[i].c1 * yc[i].c3 + xc[i].c2 + yc[i].c4 + off[i];
  }
  return acc;
}

}  // namespace secdot
