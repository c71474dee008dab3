#pragma once

// Perfect decomposable affine randomized encodings for addition and for
// multiplication-addition, with their decoders and simulators.

#include <compare>

#include "secdot/scalar.hpp"

namespace secdot {

template <class T>
struct AddEncoding {
  T c1{};
  T c2{};
  friend bool operator==(const AddEncoding&, const AddEncoding&) = default;
};

template <class T>
struct MulAddEncoding {
  T c1{};
  T c2{};
  T c3{};
  T c4{};
  T c5{};
  friend bool operator==(const MulAddEncoding&, const MulAddEncoding&) = default;
};

// (s1 + r, s2 - r)
template <class T>
AddEncoding<T> add_encode(T s1, T s2, T r) {
  return {s1 + r, s2 - r};
}

template <class T>
T add_decode(const AddEncoding<T>& e) {
  return e.c1 + e.c2;
}

// Two values summing to t; `c1` plays the role of the simulator's coin.
template <class T>
AddEncoding<T> add_simulate(T t, T c1) {
  return {c1, t - c1};
}

// (s1 - r1, r2 s1 - r1 r2 + r3, s2 - r2, r1 s2 + r4, s3 - r3 - r4)
template <class T>
MulAddEncoding<T> muladd_encode(T s1, T s2, T s3, T r1, T r2, T r3, T r4) {
  return {s1 - r1, r2 * s1 - r1 * r2 + r3, s2 - r2, r1 * s2 + r4, s3 - r3 - r4};
}

template <class T>
T muladd_decode(const MulAddEncoding<T>& e) {
  return e.c1 * e.c3 + e.c2 + e.c4 + e.c5;
}

// (c1, c2, c3, c4, t - c1 c3 - c2 - c4): uniform coins c1..c4 plus the one
// value that forces decoding to t.
template <class T>
MulAddEncoding<T> muladd_simulate(T t, T c1, T c2, T c3, T c4) {
  return {c1, c2, c3, c4, -(c1 * c3) + t - c2 - c4};
}

}  // namespace secdot
