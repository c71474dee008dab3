#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "secdot/error.hpp"
#include "secdot/scalar.hpp"

namespace secdot {

// Dense row-major matrix. Protocol matrices are features x samples, so a
// column is one sample.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, ScalarTraits<T>::zero()) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      fail(ErrorKind::kDimension, "matrix data length does not match shape " +
                                      shape_string());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = ScalarTraits<T>::one();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  // Copies column c (one sample).
  std::vector<T> col(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  std::string shape_string() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {
inline void require_same_shape(std::size_t ar, std::size_t ac, std::size_t br,
                               std::size_t bc, const char* what) {
  if (ar != br || ac != bc) {
    std::ostringstream os;
    os << what << ": shape mismatch (" << ar << " features x " << ac
       << " samples vs " << br << " features x " << bc << " samples)";
    fail(ErrorKind::kDimension, os.str());
  }
}
}  // namespace detail

template <class T>
Matrix<T> mat_sub(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), "mat_sub");
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

template <class T>
Matrix<T> mat_add(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), "mat_add");
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

template <class T>
Matrix<T> mat_scale(T s, const Matrix<T>& a) {
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = s * a.data()[i];
  return out;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

// A^T B for A (f x n_a) and B (f x n_b); result is n_a x n_b.
template <class T>
Matrix<T> gram_t(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) {
    std::ostringstream os;
    os << "gram_t: feature dimension mismatch (" << a.rows() << " vs "
       << b.rows() << " features)";
    fail(ErrorKind::kDimension, os.str());
  }
  Matrix<T> out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T ai = arow[i];
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ai * brow[j];
    }
  }
  return out;
}

template <class T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix<T> out(rows, cols);
  for (auto& v : out.data()) v = ScalarTraits<T>::sample(rng);
  return out;
}

template <class T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return random_matrix<T>(rows, cols, rng);
}

// Horizontal concatenation of features x samples blocks.
template <class T>
Matrix<T> hconcat(std::span<const Matrix<T>> blocks) {
  if (blocks.empty()) return {};
  std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) fail(ErrorKind::kDimension, "hconcat: feature count differs");
    cols += b.cols();
  }
  Matrix<T> out(rows, cols);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, off + c) = b(r, c);
    off += b.cols();
  }
  return out;
}

Matrix<Fp> encode_matrix(const Matrix<double>& m, const FixedPointCodec& codec);
Matrix<double> decode_dot_matrix(const Matrix<Fp>& m, const FixedPointCodec& codec);

// CSV: no header, one matrix row per line. With transpose, each file line
// is one sample and the result is transposed into features x samples.
Matrix<double> load_csv_real(const std::string& path, bool transpose = false);
Matrix<Fp> load_csv_field(const std::string& path, bool transpose = false);
void store_csv(const Matrix<double>& m, const std::string& path);
void store_csv(const Matrix<Fp>& m, const std::string& path);

}  // namespace secdot
