#include "secdot/linalg.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace secdot {

Matrix<Fp> encode_matrix(const Matrix<double>& m, const FixedPointCodec& codec) {
  Matrix<Fp> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = codec.encode(m.data()[i]);
  return out;
}

Matrix<double> decode_dot_matrix(const Matrix<Fp>& m, const FixedPointCodec& codec) {
  Matrix<double> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = codec.decode_dot(m.data()[i]);
  return out;
}

namespace {

template <class Parse>
auto load_csv(const std::string& path, bool transpose, Parse parse)
    -> Matrix<decltype(parse(std::string_view{}, std::size_t{}))> {
  using T = decltype(parse(std::string_view{}, std::size_t{}));
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  std::vector<T> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t n = 0;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      std::string_view cell(line.data() + start,
                            (comma == std::string::npos ? line.size() : comma) - start);
      data.push_back(parse(cell, lineno));
      ++n;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = n;
    } else if (n != cols) {
      fail(ErrorKind::kData, path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(cols) + " values, got " +
                                 std::to_string(n));
    }
    ++rows;
  }
  Matrix<T> m(rows, cols, std::move(data));
  return transpose ? secdot::transpose(m) : m;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

Matrix<double> load_csv_real(const std::string& path, bool transpose) {
  return load_csv(path, transpose, [&](std::string_view cell, std::size_t lineno) {
    std::string s = trim(cell);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') {
      fail(ErrorKind::kData, path + ":" + std::to_string(lineno) +
                                 ": not a number: '" + s + "'");
    }
    return v;
  });
}

Matrix<Fp> load_csv_field(const std::string& path, bool transpose) {
  return load_csv(path, transpose, [&](std::string_view cell, std::size_t lineno) {
    std::string s = trim(cell);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v >= Fp::kModulus) {
      fail(ErrorKind::kData, path + ":" + std::to_string(lineno) +
                                 ": not a field element: '" + s + "'");
    }
    return Fp(v);
  });
}

namespace {
template <class Format>
void store(const std::string& path, std::size_t rows, std::size_t cols, Format fmt) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << fmt(r, c);
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed: " + path);
}
}  // namespace

void store_csv(const Matrix<double>& m, const std::string& path) {
  store(path, m.rows(), m.cols(), [&](std::size_t r, std::size_t c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
    return std::string(buf);
  });
}

void store_csv(const Matrix<Fp>& m, const std::string& path) {
  store(path, m.rows(), m.cols(),
        [&](std::size_t r, std::size_t c) { return std::to_string(m(r, c).value()); });
}

}  // namespace secdot
