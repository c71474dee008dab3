#include "secdot/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace secdot {

namespace {
void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream os;
    os << "rbf sigma must be positive, got " << sigma;
    fail(ErrorKind::kDomain, os.str());
  }
}

double rbf(double sq_dist, double sigma) {
  return std::exp(-std::max(sq_dist, 0.0) / (2.0 * sigma * sigma));
}
}  // namespace

KernelMatrix rbf_from_gram(const Matrix<double>& g, double sigma) {
  check_sigma(sigma);
  if (g.rows() != g.cols()) fail(ErrorKind::kDimension, "gram matrix must be square");
  const std::size_t n = g.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double tol = 1e-9 * std::max(1.0, std::fabs(g(i, j)));
      if (std::fabs(g(i, j) - g(j, i)) > tol) {
        std::ostringstream os;
        os << "gram matrix is not symmetric at (" << i << "," << j << "): " << g(i, j)
           << " vs " << g(j, i);
        fail(ErrorKind::kData, os.str());
      }
    }
  }
  KernelMatrix k{Matrix<double>(n, n), sigma};
  for (std::size_t i = 0; i < n; ++i) {
    k.entries(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf(g(i, i) - 2.0 * g(i, j) + g(j, j), sigma);
      k.entries(i, j) = v;
      k.entries(j, i) = v;
    }
  }
  return k;
}

KernelMatrix rbf_direct(const Matrix<double>& data, double sigma) {
  check_sigma(sigma);
  const std::size_t n = data.cols();
  KernelMatrix k{Matrix<double>(n, n), sigma};
  for (std::size_t i = 0; i < n; ++i) {
    k.entries(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t r = 0; r < data.rows(); ++r) {
        const double diff = data(r, i) - data(r, j);
        d2 += diff * diff;
      }
      const double v = rbf(d2, sigma);
      k.entries(i, j) = v;
      k.entries(j, i) = v;
    }
  }
  return k;
}

void export_matrix(const KernelMatrix& k, const std::string& path, ExportFormat format) {
  if (format == ExportFormat::kCsv) {
    store_csv(k.entries, path);
    return;
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < k.entries.rows(); ++r) {
    auto row = k.entries.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json doc = {{"n", k.entries.rows()}, {"sigma", k.sigma}, {"rows", rows}};
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << doc.dump() << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed: " + path);
}

KernelMatrix import_kernel_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, path + ": " + e.what());
  }
  const std::size_t n = doc.at("n").get<std::size_t>();
  KernelMatrix k{Matrix<double>(n, n), doc.at("sigma").get<double>()};
  const auto& rows = doc.at("rows");
  if (rows.size() != n) fail(ErrorKind::kData, path + ": row count does not match n");
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) fail(ErrorKind::kData, path + ": ragged row " + std::to_string(r));
    for (std::size_t c = 0; c < n; ++c) k.entries(r, c) = rows[r][c].get<double>();
  }
  return k;
}

}  // namespace secdot
