#pragma once

#include <string>

#include "secdot/linalg.hpp"

namespace secdot {

struct KernelMatrix {
  Matrix<double> entries;
  double sigma = 1.0;
};

// K[i][j] = exp(-(G[i][i] - 2 G[i][j] + G[j][j]) / (2 sigma^2)). The
// squared distance is clamped at zero against rounding; the diagonal is 1.
KernelMatrix rbf_from_gram(const Matrix<double>& gram, double sigma);

// Reference path used by tests and --verify: distances computed directly
// from features x samples data.
KernelMatrix rbf_direct(const Matrix<double>& data, double sigma);

enum class ExportFormat { kCsv, kJson };

// CSV: one row per line, 17 significant digits.
// JSON: {"n": N, "sigma": s, "rows": [[...], ...]}
void export_matrix(const KernelMatrix& k, const std::string& path, ExportFormat format);
KernelMatrix import_kernel_json(const std::string& path);

}  // namespace secdot
