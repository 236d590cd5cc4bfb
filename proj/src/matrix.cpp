#include "ylg/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ylg {

bool all_finite(const Matrix& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b, Exec exec) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  const std::int64_t rows = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double* arow = a.row(static_cast<std::size_t>(i));
    double* crow = c.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.cols; ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < a.cols; ++k) acc += static_cast<long double>(arow[k]) * b.at(k, j);
      crow[j] = static_cast<double>(acc);
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

}  // namespace ylg
