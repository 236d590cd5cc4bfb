#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ylg {

// Execution policy for the data-parallel kernels. Parallel runs split work
// across OpenMP threads but keep every per-row reduction in a fixed order,
// so both policies produce bitwise identical results.
enum class Exec { Serial, Parallel };

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }

  bool operator==(const Matrix&) const = default;
};

bool all_finite(const Matrix& m);

// c = a * b, accumulating each entry in long double, row-parallel.
Matrix matmul(const Matrix& a, const Matrix& b, Exec exec = Exec::Parallel);

Matrix transpose(const Matrix& m);

}  // namespace ylg
