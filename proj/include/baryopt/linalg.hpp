#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace baryopt {

/// Dense real vector. Dimension is fixed by context (one search run, one
/// point set); helpers below validate agreement where it matters.
using Vec = std::vector<double>;

/// Minimal dense row-major matrix, just large enough for Hessians and
/// covariance blocks (dimensions here are tiny, typically 1-5).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool is_symmetric(double tol = 0.0) const;

  /// Matrix-vector product; dimension-checked.
  Vec apply(const Vec& v) const;

  /// Frobenius norm.
  double frobenius() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

Matrix operator-(Matrix a, const Matrix& b);

/// a + s*b, dimension-checked.
Vec axpy(const Vec& a, double s, const Vec& b);

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, Vec v);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);

Matrix outer(const Vec& a, const Vec& b);

/// Throws std::domain_error unless both vectors share the given dimension.
void require_dimension(const Vec& v, std::size_t dim, const char* what);

/// Throws std::domain_error if any coordinate is non-finite.
void require_finite(const Vec& v, const char* what);

}  // namespace baryopt
