#include "baryopt/linalg.hpp"

#include <cmath>
#include <string>

namespace baryopt {

bool Matrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

Vec Matrix::apply(const Vec& v) const {
  if (v.size() != cols_)
    throw std::domain_error("Matrix::apply: dimension mismatch");
  Vec out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

double Matrix::frobenius() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw std::domain_error("Matrix::operator+=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw std::domain_error("Matrix::operator-=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator-(Matrix a, const Matrix& b) {
  a -= b;
  return a;
}

Vec axpy(const Vec& a, double s, const Vec& b) {
  if (a.size() != b.size()) throw std::domain_error("axpy: dimension mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

Vec operator+(const Vec& a, const Vec& b) { return axpy(a, 1.0, b); }
Vec operator-(const Vec& a, const Vec& b) { return axpy(a, -1.0, b); }

Vec operator*(double s, Vec v) {
  for (double& x : v) x *= s;
  return v;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::domain_error("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Matrix outer(const Vec& a, const Vec& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

void require_dimension(const Vec& v, std::size_t dim, const char* what) {
  if (v.size() != dim)
    throw std::domain_error(std::string(what) + ": expected dimension " +
                            std::to_string(dim) + ", got " +
                            std::to_string(v.size()));
}

void require_finite(const Vec& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw std::domain_error(std::string(what) + ": non-finite coordinate");
}

}  // namespace baryopt
