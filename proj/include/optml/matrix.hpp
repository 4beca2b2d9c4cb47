#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "optml/errors.hpp"

namespace optml {

// Dense row-major matrix of doubles. The single numeric carrier for the
// whole library: batches are rows, features are columns.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix init: " + shape_string() + " needs " +
                       std::to_string(rows_ * cols_) + " values, got " +
                       std::to_string(data_.size()));
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("matrix init: ragged rows");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix row_vector(const std::vector<double>& v) {
    return Matrix(1, v.size(), v);
  }

  static Matrix column_vector(const std::vector<double>& v) {
    return Matrix(v.size(), 1, v);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
  }
}

// a * b. Inner loops run over contiguous rows of b so the compiler can
// vectorize; this is the hot path of training.
inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_string() + " * " + b.shape_string());
  }
  Matrix c(a.rows(), b.cols());
  const std::size_t m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row_ptr(i);
    const double* ai = a.row_ptr(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = ai[k];
      const double* bk = b.row_ptr(k);
      for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// transpose(a) * b, without materializing the transpose.
inline Matrix multiply_transposed_a(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul (a^T*b): " + a.shape_string() + " * " + b.shape_string());
  }
  Matrix c(a.cols(), b.cols());
  const std::size_t p = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row_ptr(k);
    const double* bk = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      double* ci = c.row_ptr(i);
      for (std::size_t j = 0; j < p; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

// a * transpose(b): rows of a dotted with rows of b.
inline Matrix multiply_transposed_b(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul (a*b^T): " + a.shape_string() + " * " + b.shape_string());
  }
  Matrix c(a.rows(), b.rows());
  const std::size_t m = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    double* ci = c.row_ptr(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += ai[k] * bj[k];
      ci[j] = acc;
    }
  }
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] += b.values()[i];
  return c;
}

inline void add_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] += b.values()[i];
}

inline Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] -= b.values()[i];
  return c;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] *= b.values()[i];
  return c;
}

inline Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.values()) v *= s;
  return c;
}

// Adds a 1 x cols bias row to every row of a.
inline Matrix add_row_broadcast(const Matrix& a, const Matrix& bias_row) {
  if (bias_row.rows() != 1 || bias_row.cols() != a.cols()) {
    throw ShapeError("row broadcast: " + a.shape_string() + " + " + bias_row.shape_string());
  }
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double* ci = c.row_ptr(i);
    const double* b = bias_row.row_ptr(0);
    for (std::size_t j = 0; j < c.cols(); ++j) ci[j] += b[j];
  }
  return c;
}

// Sums each column into a 1 x cols row.
inline Matrix column_sums(const Matrix& a) {
  Matrix s(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    double* sp = s.row_ptr(0);
    for (std::size_t j = 0; j < a.cols(); ++j) sp[j] += ai[j];
  }
  return s;
}

// [a | b] side by side.
inline Matrix concat_cols(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: " + a.shape_string() + " | " + b.shape_string());
  }
  Matrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row_ptr(i);
    const double* ai = a.row_ptr(i);
    const double* bi = b.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) ci[j] = ai[j];
    for (std::size_t j = 0; j < b.cols(); ++j) ci[a.cols() + j] = bi[j];
  }
  return c;
}

// Columns [begin, end) as a new matrix.
inline Matrix slice_cols(const Matrix& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") of " + a.shape_string());
  }
  Matrix c(a.rows(), end - begin);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    double* ci = c.row_ptr(i);
    for (std::size_t j = begin; j < end; ++j) ci[j - begin] = ai[j];
  }
  return c;
}

inline Matrix apply(const Matrix& a, double (*f)(double)) {
  Matrix c = a;
  for (double& v : c.values()) v = f(v);
  return c;
}

inline double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double relu_scalar(double x) { return x > 0.0 ? x : 0.0; }

inline Matrix sigmoid(const Matrix& a) { return apply(a, sigmoid_scalar); }
inline Matrix tanh_activation(const Matrix& a) {
  return apply(a, [](double x) { return std::tanh(x); });
}
inline Matrix relu(const Matrix& a) { return apply(a, relu_scalar); }

// Row-wise softmax with the max subtracted before exponentiation, so large
// logits cannot overflow. Each output row sums to 1.
inline Matrix softmax_rows(const Matrix& a) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double* r = c.row_ptr(i);
    double mx = r[0];
    for (std::size_t j = 1; j < c.cols(); ++j) mx = std::max(mx, r[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c.cols(); ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (std::size_t j = 0; j < c.cols(); ++j) r[j] /= sum;
  }
  return c;
}

// Central-difference gradient of a scalar function of a matrix. The
// numeric oracle used by the gradient-check tests; keep it dumb.
inline Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f,
                                         const Matrix& x, double h = 1e-5) {
  if (h <= 0.0) throw ParameterError("finite difference step h must be > 0, got " +
                                     std::to_string(h));
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.values()[i];
    probe.values()[i] = orig + h;
    const double up = f(probe);
    probe.values()[i] = orig - h;
    const double down = f(probe);
    probe.values()[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite difference: non-finite objective at coordinate " +
                         std::to_string(i));
    }
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace optml
