#pragma once

// Finite model of a semifinite von Neumann algebra: block-diagonal complex
// matrices with a per-block trace weight.  tau(x) = sum_k c_k Tr(x_k).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "orlicz_function.hpp"

namespace ncorlicz {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BlockSpec {
  int dim = 1;
  double weight = 1.0;  // trace weight c_k > 0
  bool operator==(const BlockSpec& o) const {
    return dim == o.dim && weight == o.weight;
  }
};

class AlgebraShape {
 public:
  AlgebraShape() = default;
  explicit AlgebraShape(std::vector<BlockSpec> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty())
      throw std::invalid_argument("AlgebraShape: need at least one block");
    for (const auto& b : blocks_) {
      if (b.dim < 1) throw std::invalid_argument("AlgebraShape: block dim must be >= 1");
      if (!(b.weight > 0.0) || !std::isfinite(b.weight))
        throw std::invalid_argument("AlgebraShape: weight must be positive and finite");
    }
  }

  std::size_t block_count() const { return blocks_.size(); }
  const BlockSpec& block(std::size_t k) const { return blocks_.at(k); }
  const std::vector<BlockSpec>& blocks() const { return blocks_; }

  // tau(1) = sum c_k n_k.
  double total_trace() const {
    double t = 0.0;
    for (const auto& b : blocks_) t += b.weight * b.dim;
    return t;
  }

  bool operator==(const AlgebraShape& o) const { return blocks_ == o.blocks_; }
  bool operator!=(const AlgebraShape& o) const { return !(*this == o); }

 private:
  std::vector<BlockSpec> blocks_;
};

class BlockOperator {
 public:
  BlockOperator() = default;

  BlockOperator(AlgebraShape shape, std::vector<Matrix> blocks)
      : shape_(std::move(shape)), blocks_(std::move(blocks)) {
    if (blocks_.size() != shape_.block_count())
      throw ShapeMismatch("BlockOperator: block count does not match shape");
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const int n = shape_.block(k).dim;
      if (blocks_[k].rows() != n || blocks_[k].cols() != n)
        throw ShapeMismatch("BlockOperator: block dimension does not match shape");
      if (!blocks_[k].allFinite())
        throw std::invalid_argument("BlockOperator: entries must be finite");
    }
  }

  static BlockOperator zero(const AlgebraShape& shape) {
    std::vector<Matrix> b;
    b.reserve(shape.block_count());
    for (std::size_t k = 0; k < shape.block_count(); ++k)
      b.push_back(Matrix::Zero(shape.block(k).dim, shape.block(k).dim));
    return BlockOperator(shape, std::move(b));
  }

  static BlockOperator identity(const AlgebraShape& shape) {
    std::vector<Matrix> b;
    b.reserve(shape.block_count());
    for (std::size_t k = 0; k < shape.block_count(); ++k)
      b.push_back(Matrix::Identity(shape.block(k).dim, shape.block(k).dim));
    return BlockOperator(shape, std::move(b));
  }

  // Diagonal operator from entries listed block by block.
  static BlockOperator diagonal(const AlgebraShape& shape,
                                const std::vector<double>& entries) {
    std::size_t need = 0;
    for (std::size_t k = 0; k < shape.block_count(); ++k)
      need += static_cast<std::size_t>(shape.block(k).dim);
    if (entries.size() != need)
      throw ShapeMismatch("diagonal: entry count does not match shape");
    std::vector<Matrix> b;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < shape.block_count(); ++k) {
      const int n = shape.block(k).dim;
      Matrix m = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i) m(i, i) = entries[pos++];
      b.push_back(std::move(m));
    }
    return BlockOperator(shape, std::move(b));
  }

  // Single-block convenience, mostly for tests and small oracles.
  static BlockOperator single(Matrix m, double weight = 1.0) {
    if (m.rows() != m.cols())
      throw ShapeMismatch("single: matrix must be square");
    AlgebraShape shape(std::vector<BlockSpec>{{static_cast<int>(m.rows()), weight}});
    std::vector<Matrix> b;
    b.push_back(std::move(m));
    return BlockOperator(std::move(shape), std::move(b));
  }

  static BlockOperator single_diagonal(const std::vector<double>& entries,
                                       double weight = 1.0) {
    AlgebraShape shape(std::vector<BlockSpec>{{static_cast<int>(entries.size()), weight}});
    return diagonal(shape, entries);
  }

  const AlgebraShape& shape() const { return shape_; }
  std::size_t block_count() const { return blocks_.size(); }
  const Matrix& block(std::size_t k) const { return blocks_.at(k); }
  Matrix& mutable_block(std::size_t k) { return blocks_.at(k); }

  double frobenius() const {
    double s = 0.0;
    for (const auto& m : blocks_) s += m.squaredNorm();
    return std::sqrt(s);
  }

  // max_k ||x_k||_inf over entries; cheap size gauge for tolerances.
  double entry_sup() const {
    double s = 0.0;
    for (const auto& m : blocks_) s = std::max(s, m.cwiseAbs().maxCoeff());
    return s;
  }

 private:
  AlgebraShape shape_;
  std::vector<Matrix> blocks_;
};

inline void require_same_shape(const BlockOperator& x, const BlockOperator& y,
                               const char* who) {
  if (x.shape() != y.shape())
    throw ShapeMismatch(std::string(who) + ": operands live on different algebras");
}

inline BlockOperator operator+(const BlockOperator& x, const BlockOperator& y) {
  require_same_shape(x, y, "operator+");
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k) b.push_back(x.block(k) + y.block(k));
  return BlockOperator(x.shape(), std::move(b));
}

inline BlockOperator operator-(const BlockOperator& x, const BlockOperator& y) {
  require_same_shape(x, y, "operator-");
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k) b.push_back(x.block(k) - y.block(k));
  return BlockOperator(x.shape(), std::move(b));
}

inline BlockOperator operator*(Complex a, const BlockOperator& x) {
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k) b.push_back(a * x.block(k));
  return BlockOperator(x.shape(), std::move(b));
}

inline BlockOperator operator*(double a, const BlockOperator& x) {
  return Complex(a, 0.0) * x;
}

inline BlockOperator operator*(const BlockOperator& x, const BlockOperator& y) {
  require_same_shape(x, y, "operator*");
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k) b.push_back(x.block(k) * y.block(k));
  return BlockOperator(x.shape(), std::move(b));
}

inline BlockOperator adjoint(const BlockOperator& x) {
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k)
    b.push_back(x.block(k).adjoint());
  return BlockOperator(x.shape(), std::move(b));
}

// tau(x) = sum_k c_k Tr(x_k).
inline Complex trace(const BlockOperator& x) {
  Complex t(0.0, 0.0);
  for (std::size_t k = 0; k < x.block_count(); ++k)
    t += x.shape().block(k).weight * x.block(k).trace();
  return t;
}

inline bool is_self_adjoint(const BlockOperator& x, double tol = 1e-10) {
  const double scale = 1.0 + x.entry_sup();
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    if ((x.block(k) - x.block(k).adjoint()).cwiseAbs().maxCoeff() > tol * scale)
      return false;
  }
  return true;
}

// Eigenvalues of a self-adjoint operator, block by block (each ascending).
inline std::vector<Eigen::VectorXd> self_adjoint_spectrum(const BlockOperator& x) {
  if (!is_self_adjoint(x, 1e-8))
    throw std::invalid_argument("self_adjoint_spectrum: operator is not self-adjoint");
  std::vector<Eigen::VectorXd> out;
  out.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    Matrix h = 0.5 * (x.block(k) + x.block(k).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("self_adjoint_spectrum: eigensolver did not converge");
    out.push_back(es.eigenvalues());
  }
  return out;
}

inline double min_eigenvalue(const BlockOperator& x) {
  double m = kInf;
  for (const auto& ev : self_adjoint_spectrum(x)) m = std::min(m, ev.minCoeff());
  return m;
}

inline bool is_psd(const BlockOperator& x, double tol = 1e-9) {
  if (!is_self_adjoint(x, 1e-8)) return false;
  return min_eigenvalue(x) >= -tol * (1.0 + x.entry_sup());
}

// |x| = (x* x)^{1/2} via the hermitized Gram matrix.  The result is verified:
// || |x|^2 - x* x ||_F must not exceed 1e-8 ||x||_F^2.
inline BlockOperator abs(const BlockOperator& x) {
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  double residual = 0.0;
  const double scale = x.frobenius();
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    const Matrix& m = x.block(k);
    Matrix gram = m.adjoint() * m;
    gram = 0.5 * (gram + gram.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("abs: eigensolver did not converge");
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    Matrix root = es.eigenvectors() *
                  lam.cwiseSqrt().asDiagonal().toDenseMatrix().cast<Complex>() *
                  es.eigenvectors().adjoint();
    root = 0.5 * (root + root.adjoint());
    residual += (root * root - gram).squaredNorm();
    b.push_back(std::move(root));
  }
  if (std::sqrt(residual) > 1e-8 * std::max(scale * scale, 1e-300))
    throw NumericalFailure("abs: residual check failed");
  return BlockOperator(x.shape(), std::move(b));
}

// Functional calculus f(x) for self-adjoint x.
inline BlockOperator apply_function(const BlockOperator& x,
                                    const std::function<double(double)>& f) {
  if (!is_self_adjoint(x, 1e-8))
    throw std::invalid_argument("apply_function: operator is not self-adjoint");
  std::vector<Matrix> b;
  b.reserve(x.block_count());
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    Matrix h = 0.5 * (x.block(k) + x.block(k).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("apply_function: eigensolver did not converge");
    Eigen::VectorXd lam = es.eigenvalues();
    Eigen::VectorXd flam(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) flam[i] = f(lam[i]);
    Matrix out = es.eigenvectors() *
                 flam.asDiagonal().toDenseMatrix().cast<Complex>() *
                 es.eigenvectors().adjoint();
    b.push_back(0.5 * (out + out.adjoint()));
  }
  return BlockOperator(x.shape(), std::move(b));
}

// Spectral projection e_{(s, inf)}(x) for self-adjoint x.
inline BlockOperator spectral_projection_above(const BlockOperator& x, double s) {
  return apply_function(x, [s](double u) { return u > s ? 1.0 : 0.0; });
}

}  // namespace ncorlicz
