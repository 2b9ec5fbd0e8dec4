#pragma once

// Deterministic random operator ensembles.  All draws go through a
// mt19937_64 seeded by an explicit value; sub-streams are derived with
// splitmix64 so runs are reproducible regardless of call order.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "block_operator.hpp"

namespace ncorlicz {

struct RankTooLarge : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// splitmix64 step; the standard way to spread one master seed into
// uncorrelated sub-seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct DiagonalUniform {
  double lo = 0.0;
  double hi = 1.0;
};

struct GaussianComplex {
  double sigma = 1.0;
};

struct PSDWishart {
  double scale = 1.0;  // X = scale * G* G / n
};

struct ProjectionEnsemble {
  std::vector<int> ranks;  // per block; must fit each block dimension
};

using Ensemble =
    std::variant<DiagonalUniform, GaussianComplex, PSDWishart, ProjectionEnsemble>;

inline Matrix random_gaussian_matrix(int n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sigma / std::sqrt(2.0));
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// Haar-ish unitary from the QR of a Gaussian matrix, with the R diagonal
// phase normalized so the distribution does not depend on the QR convention.
inline Matrix random_unitary(int n, std::mt19937_64& rng) {
  Matrix g = random_gaussian_matrix(n, 1.0, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    Complex d = r(i, i);
    Complex phase = std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0, 0.0);
    q.col(i) *= phase;
  }
  return q;
}

inline BlockOperator random_operator(const AlgebraShape& shape,
                                     const Ensemble& ensemble,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Matrix> blocks;
  blocks.reserve(shape.block_count());
  for (std::size_t k = 0; k < shape.block_count(); ++k) {
    const int n = shape.block(k).dim;
    if (std::holds_alternative<DiagonalUniform>(ensemble)) {
      const auto& e = std::get<DiagonalUniform>(ensemble);
      if (!(e.hi >= e.lo))
        throw std::invalid_argument("DiagonalUniform: need hi >= lo");
      std::uniform_real_distribution<double> d(e.lo, e.hi);
      Matrix m = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i) m(i, i) = d(rng);
      blocks.push_back(std::move(m));
    } else if (std::holds_alternative<GaussianComplex>(ensemble)) {
      const auto& e = std::get<GaussianComplex>(ensemble);
      blocks.push_back(random_gaussian_matrix(n, e.sigma, rng));
    } else if (std::holds_alternative<PSDWishart>(ensemble)) {
      const auto& e = std::get<PSDWishart>(ensemble);
      Matrix g = random_gaussian_matrix(n, 1.0, rng);
      Matrix w = (e.scale / n) * (g.adjoint() * g);
      blocks.push_back(0.5 * (w + w.adjoint()));
    } else {
      const auto& e = std::get<ProjectionEnsemble>(ensemble);
      if (e.ranks.size() != shape.block_count())
        throw ShapeMismatch("ProjectionEnsemble: rank list does not match shape");
      const int r = e.ranks[k];
      if (r < 0 || r > n)
        throw RankTooLarge("ProjectionEnsemble: rank outside [0, dim]");
      if (r == 0) {
        blocks.push_back(Matrix::Zero(n, n));
      } else {
        Matrix q = random_unitary(n, rng).leftCols(r);
        Matrix p = q * q.adjoint();
        blocks.push_back(0.5 * (p + p.adjoint()));
      }
    }
  }
  return BlockOperator(shape, std::move(blocks));
}

}  // namespace ncorlicz
