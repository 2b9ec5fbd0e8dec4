#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ncorlicz/ensembles.hpp"
#include "ncorlicz/singular_values.hpp"

using namespace ncorlicz;

namespace {

AlgebraShape two_block_shape() {
  return AlgebraShape({{3, 1.0}, {1, 0.25}});
}

}  // namespace

TEST_CASE("shape validation and weighted trace") {
  CHECK_THROWS_AS(AlgebraShape(std::vector<BlockSpec>{}), std::invalid_argument);
  CHECK_THROWS_AS(AlgebraShape({{0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(AlgebraShape({{2, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(AlgebraShape({{2, -1.0}}), std::invalid_argument);

  const AlgebraShape s({{2, 0.5}, {1, 2.0}});
  CHECK(s.total_trace() == 3.0);
  const BlockOperator one = BlockOperator::identity(s);
  CHECK(trace(one).real() == 3.0);
  CHECK(trace(one).imag() == 0.0);
}

TEST_CASE("block operator construction guards") {
  const AlgebraShape s = two_block_shape();
  CHECK_THROWS_AS(BlockOperator(s, {Matrix::Zero(3, 3)}), ShapeMismatch);
  CHECK_THROWS_AS(BlockOperator(s, {Matrix::Zero(2, 2), Matrix::Zero(1, 1)}),
                  ShapeMismatch);
  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(BlockOperator(s, {bad, Matrix::Zero(1, 1)}),
                  std::invalid_argument);

  const BlockOperator x = BlockOperator::diagonal(s, {1.0, 2.0, 3.0, 4.0});
  CHECK(x.block(0)(1, 1).real() == 2.0);
  CHECK(x.block(1)(0, 0).real() == 4.0);
  CHECK_THROWS_AS(BlockOperator::diagonal(s, {1.0, 2.0}), ShapeMismatch);
}

TEST_CASE("arithmetic respects shapes") {
  const AlgebraShape s = two_block_shape();
  const BlockOperator x = BlockOperator::diagonal(s, {1.0, 2.0, 3.0, 4.0});
  const BlockOperator y = BlockOperator::identity(s);
  // Block traces 2+3+4 and 5, weights 1 and 1/4.
  CHECK(trace(x + y).real() == Catch::Approx(9.0 + 5.0 * 0.25));
  CHECK(trace(x - x).real() == 0.0);
  CHECK(trace(2.0 * x).real() == Catch::Approx(2.0 * trace(x).real()));
  const AlgebraShape other({{2, 1.0}});
  const BlockOperator z = BlockOperator::identity(other);
  CHECK_THROWS_AS(x + z, ShapeMismatch);
  CHECK_THROWS_AS(x * z, ShapeMismatch);
}

TEST_CASE("abs agrees with closed forms and verifies its residual") {
  Matrix nil(2, 2);
  nil.setZero();
  nil(0, 1) = 2.0;
  const BlockOperator x = BlockOperator::single(nil);
  const BlockOperator ax = abs(x);
  CHECK(ax.block(0)(0, 0).real() == Catch::Approx(0.0).margin(1e-12));
  CHECK(ax.block(0)(1, 1).real() == Catch::Approx(2.0).epsilon(1e-12));

  const BlockOperator d = BlockOperator::single_diagonal({-3.0, 4.0});
  const BlockOperator ad = abs(d);
  CHECK(ad.block(0)(0, 0).real() == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(ad.block(0)(1, 1).real() == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("functional calculus on self-adjoint operators") {
  const BlockOperator x = BlockOperator::single_diagonal({1.0, 4.0, 9.0});
  const BlockOperator r = apply_function(x, [](double u) { return std::sqrt(u); });
  CHECK(r.block(0)(0, 0).real() == Catch::Approx(1.0));
  CHECK(r.block(0)(1, 1).real() == Catch::Approx(2.0));
  CHECK(r.block(0)(2, 2).real() == Catch::Approx(3.0));

  Matrix ns(2, 2);
  ns.setZero();
  ns(0, 1) = 1.0;
  CHECK_THROWS_AS(apply_function(BlockOperator::single(ns), [](double u) { return u; }),
                  std::invalid_argument);

  const BlockOperator p = spectral_projection_above(
      BlockOperator::single_diagonal({1.0, 2.0, 3.0}, 0.5), 1.5);
  CHECK(trace(p).real() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singular value profile is the sorted merged weighted spectrum") {
  const AlgebraShape s({{3, 1.0}, {1, 0.25}});
  const BlockOperator x = BlockOperator::diagonal(s, {3.0, 1.0, 2.0, 2.0});
  const SingularValueProfile p = singular_value_profile(x);
  REQUIRE(p.steps().size() == 3);
  CHECK(p.steps()[0].level == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(p.steps()[0].width == 1.0);
  CHECK(p.steps()[1].level == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(p.steps()[1].width == 1.25);
  CHECK(p.steps()[2].level == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(p.steps()[2].width == 1.0);
  CHECK(p.total_width() == 3.25);
  CHECK(p.top_level() == Catch::Approx(3.0));

  CHECK(p.value_at(0.0) == Catch::Approx(3.0));
  CHECK(p.value_at(0.999) == Catch::Approx(3.0));
  CHECK(p.value_at(1.0) == Catch::Approx(2.0));  // right continuity
  CHECK(p.value_at(2.25) == Catch::Approx(1.0));
  CHECK(p.value_at(3.25) == 0.0);
  CHECK_THROWS_AS(p.value_at(-0.1), NegativeArgument);

  CHECK(p.distribution(2.5) == 1.0);
  CHECK(p.distribution(2.0) == 1.0);  // strict inequality at the level
  CHECK(p.distribution(1.5) == 2.25);
  CHECK(p.distribution(0.0) == 3.25);
  CHECK_THROWS_AS(p.distribution(-1.0), NegativeArgument);
}

TEST_CASE("profile merging and dropping") {
  std::vector<WeightedSigma> sv = {{1.0, 0.5}, {1.0 + 5e-13, 0.25}, {1e-13, 7.0}, {0.0, 3.0}};
  const SingularValueProfile p = SingularValueProfile::from_spectrum(sv);
  REQUIRE(p.steps().size() == 1);
  CHECK(p.steps()[0].width == 0.75);
  CHECK(p.steps()[0].level >= 1.0);

  CHECK_THROWS_AS(SingularValueProfile({{2.0, 1.0}, {3.0, 1.0}}),
                  std::invalid_argument);  // not decreasing
  CHECK_THROWS_AS(SingularValueProfile({{2.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("modular is the exact step sum") {
  const AlgebraShape s({{3, 1.0}, {1, 0.25}});
  const BlockOperator x = BlockOperator::diagonal(s, {3.0, 1.0, 2.0, 2.0});
  const OrliczFunction phi = OrliczFunction::power(2.0);
  CHECK(modular(phi, x) == Catch::Approx(9.0 + 1.25 * 4.0 + 1.0).epsilon(1e-14));

  // Two evaluation routes agree: step sum against functional calculus trace.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const BlockOperator g = random_operator(
        s, GaussianComplex{1.0}, derive_seed(99, static_cast<std::uint64_t>(trial)));
    const double via_profile = modular(phi, g);
    const BlockOperator fa =
        apply_function(abs(g), [&](double u) { return phi.value(std::max(0.0, u)); });
    const double via_trace = trace(fa).real();
    CHECK(via_profile == Catch::Approx(via_trace).epsilon(1e-9));
  }
}

TEST_CASE("measure gauge counts the level set of the difference") {
  const BlockOperator x = BlockOperator::single_diagonal({3.0, 1.0});
  const BlockOperator y = BlockOperator::single_diagonal({1.0, 1.0});
  CHECK(measure_gauge(x, y, 1.0) == 1.0);
  CHECK(measure_gauge(x, y, 2.0) == 0.0);  // strict
  CHECK(measure_gauge(x, y, 2.5) == 0.0);
  CHECK_THROWS_AS(measure_gauge(x, y, 0.0), std::invalid_argument);
}

TEST_CASE("ensembles are deterministic in the seed") {
  const AlgebraShape s = two_block_shape();
  const BlockOperator a = random_operator(s, GaussianComplex{1.0}, 1234);
  const BlockOperator b = random_operator(s, GaussianComplex{1.0}, 1234);
  const BlockOperator c = random_operator(s, GaussianComplex{1.0}, 1235);
  CHECK((a.block(0) - b.block(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.block(1) - b.block(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.block(0) - c.block(0)).cwiseAbs().maxCoeff() > 0.0);
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}

TEST_CASE("structured ensembles have their structure") {
  const AlgebraShape s = two_block_shape();

  const BlockOperator d = random_operator(s, DiagonalUniform{0.25, 2.0}, 5);
  for (std::size_t k = 0; k < d.block_count(); ++k) {
    for (int i = 0; i < d.block(k).rows(); ++i) {
      CHECK(d.block(k)(i, i).real() >= 0.25);
      CHECK(d.block(k)(i, i).real() <= 2.0);
      for (int j = 0; j < d.block(k).cols(); ++j)
        if (i != j) CHECK(std::abs(d.block(k)(i, j)) == 0.0);
    }
  }

  const BlockOperator w = random_operator(s, PSDWishart{1.0}, 6);
  CHECK(is_psd(w));
  CHECK(min_eigenvalue(w) >= -1e-12);

  const BlockOperator p = random_operator(s, ProjectionEnsemble{{2, 1}}, 7);
  CHECK(is_self_adjoint(p));
  CHECK((p * p - p).frobenius() < 1e-12);
  CHECK(trace(p).real() == Catch::Approx(2.0 * 1.0 + 1.0 * 0.25).epsilon(1e-12));
  CHECK_THROWS_AS(random_operator(s, ProjectionEnsemble{{4, 1}}, 8), RankTooLarge);
  CHECK_THROWS_AS(random_operator(s, ProjectionEnsemble{{2}}, 8), ShapeMismatch);

  std::mt19937_64 rng(11);
  const Matrix u = random_unitary(4, rng);
  CHECK((u * u.adjoint() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}
