#pragma once

// Generators for the operator sequences the property checks consume: spike
// perturbations on an enlarged algebra, shrinking random noise, monotone
// approach from below/above, decay to zero, and the non-Delta_2
// counterexample data.  Generators verify their own order relations.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ensembles.hpp"
#include "singular_values.hpp"

namespace ncorlicz {

struct FamilyGenerationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The counterexample growth condition phi((1+1/k)u_k) > 2^k phi(u_k) failed.
struct AmplitudeRuleViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FamilyKind {
  SpikePerturbation,
  ShrinkingNoise,
  MonotoneDown,
  MonotoneUp,
  Counterexample21
};

struct GeneratedSequence {
  BlockOperator limit;
  std::vector<BlockOperator> terms;  // term n lives at index n-1
};

// ---------------------------------------------------------------------------
// Spike perturbations: x_n = x (+) a_n e_n on the algebra enlarged by N
// one-dimensional blocks, block n carrying trace weight t_n.
// ---------------------------------------------------------------------------

struct SpikeRule {
  double amp_coeff = 1.0;
  double amp_exp = 0.25;     // a_n = amp_coeff * n^amp_exp
  double weight_coeff = 1.0;
  double weight_exp = 8.0;   // t_n = weight_coeff * n^-weight_exp
};

namespace detail {

inline GeneratedSequence spike_family_impl(const BlockOperator& base, int length,
                                           const std::function<double(int)>& amp,
                                           const std::function<double(int)>& wt) {
  if (length < 1) throw std::invalid_argument("spike family: need length >= 1");
  std::vector<BlockSpec> blocks = base.shape().blocks();
  for (int n = 1; n <= length; ++n) {
    const double t = wt(n);
    if (!(t > 0.0) || !std::isfinite(t))
      throw FamilyGenerationFailure("spike family: weights must be positive and finite");
    blocks.push_back({1, t});
  }
  AlgebraShape shape(std::move(blocks));

  auto extended = [&](int spike_at, double value) {
    std::vector<Matrix> b;
    b.reserve(shape.block_count());
    for (std::size_t k = 0; k < base.block_count(); ++k) b.push_back(base.block(k));
    for (int n = 1; n <= length; ++n) {
      Matrix m(1, 1);
      m(0, 0) = (n == spike_at) ? value : 0.0;
      b.push_back(std::move(m));
    }
    return BlockOperator(shape, std::move(b));
  };

  GeneratedSequence seq;
  seq.limit = extended(0, 0.0);
  seq.terms.reserve(length);
  for (int n = 1; n <= length; ++n) {
    const double a = amp(n);
    if (!(a > 0.0) || !std::isfinite(a))
      throw FamilyGenerationFailure("spike family: amplitudes must be positive and finite");
    seq.terms.push_back(extended(n, a));
  }
  return seq;
}

}  // namespace detail

inline GeneratedSequence make_spike_family(const BlockOperator& base,
                                           const SpikeRule& rule, int length) {
  return detail::spike_family_impl(
      base, length,
      [&](int n) { return rule.amp_coeff * std::pow(n, rule.amp_exp); },
      [&](int n) { return rule.weight_coeff * std::pow(n, -rule.weight_exp); });
}

// Spike family with phi(a_n) t_n held at a constant m0: amplitudes grow but
// the spikes never shrink in the modular, so nothing converges.  This is the
// stock negative control for the measure-convergence checks.
inline GeneratedSequence make_spike_family_modular_constant(
    const BlockOperator& base, const OrliczFunction& phi, double m0,
    double amp_coeff, double amp_exp, int length) {
  if (!(m0 > 0.0))
    throw std::invalid_argument("spike family: modular constant must be positive");
  auto amp = [&](int n) { return amp_coeff * std::pow(n, amp_exp); };
  return detail::spike_family_impl(base, length, amp, [&](int n) {
    const double pa = phi.value(amp(n));
    if (!(pa > 0.0) || !std::isfinite(pa))
      throw FamilyGenerationFailure("spike family: phi(a_n) not positive finite");
    return m0 / pa;
  });
}

// ---------------------------------------------------------------------------
// Shrinking noise: x_n = x + eps_n g_n with g_n Gaussian, normalized to unit
// top singular value so eps_n controls the perturbation size exactly.
// ---------------------------------------------------------------------------

struct NoiseRule {
  double eps_coeff = 1.0;
  double eps_exp = 3.0;  // eps_n = eps_coeff * n^-eps_exp
};

inline GeneratedSequence make_noise_family(const BlockOperator& base,
                                           const NoiseRule& rule, int length,
                                           std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("noise family: need length >= 1");
  GeneratedSequence seq;
  seq.limit = base;
  seq.terms.reserve(length);
  for (int n = 1; n <= length; ++n) {
    BlockOperator g = random_operator(base.shape(), GaussianComplex{1.0},
                                      derive_seed(seed, static_cast<std::uint64_t>(n)));
    const double top = singular_value_profile(g).top_level();
    if (!(top > 0.0))
      throw FamilyGenerationFailure("noise family: degenerate noise draw");
    const double eps = rule.eps_coeff * std::pow(n, -rule.eps_exp);
    seq.terms.push_back(base + (eps / top) * g);
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Monotone families.  All verify the operator order chain they promise, with
// an absolute eigenvalue slack for rounding.
// ---------------------------------------------------------------------------

enum class MonotoneMode {
  Scale,          // up: (1 - d_n) x     down: (1 + d_n) x
  TruncateBelow,  // up: spectral truncation x 1_{x > s_n}
  AddIdentity,    // down: x + d_n 1
  CapLevel        // vanishing: min(x, c_n mu_0(x))
};

struct MonotoneRule {
  MonotoneMode mode = MonotoneMode::Scale;
  double coeff = 1.0;
  double exp = 3.0;  // d_n = coeff * n^-exp
};

namespace detail {

inline void require_psd_chain(const BlockOperator& a, const char* what,
                              double slack = 1e-9) {
  if (!is_self_adjoint(a, 1e-8) ||
      min_eigenvalue(a) < -slack * (1.0 + a.entry_sup()))
    throw FamilyGenerationFailure(std::string("monotone family: ") + what);
}

}  // namespace detail

// 0 <= x_1 <= x_2 <= ... <= x with x_n -> x.  Base must be PSD.
inline GeneratedSequence make_monotone_up_family(const BlockOperator& x,
                                                 const MonotoneRule& rule,
                                                 int length) {
  if (length < 1) throw std::invalid_argument("monotone family: need length >= 1");
  detail::require_psd_chain(x, "base is not PSD");
  const double top = singular_value_profile(x).top_level();
  GeneratedSequence seq;
  seq.limit = x;
  seq.terms.reserve(length);
  for (int n = 1; n <= length; ++n) {
    const double d = rule.coeff * std::pow(n, -rule.exp);
    switch (rule.mode) {
      case MonotoneMode::Scale: {
        if (!(d < 1.0))
          throw FamilyGenerationFailure("monotone family: scale step d_n >= 1");
        seq.terms.push_back((1.0 - d) * x);
        break;
      }
      case MonotoneMode::TruncateBelow: {
        const double s = d * top;
        seq.terms.push_back(
            apply_function(x, [s](double u) { return u > s ? u : 0.0; }));
        break;
      }
      default:
        throw std::invalid_argument("monotone up family: unsupported mode");
    }
  }
  for (int n = 0; n < length; ++n) {
    detail::require_psd_chain(seq.terms[n], "term is not PSD");
    detail::require_psd_chain(x - seq.terms[n], "term exceeds the limit");
    if (n + 1 < length)
      detail::require_psd_chain(seq.terms[n + 1] - seq.terms[n],
                                "sequence is not increasing");
  }
  return seq;
}

// x <= ... <= x_2 <= x_1 with x_n -> x.  Base must be PSD.
inline GeneratedSequence make_monotone_down_family(const BlockOperator& x,
                                                   const MonotoneRule& rule,
                                                   int length) {
  if (length < 1) throw std::invalid_argument("monotone family: need length >= 1");
  detail::require_psd_chain(x, "base is not PSD");
  GeneratedSequence seq;
  seq.limit = x;
  seq.terms.reserve(length);
  const BlockOperator one = BlockOperator::identity(x.shape());
  for (int n = 1; n <= length; ++n) {
    const double d = rule.coeff * std::pow(n, -rule.exp);
    switch (rule.mode) {
      case MonotoneMode::Scale:
        seq.terms.push_back((1.0 + d) * x);
        break;
      case MonotoneMode::AddIdentity:
        seq.terms.push_back(x + d * one);
        break;
      default:
        throw std::invalid_argument("monotone down family: unsupported mode");
    }
  }
  for (int n = 0; n < length; ++n) {
    detail::require_psd_chain(seq.terms[n] - x, "term below the limit");
    if (n + 1 < length)
      detail::require_psd_chain(seq.terms[n] - seq.terms[n + 1],
                                "sequence is not decreasing");
  }
  return seq;
}

// x_1 >= x_2 >= ... >= 0 with x_n -> 0.  Base must be PSD.
inline GeneratedSequence make_vanishing_family(const BlockOperator& x,
                                               const MonotoneRule& rule,
                                               int length) {
  if (length < 1) throw std::invalid_argument("monotone family: need length >= 1");
  detail::require_psd_chain(x, "base is not PSD");
  const double top = singular_value_profile(x).top_level();
  GeneratedSequence seq;
  seq.limit = BlockOperator::zero(x.shape());
  seq.terms.reserve(length);
  for (int n = 1; n <= length; ++n) {
    const double d = rule.coeff * std::pow(n, -rule.exp);
    switch (rule.mode) {
      case MonotoneMode::Scale:
        seq.terms.push_back(d * x);
        break;
      case MonotoneMode::CapLevel: {
        const double c = d * top;
        seq.terms.push_back(
            apply_function(x, [c](double u) { return std::min(u, c); }));
        break;
      }
      default:
        throw std::invalid_argument("vanishing family: unsupported mode");
    }
  }
  for (int n = 0; n < length; ++n) {
    detail::require_psd_chain(seq.terms[n], "term is not PSD");
    if (n + 1 < length)
      detail::require_psd_chain(seq.terms[n] - seq.terms[n + 1],
                                "sequence is not decreasing");
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Counterexample data: K mutually orthogonal one-dimensional blocks e_k with
// weights t_k = 2^-k / phi(u_k), amplitudes u_k growing fast enough that
// phi((1+1/k) u_k) > 2^k phi(u_k).  x = sum u_k e_k, x_n drops the n-th term.
// ---------------------------------------------------------------------------

struct CounterexampleData {
  std::vector<double> u;  // amplitudes, u[k-1]
  std::vector<double> t;  // block weights, t[k-1]
  GeneratedSequence seq;  // limit x and terms x_n = x - u_n e_n
};

inline CounterexampleData make_counterexample_family(
    const OrliczFunction& phi, int K,
    const std::function<double(int)>& amplitude = [](int k) {
      return static_cast<double>(k) * k;
    }) {
  if (K < 1) throw std::invalid_argument("counterexample: need K >= 1");
  CounterexampleData data;
  std::vector<BlockSpec> blocks;
  for (int k = 1; k <= K; ++k) {
    const double uk = amplitude(k);
    if (!(uk > 0.0) || !std::isfinite(uk))
      throw AmplitudeRuleViolation("counterexample: amplitude not positive finite");
    const double pk = phi.value(uk);
    if (!(pk > 0.0) || !std::isfinite(pk))
      throw AmplitudeRuleViolation("counterexample: phi(u_k) not positive finite");
    const double grown = phi.value((1.0 + 1.0 / k) * uk);
    if (!(grown > std::pow(2.0, k) * pk))
      throw AmplitudeRuleViolation(
          "counterexample: phi((1+1/k)u_k) > 2^k phi(u_k) fails");
    const double tk = std::pow(2.0, -k) / pk;
    if (!(tk > 0.0))
      throw AmplitudeRuleViolation("counterexample: weight underflowed to zero");
    data.u.push_back(uk);
    data.t.push_back(tk);
    blocks.push_back({1, tk});
  }
  AlgebraShape shape(std::move(blocks));
  auto build = [&](int drop) {
    std::vector<Matrix> b;
    b.reserve(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
      Matrix m(1, 1);
      m(0, 0) = (k == drop) ? 0.0 : data.u[k - 1];
      b.push_back(std::move(m));
    }
    return BlockOperator(shape, std::move(b));
  };
  data.seq.limit = build(0);
  data.seq.terms.reserve(static_cast<std::size_t>(K));
  for (int n = 1; n <= K; ++n) data.seq.terms.push_back(build(n));
  return data;
}

}  // namespace ncorlicz
