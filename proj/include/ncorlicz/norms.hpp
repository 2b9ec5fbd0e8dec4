#pragma once

// Norms on the Orlicz space of a block algebra: Luxemburg (modular gauge by
// bisection), closed-form p-norm, Amemiya infimum, and a witness-based lower
// estimate of the sup-form Orlicz norm.  All of them consume the exact
// singular value profile, so traces are finite sums, never quadrature.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ensembles.hpp"
#include "singular_values.hpp"

namespace ncorlicz {

struct BracketFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConjugateUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleWitness : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class NormMethod { Luxemburg, Amemiya, OrliczSup, PNorm };

struct NormReport {
  double value = 0.0;
  NormMethod method = NormMethod::Luxemburg;
  double bracket_lo = 0.0;  // final bracket of the underlying 1-D search
  double bracket_hi = 0.0;
  int iterations = 0;       // modular / pairing evaluations
  double residual = 0.0;    // |rho - 1| at the reported point, or search width
  double k_star = 0.0;      // minimizing k (Amemiya) / best witness scale (sup)
};

namespace detail {

inline double inverse_or_fallback(const OrliczFunction& phi, double y,
                                  double fallback) {
  try {
    const double u = phi.inverse(y);
    return (std::isfinite(u) && u > 0.0) ? u : fallback;
  } catch (const Unreachable&) {
    return fallback;
  }
}

}  // namespace detail

// Luxemburg norm inf{lambda > 0 : tau(phi(|x|/lambda)) <= 1}.  Bracket kept
// with rho(lo) > 1 >= rho(hi); plateaus of rho resolve to the smallest
// feasible lambda because the hi side is returned.
inline NormReport luxemburg_norm(const OrliczFunction& phi,
                                 const SingularValueProfile& p,
                                 double tol = 1e-10) {
  if (!(tol > 0.0)) throw std::invalid_argument("luxemburg_norm: tol must be positive");
  NormReport rep;
  rep.method = NormMethod::Luxemburg;
  if (p.empty()) return rep;

  const double s_max = p.top_level();
  const double w_total = p.total_width();
  auto rho_at = [&](double lam) { return modular(phi, p.scaled(1.0 / lam)); };
  int evals = 0;

  // Initial guesses from the one-step bounds rho <= W phi(s_max/lam) and
  // rho >= w_1 phi(s_max/lam), then expanded until the bracket is valid.
  double hi = s_max / detail::inverse_or_fallback(phi, 1.0 / w_total, 1.0);
  if (!(hi > 0.0) || !std::isfinite(hi)) hi = s_max;
  for (int guard = 0;; ++guard) {
    if (guard > 4000) throw BracketFailure("luxemburg_norm: no upper bracket");
    ++evals;
    if (rho_at(hi) <= 1.0) break;
    hi *= 2.0;
  }
  const double w_first = p.steps().front().width;
  double lo = s_max / detail::inverse_or_fallback(phi, 1.0 / w_first, 1.0);
  if (!(lo > 0.0) || !std::isfinite(lo) || lo >= hi) lo = hi;
  for (int guard = 0;; ++guard) {
    if (guard > 4000) {
      lo = 0.0;  // rho stays <= 1 down to arbitrarily small lambda: norm -> 0 edge
      break;
    }
    ++evals;
    if (rho_at(lo) > 1.0) break;
    lo *= 0.5;
  }

  const bool strict = phi.strictly_increasing();
  double value = hi, residual = 0.0;
  bool early = false;
  for (int it = 0; it < 300; ++it) {
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double mid = 0.5 * (lo + hi);
    const double r = rho_at(mid);
    ++evals;
    if (r > 1.0)
      lo = mid;
    else
      hi = mid;
    if (strict && std::isfinite(r) && std::abs(r - 1.0) <= tol) {
      value = mid;
      residual = std::abs(r - 1.0);
      early = true;
      break;
    }
  }
  if (!early) {
    value = hi;
    const double r = rho_at(value);
    ++evals;
    residual = std::isfinite(r) ? std::abs(r - 1.0) : kInf;
  }
  rep.value = value;
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  rep.iterations = evals;
  rep.residual = residual;
  return rep;
}

inline NormReport luxemburg_norm(const OrliczFunction& phi, const BlockOperator& x,
                                 double tol = 1e-10) {
  return luxemburg_norm(phi, singular_value_profile(x), tol);
}

// ||x||_p = (tau |x|^p)^{1/p}, exact for the step profile.
inline double p_norm(const SingularValueProfile& p, double exponent) {
  if (!(exponent >= 1.0)) throw std::invalid_argument("p_norm: need p >= 1");
  double s = 0.0;
  for (const auto& st : p.steps()) s += st.width * std::pow(st.level, exponent);
  return std::pow(s, 1.0 / exponent);
}

inline double p_norm(const BlockOperator& x, double exponent) {
  return p_norm(singular_value_profile(x), exponent);
}

// Amemiya norm inf_{k > 0} (1 + tau phi(k|x|)) / k, by golden section on
// log k.  The objective is unimodal: its numerator-derivative k rho'(k) - 1 -
// rho(k) is nondecreasing in k.
inline NormReport amemiya_norm(const OrliczFunction& phi,
                               const SingularValueProfile& p,
                               double tol = 1e-12) {
  NormReport rep;
  rep.method = NormMethod::Amemiya;
  if (p.empty()) return rep;
  int evals = 0;
  auto objective = [&](double k) {
    ++evals;
    const double r = modular(phi, p.scaled(k));
    return std::isfinite(r) ? (1.0 + r) / k : kInf;
  };

  const double k0 = 1.0 / luxemburg_norm(phi, p).value;
  double lo = k0, hi = k0;
  for (int guard = 0; guard < 600 && objective(lo * 0.5) < objective(lo); ++guard)
    lo *= 0.5;
  for (int guard = 0; guard < 600 && objective(hi * 2.0) < objective(hi); ++guard)
    hi *= 2.0;
  lo *= 0.5;
  hi *= 2.0;

  // Golden section on t = log k.
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo), b = std::log(hi);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = objective(std::exp(c)), fd = objective(std::exp(d));
  for (int it = 0; it < 300 && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = objective(std::exp(d));
    }
  }
  const double k_star = std::exp(0.5 * (a + b));
  rep.k_star = k_star;
  rep.value = std::min(objective(k_star), std::min(fc, fd));
  rep.bracket_lo = std::exp(a);
  rep.bracket_hi = std::exp(b);
  rep.iterations = evals;
  rep.residual = b - a;  // final width in log k
  return rep;
}

inline NormReport amemiya_norm(const OrliczFunction& phi, const BlockOperator& x,
                               double tol = 1e-12) {
  return amemiya_norm(phi, singular_value_profile(x), tol);
}

// tau(|x y|) = sum_k c_k (sum of singular values of x_k y_k).
inline double trace_abs_product(const BlockOperator& x, const BlockOperator& y) {
  require_same_shape(x, y, "trace_abs_product");
  double s = 0.0;
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    Matrix z = x.block(k) * y.block(k);
    Eigen::JacobiSVD<Matrix> svd(z);
    s += x.shape().block(k).weight * svd.singularValues().sum();
  }
  return s;
}

namespace detail {

// Largest beta with modular(psi, beta * profile) <= 1.  For continuous
// modulars this solves modular = 1; when the modular jumps past 1 (psi with
// finite domain) it converges to the jump from the feasible side, so the
// returned scale never leaves the unit ball.  Returns 0 on an empty profile.
inline double modular_unit_scale(const OrliczFunction& psi,
                                 const SingularValueProfile& p,
                                 double tol = 1e-12) {
  if (p.empty()) return 0.0;
  auto g = [&](double beta) { return modular(psi, p.scaled(beta)); };
  double hi = 1.0;
  for (int guard = 0; g(hi) <= 1.0; ++guard) {
    if (guard > 4000) throw BracketFailure("modular_unit_scale: modular stays below 1");
    hi *= 2.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = g(mid);
    if (std::isfinite(r) && std::abs(r - 1.0) <= tol) return mid;
    if (r <= 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return lo;
}

struct EigenBasis {
  std::vector<Matrix> vectors;          // per block
  std::vector<Eigen::VectorXd> values;  // per block, ascending
};

inline EigenBasis abs_eigenbasis(const BlockOperator& x) {
  EigenBasis eb;
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    const Matrix& m = x.block(k);
    Matrix gram = m.adjoint() * m;
    gram = 0.5 * (gram + gram.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("abs_eigenbasis: eigensolver did not converge");
    eb.vectors.push_back(es.eigenvectors());
    eb.values.push_back(es.eigenvalues().cwiseMax(0.0).cwiseSqrt());
  }
  return eb;
}

}  // namespace detail

struct OrliczSupParams {
  int witnesses = 16;        // random PSD witnesses, and aligned k-grid size
  std::uint64_t seed = 1;
  double norm_tol = 1e-12;   // witness normalization residual
};

// Lower estimate of the sup-form Orlicz norm
//   ||x||^0 = sup{ tau(|x y|) : tau(psi(|y|)) <= 1 }
// from two witness families: operators aligned with the |x| eigenbasis whose
// spectra follow phi'(k |x|) (Young-equality shape, scanned and refined over
// k), and random Wishart witnesses.  Every witness is scaled to modular
// exactly 1, so the estimate never overshoots the true sup.
inline NormReport orlicz_norm_sup(const OrliczFunction& phi,
                                  const OrliczFunction& psi,
                                  const BlockOperator& x,
                                  const OrliczSupParams& params = {}) {
  NormReport rep;
  rep.method = NormMethod::OrliczSup;
  const SingularValueProfile prof = singular_value_profile(x);
  if (prof.empty()) return rep;
  const detail::EigenBasis eb = detail::abs_eigenbasis(x);
  const double dm = phi.domain_max();
  int evals = 0;

  // Pairing value of the aligned witness at scale k; exact because witness
  // and |x| commute: tau(|x y|) = beta sum c_k lambda_i phi'(k lambda_i).
  auto aligned_pairing = [&](double k, double* residual_out) {
    ++evals;
    std::vector<WeightedSigma> fvals;
    double raw = 0.0;
    for (std::size_t blk = 0; blk < eb.values.size(); ++blk) {
      const double w = x.shape().block(blk).weight;
      for (Eigen::Index i = 0; i < eb.values[blk].size(); ++i) {
        const double lam = eb.values[blk][i];
        if (lam <= SingularValueProfile::kDropTol) continue;
        double arg = k * lam;
        if (std::isfinite(dm) && arg >= dm) arg = dm * (1.0 - 1e-12);
        const double f = phi.right_derivative(arg);
        if (f > 0.0) fvals.push_back({f, w});
        raw += w * lam * f;
      }
    }
    if (fvals.empty() || raw <= 0.0) return 0.0;
    const SingularValueProfile fp = SingularValueProfile::from_spectrum(std::move(fvals));
    const double beta = detail::modular_unit_scale(psi, fp, params.norm_tol);
    if (residual_out)
      *residual_out = std::abs(modular(psi, fp.scaled(beta)) - 1.0);
    return beta * raw;
  };

  const double k0 = 1.0 / luxemburg_norm(phi, prof).value;
  const int grid = std::max(params.witnesses, 7);
  double best = 0.0, best_k = k0, best_res = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double k = k0 * std::pow(10.0, -1.0 + 2.0 * i / (grid - 1));
    double res = 0.0;
    const double v = aligned_pairing(k, &res);
    if (v > best) {
      best = v;
      best_k = k;
      best_res = res;
    }
  }
  // Golden refinement (maximization) around the best grid point.
  const double spread = std::pow(10.0, 2.0 / (grid - 1));
  double a = std::log(best_k / spread), b = std::log(best_k * spread);
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = aligned_pairing(std::exp(c), nullptr);
  double fd = aligned_pairing(std::exp(d), nullptr);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = aligned_pairing(std::exp(c), nullptr);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = aligned_pairing(std::exp(d), nullptr);
    }
  }
  {
    const double k = std::exp(0.5 * (a + b));
    double res = 0.0;
    const double v = aligned_pairing(k, &res);
    if (v > best) {
      best = v;
      best_k = k;
      best_res = res;
    }
  }
  rep.bracket_lo = std::exp(a);
  rep.bracket_hi = std::exp(b);

  // Random PSD witnesses; pairing is linear in the normalization scale.
  for (int j = 0; j < params.witnesses; ++j) {
    const BlockOperator y =
        random_operator(x.shape(), PSDWishart{1.0}, derive_seed(params.seed, j));
    const SingularValueProfile py = singular_value_profile(y);
    if (py.empty()) continue;
    ++evals;
    const double beta = detail::modular_unit_scale(psi, py, params.norm_tol);
    const double v = beta * trace_abs_product(x, y);
    if (v > best) {
      best = v;
      best_k = 0.0;  // random witness, no aligned scale
      best_res = std::abs(modular(psi, py.scaled(beta)) - 1.0);
    }
  }

  rep.value = best;
  rep.k_star = best_k;
  rep.iterations = evals;
  rep.residual = best_res;
  return rep;
}

// Convenience overload computing psi = conjugate(phi) internally.  The grid
// is clipped below the asymptotic slope of phi so tabulated inputs with a
// linear tail stay conjugable.
inline NormReport orlicz_norm_sup(const OrliczFunction& phi, const BlockOperator& x,
                                  const OrliczSupParams& params = {}) {
  try {
    ConjugateGrid grid;
    const double slope = max_finite_conjugate_arg(phi);
    if (std::isfinite(slope)) {
      grid.u_max = std::min(grid.u_max, 0.99 * slope);
      grid.u_min = std::min(grid.u_min, grid.u_max * 1e-12);
    }
    return orlicz_norm_sup(phi, conjugate(phi, grid), x, params);
  } catch (const ConjugateDiverges& e) {
    throw ConjugateUnavailable(e.what());
  } catch (const DegenerateGrid& e) {
    throw ConjugateUnavailable(e.what());
  }
}

// Lower estimate of sup{ tau(|x y|) : ||x||_Luxemburg(phi) <= 1 } for fixed y,
// i.e. the dual-ball pairing sup that duality says equals the psi Orlicz norm
// of y.  psi_align only shapes the aligned witnesses (psi'(k |y|)).
inline NormReport dual_norm_sup(const OrliczFunction& phi,
                                const OrliczFunction& psi_align,
                                const BlockOperator& y,
                                const OrliczSupParams& params = {}) {
  NormReport rep;
  rep.method = NormMethod::OrliczSup;
  const SingularValueProfile prof_y = singular_value_profile(y);
  if (prof_y.empty()) return rep;
  const detail::EigenBasis eb = detail::abs_eigenbasis(y);
  const double dm = psi_align.domain_max();
  int evals = 0;

  auto aligned_pairing = [&](double k) {
    ++evals;
    std::vector<WeightedSigma> gvals;
    double raw = 0.0;
    for (std::size_t blk = 0; blk < eb.values.size(); ++blk) {
      const double w = y.shape().block(blk).weight;
      for (Eigen::Index i = 0; i < eb.values[blk].size(); ++i) {
        const double sig = eb.values[blk][i];
        if (sig <= SingularValueProfile::kDropTol) continue;
        double arg = k * sig;
        if (std::isfinite(dm) && arg >= dm) arg = dm * (1.0 - 1e-12);
        const double g = psi_align.right_derivative(arg);
        if (g > 0.0) gvals.push_back({g, w});
        raw += w * sig * g;
      }
    }
    if (gvals.empty() || raw <= 0.0) return 0.0;
    const SingularValueProfile gp = SingularValueProfile::from_spectrum(std::move(gvals));
    const double lam = luxemburg_norm(phi, gp).value;
    return lam > 0.0 ? raw / lam : 0.0;
  };

  const double k0 = 1.0 / luxemburg_norm(psi_align, prof_y).value;
  const int grid = std::max(params.witnesses, 7);
  double best = 0.0, best_k = k0;
  for (int i = 0; i < grid; ++i) {
    const double k = k0 * std::pow(10.0, -1.0 + 2.0 * i / (grid - 1));
    const double v = aligned_pairing(k);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double spread = std::pow(10.0, 2.0 / (grid - 1));
  double a = std::log(best_k / spread), b = std::log(best_k * spread);
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = aligned_pairing(std::exp(c)), fd = aligned_pairing(std::exp(d));
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = aligned_pairing(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = aligned_pairing(std::exp(d));
    }
  }
  {
    const double v = aligned_pairing(std::exp(0.5 * (a + b)));
    if (v > best) {
      best = v;
      best_k = std::exp(0.5 * (a + b));
    }
  }
  for (int j = 0; j < params.witnesses; ++j) {
    const BlockOperator x =
        random_operator(y.shape(), PSDWishart{1.0}, derive_seed(params.seed, j));
    const double lam = luxemburg_norm(phi, x).value;
    if (!(lam > 0.0)) continue;
    ++evals;
    const double v = trace_abs_product(x, y) / lam;
    if (v > best) {
      best = v;
      best_k = 0.0;
    }
  }
  rep.value = best;
  rep.k_star = best_k;
  rep.bracket_lo = std::exp(a);
  rep.bracket_hi = std::exp(b);
  rep.iterations = evals;
  return rep;
}

struct HolderReport {
  double lhs = 0.0;  // tau(|x y|)
  double rhs = 0.0;  // Amemiya norm of x
  double y_modular = 0.0;
};

// Hoelder-type bound tau(|x y|) <= ||x||_Amemiya(phi) for tau(psi(|y|)) <= 1.
inline HolderReport holder_pairing(const OrliczFunction& phi,
                                   const OrliczFunction& psi,
                                   const BlockOperator& x, const BlockOperator& y,
                                   double feas_tol = 1e-9) {
  HolderReport rep;
  rep.y_modular = modular(psi, y);
  if (!(rep.y_modular <= 1.0 + feas_tol))
    throw InfeasibleWitness("holder_pairing: tau(psi(|y|)) exceeds 1");
  rep.lhs = trace_abs_product(x, y);
  rep.rhs = amemiya_norm(phi, x).value;
  return rep;
}

}  // namespace ncorlicz
