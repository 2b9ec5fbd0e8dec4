#pragma once

// Orlicz functions on [0, inf): convex, nondecreasing gauges with phi(0) = 0,
// together with generalized inverses, Legendre conjugation onto a tabulated
// representation, and an empirical Delta_2 growth probe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncorlicz {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct NegativeArgument : std::domain_error {
  using std::domain_error::domain_error;
};

struct OutOfDomain : std::domain_error {
  using std::domain_error::domain_error;
};

// inverse(phi, y) requested for a y the function never attains.
struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// sup(u v - phi(v)) is +inf: u exceeds the asymptotic slope of phi.
struct ConjugateDiverges : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateGrid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class PhiKind { Power, ExpMinusOne, PowerLog, Tabulated };

struct Delta2Hint {
  enum class State { Holds, Fails, Unknown };
  State state = State::Unknown;
  double k = 0.0;  // growth constant phi(2u) <= k phi(u); meaningful when Holds
};

class OrliczFunction {
 public:
  // phi(u) = scale * u^p, p >= 1.
  static OrliczFunction power(double p, double scale = 1.0) {
    if (!(p >= 1.0)) throw std::invalid_argument("power: exponent must be >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw std::invalid_argument("power: scale must be positive and finite");
    OrliczFunction f(PhiKind::Power);
    f.p_ = p;
    f.scale_ = scale;
    f.hint_ = {Delta2Hint::State::Holds, std::pow(2.0, p)};
    return f;
  }

  // phi(u) = e^u - 1.  Grows too fast for Delta_2.
  static OrliczFunction exp_minus_one() {
    OrliczFunction f(PhiKind::ExpMinusOne);
    f.hint_ = {Delta2Hint::State::Fails, 0.0};
    return f;
  }

  // phi(u) = u^p * log(1 + u), p >= 1.
  static OrliczFunction power_log(double p) {
    if (!(p >= 1.0))
      throw std::invalid_argument("power_log: exponent must be >= 1");
    OrliczFunction f(PhiKind::PowerLog);
    f.p_ = p;
    f.hint_ = {Delta2Hint::State::Holds, std::pow(2.0, p + 1.0)};
    return f;
  }

  // Piecewise-linear interpolation through (u_i, phi_i), extended linearly
  // with the last chord slope.  Knots must start at (0,0), have strictly
  // increasing u, nondecreasing phi, and convex (nondecreasing) chord slopes.
  static OrliczFunction tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2)
      throw std::invalid_argument("tabulated: need at least two knots");
    if (knots.front().first != 0.0 || knots.front().second != 0.0)
      throw std::invalid_argument("tabulated: first knot must be (0, 0)");
    double prev_slope = -kInf;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second))
        throw std::invalid_argument("tabulated: knots must be finite");
      if (i > 0) {
        const double du = knots[i].first - knots[i - 1].first;
        const double dphi = knots[i].second - knots[i - 1].second;
        if (!(du > 0.0))
          throw std::invalid_argument("tabulated: u must be strictly increasing");
        if (dphi < 0.0)
          throw std::invalid_argument("tabulated: phi must be nondecreasing");
        const double slope = dphi / du;
        // Convexity with a relative slack so exactly-sampled convex data is
        // never rejected for rounding.
        if (slope < prev_slope - 1e-9 * (1.0 + std::abs(prev_slope)))
          throw std::invalid_argument("tabulated: chord slopes must be nondecreasing");
        prev_slope = std::max(prev_slope, slope);
      }
    }
    OrliczFunction f(PhiKind::Tabulated);
    f.knots_ = std::move(knots);
    f.hint_ = {Delta2Hint::State::Unknown, 0.0};
    return f;
  }

  // Copy with phi(u) = +inf for u > m (finite Young-function domain).
  OrliczFunction with_domain_max(double m) const {
    if (!(m > 0.0)) throw std::invalid_argument("with_domain_max: need m > 0");
    OrliczFunction f(*this);
    f.domain_max_ = m;
    f.hint_ = {Delta2Hint::State::Fails, 0.0};  // jump to +inf kills Delta_2
    return f;
  }

  PhiKind kind() const { return kind_; }
  double power_exponent() const { return p_; }
  double power_scale() const { return scale_; }
  double domain_max() const { return domain_max_; }
  const Delta2Hint& delta2_hint() const { return hint_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  bool operator==(const OrliczFunction& o) const {
    return kind_ == o.kind_ && p_ == o.p_ && scale_ == o.scale_ &&
           domain_max_ == o.domain_max_ && knots_ == o.knots_;
  }
  bool operator!=(const OrliczFunction& o) const { return !(*this == o); }

  // phi(u).  Returns +inf beyond domain_max; throws on u < 0.
  double value(double u) const {
    if (u < 0.0) throw NegativeArgument("phi: negative argument");
    if (u > domain_max_) return kInf;
    switch (kind_) {
      case PhiKind::Power:
        return scale_ * std::pow(u, p_);
      case PhiKind::ExpMinusOne:
        return std::expm1(u);  // may overflow to +inf for large u; that is fine
      case PhiKind::PowerLog:
        return std::pow(u, p_) * std::log1p(u);
      case PhiKind::Tabulated:
        return eval_tabulated(u);
    }
    return 0.0;  // unreachable
  }

  double operator()(double u) const { return value(u); }

  // Right derivative phi'_+(u).  Defined for 0 <= u < domain_max.
  double right_derivative(double u) const {
    if (u < 0.0) throw NegativeArgument("phi': negative argument");
    if (u >= domain_max_) throw OutOfDomain("phi': argument outside finite domain");
    switch (kind_) {
      case PhiKind::Power:
        return scale_ * p_ * std::pow(u, p_ - 1.0);
      case PhiKind::ExpMinusOne:
        return std::exp(u);
      case PhiKind::PowerLog:
        if (u == 0.0) return 0.0;
        return p_ * std::pow(u, p_ - 1.0) * std::log1p(u) + std::pow(u, p_) / (1.0 + u);
      case PhiKind::Tabulated:
        return tabulated_right_slope(u);
    }
    return 0.0;  // unreachable
  }

  // Generalized inverse inf{u >= 0 : phi(u) >= y}.  For y above the range of
  // phi on a finite domain this returns domain_max (the boundary of the +inf
  // region); for an unbounded-domain phi that stays below y it throws.
  double inverse(double y) const {
    if (y < 0.0) throw NegativeArgument("inverse: negative argument");
    if (y == 0.0) return 0.0;
    double u = 0.0;
    switch (kind_) {
      case PhiKind::Power:
        u = std::pow(y / scale_, 1.0 / p_);
        break;
      case PhiKind::ExpMinusOne:
        u = std::log1p(y);
        break;
      case PhiKind::PowerLog:
        u = inverse_by_bisection(y);
        break;
      case PhiKind::Tabulated:
        u = inverse_tabulated(y);
        break;
    }
    return std::min(u, domain_max_);
  }

  // sup of the right derivative over the whole (infinite) domain; +inf for
  // superlinear kinds.  Only meaningful when domain_max is infinite.
  double asymptotic_slope() const {
    switch (kind_) {
      case PhiKind::Power:
        return p_ > 1.0 ? kInf : scale_;
      case PhiKind::ExpMinusOne:
      case PhiKind::PowerLog:
        return kInf;
      case PhiKind::Tabulated: {
        const std::size_t n = knots_.size();
        return (knots_[n - 1].second - knots_[n - 2].second) /
               (knots_[n - 1].first - knots_[n - 2].first);
      }
    }
    return kInf;  // unreachable
  }

  // True when phi is strictly increasing on its domain (no flat segments).
  bool strictly_increasing() const {
    switch (kind_) {
      case PhiKind::Power:
      case PhiKind::ExpMinusOne:
      case PhiKind::PowerLog:
        return true;
      case PhiKind::Tabulated:
        for (std::size_t i = 1; i < knots_.size(); ++i)
          if (!(knots_[i].second > knots_[i - 1].second)) return false;
        return asymptotic_slope() > 0.0;
    }
    return true;  // unreachable
  }

 private:
  explicit OrliczFunction(PhiKind k) : kind_(k) {}

  double eval_tabulated(double u) const {
    const std::size_t n = knots_.size();
    if (u >= knots_[n - 1].first) {
      const double s = asymptotic_slope();
      return knots_[n - 1].second + s * (u - knots_[n - 1].first);
    }
    // First knot with u_i > u; interpolate on [u_{i-1}, u_i].
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (knots_[mid].first <= u)
        lo = mid;
      else
        hi = mid;
    }
    const double du = knots_[hi].first - knots_[lo].first;
    const double t = (u - knots_[lo].first) / du;
    return knots_[lo].second + t * (knots_[hi].second - knots_[lo].second);
  }

  double tabulated_right_slope(double u) const {
    const std::size_t n = knots_.size();
    if (u >= knots_[n - 1].first) return asymptotic_slope();
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (knots_[mid].first <= u)
        lo = mid;
      else
        hi = mid;
    }
    return (knots_[hi].second - knots_[lo].second) /
           (knots_[hi].first - knots_[lo].first);
  }

  double inverse_tabulated(double y) const {
    const std::size_t n = knots_.size();
    if (y <= knots_[n - 1].second) {
      // First knot with phi_i >= y; the chord into it is strictly rising.
      std::size_t idx = n - 1;
      for (std::size_t i = 1; i < n; ++i) {
        if (knots_[i].second >= y) {
          idx = i;
          break;
        }
      }
      const double dphi = knots_[idx].second - knots_[idx - 1].second;
      const double du = knots_[idx].first - knots_[idx - 1].first;
      return knots_[idx - 1].first + (y - knots_[idx - 1].second) * du / dphi;
    }
    const double s = asymptotic_slope();
    if (!(s > 0.0)) {
      if (std::isfinite(domain_max_)) return domain_max_;
      throw Unreachable("inverse: flat-tailed tabulated phi never reaches level");
    }
    return knots_[n - 1].first + (y - knots_[n - 1].second) / s;
  }

  double inverse_by_bisection(double y) const {
    double hi = 1.0;
    const double cap = std::isfinite(domain_max_) ? domain_max_ : 1e300;
    while (value(std::min(hi, cap)) < y) {
      if (hi >= cap) return domain_max_;  // +inf region boundary
      hi *= 2.0;
    }
    hi = std::min(hi, cap);
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (value(mid) < y)
        lo = mid;
      else
        hi = mid;
    }
    return hi;
  }

  PhiKind kind_;
  double p_ = 0.0;
  double scale_ = 1.0;
  double domain_max_ = kInf;
  Delta2Hint hint_;
  std::vector<std::pair<double, double>> knots_;
};

// ---------------------------------------------------------------------------
// Legendre conjugation
// ---------------------------------------------------------------------------

// sup_{v >= 0} (u v - phi(v)).  Concave objective; the maximizer is bracketed
// by scanning the right derivative past u and pinned down by bisection on the
// derivative (which also resolves the piecewise-constant tabulated case).
inline double legendre_sup(const OrliczFunction& phi, double u) {
  if (u < 0.0) throw NegativeArgument("legendre_sup: negative argument");
  if (u == 0.0) return 0.0;
  const double vcap = phi.domain_max();
  const bool bounded = std::isfinite(vcap);
  if (!bounded && phi.asymptotic_slope() < u)
    throw ConjugateDiverges("legendre_sup: argument exceeds asymptotic slope");

  auto rd = [&](double v) {
    return v >= vcap ? kInf : phi.right_derivative(v);
  };
  auto g = [&](double v) { return u * v - phi.value(v); };

  if (rd(0.0) >= u) return 0.0;  // objective nonincreasing from the start

  double v_hi = bounded ? std::min(1.0, vcap) : 1.0;
  while (rd(v_hi) < u) {
    v_hi *= 2.0;
    if (bounded && v_hi >= vcap) {
      v_hi = vcap;
      break;
    }
    if (v_hi > 1e300)
      throw ConjugateDiverges("legendre_sup: no stationary point found");
  }
  double v_lo = 0.0;
  for (int it = 0; it < 200 && (v_hi - v_lo) > 1e-15 * v_hi; ++it) {
    const double mid = 0.5 * (v_lo + v_hi);
    if (rd(mid) < u)
      v_lo = mid;
    else
      v_hi = mid;
  }
  const double best = std::max({g(v_lo), g(0.5 * (v_lo + v_hi)), g(v_hi)});
  return std::max(0.0, best);
}

struct ConjugateGrid {
  double u_min = 1e-6;
  double u_max = 1e6;
  int count = 512;  // log-spaced samples, plus the (0,0) knot
};

inline std::vector<std::pair<double, double>> conjugate_knots(
    const OrliczFunction& phi, const ConjugateGrid& grid) {
  if (!(grid.u_min > 0.0) || !(grid.u_max > grid.u_min) || grid.count < 2)
    throw DegenerateGrid("conjugate: bad sampling grid");
  std::vector<std::pair<double, double>> knots;
  knots.reserve(static_cast<std::size_t>(grid.count) + 1);
  knots.emplace_back(0.0, 0.0);
  const double lmin = std::log(grid.u_min), lmax = std::log(grid.u_max);
  double prev = 0.0;
  for (int i = 0; i < grid.count; ++i) {
    const double u = std::exp(lmin + (lmax - lmin) * i / (grid.count - 1));
    double psi = legendre_sup(phi, u);
    psi = std::max(psi, prev);  // guard against sub-ulp rounding dips
    knots.emplace_back(u, psi);
    prev = psi;
  }
  return knots;
}

struct ConjugateResult {
  OrliczFunction psi;
  double eps_tab;  // estimated interpolation error, by grid doubling
};

// Conjugate as a tabulated function on the default (or given) grid, with the
// interpolation error estimated by comparing against a doubled grid.  When
// phi has a finite asymptotic slope s the conjugate is +inf past s: the grid
// is clipped below s and the result carries domain_max = s.
inline ConjugateResult conjugate_detailed(const OrliczFunction& phi,
                                          const ConjugateGrid& grid = {}) {
  ConjugateGrid g = grid;
  double slope_cap = kInf;
  if (!std::isfinite(phi.domain_max())) {
    const double s = phi.asymptotic_slope();
    if (s <= 0.0)
      throw ConjugateDiverges("conjugate: phi is bounded, conjugate is +inf everywhere");
    if (std::isfinite(s)) {
      slope_cap = s;
      if (g.u_max >= s) {
        g.u_max = 0.999 * s;
        g.u_min = std::min(g.u_min, g.u_max * 1e-9);
      }
    }
  }
  OrliczFunction psi = OrliczFunction::tabulated(conjugate_knots(phi, g));
  ConjugateGrid fine = g;
  fine.count = g.count * 2;
  OrliczFunction psi2 = OrliczFunction::tabulated(conjugate_knots(phi, fine));
  double eps = 0.0;
  const double lmin = std::log(g.u_min), lmax = std::log(g.u_max);
  const int probes = fine.count;
  for (int i = 0; i < probes; ++i) {
    const double u = std::exp(lmin + (lmax - lmin) * i / (probes - 1));
    eps = std::max(eps, std::abs(psi.value(u) - psi2.value(u)));
  }
  if (std::isfinite(slope_cap)) psi = psi.with_domain_max(slope_cap);
  return {std::move(psi), eps};
}

inline OrliczFunction conjugate(const OrliczFunction& phi,
                                const ConjugateGrid& grid = {}) {
  return conjugate_detailed(phi, grid).psi;
}

// Largest u for which the conjugate of phi is finite (the asymptotic slope of
// phi); callers sampling the conjugate should stay strictly below this.
inline double max_finite_conjugate_arg(const OrliczFunction& phi) {
  if (std::isfinite(phi.domain_max())) return kInf;
  return phi.asymptotic_slope();
}

// phi(u) + psi(v) - u v.  Nonnegative when psi is the exact conjugate; a
// tabulated psi can undershoot by at most its interpolation error.
inline double young_gap(const OrliczFunction& phi, const OrliczFunction& psi,
                        double u, double v) {
  return phi.value(u) + psi.value(v) - u * v;
}

// ---------------------------------------------------------------------------
// Delta_2 probe
// ---------------------------------------------------------------------------

struct Delta2Grid {
  double u_min = 1e-3;
  double u_max = 1e3;
  int count = 200;
};

enum class Delta2Verdict { Holds, FailsEmpirically };

struct Delta2Report {
  Delta2Verdict verdict = Delta2Verdict::FailsEmpirically;
  double k_estimate = 0.0;  // sup of sampled ratios phi(2u)/phi(u); may be +inf
  double witness_u = 0.0;   // sample attaining the sup
  Delta2Grid grid;
  double threshold = 0.0;
};

// Samples r(u) = phi(2u)/phi(u) on a log grid.  Holds requires the sup to be
// finite, below threshold, and non-increasing over the top decade of the grid
// (so the ratio is not still climbing at the right edge).  A failing probe is
// only empirical evidence, hence the verdict name.
inline Delta2Report delta2_probe(const OrliczFunction& phi,
                                 const Delta2Grid& grid = {},
                                 double threshold = 1e6) {
  if (!(grid.u_min > 0.0) || !(grid.u_max > grid.u_min) || grid.count < 2)
    throw DegenerateGrid("delta2_probe: bad sampling grid");
  if (!(threshold > 0.0)) throw DegenerateGrid("delta2_probe: bad threshold");
  Delta2Report rep;
  rep.grid = grid;
  rep.threshold = threshold;
  const double lmin = std::log(grid.u_min), lmax = std::log(grid.u_max);
  std::vector<double> us(grid.count), ratios(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    const double u = std::exp(lmin + (lmax - lmin) * i / (grid.count - 1));
    const double a = phi.value(u);
    const double b = phi.value(2.0 * u);
    us[i] = u;
    ratios[i] = a > 0.0 ? b / a : kInf;
  }
  double k = 0.0, witness = us[0];
  for (int i = 0; i < grid.count; ++i) {
    if (ratios[i] > k) {
      k = ratios[i];
      witness = us[i];
    }
  }
  rep.k_estimate = k;
  rep.witness_u = witness;
  bool ok = std::isfinite(k) && k <= threshold;
  if (ok) {
    // Top decade must be non-increasing (tiny relative slack for rounding).
    const double cutoff = grid.u_max / 10.0;
    double prev = -kInf;
    for (int i = 0; i < grid.count; ++i) {
      if (us[i] < cutoff) continue;
      if (prev > 0.0 && ratios[i] > prev * (1.0 + 1e-9)) {
        ok = false;
        break;
      }
      prev = ratios[i];
    }
  }
  rep.verdict = ok ? Delta2Verdict::Holds : Delta2Verdict::FailsEmpirically;
  return rep;
}

}  // namespace ncorlicz
