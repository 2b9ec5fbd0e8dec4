#pragma once

// Generalized singular value function mu_t(x) for block operators: an exact
// decreasing step function derived from the weighted spectrum of |x|, plus
// the distribution function and the convergence-in-measure gauge.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "block_operator.hpp"

namespace ncorlicz {

struct WeightedSigma {
  double sigma = 0.0;
  double weight = 0.0;  // trace weight of its eigenspace slot
};

// Singular values of x (eigenvalues of |x|), each carrying the trace weight
// of its block.  Unsorted.
inline std::vector<WeightedSigma> weighted_singular_values(const BlockOperator& x) {
  std::vector<WeightedSigma> out;
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    // SVD of the block itself, never of its Gram square: squaring halves the
    // digits of small singular values (exact zero modes resurface at
    // ~1e-8 * top, above the drop tolerance).
    Eigen::JacobiSVD<Matrix> svd(x.block(k));
    if (svd.info() != Eigen::Success)
      throw NumericalFailure("weighted_singular_values: svd did not converge");
    const double w = x.shape().block(k).weight;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      out.push_back({svd.singularValues()[i], w});
  }
  return out;
}

struct ProfileStep {
  double level = 0.0;  // singular value
  double width = 0.0;  // measure of {t : mu_t = level}
  bool operator==(const ProfileStep& o) const {
    return level == o.level && width == o.width;
  }
};

// mu as a finite step function: strictly decreasing positive levels with
// positive widths.  Zero modes are dropped (mu is 0 past total_width()).
class SingularValueProfile {
 public:
  static constexpr double kMergeTol = 1e-12;  // absolute level clustering
  static constexpr double kDropTol = 1e-12;   // levels at or below are noise

  SingularValueProfile() = default;

  explicit SingularValueProfile(std::vector<ProfileStep> steps)
      : steps_(std::move(steps)) {
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      if (!(steps_[i].level > 0.0) || !(steps_[i].width > 0.0))
        throw std::invalid_argument("SingularValueProfile: levels and widths must be positive");
      if (i > 0 && !(steps_[i].level < steps_[i - 1].level))
        throw std::invalid_argument("SingularValueProfile: levels must be strictly decreasing");
    }
  }

  static SingularValueProfile from_spectrum(std::vector<WeightedSigma> sv) {
    std::sort(sv.begin(), sv.end(), [](const WeightedSigma& a, const WeightedSigma& b) {
      return a.sigma > b.sigma;
    });
    std::vector<ProfileStep> steps;
    for (const auto& s : sv) {
      if (s.sigma <= kDropTol) continue;
      if (!steps.empty() && steps.back().level - s.sigma <= kMergeTol) {
        steps.back().width += s.weight;  // cluster keeps its top level
      } else {
        steps.push_back({s.sigma, s.weight});
      }
    }
    SingularValueProfile p;
    p.steps_ = std::move(steps);
    return p;
  }

  const std::vector<ProfileStep>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }

  double total_width() const {
    double w = 0.0;
    for (const auto& s : steps_) w += s.width;
    return w;
  }

  double top_level() const { return steps_.empty() ? 0.0 : steps_.front().level; }

  // mu_t: value on [offset_i, offset_i + width_i), 0 past the support.
  double value_at(double t) const {
    if (t < 0.0) throw NegativeArgument("mu_t: negative time");
    double acc = 0.0;
    for (const auto& s : steps_) {
      acc += s.width;
      if (t < acc) return s.level;
    }
    return 0.0;
  }

  // d(s) = measure of {t : mu_t > s}  ( = tau e_{(s,inf)}(|x|) ).
  double distribution(double s) const {
    if (s < 0.0) throw NegativeArgument("distribution: negative level");
    double acc = 0.0;
    for (const auto& st : steps_) {
      if (st.level > s)
        acc += st.width;
      else
        break;
    }
    return acc;
  }

  SingularValueProfile scaled(double a) const {
    if (!(a > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
    std::vector<ProfileStep> steps = steps_;
    for (auto& s : steps) s.level *= a;
    SingularValueProfile p;
    p.steps_ = std::move(steps);
    return p;
  }

 private:
  std::vector<ProfileStep> steps_;
};

inline SingularValueProfile singular_value_profile(const BlockOperator& x) {
  return SingularValueProfile::from_spectrum(weighted_singular_values(x));
}

inline double distribution(const BlockOperator& x, double s) {
  return singular_value_profile(x).distribution(s);
}

inline double mu_at(const BlockOperator& x, double t) {
  return singular_value_profile(x).value_at(t);
}

// Gauge of convergence in measure: d(x - y; eps).  x_n -> x in measure iff
// this vanishes for every fixed eps > 0.
inline double measure_gauge(const BlockOperator& x, const BlockOperator& y,
                            double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("measure_gauge: eps must be positive");
  return distribution(x - y, eps);
}

// tau(phi(|x|)) as the exact step sum  sum_j width_j phi(level_j).
inline double modular(const OrliczFunction& phi, const SingularValueProfile& p) {
  double s = 0.0;
  for (const auto& st : p.steps()) {
    s += st.width * phi.value(st.level);
    if (s == kInf) return kInf;
  }
  return s;
}

inline double modular(const OrliczFunction& phi, const BlockOperator& x) {
  return modular(phi, singular_value_profile(x));
}

}  // namespace ncorlicz
