#pragma once

// Closed-form gain design for double-integrator agents under nonuniform
// sampling h ∈ (0, hbar] and balanced topologies with Laplacian eigenvalues in
// [lambda2, lambdaN].
//
// With T = [[μ₂−μ₁, −(μ₂+μ₁)], [0, 2]] and K̂ = K·T = [k₁ k₂], the transformed
// closed loop T⁻¹S(h, λ)T is a Gershgorin contraction for every (h, λ) in the
// region whenever
//
//   a > k₁ > 0,   b > k₂ > c,   d > k₂ − k₁ > 0
//
//   a = 2(μ₂−μ₁) / (hbar·λN·(μ₁+μ₂+hbar))
//   b = 4 / (λN·(hbar + max{hbar, 2μ₁}))
//   c = 4 / (λ2·(μ₁+μ₂))
//   d = 4 / (λN·(μ₁+μ₂+hbar))

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>
#include <utility>

#include "sdcons/errors.hpp"
#include "sdcons/matrix.hpp"

namespace sdcons::synthesis {

struct DesignSpec {
  double hbar = 0.0;
  double lambda2 = 0.0;
  double lambdaN = 0.0;

  void validate() const {
    if (!std::isfinite(hbar) || !std::isfinite(lambda2) || !std::isfinite(lambdaN))
      throw DomainError("DesignSpec: non-finite value");
    if (!(hbar > 0.0)) throw DomainError("DesignSpec: hbar must be > 0");
    if (!(lambda2 > 0.0)) throw DomainError("DesignSpec: lambda2 must be > 0");
    if (!(lambdaN >= lambda2)) throw DomainError("DesignSpec: lambdaN must be >= lambda2");
  }
};

struct InequalityLimits {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

struct GainDesign {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  Matrix T;  // 2×2
  Matrix K;  // 1×2
  bool delta_k_adjusted = false;  // 0.9d was outside the admissible range
};

inline void require_mu_order(double mu1, double mu2) {
  if (!(mu1 > 0.0) || !(mu2 > mu1) || !std::isfinite(mu2))
    throw DomainError("synthesis: need 0 < mu1 < mu2");
}

inline Matrix transform(double mu1, double mu2) {
  require_mu_order(mu1, mu2);
  return Matrix::from_rows({{mu2 - mu1, -(mu2 + mu1)}, {0.0, 2.0}});
}

// T⁻¹ in closed form (det T = 2(μ₂−μ₁) > 0).
inline Matrix transform_inverse(double mu1, double mu2) {
  require_mu_order(mu1, mu2);
  const double w = mu2 - mu1;
  return Matrix::from_rows({{1.0 / w, (mu2 + mu1) / (2.0 * w)}, {0.0, 0.5}});
}

inline InequalityLimits limits(const DesignSpec& spec, double mu1, double mu2) {
  spec.validate();
  require_mu_order(mu1, mu2);
  const double h = spec.hbar;
  const double sum = mu1 + mu2;
  return {
      2.0 * (mu2 - mu1) / (h * spec.lambdaN * (sum + h)),
      4.0 / (spec.lambdaN * (h + std::max(h, 2.0 * mu1))),
      4.0 / (spec.lambda2 * sum),
      4.0 / (spec.lambdaN * (sum + h)),
  };
}

// (μ₁+μ₂)/(hbar + max{hbar, 2μ₁}) > λN/λ2.
inline bool is_feasible(const DesignSpec& spec, double mu1, double mu2) {
  spec.validate();
  require_mu_order(mu1, mu2);
  return (mu1 + mu2) / (spec.hbar + std::max(spec.hbar, 2.0 * mu1)) > spec.lambdaN / spec.lambda2;
}

// a > k₁ > 0, b > k₂ > c, d > k₂ − k₁ > 0 are simultaneously satisfiable.
inline bool abstract_consistency(double a, double b, double c, double d) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !(d > 0.0))
    throw DomainError("abstract_consistency: limits must be positive");
  return b > c && a + d > c;
}

inline bool abstract_consistency(const InequalityLimits& l) { return abstract_consistency(l.a, l.b, l.c, l.d); }

// A concrete (k₁, k₂) inside the three open intervals, or nullopt if none
// exists. Case split on d ≥ c versus c > d.
inline std::optional<std::pair<double, double>> consistency_witness(const InequalityLimits& l) {
  if (!abstract_consistency(l)) return std::nullopt;
  if (l.d >= l.c) {
    const double k1 = 0.5 * std::min(l.a, l.c);
    const double hi = std::min(l.d + k1, l.b);
    return std::pair{k1, 0.5 * (l.c + hi)};
  }
  const double eps = 0.5 * std::min(l.a + l.d - l.c, l.d);
  const double gap = l.d - eps;
  const double lo = l.c - l.d + eps;
  const double hi = std::min(l.a, l.b - l.d + eps);
  const double k1 = 0.5 * (lo + hi);
  return std::pair{k1, k1 + gap};
}

inline bool satisfies(const InequalityLimits& l, double k1, double k2) {
  return l.a > k1 && k1 > 0.0 && l.b > k2 && k2 > l.c && l.d > k2 - k1 && k2 - k1 > 0.0;
}

inline bool check_gain_inequalities(const DesignSpec& spec, const GainDesign& dsn) {
  return satisfies(limits(spec, dsn.mu1, dsn.mu2), dsn.k1, dsn.k2);
}

// Builds T and K = [k₁ k₂]·T⁻¹ for given transform parameters and gains.
inline GainDesign assemble(double mu1, double mu2, double k1, double k2) {
  GainDesign g;
  g.mu1 = mu1;
  g.mu2 = mu2;
  g.k1 = k1;
  g.k2 = k2;
  g.T = transform(mu1, mu2);
  g.K = Matrix::from_rows({{k1, k2}}) * transform_inverse(mu1, mu2);
  return g;
}

// Gain selection for fixed (μ₁, μ₂): Δk = 0.9d, k₁ centred between its
// lower and upper limits, k₂ = k₁ + Δk.
//
// 0.9d only works when c − a < 0.9d; for long sampling intervals b − c falls
// below 0.1d and it does not. The k₁ interval is nonempty exactly for
// Δk ∈ (max{0, c − a}, min{b, d}), so in that case Δk moves to the centre of
// that range and delta_k_adjusted is set. Throws if the μ pair is infeasible
// or the selected gains still miss an inequality.
inline GainDesign design_with_mu(const DesignSpec& spec, double mu1, double mu2) {
  const InequalityLimits l = limits(spec, mu1, mu2);
  if (!is_feasible(spec, mu1, mu2)) throw DomainError("design_with_mu: (mu1, mu2) infeasible for this spec");
  auto pick = [&](double dk) {
    const double k1 = 0.5 * (std::min(l.a, l.b - dk) + std::max(0.0, l.c - dk));
    return std::pair{k1, k1 + dk};
  };
  auto [k1, k2] = pick(0.9 * l.d);
  bool adjusted = false;
  if (!satisfies(l, k1, k2)) {
    std::tie(k1, k2) = pick(0.5 * (std::max(0.0, l.c - l.a) + std::min(l.b, l.d)));
    adjusted = true;
  }
  if (!satisfies(l, k1, k2)) throw DomainError("design_with_mu: selected gains violate the limits");
  auto g = assemble(mu1, mu2, k1, k2);
  g.delta_k_adjusted = adjusted;
  return g;
}

// μ₁ = hbar/2, μ₂ = −μ₁ + 2·hbar·λN/λ2 + 1, then design_with_mu.
inline GainDesign design(const DesignSpec& spec) {
  spec.validate();
  const double mu1 = spec.hbar / 2.0;
  const double mu2 = -mu1 + 2.0 * spec.hbar * spec.lambdaN / spec.lambda2 + 1.0;
  return design_with_mu(spec, mu1, mu2);
}

// Smallest relative slack over the six strict inequalities; positive iff the
// design satisfies them.
inline double relative_slack(const InequalityLimits& l, double k1, double k2) {
  const double gap = k2 - k1;
  return std::min({(l.a - k1) / l.a, k1 / l.a, (l.b - k2) / l.b, (k2 - l.c) / l.b, (l.d - gap) / l.d,
                   gap / l.d});
}

struct MuSearchResult {
  GainDesign design;
  double slack = 0.0;
};

// Exhaustive search over a log-spaced (μ₁, μ₂) grid maximizing relative_slack.
// Not used by design(); exposed for studying the μ trade-off.
inline std::optional<MuSearchResult> mu_grid_search(const DesignSpec& spec, double mu_lo, double mu_hi,
                                                    int points) {
  spec.validate();
  if (!(mu_lo > 0.0) || !(mu_hi > mu_lo) || points < 2) throw DomainError("mu_grid_search: invalid grid");
  std::optional<MuSearchResult> best;
  const double step = std::log(mu_hi / mu_lo) / (points - 1);
  for (int i = 0; i < points; ++i)
    for (int j = i + 1; j < points; ++j) {
      const double mu1 = mu_lo * std::exp(step * i);
      const double mu2 = mu_lo * std::exp(step * j);
      if (!is_feasible(spec, mu1, mu2)) continue;
      GainDesign g;
      try {
        g = design_with_mu(spec, mu1, mu2);
      } catch (const DomainError&) {
        continue;
      }
      const double s = relative_slack(limits(spec, mu1, mu2), g.k1, g.k2);
      if (!best || s > best->slack) best = MuSearchResult{std::move(g), s};
    }
  return best;
}

}  // namespace sdcons::synthesis
