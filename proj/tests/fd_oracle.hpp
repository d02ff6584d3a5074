#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfgd/risk_grad.hpp"

namespace mfgd::testing {

// m * R_n straight from the definition for a smoothed ReLU, in extended
// precision so that central differences are limited by truncation rather than
// cancellation.
struct RefParticle {
  long double a;
  std::vector<long double> w;
  long double b;
};

inline long double scaled_risk_reference(const std::vector<RefParticle>& ps, const Dataset& data,
                                         long double eps) {
  const long double m = static_cast<long double>(ps.size());
  long double total = 0.0L;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto x = data.point(j);
    long double f = 0.0L;
    for (const auto& p : ps) {
      long double z = p.b;
      for (std::size_t k = 0; k < x.size(); ++k) z += p.w[k] * x[k];
      f += p.a * 0.5L * (z + std::sqrt(z * z + eps * eps));
    }
    f /= m;
    const long double r = f - data.labels[j];
    total += r * r;
  }
  return m * total / (2.0L * static_cast<long double>(data.size()));
}

struct GradientComparison {
  std::vector<double> analytic;
  std::vector<double> numeric;

  // Largest |analytic - numeric| relative to max(|numeric_k|, |numeric|_inf).
  double max_relative_error() const {
    double scale = 0.0;
    for (double v : numeric) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double denom = std::max(std::abs(numeric[k]), scale);
      if (denom > 0.0) worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / denom);
      else if (analytic[k] != 0.0) return INFINITY;
    }
    return worst;
  }
};

/// Analytic velocity field against central differences of m * R_n, flattened
/// as (a, w_1..w_d, b) per particle. `ens` must use smoothed_relu(eps).
inline GradientComparison compare_with_finite_differences(const ParticleEnsemble& ens,
                                                          const Dataset& data, long double eps,
                                                          long double step) {
  const auto g = per_particle_gradient(ens, data);
  std::vector<RefParticle> ps;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto p = ens.particle(i);
    ps.push_back({p.a, {p.w.begin(), p.w.end()}, p.b});
  }
  const auto fd = [&](long double& slot) {
    const long double keep = slot;
    slot = keep + step;
    const long double up = scaled_risk_reference(ps, data, eps);
    slot = keep - step;
    const long double down = scaled_risk_reference(ps, data, eps);
    slot = keep;
    return static_cast<double>((up - down) / (2 * step));
  };
  GradientComparison out;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    out.analytic.push_back(g.ga[i]);
    out.numeric.push_back(fd(ps[i].a));
    for (std::size_t k = 0; k < ens.dim(); ++k) {
      out.analytic.push_back(g.w(i)[k]);
      out.numeric.push_back(fd(ps[i].w[k]));
    }
    out.analytic.push_back(g.gb[i]);
    out.numeric.push_back(fd(ps[i].b));
  }
  return out;
}

}  // namespace mfgd::testing
