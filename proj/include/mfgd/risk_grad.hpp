#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfgd/ensemble.hpp"
#include "mfgd/parallel.hpp"
#include "mfgd/sampling.hpp"

namespace mfgd {

/// Per-particle mean-field velocity G_i = m * grad_{theta_i} R_n, i.e.
///   g_a(i) = (1/n) sum_j r_j sigma(z_ij)
///   g_w(i) = (1/n) sum_j r_j a_i sigma'(z_ij) x_j
///   g_b(i) = (1/n) sum_j r_j a_i sigma'(z_ij)
/// with residuals r_j = f(x_j) - y_j and z_ij = w_i.x_j + b_i.
/// Layout mirrors ParticleEnsemble.
struct GradientField {
  GradientField() = default;
  GradientField(std::size_t m, std::size_t d) : d(d), ga(m, 0.0), gw(m * d, 0.0), gb(m, 0.0) {}

  std::size_t d = 0;
  std::vector<double> ga;
  std::vector<double> gw;
  std::vector<double> gb;

  std::size_t size() const noexcept { return ga.size(); }
  std::span<const double> w(std::size_t i) const { return {gw.data() + i * d, d}; }
  std::span<double> w(std::size_t i) { return {gw.data() + i * d, d}; }

  /// |G_i|^2.
  double particle_squared_norm(std::size_t i) const;
  /// (1/m) sum_i |G_i|^2, which equals -dR/dt along the flow.
  double mean_squared_norm() const;
};

struct ForceSplit {
  double radial_norm = 0.0;
  double angular_norm = 0.0;
  std::vector<double> per_particle_radial;
  /// Particles with |theta| < 1e-12; their radial component is reported as 0.
  std::vector<std::size_t> degenerate;
};

struct RiskAndGradient {
  double risk = 0.0;
  GradientField grad;
};

/// Sum in a fixed balanced-tree order (independent of any threading).
double pairwise_sum(std::span<const double> values);

/// Network outputs at every data point.
std::vector<double> predict(const ParticleEnsemble& ens, const Dataset& data, Parallelism par = {});

/// (1/2n) sum_j (f(x_j) - y_j)^2.
double empirical_risk(const ParticleEnsemble& ens, const Dataset& data, Parallelism par = {});

/// Same functional on a frozen, independently drawn evaluation set.
double population_risk_estimate(const ParticleEnsemble& ens, const Dataset& eval_set,
                                 Parallelism par = {});

GradientField per_particle_gradient(const ParticleEnsemble& ens, const Dataset& data,
                                    Parallelism par = {});

/// Risk and velocity field from a single pass over the data.
RiskAndGradient risk_and_gradient(const ParticleEnsemble& ens, const Dataset& data,
                                  Parallelism par = {});

/// Splits each G_i into its component along theta_i and the orthogonal rest.
/// radial_norm = sqrt((1/m) sum_i rad_i^2); angular_norm likewise for the
/// orthogonal parts, so radial^2 + angular^2 = mean_squared_norm().
ForceSplit force_split(const ParticleEnsemble& ens, const GradientField& grad);

}  // namespace mfgd
