#include "mfgd/risk_grad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfgd {

namespace {

// Data is processed in fixed blocks; the block layout never depends on the
// worker count, and block partials are combined with pairwise_sum.
constexpr std::size_t kBlock = 128;
// Particles handled together in the backward pass.
constexpr std::size_t kParticleChunk = 16;
// Cache pre-activations when n * m stays below this many entries.
constexpr std::size_t kMaxCachedPreactivations = std::size_t{1} << 24;

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

void check_data(const ParticleEnsemble& ens, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("dataset is empty");
  if (data.d != ens.dim())
    throw std::invalid_argument("dimension mismatch: ensemble d=" + std::to_string(ens.dim()) +
                                ", data d=" + std::to_string(data.d));
}

struct ReluAct {
  static double value(double z) { return z > 0.0 ? z : 0.0; }
  static double derivative(double z) { return z > 0.0 ? 1.0 : 0.0; }
};

struct GenericAct {
  Activation act;
  double value(double z) const { return act.value(z); }
  double derivative(double z) const { return act.derivative(z); }
};

template <typename Fn>
decltype(auto) with_activation(const Activation& act, Fn&& fn) {
  if (act.kind() == Activation::Kind::ReLU) return fn(ReluAct{});
  return fn(GenericAct{act});
}

/// Forward pass results for one dataset.
struct Forward {
  std::vector<double> residual;       // f(x_j) - y_j
  std::vector<double> block_sq;       // sum of residual^2 per block
  std::vector<double> preact;         // n x m, empty when not cached
};

template <typename Act>
Forward forward_pass(const ParticleEnsemble& ens, const Dataset& data, const Act& act,
                     bool keep_preact, bool keep_residual, Parallelism par) {
  const std::size_t m = ens.size();
  const std::size_t d = ens.dim();
  const std::size_t n = data.size();
  const double m_real = static_cast<double>(m);

  // Inner weights transposed to d x m so the pre-activation update vectorizes over particles.
  std::vector<double> wt(d * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < d; ++k) wt[k * m + i] = ens.w(i)[k];
  const auto a = ens.outer();
  const auto b = ens.biases();

  Forward out;
  out.block_sq.assign(block_count(n), 0.0);
  if (keep_residual) out.residual.assign(n, 0.0);
  if (keep_preact) out.preact.assign(n * m, 0.0);

  parallel_for(out.block_sq.size(), par, [&](std::size_t blk) {
    std::vector<double> local(keep_preact ? 0 : m);
    const std::size_t j0 = blk * kBlock;
    const std::size_t j1 = std::min(n, j0 + kBlock);
    double sq = 0.0;
    for (std::size_t j = j0; j < j1; ++j) {
      double* z = keep_preact ? out.preact.data() + j * m : local.data();
      const auto x = data.point(j);
      std::copy(b.begin(), b.end(), z);
      for (std::size_t k = 0; k < d; ++k) {
        const double xk = x[k];
        const double* wk = wt.data() + k * m;
        for (std::size_t i = 0; i < m; ++i) z[i] += wk[i] * xk;
      }
      double f = 0.0;
      for (std::size_t i = 0; i < m; ++i) f += a[i] * act.value(z[i]);
      const double r = f / m_real - data.labels[j];
      if (keep_residual) out.residual[j] = r;
      sq += r * r;
    }
    out.block_sq[blk] = sq;
  });
  return out;
}

template <typename Act>
GradientField backward_pass(const ParticleEnsemble& ens, const Dataset& data, const Act& act,
                            const Forward& fwd, Parallelism par) {
  const std::size_t m = ens.size();
  const std::size_t d = ens.dim();
  const std::size_t n = data.size();
  const std::size_t nb = block_count(n);
  const bool inner = ens.trainable_inner();
  const std::size_t stride = d + 2;  // per particle: ga, gb, gw[0..d)

  GradientField grad(m, d);
  const std::size_t chunks = (m + kParticleChunk - 1) / kParticleChunk;

  parallel_for(chunks, par, [&](std::size_t chunk) {
    const std::size_t i0 = chunk * kParticleChunk;
    const std::size_t i1 = std::min(m, i0 + kParticleChunk);
    const std::size_t width = i1 - i0;
    // partial[(blk * width + p) * stride + c]
    std::vector<double> partial(nb * width * stride, 0.0);
    for (std::size_t blk = 0; blk < nb; ++blk) {
      double* acc = partial.data() + blk * width * stride;
      const std::size_t j0 = blk * kBlock;
      const std::size_t j1 = std::min(n, j0 + kBlock);
      for (std::size_t j = j0; j < j1; ++j) {
        const double r = fwd.residual[j];
        const auto x = data.point(j);
        for (std::size_t p = 0; p < width; ++p) {
          const std::size_t i = i0 + p;
          double z = 0.0;
          if (!fwd.preact.empty()) {
            z = fwd.preact[j * m + i];
          } else {
            const auto w = ens.w(i);
            z = ens.b(i);
            for (std::size_t k = 0; k < d; ++k) z += w[k] * x[k];
          }
          double* g = acc + p * stride;
          g[0] += r * act.value(z);
          if (!inner) continue;
          const double c = r * ens.a(i) * act.derivative(z);
          if (c == 0.0) continue;
          g[1] += c;
          double* gw = g + 2;
          for (std::size_t k = 0; k < d; ++k) gw[k] += c * x[k];
        }
      }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> column(nb);
    for (std::size_t p = 0; p < width; ++p) {
      const std::size_t i = i0 + p;
      const auto reduce = [&](std::size_t c) {
        for (std::size_t blk = 0; blk < nb; ++blk)
          column[blk] = partial[(blk * width + p) * stride + c];
        return pairwise_sum(column) * inv_n;
      };
      grad.ga[i] = reduce(0);
      if (!inner) continue;
      grad.gb[i] = reduce(1);
      auto gw = grad.w(i);
      for (std::size_t k = 0; k < d; ++k) gw[k] = reduce(2 + k);
    }
  });
  return grad;
}

double risk_from_blocks(const Forward& fwd, std::size_t n) {
  return pairwise_sum(fwd.block_sq) / (2.0 * static_cast<double>(n));
}

}  // namespace

double GradientField::particle_squared_norm(std::size_t i) const {
  double s = ga[i] * ga[i] + gb[i] * gb[i];
  for (double v : w(i)) s += v * v;
  return s;
}

double GradientField::mean_squared_norm() const {
  if (size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += particle_squared_norm(i);
  return s / static_cast<double>(size());
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> predict(const ParticleEnsemble& ens, const Dataset& data, Parallelism par) {
  check_data(ens, data);
  std::vector<double> out(data.size());
  parallel_for(block_count(data.size()), par, [&](std::size_t blk) {
    const std::size_t j1 = std::min(data.size(), (blk + 1) * kBlock);
    for (std::size_t j = blk * kBlock; j < j1; ++j) out[j] = eval_network(ens, data.point(j));
  });
  return out;
}

double empirical_risk(const ParticleEnsemble& ens, const Dataset& data, Parallelism par) {
  check_data(ens, data);
  return with_activation(ens.activation(), [&](const auto& act) {
    return risk_from_blocks(forward_pass(ens, data, act, false, false, par), data.size());
  });
}

double population_risk_estimate(const ParticleEnsemble& ens, const Dataset& eval_set,
                                Parallelism par) {
  return empirical_risk(ens, eval_set, par);
}

RiskAndGradient risk_and_gradient(const ParticleEnsemble& ens, const Dataset& data,
                                  Parallelism par) {
  check_data(ens, data);
  const bool cache = data.size() * ens.size() <= kMaxCachedPreactivations;
  return with_activation(ens.activation(), [&](const auto& act) {
    const Forward fwd = forward_pass(ens, data, act, cache, true, par);
    return RiskAndGradient{risk_from_blocks(fwd, data.size()),
                           backward_pass(ens, data, act, fwd, par)};
  });
}

GradientField per_particle_gradient(const ParticleEnsemble& ens, const Dataset& data,
                                    Parallelism par) {
  return risk_and_gradient(ens, data, par).grad;
}

ForceSplit force_split(const ParticleEnsemble& ens, const GradientField& grad) {
  if (grad.size() != ens.size() || grad.d != ens.dim())
    throw std::invalid_argument("force_split: gradient field does not match ensemble");
  const std::size_t m = ens.size();
  ForceSplit out;
  out.per_particle_radial.assign(m, 0.0);
  double radial_sq = 0.0;
  double angular_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto w = ens.w(i);
    const auto gw = grad.w(i);
    double theta_sq = ens.a(i) * ens.a(i) + ens.b(i) * ens.b(i);
    double dot = ens.a(i) * grad.ga[i] + ens.b(i) * grad.gb[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      theta_sq += w[k] * w[k];
      dot += w[k] * gw[k];
    }
    const double theta_norm = std::sqrt(theta_sq);
    if (theta_norm < 1e-12) {
      out.degenerate.push_back(i);
      angular_sq += grad.particle_squared_norm(i);
      continue;
    }
    const double radial = dot / theta_norm;
    out.per_particle_radial[i] = radial;
    radial_sq += radial * radial;
    // Orthogonal remainder G_i - radial * theta_i / |theta_i|.
    const double scale = radial / theta_norm;
    const auto sq = [](double v) { return v * v; };
    double perp = sq(grad.ga[i] - scale * ens.a(i)) + sq(grad.gb[i] - scale * ens.b(i));
    for (std::size_t k = 0; k < w.size(); ++k) perp += sq(gw[k] - scale * w[k]);
    angular_sq += perp;
  }
  out.radial_norm = std::sqrt(radial_sq / static_cast<double>(m));
  out.angular_norm = std::sqrt(angular_sq / static_cast<double>(m));
  return out;
}

}  // namespace mfgd
