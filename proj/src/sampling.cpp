#include "mfgd/sampling.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mfgd/csv.hpp"

namespace mfgd {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(RngSpec spec)
    : engine_(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(spec.stream)))) {}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  return u * factor;
}

std::vector<double> sample_uniform_cube(std::size_t n, std::size_t d, double half_width, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_uniform_cube: n must be >= 1");
  if (d == 0) throw std::invalid_argument("sample_uniform_cube: d must be >= 1");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("sample_uniform_cube: half_width must be finite and > 0");
  std::vector<double> pts(n * d);
  for (auto& v : pts) v = rng.uniform(-half_width, half_width);
  return pts;
}

std::vector<double> sample_uniform_cube(std::size_t n, std::size_t d, double half_width,
                                        RngSpec spec) {
  Rng rng(spec);
  return sample_uniform_cube(n, d, half_width, rng);
}

Dataset make_dataset(const TargetFunction& f, std::size_t n, double half_width, RngSpec spec) {
  Dataset data = make_dataset(f, sample_uniform_cube(n, f.dim(), half_width, spec), half_width);
  data.seed = spec.seed;
  return data;
}

Dataset make_dataset(const TargetFunction& f, std::vector<double> points, double half_width) {
  const std::size_t d = f.dim();
  if (points.empty() || points.size() % d != 0)
    throw std::invalid_argument("make_dataset: point buffer is not a nonempty multiple of d");
  Dataset data;
  data.d = d;
  data.half_width = half_width;
  data.points = std::move(points);
  data.labels.resize(data.points.size() / d);
  for (std::size_t j = 0; j < data.labels.size(); ++j) data.labels[j] = f(data.point(j));
  return data;
}

ParticleEnsemble init_ensemble(std::size_t m, std::size_t d, RngSpec spec, Activation act,
                               bool trainable_inner) {
  ParticleEnsemble ens(m, d, act, trainable_inner);
  Rng rng(spec);
  const double dd = static_cast<double>(d);
  const double w_std = std::sqrt(2.0 / (dd + 1.0));
  const double bias = 1.0 / (2.0 * (dd + 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    ens.a(i) = rng.normal();
    for (auto& v : ens.w(i)) v = w_std * rng.normal();
    ens.b(i) = bias;
  }
  return ens;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (std::size_t k = 1; k <= data.d; ++k) os << "x_" << k << ',';
  os << "y\n";
  for (std::size_t j = 0; j < data.size(); ++j) {
    for (double v : data.point(j)) os << csv::format_double(v) << ',';
    os << csv::format_double(data.labels[j]) << '\n';
  }
}

}  // namespace mfgd
