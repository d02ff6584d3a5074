#include "mfgd/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mfgd/sampling.hpp"

namespace mfgd {

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::NormDifference: return "norm-difference";
    case TargetKind::MaxDifference: return "max-difference";
    case TargetKind::SingleNeuron: return "single-neuron";
  }
  return "unknown";
}

std::optional<TargetKind> parse_target_kind(std::string_view name) {
  for (auto k : {TargetKind::NormDifference, TargetKind::MaxDifference, TargetKind::SingleNeuron})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

TargetFunction::TargetFunction(TargetKind kind, std::size_t d) : kind_(kind), offset_(d) {
  if (d == 0) throw std::invalid_argument("target dimension must be >= 1");
  const double dd = static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) offset_[i] = 2.0 * static_cast<double>(i + 1) / dd - 1.0;
}

TargetFunction TargetFunction::from_name(std::string_view name, std::size_t d) {
  const auto kind = parse_target_kind(name);
  if (!kind) throw std::invalid_argument("unknown target '" + std::string(name) + "'");
  return TargetFunction(*kind, d);
}

double TargetFunction::operator()(std::span<const double> x) const {
  if (x.size() != dim())
    throw std::invalid_argument("target: dimension mismatch: expected " + std::to_string(dim()) +
                                ", got " + std::to_string(x.size()));
  switch (kind_) {
    case TargetKind::NormDifference: {
      double minus = 0.0;
      double plus = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i] - offset_[i];
        const double v = x[i] + offset_[i];
        minus += u * u;
        plus += v * v;
      }
      return std::sqrt(1.5) * (std::sqrt(minus) - std::sqrt(plus));
    }
    case TargetKind::MaxDifference: {
      double hi = -std::numeric_limits<double>::infinity();
      double lo = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i) {
        hi = std::max(hi, x[i] - offset_[i]);
        lo = std::max(lo, -x[i] - offset_[i]);
      }
      return std::sqrt(static_cast<double>(dim()) / std::numbers::pi) * (hi - lo);
    }
    case TargetKind::SingleNeuron:
      return x[0] > 0.0 ? x[0] : 0.0;
  }
  return 0.0;
}

double eval_target(const TargetFunction& f, std::span<const double> x) { return f(x); }

namespace {

double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(s);
}

}  // namespace

TargetStats target_stats(const TargetFunction& f, std::size_t n, std::uint64_t seed,
                         double half_width) {
  if (n < 2) throw std::invalid_argument("target_stats needs n >= 2");
  const std::size_t d = f.dim();
  // Same stream as the training set, so the statistics describe (a superset of) the data.
  const auto pts = sample_uniform_cube(n, d, half_width, RngSpec{seed, Stream::Dataset});
  const auto point = [&](std::size_t j) { return std::span<const double>(pts.data() + j * d, d); };

  std::vector<double> values(n);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = f(point(j));
    const double delta = values[j] - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (values[j] - mean);
  }

  double lip = 0.0;
  for (std::size_t j = 0; j + 1 < n; j += 2) {
    const double dist = distance(point(j), point(j + 1));
    if (dist > 0.0) lip = std::max(lip, std::abs(values[j] - values[j + 1]) / dist);
  }

  Rng probe(RngSpec{seed, Stream::Probe});
  const double step = 1e-3 * half_width;
  std::vector<double> y(d);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (auto& v : y) {
      v = probe.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    const auto x = point(j);
    for (std::size_t k = 0; k < d; ++k)
      y[k] = std::clamp(x[k] + step * y[k] / norm, -half_width, half_width);
    const double dist = distance(x, y);
    if (dist > 0.0) lip = std::max(lip, std::abs(values[j] - f(y)) / dist);
  }

  return TargetStats{mean, m2 / static_cast<double>(n - 1), lip};
}

}  // namespace mfgd
