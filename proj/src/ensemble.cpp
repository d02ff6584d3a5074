#include "mfgd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mfgd/csv.hpp"

namespace mfgd {

Activation Activation::smoothed_relu(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("SmoothedReLU epsilon must be finite and > 0");
  return Activation(Kind::SmoothedReLU, eps);
}

namespace {

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got)
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                ", got " + std::to_string(got));
}

// Pre-activation b + w.x accumulated left to right; the batched kernels in
// risk_grad.cpp use the same order so single-point and batched evaluation agree bitwise.
double preactivation(std::span<const double> w, double b, std::span<const double> x) {
  double z = b;
  for (std::size_t k = 0; k < w.size(); ++k) z += w[k] * x[k];
  return z;
}

}  // namespace

double feature(const Particle& p, std::span<const double> x, const Activation& act) {
  check_dim(p.w.size(), x.size());
  return p.a * act.value(preactivation(p.w, p.b, x));
}

ParticleEnsemble::ParticleEnsemble(std::size_t m, std::size_t d, Activation act,
                                   bool trainable_inner)
    : d_(d), act_(act), trainable_inner_(trainable_inner), a_(m, 0.0), w_(m * d, 0.0), b_(m, 0.0) {
  if (m == 0) throw std::invalid_argument("ensemble needs at least one particle");
  if (d == 0) throw std::invalid_argument("ensemble dimension must be >= 1");
}

ParticleEnsemble::ParticleEnsemble(std::span<const Particle> particles, Activation act,
                                   bool trainable_inner)
    : ParticleEnsemble(particles.size(), particles.empty() ? 1 : particles.front().w.size(), act,
                       trainable_inner) {
  for (std::size_t i = 0; i < particles.size(); ++i) set_particle(i, particles[i]);
}

Particle ParticleEnsemble::particle(std::size_t i) const {
  const auto wi = w(i);
  return Particle{a_[i], std::vector<double>(wi.begin(), wi.end()), b_[i]};
}

void ParticleEnsemble::set_particle(std::size_t i, const Particle& p) {
  check_dim(d_, p.w.size());
  if (!std::isfinite(p.a) || !std::isfinite(p.b) ||
      !std::all_of(p.w.begin(), p.w.end(), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("particle entries must be finite");
  a_[i] = p.a;
  std::copy(p.w.begin(), p.w.end(), w(i).begin());
  b_[i] = p.b;
}

bool ParticleEnsemble::all_finite() const noexcept {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(a_.begin(), a_.end(), finite) && std::all_of(w_.begin(), w_.end(), finite) &&
         std::all_of(b_.begin(), b_.end(), finite);
}

ParticleEnsemble ParticleEnsemble::duplicated(std::size_t k) const {
  if (k == 0) throw std::invalid_argument("duplication factor must be >= 1");
  ParticleEnsemble out(size() * k, d_, act_, trainable_inner_);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t j = i * k + c;
      out.a_[j] = a_[i];
      out.b_[j] = b_[i];
      std::copy_n(w_.begin() + static_cast<std::ptrdiff_t>(i * d_), d_,
                  out.w_.begin() + static_cast<std::ptrdiff_t>(j * d_));
    }
  }
  return out;
}

double eval_network(const ParticleEnsemble& ens, std::span<const double> x) {
  check_dim(ens.dim(), x.size());
  const Activation& act = ens.activation();
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i)
    sum += ens.a(i) * act.value(preactivation(ens.w(i), ens.b(i), x));
  return sum / static_cast<double>(ens.size());
}

double second_moment(const ParticleEnsemble& ens) {
  double total = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    double sq = ens.a(i) * ens.a(i) + ens.b(i) * ens.b(i);
    for (double v : ens.w(i)) sq += v * v;
    total += sq;
  }
  return total / static_cast<double>(ens.size());
}

double path_norm(const ParticleEnsemble& ens) {
  double total = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    double l1 = std::abs(ens.b(i));
    for (double v : ens.w(i)) l1 += std::abs(v);
    total += std::abs(ens.a(i)) * l1;
  }
  return total / static_cast<double>(ens.size());
}

double moment_bound_constant(int d) {
  if (d < 1) throw std::invalid_argument("moment_bound_constant: d must be >= 1");
  return 6.0 + 4.0 * std::sqrt(static_cast<double>(d));
}

void write_ensemble_csv(std::ostream& os, const ParticleEnsemble& ens) {
  os << "a";
  for (std::size_t k = 1; k <= ens.dim(); ++k) os << ",w_" << k;
  os << ",b\n";
  for (std::size_t i = 0; i < ens.size(); ++i) {
    os << csv::format_double(ens.a(i));
    for (double v : ens.w(i)) os << ',' << csv::format_double(v);
    os << ',' << csv::format_double(ens.b(i)) << '\n';
  }
}

ParticleEnsemble read_ensemble_csv(std::istream& is, Activation act, bool trainable_inner) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("ensemble CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv::split(line);
  if (header.size() < 3 || header.front() != "a" || header.back() != "b")
    throw std::runtime_error("ensemble CSV: header must be a,w_1,...,w_d,b");
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k)
    if (header[k + 1] != "w_" + std::to_string(k + 1))
      throw std::runtime_error("ensemble CSV: unexpected column '" + std::string(header[k + 1]) + "'");

  std::vector<Particle> particles;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != d + 2)
      throw std::runtime_error("ensemble CSV: row " + std::to_string(particles.size() + 1) +
                               " has " + std::to_string(fields.size()) + " fields");
    Particle p;
    p.a = csv::parse_double(fields.front());
    p.b = csv::parse_double(fields.back());
    p.w.reserve(d);
    for (std::size_t k = 0; k < d; ++k) p.w.push_back(csv::parse_double(fields[k + 1]));
    particles.push_back(std::move(p));
  }
  if (particles.empty()) throw std::runtime_error("ensemble CSV: no particles");
  return ParticleEnsemble(particles, act, trainable_inner);
}

}  // namespace mfgd
