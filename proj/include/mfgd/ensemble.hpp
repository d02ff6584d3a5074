#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace mfgd {

/// Activation function of the hidden layer.
///
/// SmoothedReLU(eps) = (z + sqrt(z^2 + eps^2)) / 2 is a C-infinity stand-in
/// for ReLU used by gradient checks; it is within eps/2 of ReLU everywhere.
class Activation {
 public:
  enum class Kind { ReLU, SmoothedReLU };

  static Activation relu() noexcept { return Activation(Kind::ReLU, 0.0); }
  static Activation smoothed_relu(double eps);

  Kind kind() const noexcept { return kind_; }
  double epsilon() const noexcept { return eps_; }

  double value(double z) const noexcept {
    if (kind_ == Kind::ReLU) return z > 0.0 ? z : 0.0;
    return 0.5 * (z + std::sqrt(z * z + eps_ * eps_));
  }
  // ReLU uses the subgradient 0 at the kink.
  double derivative(double z) const noexcept {
    if (kind_ == Kind::ReLU) return z > 0.0 ? 1.0 : 0.0;
    return 0.5 * (1.0 + z / std::sqrt(z * z + eps_ * eps_));
  }

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  Activation(Kind kind, double eps) : kind_(kind), eps_(eps) {}

  Kind kind_;
  double eps_;
};

/// One neuron theta = (a, w, b): x -> a * sigma(w.x + b).
struct Particle {
  double a = 0.0;
  std::vector<double> w;
  double b = 0.0;
};

double feature(const Particle& p, std::span<const double> x, const Activation& act);

/// Empirical parameter measure (1/m) sum_i delta_{theta_i}.
///
/// Storage is structure-of-arrays: outer weights, an m x d row-major block of
/// inner weights, and biases. When `trainable_inner` is false the ensemble is
/// a random feature model and only the outer weights move during training.
class ParticleEnsemble {
 public:
  ParticleEnsemble(std::size_t m, std::size_t d, Activation act = Activation::relu(),
                   bool trainable_inner = true);
  ParticleEnsemble(std::span<const Particle> particles, Activation act = Activation::relu(),
                   bool trainable_inner = true);

  std::size_t size() const noexcept { return a_.size(); }
  std::size_t dim() const noexcept { return d_; }

  const Activation& activation() const noexcept { return act_; }
  void set_activation(Activation act) noexcept { act_ = act; }
  bool trainable_inner() const noexcept { return trainable_inner_; }
  void set_trainable_inner(bool on) noexcept { trainable_inner_ = on; }

  double a(std::size_t i) const { return a_[i]; }
  double& a(std::size_t i) { return a_[i]; }
  double b(std::size_t i) const { return b_[i]; }
  double& b(std::size_t i) { return b_[i]; }
  std::span<const double> w(std::size_t i) const { return {w_.data() + i * d_, d_}; }
  std::span<double> w(std::size_t i) { return {w_.data() + i * d_, d_}; }

  std::span<const double> outer() const noexcept { return a_; }
  std::span<double> outer() noexcept { return a_; }
  std::span<const double> inner() const noexcept { return w_; }
  std::span<double> inner() noexcept { return w_; }
  std::span<const double> biases() const noexcept { return b_; }
  std::span<double> biases() noexcept { return b_; }

  Particle particle(std::size_t i) const;
  void set_particle(std::size_t i, const Particle& p);

  bool all_finite() const noexcept;

  /// Each particle replaced by k consecutive copies.
  ParticleEnsemble duplicated(std::size_t k) const;

  friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;

 private:
  std::size_t d_;
  Activation act_;
  bool trainable_inner_;
  std::vector<double> a_;
  std::vector<double> w_;
  std::vector<double> b_;
};

/// Mean-field network output (1/m) sum_i a_i sigma(w_i.x + b_i).
double eval_network(const ParticleEnsemble& ens, std::span<const double> x);

/// N(pi) = (1/m) sum_i (a_i^2 + |w_i|^2 + b_i^2).
double second_moment(const ParticleEnsemble& ens);

/// (1/m) sum_i |a_i| (|w_i|_1 + |b_i|). This is the path norm of the given
/// discrete representation, an upper bound for the Barron norm of the
/// represented function.
double path_norm(const ParticleEnsemble& ens);

/// c_d = 6 + 4 sqrt(d), the constant in path_norm <= c_d * second_moment.
double moment_bound_constant(int d);

/// CSV snapshot with header `a,w_1,...,w_d,b`, 17 significant digits.
void write_ensemble_csv(std::ostream& os, const ParticleEnsemble& ens);
ParticleEnsemble read_ensemble_csv(std::istream& is, Activation act = Activation::relu(),
                                   bool trainable_inner = true);

}  // namespace mfgd
