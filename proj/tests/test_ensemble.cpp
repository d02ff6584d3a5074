#include <sstream>

#include "doctest.h"
#include "mfgd/ensemble.hpp"
#include "test_support.hpp"

using namespace mfgd;
using mfgd::testing::unit;

TEST_CASE("relu values and subgradient") {
  const auto relu = Activation::relu();
  CHECK(relu.value(-1.0) == 0.0);
  CHECK(relu.value(2.0) == 2.0);
  CHECK(relu.derivative(0.0) == 0.0);
  CHECK(relu.derivative(0.5) == 1.0);
  CHECK(relu.derivative(-0.5) == 0.0);
}

TEST_CASE("smoothed relu") {
  CHECK_THROWS_AS(Activation::smoothed_relu(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Activation::smoothed_relu(-1e-3), std::invalid_argument);

  SUBCASE("within eps/2 of relu") {
    for (double eps : {1e-3, 0.1, 1.0}) {
      const auto s = Activation::smoothed_relu(eps);
      for (double z = -5.0; z <= 5.0; z += 0.01)
        CHECK(std::abs(s.value(z) - Activation::relu().value(z)) <= eps / 2 + 1e-15);
    }
  }
  SUBCASE("derivative matches central differences") {
    const auto s = Activation::smoothed_relu(0.3);
    for (double z : {-2.0, -0.1, 0.0, 0.2, 3.0}) {
      const double h = 1e-6;
      const double fd = (s.value(z + h) - s.value(z - h)) / (2 * h);
      CHECK(s.derivative(z) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("feature evaluation") {
  const auto relu = Activation::relu();
  std::vector<double> x{0.5, 0.0, 0.0};
  CHECK(feature({2.0, unit(3, 0), 0.0}, x, relu) == 1.0);
  x[0] = 1.0;
  CHECK(feature({1.0, unit(3, 0), -2.0}, x, relu) == 0.0);
  CHECK_THROWS_AS(feature({1.0, unit(2, 0), 0.0}, x, relu), std::invalid_argument);
}

TEST_CASE("feature is 2-homogeneous for relu") {
  Rng rng({7, Stream::Probe});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 5;
    Particle p{rng.normal(), {}, rng.normal()};
    for (std::size_t k = 0; k < d; ++k) p.w.push_back(rng.normal());
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1, 1);
    const double lambda = 0.1 + 3.0 * rng.uniform01();
    Particle q{lambda * p.a, p.w, lambda * p.b};
    for (auto& v : q.w) v *= lambda;
    const double base = feature(p, x, Activation::relu());
    CHECK(feature(q, x, Activation::relu()) ==
          doctest::Approx(lambda * lambda * base).epsilon(1e-12).scale(1.0));
  }
  // The example value from the docs: lambda = 3 gives 9x.
  std::vector<double> x{0.5, 0.25};
  const Particle p{1.5, {1.0, -0.5}, 0.25};
  const Particle q{4.5, {3.0, -1.5}, 0.75};
  CHECK(feature(q, x, Activation::relu()) == doctest::Approx(9.0 * feature(p, x, Activation::relu())));
}

TEST_CASE("euler identity theta . grad feature = 2 feature off the kink") {
  Rng rng({11, Stream::Probe});
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + trial % 6;
    Particle p{rng.normal(), {}, rng.normal()};
    for (std::size_t k = 0; k < d; ++k) p.w.push_back(rng.normal());
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1, 1);
    double z = p.b;
    for (std::size_t k = 0; k < d; ++k) z += p.w[k] * x[k];
    if (z == 0.0) continue;
    const double s = z > 0 ? z : 0.0;
    const double ds = z > 0 ? 1.0 : 0.0;
    // theta . (sigma(z), a sigma'(z) x, a sigma'(z))
    double dot = p.a * s + p.b * p.a * ds;
    for (std::size_t k = 0; k < d; ++k) dot += p.w[k] * p.a * ds * x[k];
    CHECK(dot == doctest::Approx(2.0 * feature(p, x, Activation::relu())).scale(1.0));
    ++checked;
  }
  CHECK(checked > 400);
}

TEST_CASE("eval_network uses mean-field averaging") {
  const std::vector<Particle> one{{1.0, unit(2, 0), 0.5}};
  CHECK(eval_network(ParticleEnsemble(one), std::vector<double>{0.5, 0.0}) == 1.0);

  const std::vector<Particle> twins{{1.0, unit(2, 0), 0.0}, {1.0, unit(2, 0), 0.0}};
  CHECK(eval_network(ParticleEnsemble(twins), std::vector<double>{1.0, 0.3}) == 1.0);

  ParticleEnsemble zero_outer(4, 3);
  for (std::size_t i = 0; i < 4; ++i) zero_outer.w(i)[0] = 1.0 + static_cast<double>(i);
  CHECK(eval_network(zero_outer, std::vector<double>{1.0, 1.0, 1.0}) == 0.0);

  CHECK_THROWS_AS(eval_network(zero_outer, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("duplication leaves the network function unchanged") {
  Rng rng({3, Stream::Probe});
  for (int trial = 0; trial < 20; ++trial) {
    const auto ens = mfgd::testing::random_ensemble(7, 3, rng);
    const auto dup = ens.duplicated(1 + trial % 4);
    for (int j = 0; j < 10; ++j) {
      std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      CHECK(eval_network(dup, x) == doctest::Approx(eval_network(ens, x)).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("second moment") {
  const std::vector<Particle> one{{1.0, unit(2, 0), 0.0}};
  CHECK(second_moment(ParticleEnsemble(one)) == 2.0);
  const std::vector<Particle> two{{1.0, unit(2, 0), 0.0}, {2.0, {0.0, 0.0}, 1.0}};
  CHECK(second_moment(ParticleEnsemble(two)) == 3.5);

  Rng rng({5, Stream::Probe});
  auto ens = mfgd::testing::random_ensemble(6, 4, rng);
  const double before = second_moment(ens);
  for (auto& v : ens.outer()) v *= 2;
  for (auto& v : ens.inner()) v *= 2;
  for (auto& v : ens.biases()) v *= 2;
  CHECK(second_moment(ens) == doctest::Approx(4.0 * before));
}

TEST_CASE("path norm") {
  const std::vector<Particle> one{{2.0, unit(3, 0), -1.0}};
  CHECK(path_norm(ParticleEnsemble(one)) == 4.0);
  const std::vector<Particle> dead{{0.0, {1.5, -2.0}, 3.0}};
  CHECK(path_norm(ParticleEnsemble(dead)) == 0.0);
}

TEST_CASE("moment bound constant") {
  CHECK(moment_bound_constant(9) == 18.0);
  CHECK(moment_bound_constant(1) == 10.0);
  CHECK(moment_bound_constant(4) == 14.0);
  CHECK_THROWS_AS(moment_bound_constant(0), std::invalid_argument);
}

TEST_CASE("path norm is bounded by c_d times the second moment") {
  Rng rng({13, Stream::Probe});
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 1 + trial % 40;
    const double spread = std::exp(rng.uniform(-3.0, 3.0));
    const auto ens = mfgd::testing::random_ensemble(1 + trial % 9, d, rng, Activation::relu(), spread);
    CHECK(path_norm(ens) <= moment_bound_constant(static_cast<int>(d)) * second_moment(ens));
  }
}

TEST_CASE("ensemble validation") {
  CHECK_THROWS_AS(ParticleEnsemble(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(ParticleEnsemble(3, 0), std::invalid_argument);
  const std::vector<Particle> ragged{{1.0, {1.0, 2.0}, 0.0}, {1.0, {1.0}, 0.0}};
  CHECK_THROWS_AS(ParticleEnsemble{ragged}, std::invalid_argument);
  const std::vector<Particle> bad{{std::nan(""), {1.0}, 0.0}};
  CHECK_THROWS_AS(ParticleEnsemble{bad}, std::invalid_argument);
}

TEST_CASE("ensemble CSV snapshot round-trips bit-exactly") {
  Rng rng({17, Stream::Probe});
  const auto ens = mfgd::testing::random_ensemble(5, 3, rng, Activation::relu(), 1e3);
  std::stringstream ss;
  write_ensemble_csv(ss, ens);
  const std::string text = ss.str();
  CHECK(text.rfind("a,w_1,w_2,w_3,b\n", 0) == 0);
  const auto back = read_ensemble_csv(ss);
  CHECK(back == ens);

  std::stringstream bad("a,w_1,b\n1,2\n");
  CHECK_THROWS(read_ensemble_csv(bad));
}
