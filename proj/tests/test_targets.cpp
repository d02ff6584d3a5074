#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "mfgd/ensemble.hpp"
#include "mfgd/rng.hpp"
#include "mfgd/targets.hpp"
#include "test_support.hpp"

using namespace mfgd;

TEST_CASE("target names round-trip") {
  for (auto kind : {TargetKind::NormDifference, TargetKind::MaxDifference, TargetKind::SingleNeuron})
    CHECK(parse_target_kind(to_string(kind)) == kind);
  CHECK_FALSE(parse_target_kind("tanh").has_value());
  CHECK_THROWS_AS(TargetFunction::from_name("tanh", 3), std::invalid_argument);
  CHECK_THROWS_AS(TargetFunction(TargetKind::NormDifference, 0), std::invalid_argument);
}

TEST_CASE("offsets are 2i/d - 1") {
  const TargetFunction f(TargetKind::NormDifference, 4);
  const std::vector<double> want{-0.5, 0.0, 0.5, 1.0};
  REQUIRE(f.offset().size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(f.offset()[i] == doctest::Approx(want[i]));
}

TEST_CASE("worked target values") {
  // d = 2: o = (0, 1).
  const TargetFunction norm(TargetKind::NormDifference, 2);
  const std::vector<double> x{1.0, 1.0};
  // |x - o| = 1, |x + o| = sqrt(5).
  CHECK(norm(x) == doctest::Approx(std::sqrt(1.5) * (1.0 - std::sqrt(5.0))));

  // d = 1: o = (1); at x = 0 the norm difference is sqrt(3/2) (1 - 1) = 0.
  CHECK(TargetFunction(TargetKind::NormDifference, 1)(std::vector<double>{0.0}) == 0.0);
  // At x = 1 with d = 1: |x - o| = 0 and |x + o| = 2.
  CHECK(TargetFunction(TargetKind::NormDifference, 1)(std::vector<double>{1.0}) ==
        doctest::Approx(-std::sqrt(6.0)));

  // d = 2 max difference at the origin: max(-o) - max(-o) = 0.
  const TargetFunction mx(TargetKind::MaxDifference, 2);
  CHECK(mx(std::vector<double>{0.0, 0.0}) == 0.0);
  // x = (1, 0): max(1, -1) - max(-1, -1) = 2, scaled by sqrt(2/pi).
  CHECK(mx(std::vector<double>{1.0, 0.0}) == doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)));
  CHECK(std::sqrt(2.0 / std::numbers::pi) == doctest::Approx(0.7978845608));

  const TargetFunction sn(TargetKind::SingleNeuron, 3);
  CHECK(sn(std::vector<double>{0.4, -1.0, 1.0}) == 0.4);
  CHECK(sn(std::vector<double>{-0.4, 1.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(sn(std::vector<double>{0.4, 1.0}), std::invalid_argument);
}

TEST_CASE("norm and max difference targets are odd") {
  Rng rng({21, Stream::Probe});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 12;
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1, 1);
    std::vector<double> neg(x);
    for (auto& v : neg) v = -v;
    for (auto kind : {TargetKind::NormDifference, TargetKind::MaxDifference}) {
      const TargetFunction f(kind, d);
      CHECK(f(neg) == doctest::Approx(-f(x)).scale(1.0));
    }
  }
}

TEST_CASE("single neuron target is the feature of (1, e1, 0)") {
  Rng rng({22, Stream::Probe});
  const std::size_t d = 5;
  const TargetFunction f(TargetKind::SingleNeuron, d);
  const Particle p{1.0, testing::unit(d, 0), 0.0};
  for (int j = 0; j < 100; ++j) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1, 1);
    CHECK(f(x) == feature(p, x, Activation::relu()));
  }
}

TEST_CASE("target moments at d = 16") {
  for (auto kind : {TargetKind::NormDifference, TargetKind::MaxDifference}) {
    const TargetFunction f(kind, 16);
    const auto s = target_stats(f, 20000, 1);
    CHECK(std::abs(s.mean) <= 0.05);
    CHECK(s.variance >= 0.8);
    CHECK(s.variance <= 1.2);
    CHECK(s.lipschitz_probe > 0.0);
    CHECK(s.lipschitz_probe <= std::sqrt(6.0 * 16));
  }
}

TEST_CASE("single neuron moments match the uniform oracle") {
  // E[max(x,0)] = 1/4 and Var = 1/6 - 1/16 for x ~ U[-1, 1].
  const auto s = target_stats(TargetFunction(TargetKind::SingleNeuron, 4), 20000, 3);
  CHECK(s.mean == doctest::Approx(0.25).epsilon(0.03));
  CHECK(s.variance == doctest::Approx(1.0 / 6 - 1.0 / 16).epsilon(0.05));
  CHECK(s.lipschitz_probe <= 1.0 + 1e-12);
}

TEST_CASE("lipschitz probe stays below sqrt(6d)") {
  // Tight for the norm difference at d = 1, whose slope is exactly sqrt(6).
  CHECK(target_stats(TargetFunction(TargetKind::NormDifference, 1), 2000, 5).lipschitz_probe ==
        doctest::Approx(std::sqrt(6.0)).epsilon(1e-9));
  for (std::size_t d : {2u, 8u, 32u})
    for (auto kind : {TargetKind::NormDifference, TargetKind::MaxDifference, TargetKind::SingleNeuron})
      CHECK(target_stats(TargetFunction(kind, d), 2000, 5).lipschitz_probe <=
            std::sqrt(6.0 * static_cast<double>(d)));
}

TEST_CASE("target stats are deterministic in the seed") {
  const TargetFunction f(TargetKind::MaxDifference, 8);
  const auto a = target_stats(f, 1000, 9);
  const auto b = target_stats(f, 1000, 9);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  CHECK(a.lipschitz_probe == b.lipschitz_probe);
  CHECK_THROWS_AS(target_stats(f, 1, 9), std::invalid_argument);
}
