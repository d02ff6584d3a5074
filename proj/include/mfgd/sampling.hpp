#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mfgd/ensemble.hpp"
#include "mfgd/rng.hpp"
#include "mfgd/targets.hpp"

namespace mfgd {

/// Fixed sample (x_j, f*(x_j)) with x_j uniform on [-half_width, half_width]^d.
struct Dataset {
  std::size_t d = 0;
  std::vector<double> points;  // n x d, row-major
  std::vector<double> labels;
  std::uint64_t seed = 0;
  double half_width = 1.0;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> point(std::size_t j) const { return {points.data() + j * d, d}; }
};

/// n points, row-major. Throws std::invalid_argument for n == 0, d == 0 or
/// half_width <= 0.
std::vector<double> sample_uniform_cube(std::size_t n, std::size_t d, double half_width, Rng& rng);
std::vector<double> sample_uniform_cube(std::size_t n, std::size_t d, double half_width,
                                        RngSpec spec);

Dataset make_dataset(const TargetFunction& f, std::size_t n, double half_width, RngSpec spec);

/// Dataset from explicit points, labelled with f.
Dataset make_dataset(const TargetFunction& f, std::vector<double> points, double half_width = 1.0);

/// a ~ N(0, 1), w ~ N(0, 2/(d+1) I), b = 1/(2(d+1)).
ParticleEnsemble init_ensemble(std::size_t m, std::size_t d, RngSpec spec,
                               Activation act = Activation::relu(), bool trainable_inner = true);

/// CSV with header `x_1,...,x_d,y`.
void write_dataset_csv(std::ostream& os, const Dataset& data);

}  // namespace mfgd
