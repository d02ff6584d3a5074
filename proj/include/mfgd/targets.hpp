#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mfgd {

enum class TargetKind { NormDifference, MaxDifference, SingleNeuron };

std::string_view to_string(TargetKind kind);
std::optional<TargetKind> parse_target_kind(std::string_view name);

/// Closed-form regression targets on the cube.
///
///  norm-difference: sqrt(3/2) (|x - o|_2 - |x + o|_2)                (Barron)
///  max-difference:  sqrt(d/pi) (max_i (x_i - o_i) - max_i (-x_i - o_i)) (not Barron)
///  single-neuron:   max(x_1, 0)                                      (Barron)
///
/// with offset o_i = 2i/d - 1 for i = 1..d.
class TargetFunction {
 public:
  TargetFunction(TargetKind kind, std::size_t d);
  static TargetFunction from_name(std::string_view name, std::size_t d);

  TargetKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }
  std::size_t dim() const noexcept { return offset_.size(); }
  std::span<const double> offset() const noexcept { return offset_; }
  bool is_barron() const noexcept { return kind_ != TargetKind::MaxDifference; }

  double operator()(std::span<const double> x) const;

 private:
  TargetKind kind_;
  std::vector<double> offset_;
};

double eval_target(const TargetFunction& f, std::span<const double> x);

struct TargetStats {
  double mean = 0.0;
  double variance = 0.0;
  double lipschitz_probe = 0.0;
};

/// Monte Carlo moments over n uniform points on [-half_width, half_width]^d and
/// a sampled lower estimate of the Lipschitz constant (max difference quotient
/// over disjoint random pairs and over short random displacements).
TargetStats target_stats(const TargetFunction& f, std::size_t n, std::uint64_t seed,
                         double half_width = 1.0);

}  // namespace mfgd
