#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mfgd/dynamics.hpp"

namespace mfgd {

/// gamma(t) = -ln(risk) / ln(t), so that risk = t^-gamma. Absent unless
/// t > 1 and risk > 0.
std::optional<double> decay_rate(double t, double risk);

struct Window {
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool contains(double t) const noexcept { return t >= t_lo && t <= t_hi; }
};

enum class RiskColumn { Empirical, Population };

double risk_of(const TrajectoryRecord& rec, RiskColumn column) noexcept;

/// Least-squares slope of -ln(risk) against ln(t) over points with t in the
/// window. Throws std::invalid_argument with fewer than 5 points in the
/// window, a nonpositive risk or t <= 0 inside it.
double fit_power_law(std::span<const double> t, std::span<const double> risk, Window window);
double fit_power_law(std::span<const TrajectoryRecord> records, Window window,
                     RiskColumn column = RiskColumn::Empirical);

struct RateReport {
  std::vector<std::pair<double, double>> gamma_at;
  double fitted_exponent = 0.0;
  Window window;
};

/// Requires window.t_lo > 1.
RateReport rate_report(std::span<const TrajectoryRecord> records, Window window,
                       RiskColumn column = RiskColumn::Empirical);

struct AuditInterval {
  double t1 = 0.0;
  double t2 = 0.0;
  double lhs = 0.0;  // sqrt(N(t2)) - sqrt(N(t1))
  double rhs = 0.0;  // sqrt((t2 - t1) * max(R(t1) - R(t2), 0)) + 10 h
  bool pass = true;
  double margin() const noexcept { return rhs - lhs; }
};

struct MomentAudit {
  std::vector<AuditInterval> intervals;
  std::size_t failures = 0;
  bool passed() const noexcept { return failures == 0; }
  double pass_rate() const noexcept;
};

/// Integrated second-moment growth bound between consecutive checkpoints.
/// `column` selects the risk that is being descended.
MomentAudit moment_audit(std::span<const TrajectoryRecord> records, double h,
                         RiskColumn column = RiskColumn::Empirical);

struct SublinearTrend {
  std::vector<std::pair<double, double>> ratio;  // (t, N(t)/t) for t > 1
  double tail_slope = 0.0;                       // OLS slope over the last quartile
  bool tail_nonincreasing() const noexcept { return tail_slope <= 0.0; }
};

/// Diagnostic only: N(t)/t must tend to zero along the flow, which no finite
/// run can decide. Throws with fewer than two records beyond t = 1.
SublinearTrend sublinear_check(std::span<const TrajectoryRecord> records);

/// Largest relative change max|p - p_ref| / p_ref of the path norm over
/// records with t >= fraction * t_final, with p_ref the value at the start of
/// that range.
double path_norm_relative_change(std::span<const TrajectoryRecord> records, double fraction = 0.5);

/// True if the selected risk never increases between consecutive records.
bool risk_nonincreasing(std::span<const TrajectoryRecord> records,
                        RiskColumn column = RiskColumn::Empirical);

}  // namespace mfgd
