#include "mfgd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfgd {

namespace {

// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("least squares: abscissae are all equal");
  return sxy / sxx;
}

}  // namespace

std::optional<double> decay_rate(double t, double risk) {
  if (!(t > 1.0) || !(risk > 0.0)) return std::nullopt;
  return -std::log(risk) / std::log(t);
}

double risk_of(const TrajectoryRecord& rec, RiskColumn column) noexcept {
  return column == RiskColumn::Empirical ? rec.risk_emp : rec.risk_pop;
}

double fit_power_law(std::span<const double> t, std::span<const double> risk, Window window) {
  if (t.size() != risk.size()) throw std::invalid_argument("fit_power_law: length mismatch");
  std::vector<double> log_t;
  std::vector<double> neg_log_r;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!window.contains(t[i])) continue;
    if (!(t[i] > 0.0) || !(risk[i] > 0.0))
      throw std::invalid_argument("fit_power_law: t and risk must be positive inside the window");
    log_t.push_back(std::log(t[i]));
    neg_log_r.push_back(-std::log(risk[i]));
  }
  if (log_t.size() < 5)
    throw std::invalid_argument("fit_power_law: need at least 5 points in window, got " +
                                std::to_string(log_t.size()));
  return ols_slope(log_t, neg_log_r);
}

double fit_power_law(std::span<const TrajectoryRecord> records, Window window, RiskColumn column) {
  std::vector<double> t;
  std::vector<double> r;
  t.reserve(records.size());
  r.reserve(records.size());
  for (const auto& rec : records) {
    t.push_back(rec.t);
    r.push_back(risk_of(rec, column));
  }
  return fit_power_law(t, r, window);
}

RateReport rate_report(std::span<const TrajectoryRecord> records, Window window,
                       RiskColumn column) {
  if (!(window.t_lo > 1.0)) throw std::invalid_argument("rate window must start after t = 1");
  RateReport report;
  report.window = window;
  for (const auto& rec : records)
    if (const auto g = decay_rate(rec.t, risk_of(rec, column))) report.gamma_at.emplace_back(rec.t, *g);
  report.fitted_exponent = fit_power_law(records, window, column);
  return report;
}

double MomentAudit::pass_rate() const noexcept {
  if (intervals.empty()) return 1.0;
  return static_cast<double>(intervals.size() - failures) / static_cast<double>(intervals.size());
}

MomentAudit moment_audit(std::span<const TrajectoryRecord> records, double h, RiskColumn column) {
  MomentAudit audit;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& r1 = records[k - 1];
    const auto& r2 = records[k];
    AuditInterval iv;
    iv.t1 = r1.t;
    iv.t2 = r2.t;
    iv.lhs = std::sqrt(r2.second_moment) - std::sqrt(r1.second_moment);
    const double drop = std::max(risk_of(r1, column) - risk_of(r2, column), 0.0);
    iv.rhs = std::sqrt(std::max(r2.t - r1.t, 0.0) * drop) + 10.0 * h;
    iv.pass = iv.lhs <= iv.rhs;
    if (!iv.pass) ++audit.failures;
    audit.intervals.push_back(iv);
  }
  return audit;
}

SublinearTrend sublinear_check(std::span<const TrajectoryRecord> records) {
  SublinearTrend trend;
  for (const auto& rec : records)
    if (rec.t > 1.0) trend.ratio.emplace_back(rec.t, rec.second_moment / rec.t);
  if (trend.ratio.size() < 2)
    throw std::invalid_argument("sublinear_check: need at least two records with t > 1");
  const std::size_t tail = std::max<std::size_t>(2, (trend.ratio.size() + 3) / 4);
  std::vector<double> t;
  std::vector<double> q;
  for (std::size_t i = trend.ratio.size() - tail; i < trend.ratio.size(); ++i) {
    t.push_back(trend.ratio[i].first);
    q.push_back(trend.ratio[i].second);
  }
  trend.tail_slope = ols_slope(t, q);
  return trend;
}

double path_norm_relative_change(std::span<const TrajectoryRecord> records, double fraction) {
  if (records.empty()) throw std::invalid_argument("path_norm_relative_change: no records");
  const double t_start = fraction * records.back().t;
  const auto first = std::find_if(records.begin(), records.end(),
                                  [&](const TrajectoryRecord& r) { return r.t >= t_start; });
  const double ref = first->path_norm;
  if (!(ref > 0.0)) throw std::invalid_argument("path_norm_relative_change: zero reference norm");
  double worst = 0.0;
  for (auto it = first; it != records.end(); ++it)
    worst = std::max(worst, std::abs(it->path_norm - ref) / ref);
  return worst;
}

bool risk_nonincreasing(std::span<const TrajectoryRecord> records, RiskColumn column) {
  for (std::size_t k = 1; k < records.size(); ++k)
    if (risk_of(records[k], column) > risk_of(records[k - 1], column)) return false;
  return true;
}

}  // namespace mfgd
