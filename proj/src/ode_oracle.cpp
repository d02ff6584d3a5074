#include "mfgd/ode_oracle.hpp"

#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>

#include "mfgd/csv.hpp"
#include "mfgd/dynamics.hpp"

namespace mfgd {

void ScalarFlow::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(x0 > 0.0) || !std::isfinite(x0)) throw std::invalid_argument("x0 must be > 0");
}

double ScalarFlow::energy(double x) const { return std::pow(x, -alpha); }

double ScalarFlow::gradient(double x) const { return -alpha * std::pow(x, -(alpha + 1.0)); }

FlowPoint closed_form(const ScalarFlow& flow, double t) {
  flow.validate();
  if (flow.x0 != 1.0) throw std::invalid_argument("closed form solution assumes x0 = 1");
  if (!(t >= 0.0)) throw std::invalid_argument("closed form solution needs t >= 0");
  const double a = flow.alpha;
  const double x = std::pow(1.0 + a * (a + 2.0) * t, 1.0 / (a + 2.0));
  return FlowPoint{t, x, flow.energy(x)};
}

std::vector<FlowPoint> integrate_scalar(const ScalarFlow& flow, double h, std::size_t steps) {
  flow.validate();
  if (!(h > 0.0)) throw std::invalid_argument("step size must be > 0");
  std::vector<FlowPoint> out;
  out.reserve(steps + 1);
  double x = flow.x0;
  out.push_back({0.0, x, flow.energy(x)});
  for (std::size_t k = 0; k < steps; ++k) {
    const double g = flow.gradient(x);
    apply_euler_update(std::span<double>(&x, 1), std::span<const double>(&g, 1), h, k);
    if (!(x > 0.0)) throw std::runtime_error("scalar flow left the domain x > 0");
    out.push_back({static_cast<double>(k + 1) * h, x, flow.energy(x)});
  }
  return out;
}

double terminal_error(const ScalarFlow& flow, double h, std::size_t steps) {
  const auto path = integrate_scalar(flow, h, steps);
  return std::abs(path.back().x - closed_form(flow, path.back().t).x);
}

double richardson_ratio(const ScalarFlow& flow, double h, std::size_t steps) {
  return terminal_error(flow, h, steps) / terminal_error(flow, 0.5 * h, 2 * steps);
}

std::vector<OracleRow> oracle_table(const ScalarFlow& flow, double h, std::size_t steps,
                                    std::size_t record_every) {
  if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
  const auto path = integrate_scalar(flow, h, steps);
  std::vector<OracleRow> rows;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k % record_every != 0 && k + 1 != path.size()) continue;
    const FlowPoint exact = closed_form(flow, path[k].t);
    rows.push_back({path[k].t, path[k].x, exact.x, path[k].energy, exact.energy,
                    std::abs(path[k].x - exact.x)});
  }
  return rows;
}

void write_oracle_csv(std::ostream& os, const std::vector<OracleRow>& rows) {
  using csv::format_double;
  os << "t,x_euler,x_exact,energy_euler,energy_exact,abs_error\n";
  for (const auto& r : rows)
    os << format_double(r.t) << ',' << format_double(r.x_euler) << ',' << format_double(r.x_exact)
       << ',' << format_double(r.energy_euler) << ',' << format_double(r.energy_exact) << ','
       << format_double(r.abs_error) << '\n';
}

}  // namespace mfgd
