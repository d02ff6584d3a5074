#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace mfgd {

/// Scalar gradient flow x' = -F'(x) for F(x) = x^-alpha, started at x0 = 1.
/// Exact solution x(t) = (1 + alpha (alpha + 2) t)^(1 / (alpha + 2)); the
/// energy F(x(t)) decays like t^(-alpha / (alpha + 2)).
struct ScalarFlow {
  double alpha = 1.0;
  double x0 = 1.0;

  void validate() const;  // alpha > 0, x0 > 0
  double energy(double x) const;
  double gradient(double x) const;  // F'(x) = -alpha x^-(alpha+1)
};

struct FlowPoint {
  double t = 0.0;
  double x = 0.0;
  double energy = 0.0;
};

/// Throws std::invalid_argument unless t >= 0 and x0 == 1.
FlowPoint closed_form(const ScalarFlow& flow, double t);

/// steps + 1 points (including t = 0) of forward Euler with step h, using the
/// same update routine as the particle integrator.
std::vector<FlowPoint> integrate_scalar(const ScalarFlow& flow, double h, std::size_t steps);

/// |x_euler(T h) - x(T h)|.
double terminal_error(const ScalarFlow& flow, double h, std::size_t steps);

/// terminal_error(h, T) / terminal_error(h/2, 2T); close to 2 for a first-order method.
double richardson_ratio(const ScalarFlow& flow, double h, std::size_t steps);

struct OracleRow {
  double t = 0.0;
  double x_euler = 0.0;
  double x_exact = 0.0;
  double energy_euler = 0.0;
  double energy_exact = 0.0;
  double abs_error = 0.0;
};

/// Euler vs closed form every `record_every` steps (and at the last step).
std::vector<OracleRow> oracle_table(const ScalarFlow& flow, double h, std::size_t steps,
                                    std::size_t record_every);

/// Header `t,x_euler,x_exact,energy_euler,energy_exact,abs_error`.
void write_oracle_csv(std::ostream& os, const std::vector<OracleRow>& rows);

}  // namespace mfgd
