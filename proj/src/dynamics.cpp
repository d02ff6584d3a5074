#include "mfgd/dynamics.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "mfgd/analysis.hpp"
#include "mfgd/csv.hpp"

namespace mfgd {

std::string_view to_string(TrainOn v) {
  return v == TrainOn::Empirical ? "empirical" : "population_estimate";
}

std::string_view to_string(Mode v) {
  return v == Mode::MeanFieldNN ? "mean_field_nn" : "random_feature";
}

std::optional<TrainOn> parse_train_on(std::string_view s) {
  if (s == "empirical") return TrainOn::Empirical;
  if (s == "population_estimate") return TrainOn::PopulationEstimate;
  return std::nullopt;
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "mean_field_nn") return Mode::MeanFieldNN;
  if (s == "random_feature") return Mode::RandomFeature;
  return std::nullopt;
}

void TrainerConfig::validate() const {
  // total_steps == 0 is allowed and records the initial state only.
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    throw std::invalid_argument("step size must be finite and > 0");
  if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
}

namespace {

void check_update(std::span<const double> params, std::span<const double> velocity, double h,
                  std::size_t step, std::string_view what) {
  if (params.size() != velocity.size())
    throw std::invalid_argument("euler update: size mismatch for " + std::string(what));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(params[i] - h * velocity[i]))
      throw DivergenceError(step, "non-finite " + std::string(what) + " entry " +
                                      std::to_string(i) + " after Euler step " +
                                      std::to_string(step) + " (velocity " +
                                      csv::format_double(velocity[i]) + ")");
  }
}

void commit_update(std::span<double> params, std::span<const double> velocity, double h) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= h * velocity[i];
}

}  // namespace

void apply_euler_update(std::span<double> params, std::span<const double> velocity, double h,
                        std::size_t step) {
  check_update(params, velocity, h, step, "parameter");
  commit_update(params, velocity, h);
}

void euler_step(ParticleEnsemble& ens, const GradientField& grad, double h, std::size_t step) {
  if (grad.size() != ens.size() || grad.d != ens.dim())
    throw std::invalid_argument("euler_step: gradient field does not match ensemble");
  const bool inner = ens.trainable_inner();
  check_update(ens.outer(), grad.ga, h, step, "outer weight");
  if (inner) {
    check_update(ens.inner(), grad.gw, h, step, "inner weight");
    check_update(ens.biases(), grad.gb, h, step, "bias");
  }
  commit_update(ens.outer(), grad.ga, h);
  if (inner) {
    commit_update(ens.inner(), grad.gw, h);
    commit_update(ens.biases(), grad.gb, h);
  }
}

ParticleEnsemble euler_step(const ParticleEnsemble& ens, const Dataset& data, double h,
                            Parallelism par) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be > 0");
  ParticleEnsemble next = ens;
  euler_step(next, per_particle_gradient(ens, data, par), h);
  return next;
}

TrainResult train(ParticleEnsemble ens, const Dataset& data, const Dataset& eval_set,
                  const TrainerConfig& config, Parallelism par, const RecordSink& sink) {
  config.validate();
  if (data.d != ens.dim() || eval_set.d != ens.dim())
    throw std::invalid_argument("train: dataset and ensemble dimensions differ");
  ens.set_trainable_inner(config.mode == Mode::MeanFieldNN);

  const bool on_empirical = config.train_on == TrainOn::Empirical;
  const Dataset& objective = on_empirical ? data : eval_set;
  const double h = config.step_size;

  std::vector<TrajectoryRecord> records;
  for (std::size_t k = 0; k <= config.total_steps; ++k) {
    RiskAndGradient rg = risk_and_gradient(ens, objective, par);
    if (!std::isfinite(rg.risk))
      throw DivergenceError(k, "training risk is not finite at step " + std::to_string(k));

    if (k % config.record_every == 0 || k == config.total_steps) {
      TrajectoryRecord rec;
      rec.step = k;
      rec.t = static_cast<double>(k) * h;
      if (on_empirical) {
        rec.risk_emp = rg.risk;
        rec.risk_pop = population_risk_estimate(ens, eval_set, par);
      } else {
        rec.risk_emp = empirical_risk(ens, data, par);
        rec.risk_pop = rg.risk;
      }
      rec.path_norm = path_norm(ens);
      rec.second_moment = second_moment(ens);
      rec.gamma = decay_rate(rec.t, rec.risk_pop);
      const ForceSplit split = force_split(ens, rg.grad);
      rec.radial_norm = split.radial_norm;
      rec.angular_norm = split.angular_norm;
      records.push_back(rec);
      if (sink) sink(rec);
    }

    if (k < config.total_steps) euler_step(ens, rg.grad, h, k);
  }
  return TrainResult{std::move(records), std::move(ens)};
}

void write_trajectory_header(std::ostream& os) {
  os << "t,risk_emp,risk_pop,path_norm,second_moment,gamma,radial_norm,angular_norm\n";
}

void write_trajectory_row(std::ostream& os, const TrajectoryRecord& rec) {
  using csv::format_double;
  os << format_double(rec.t) << ',' << format_double(rec.risk_emp) << ','
     << format_double(rec.risk_pop) << ',' << format_double(rec.path_norm) << ','
     << format_double(rec.second_moment) << ',' << (rec.gamma ? format_double(*rec.gamma) : "")
     << ',' << format_double(rec.radial_norm) << ',' << format_double(rec.angular_norm) << '\n';
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "t,risk_emp,risk_pop,path_norm,second_moment,gamma,radial_norm,angular_norm")
    throw std::runtime_error("trajectory CSV: unexpected header");
  std::vector<TrajectoryRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 8) throw std::runtime_error("trajectory CSV: malformed row: " + line);
    TrajectoryRecord rec;
    rec.t = csv::parse_double(f[0]);
    rec.risk_emp = csv::parse_double(f[1]);
    rec.risk_pop = csv::parse_double(f[2]);
    rec.path_norm = csv::parse_double(f[3]);
    rec.second_moment = csv::parse_double(f[4]);
    if (!f[5].empty()) rec.gamma = csv::parse_double(f[5]);
    rec.radial_norm = csv::parse_double(f[6]);
    rec.angular_norm = csv::parse_double(f[7]);
    out.push_back(rec);
  }
  return out;
}

}  // namespace mfgd
