#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfgd/ensemble.hpp"
#include "mfgd/parallel.hpp"
#include "mfgd/risk_grad.hpp"
#include "mfgd/sampling.hpp"

namespace mfgd {

enum class TrainOn { Empirical, PopulationEstimate };
enum class Mode { MeanFieldNN, RandomFeature };

std::string_view to_string(TrainOn v);
std::string_view to_string(Mode v);
std::optional<TrainOn> parse_train_on(std::string_view s);
std::optional<Mode> parse_mode(std::string_view s);

struct TrainerConfig {
  double step_size = 0.05;
  std::size_t total_steps = 1000;
  std::size_t record_every = 10;
  TrainOn train_on = TrainOn::Empirical;
  Mode mode = Mode::MeanFieldNN;

  /// Throws std::invalid_argument unless h > 0 and record_every >= 1. T = 0
  /// records the initial state only.
  void validate() const;
};

/// One checkpoint. `gamma` is the decay rate of risk_pop, present for t > 1.
struct TrajectoryRecord {
  std::size_t step = 0;
  double t = 0.0;
  double risk_emp = 0.0;
  double risk_pop = 0.0;
  double path_norm = 0.0;
  double second_moment = 0.0;
  std::optional<double> gamma;
  double radial_norm = 0.0;
  double angular_norm = 0.0;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// params <- params - h * velocity. Throws DivergenceError if any updated
/// entry is not finite; params are left untouched in that case.
void apply_euler_update(std::span<double> params, std::span<const double> velocity, double h,
                        std::size_t step = 0);

/// Forward Euler on all particles from one gradient snapshot. In random
/// feature mode only the outer weights move.
void euler_step(ParticleEnsemble& ens, const GradientField& grad, double h, std::size_t step = 0);
ParticleEnsemble euler_step(const ParticleEnsemble& ens, const Dataset& data, double h,
                            Parallelism par = {});

struct TrainResult {
  std::vector<TrajectoryRecord> records;
  ParticleEnsemble final_ensemble;
};

using RecordSink = std::function<void(const TrajectoryRecord&)>;

/// Runs `total_steps` Euler steps of the particle flow and records every
/// `record_every` steps plus the last step. `sink` sees each record as soon as
/// it is produced, so a caller can flush partial output before a
/// DivergenceError propagates. `config.mode` overrides ens0.trainable_inner().
TrainResult train(ParticleEnsemble ens0, const Dataset& data, const Dataset& eval_set,
                  const TrainerConfig& config, Parallelism par = {}, const RecordSink& sink = {});

void write_trajectory_header(std::ostream& os);
void write_trajectory_row(std::ostream& os, const TrajectoryRecord& rec);
std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& is);

}  // namespace mfgd
