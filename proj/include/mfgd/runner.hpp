#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mfgd/analysis.hpp"
#include "mfgd/dynamics.hpp"

namespace mfgd {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int io_error = 1;
inline constexpr int invalid_config = 2;
inline constexpr int audit_failure = 3;
inline constexpr int divergence = 4;
}  // namespace exit_code

/// Environment variable naming the default root for run directories.
inline constexpr const char* kOutputRootEnv = "MFGD_OUTPUT_ROOT";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Training, Oracle };

/// Everything needed to reproduce one experiment. Defaults match the
/// fig1 desk-scale presets.
struct RunConfig {
  std::string name = "custom";
  Experiment experiment = Experiment::Training;

  std::string target = "norm-difference";
  std::size_t d = 8;
  std::size_t m = 200;
  std::size_t n = 2000;
  std::size_t n_pop = 20000;
  Mode mode = Mode::MeanFieldNN;
  TrainOn train_on = TrainOn::Empirical;
  double half_width = 1.0;
  double h = 0.1;
  std::size_t steps = 500;
  std::size_t record_every = 5;
  std::uint64_t seed = 1;

  // Power-law fit window and the risk it is applied to.
  double fit_t_lo = 10.0;
  double fit_t_hi = 50.0;
  RiskColumn fit_risk = RiskColumn::Population;

  // Oracle experiments only.
  double alpha = 2.0;

  std::string output_dir;  // empty: $MFGD_OUTPUT_ROOT/<name>, or runs/<name>
  unsigned threads = 0;    // execution detail; never affects outputs

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  /// `key = value` lines for every field that determines the outputs, in a fixed order.
  std::string canonical() const;

  /// 12 hex digits derived from canonical().
  std::string run_id() const;

  TrainerConfig trainer() const;
  std::filesystem::path resolved_output_dir() const;
  nlohmann::ordered_json to_json() const;
};

/// Keys accepted in config files and as `--key` flags (hyphens allowed for underscores).
std::span<const std::string_view> config_keys();

/// Sets one field from text. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Reads `key = value` lines (blank lines and `#` comments ignored) on top of `base`.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

const std::vector<RunConfig>& presets();
std::optional<RunConfig> find_preset(std::string_view name);

struct RunOutcome {
  int exit_code = exit_code::ok;
  std::string message;
  std::filesystem::path output_dir;
  nlohmann::ordered_json summary;
};

/// Executes one experiment and writes manifest.json, summary.json and
/// trajectory.csv + ensemble_final.csv (training) or oracle.csv (oracle).
/// Invalid configs return exit code 2 before anything is written.
RunOutcome run(const RunConfig& cfg);

/// Cross-run table keyed by (d, target, mode), one row per run directory.
/// Throws std::runtime_error listing every directory without a usable summary.
std::string compare(std::span<const std::filesystem::path> run_dirs);

}  // namespace mfgd
