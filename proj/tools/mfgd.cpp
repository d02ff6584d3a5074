#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfgd/ode_oracle.hpp"
#include "mfgd/runner.hpp"

namespace {

int cmd_run(const std::string& preset, const std::string& config_path,
            const std::map<std::string, std::string>& flags) {
  mfgd::RunConfig cfg;
  try {
    if (!preset.empty()) {
      const auto p = mfgd::find_preset(preset);
      if (!p) throw mfgd::ConfigError("unknown preset '" + preset + "' (see `mfgd presets`)");
      cfg = *p;
    }
    if (!config_path.empty()) cfg = mfgd::load_config(config_path, cfg);
    for (const auto& [key, value] : flags) mfgd::apply_setting(cfg, key, value);
  } catch (const mfgd::ConfigError& e) {
    std::cerr << "mfgd: invalid config: " << e.what() << '\n';
    return mfgd::exit_code::invalid_config;
  }
  const auto outcome = mfgd::run(cfg);
  (outcome.exit_code == 0 ? std::cout : std::cerr) << "mfgd: " << outcome.message << '\n';
  return outcome.exit_code;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_path) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  std::string table;
  try {
    table = mfgd::compare(paths);
  } catch (const std::exception& e) {
    std::cerr << "mfgd: " << e.what() << '\n';
    return mfgd::exit_code::io_error;
  }
  if (out_path.empty()) {
    std::cout << table;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << table;
  if (!out) {
    std::cerr << "mfgd: cannot write " << out_path << '\n';
    return mfgd::exit_code::io_error;
  }
  return 0;
}

int cmd_presets(const std::string& show) {
  if (show.empty()) {
    for (const auto& p : mfgd::presets()) std::cout << p.name << '\n';
    return 0;
  }
  const auto p = mfgd::find_preset(show);
  if (!p) {
    std::cerr << "mfgd: unknown preset '" << show << "'\n";
    return mfgd::exit_code::invalid_config;
  }
  std::cout << p->canonical();
  return 0;
}

int cmd_oracle(double alpha, double h, std::size_t steps, std::size_t record_every) {
  const mfgd::ScalarFlow flow{alpha, 1.0};
  try {
    flow.validate();
    mfgd::write_oracle_csv(std::cout, mfgd::oracle_table(flow, h, steps, record_every));
  } catch (const std::invalid_argument& e) {
    std::cerr << "mfgd: " << e.what() << '\n';
    return mfgd::exit_code::invalid_config;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field two-layer network gradient-flow simulator"};
  app.require_subcommand(1);
  // `-h` is left free because `--h` is the step-size flag.
  app.set_help_flag("--help", "Print this help message and exit");

  auto* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
  run->set_help_flag("--help", "Print this help message and exit");
  std::string preset;
  std::string config_path;
  run->add_option("--preset", preset, "Start from a named preset");
  run->add_option("--config", config_path, "Config file with `key = value` lines")
      ->check(CLI::ExistingFile);
  std::map<std::string, std::string> flags;
  for (std::size_t i = 0; i < mfgd::config_keys().size(); ++i) {
    std::string key(mfgd::config_keys()[i]);
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + key;
    if (dashed != key) names += ",--" + dashed;
    run->add_option_function<std::string>(
        names, [&flags, key](const std::string& v) { flags[key] = v; }, "Override " + key);
  }

  auto* cmp = app.add_subcommand("compare", "Tabulate summaries of several run directories");
  std::vector<std::string> dirs;
  std::string out_path;
  cmp->add_option("dirs", dirs, "Run directories")->required();
  cmp->add_option("--out", out_path, "Write the CSV table here instead of stdout");

  auto* pre = app.add_subcommand("presets", "List presets or show one");
  std::string show;
  pre->add_option("--show", show, "Print the canonical config of a preset");

  auto* ora = app.add_subcommand("oracle", "Euler vs closed form for the scalar flow, as CSV");
  ora->set_help_flag("--help", "Print this help message and exit");
  double alpha = 1.0;
  double h = 1e-3;
  std::size_t steps = 1000;
  std::size_t record_every = 100;
  ora->add_option("--alpha", alpha, "Exponent of the energy x^-alpha");
  ora->add_option("--h", h, "Step size");
  ora->add_option("--steps", steps, "Number of Euler steps");
  ora->add_option("--record-every", record_every, "Output stride");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mfgd::exit_code::invalid_config;
  }

  if (*run) return cmd_run(preset, config_path, flags);
  if (*cmp) return cmd_compare(dirs, out_path);
  if (*pre) return cmd_presets(show);
  return cmd_oracle(alpha, h, steps, record_every);
}
