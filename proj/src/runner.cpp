#include "mfgd/runner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "mfgd/csv.hpp"
#include "mfgd/ode_oracle.hpp"
#include "mfgd/sampling.hpp"
#include "mfgd/targets.hpp"

namespace mfgd {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 20> kKeys = {
    "name",  "experiment", "target",       "d",        "m",        "n",        "n_pop",
    "mode",  "train_on",   "half_width",   "h",        "steps",    "record_every", "seed",
    "fit_t_lo", "fit_t_hi", "fit_risk",    "alpha",    "output_dir", "threads"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename Int>
Int parse_unsigned(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty())
    throw ConfigError("invalid value for '" + std::string(key) + "': '" + std::string(value) +
                      "' (expected a nonnegative integer)");
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    return csv::parse_double(value);
  } catch (const std::invalid_argument&) {
    throw ConfigError("invalid value for '" + std::string(key) + "': '" + std::string(value) +
                      "' (expected a number)");
  }
}

std::string_view to_string(Experiment e) { return e == Experiment::Training ? "training" : "oracle"; }
std::string_view to_string(RiskColumn c) {
  return c == RiskColumn::Empirical ? "empirical" : "population";
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::optional<double> opt_exponent(std::span<const TrajectoryRecord> records, Window w,
                                   RiskColumn col) {
  try {
    return fit_power_law(records, w, col);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

ordered_json json_or_null(std::optional<double> v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

ordered_json manifest_for(const RunConfig& cfg, std::vector<std::string> artifacts) {
  ordered_json m;
  m["run_id"] = cfg.run_id();
  m["tool"] = "mfgd";
  m["config"] = cfg.to_json();
  m["rng"] = {{"algorithm", Rng::algorithm_id},
              {"seed", cfg.seed},
              {"streams",
               {{"dataset", static_cast<std::uint64_t>(Stream::Dataset)},
                {"init", static_cast<std::uint64_t>(Stream::Init)},
                {"population_eval", static_cast<std::uint64_t>(Stream::PopulationEval)},
                {"probe", static_cast<std::uint64_t>(Stream::Probe)}}}};
  m["artifacts"] = std::move(artifacts);
  m["rerun"] = "mfgd run --config <this directory>/config.txt";
  return m;
}

RunOutcome run_oracle(const RunConfig& cfg, const std::filesystem::path& dir) {
  const ScalarFlow flow{cfg.alpha, 1.0};
  const auto rows = oracle_table(flow, cfg.h, cfg.steps, cfg.record_every);
  std::ostringstream table;
  write_oracle_csv(table, rows);
  write_text(dir / "oracle.csv", table.str());

  // Energy trace of the closed form on a log grid over the fit window.
  std::vector<double> t;
  std::vector<double> e;
  constexpr int kGrid = 200;
  for (int i = 0; i < kGrid; ++i) {
    const double u = static_cast<double>(i) / (kGrid - 1);
    const double ti = cfg.fit_t_lo * std::pow(cfg.fit_t_hi / cfg.fit_t_lo, u);
    t.push_back(ti);
    e.push_back(closed_form(flow, ti).energy);
  }

  RunOutcome out;
  out.output_dir = dir;
  auto& s = out.summary;
  s["run_id"] = cfg.run_id();
  s["name"] = cfg.name;
  s["experiment"] = "oracle";
  s["alpha"] = cfg.alpha;
  s["h"] = cfg.h;
  s["t_final"] = rows.back().t;
  s["terminal_error"] = rows.back().abs_error;
  s["richardson_ratio"] = richardson_ratio(flow, cfg.h, cfg.steps);
  s["fit"] = {{"window", {cfg.fit_t_lo, cfg.fit_t_hi}},
              {"exponent", fit_power_law(t, e, Window{cfg.fit_t_lo, cfg.fit_t_hi})},
              {"expected_exponent", cfg.alpha / (cfg.alpha + 2.0)}};
  s["status"] = "ok";
  return out;
}

RunOutcome run_training(const RunConfig& cfg, const std::filesystem::path& dir) {
  const Parallelism par{cfg.threads};
  const auto target = TargetFunction::from_name(cfg.target, cfg.d);
  const Dataset data = make_dataset(target, cfg.n, cfg.half_width, {cfg.seed, Stream::Dataset});
  const Dataset pop =
      make_dataset(target, cfg.n_pop, cfg.half_width, {cfg.seed, Stream::PopulationEval});
  const ParticleEnsemble ens0 = init_ensemble(cfg.m, cfg.d, {cfg.seed, Stream::Init},
                                              Activation::relu(), cfg.mode == Mode::MeanFieldNN);

  RunOutcome out;
  out.output_dir = dir;
  auto& s = out.summary;
  s["run_id"] = cfg.run_id();
  s["name"] = cfg.name;
  s["experiment"] = "training";
  s["d"] = cfg.d;
  s["target"] = cfg.target;
  s["mode"] = to_string(cfg.mode);
  s["train_on"] = to_string(cfg.train_on);
  s["is_barron"] = target.is_barron();
  s["h"] = cfg.h;

  std::ofstream traj(dir / "trajectory.csv", std::ios::binary);
  if (!traj) throw std::runtime_error("cannot write " + (dir / "trajectory.csv").string());
  write_trajectory_header(traj);
  std::vector<TrajectoryRecord> records;
  std::optional<ParticleEnsemble> final_ens;
  try {
    auto result = train(ens0, data, pop, cfg.trainer(), par, [&](const TrajectoryRecord& rec) {
      write_trajectory_row(traj, rec);
      traj.flush();
      records.push_back(rec);
    });
    final_ens = std::move(result.final_ensemble);
  } catch (const DivergenceError& e) {
    s["status"] = "diverged";
    s["error"] = e.what();
    s["diverged_at_step"] = e.step();
    s["records_written"] = records.size();
    out.exit_code = exit_code::divergence;
    out.message = std::string("run diverged: ") + e.what();
    return out;
  }
  traj.close();

  {
    std::ofstream snap(dir / "ensemble_final.csv", std::ios::binary);
    write_ensemble_csv(snap, *final_ens);
    if (!snap) throw std::runtime_error("cannot write ensemble snapshot");
  }

  const auto& last = records.back();
  s["final"] = {{"t", last.t},
                {"risk_emp", last.risk_emp},
                {"risk_pop", last.risk_pop},
                {"path_norm", last.path_norm},
                {"second_moment", last.second_moment},
                {"gamma", json_or_null(last.gamma)}};

  const Window window{cfg.fit_t_lo, cfg.fit_t_hi};
  const auto exp_emp = opt_exponent(records, window, RiskColumn::Empirical);
  const auto exp_pop = opt_exponent(records, window, RiskColumn::Population);
  s["fit"] = {{"window", {window.t_lo, window.t_hi}},
              {"risk", to_string(cfg.fit_risk)},
              {"exponent", json_or_null(cfg.fit_risk == RiskColumn::Empirical ? exp_emp : exp_pop)},
              {"exponent_emp", json_or_null(exp_emp)},
              {"exponent_pop", json_or_null(exp_pop)}};

  const RiskColumn descended =
      cfg.train_on == TrainOn::Empirical ? RiskColumn::Empirical : RiskColumn::Population;
  const MomentAudit audit = moment_audit(records, cfg.h, descended);
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& iv : audit.intervals) min_margin = std::min(min_margin, iv.margin());
  const bool monotone = risk_nonincreasing(records, descended);
  s["audits"] = {{"moment",
                  {{"intervals", audit.intervals.size()},
                   {"failures", audit.failures},
                   {"pass_rate", audit.pass_rate()},
                   {"min_margin", audit.intervals.empty() ? ordered_json(nullptr)
                                                          : ordered_json(min_margin)}}},
                 {"monotone_risk", monotone}};

  s["path_norm_final_half_change"] = path_norm_relative_change(records, 0.5);
  try {
    s["sublinear_tail_slope"] = sublinear_check(records).tail_slope;
  } catch (const std::invalid_argument&) {
    s["sublinear_tail_slope"] = nullptr;
  }

  constexpr std::size_t kStatsSamples = 20000;
  const TargetStats stats = target_stats(target, kStatsSamples, cfg.seed, cfg.half_width);
  s["target_stats"] = {{"n", kStatsSamples},
                       {"mean", stats.mean},
                       {"variance", stats.variance},
                       {"lipschitz_probe", stats.lipschitz_probe},
                       {"lipschitz_bound", std::sqrt(6.0 * static_cast<double>(cfg.d))}};

  if (!audit.passed() || !monotone) {
    s["status"] = "audit_failure";
    out.exit_code = exit_code::audit_failure;
    out.message = "invariant audit failed: " + std::to_string(audit.failures) +
                  " moment interval(s) violated" + (monotone ? "" : ", risk increased");
  } else {
    s["status"] = "ok";
  }
  return out;
}

}  // namespace

std::span<const std::string_view> config_keys() { return kKeys; }

void RunConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (name.empty() || name.find_first_of("/\\") != std::string::npos)
    fail("name must be a nonempty plain identifier");
  if (!(h > 0.0) || !std::isfinite(h)) fail("h must be finite and > 0");
  if (steps < 1) fail("steps must be >= 1");
  if (record_every < 1) fail("record_every must be >= 1");
  if (experiment == Experiment::Oracle) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and > 0");
    if (!(fit_t_lo > 0.0) || !(fit_t_hi > fit_t_lo)) fail("fit window must satisfy 0 < t_lo < t_hi");
    return;
  }
  if (!parse_target_kind(target)) fail("unknown target '" + target + "'");
  if (d < 1 || m < 1 || n < 1 || n_pop < 1) fail("d, m, n and n_pop must all be >= 1");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) fail("half_width must be finite and > 0");
  if (!(fit_t_lo > 1.0) || !(fit_t_hi > fit_t_lo)) fail("fit window must satisfy 1 < t_lo < t_hi");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "name = " << name << '\n' << "experiment = " << to_string(experiment) << '\n';
  if (experiment == Experiment::Oracle) {
    os << "alpha = " << shortest(alpha) << '\n';
  } else {
    os << "target = " << target << '\n'
       << "d = " << d << '\n'
       << "m = " << m << '\n'
       << "n = " << n << '\n'
       << "n_pop = " << n_pop << '\n'
       << "mode = " << to_string(mode) << '\n'
       << "train_on = " << to_string(train_on) << '\n'
       << "half_width = " << shortest(half_width) << '\n'
       << "seed = " << seed << '\n';
  }
  os << "h = " << shortest(h) << '\n'
     << "steps = " << steps << '\n'
     << "record_every = " << record_every << '\n'
     << "fit_t_lo = " << shortest(fit_t_lo) << '\n'
     << "fit_t_hi = " << shortest(fit_t_hi) << '\n';
  if (experiment == Experiment::Training) os << "fit_risk = " << to_string(fit_risk) << '\n';
  return os.str();
}

std::string RunConfig::run_id() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return std::string(buf, 12);
}

TrainerConfig RunConfig::trainer() const {
  return TrainerConfig{h, steps, record_every, train_on, mode};
}

std::filesystem::path RunConfig::resolved_output_dir() const {
  if (!output_dir.empty()) return output_dir;
  const char* root = std::getenv(kOutputRootEnv);
  return std::filesystem::path(root && *root ? root : "runs") / name;
}

nlohmann::ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["name"] = name;
  j["experiment"] = to_string(experiment);
  if (experiment == Experiment::Oracle) {
    j["alpha"] = alpha;
  } else {
    j["target"] = target;
    j["d"] = d;
    j["m"] = m;
    j["n"] = n;
    j["n_pop"] = n_pop;
    j["mode"] = to_string(mode);
    j["train_on"] = to_string(train_on);
    j["half_width"] = half_width;
    j["seed"] = seed;
  }
  j["h"] = h;
  j["steps"] = steps;
  j["record_every"] = record_every;
  j["fit_t_lo"] = fit_t_lo;
  j["fit_t_hi"] = fit_t_hi;
  if (experiment == Experiment::Training) j["fit_risk"] = to_string(fit_risk);
  return j;
}

void apply_setting(RunConfig& cfg, std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string_view value = trim(raw_value);

  if (key == "name") {
    cfg.name = value;
  } else if (key == "experiment") {
    if (value == "training") cfg.experiment = Experiment::Training;
    else if (value == "oracle") cfg.experiment = Experiment::Oracle;
    else throw ConfigError("experiment must be 'training' or 'oracle'");
  } else if (key == "target") {
    if (!parse_target_kind(value)) throw ConfigError("unknown target '" + std::string(value) + "'");
    cfg.target = value;
  } else if (key == "d") {
    cfg.d = parse_unsigned<std::size_t>(key, value);
  } else if (key == "m") {
    cfg.m = parse_unsigned<std::size_t>(key, value);
  } else if (key == "n") {
    cfg.n = parse_unsigned<std::size_t>(key, value);
  } else if (key == "n_pop") {
    cfg.n_pop = parse_unsigned<std::size_t>(key, value);
  } else if (key == "mode") {
    const auto mode = parse_mode(value);
    if (!mode) throw ConfigError("mode must be 'mean_field_nn' or 'random_feature'");
    cfg.mode = *mode;
  } else if (key == "train_on") {
    const auto on = parse_train_on(value);
    if (!on) throw ConfigError("train_on must be 'empirical' or 'population_estimate'");
    cfg.train_on = *on;
  } else if (key == "half_width") {
    cfg.half_width = parse_real(key, value);
  } else if (key == "h") {
    cfg.h = parse_real(key, value);
  } else if (key == "steps") {
    cfg.steps = parse_unsigned<std::size_t>(key, value);
  } else if (key == "record_every") {
    cfg.record_every = parse_unsigned<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "fit_t_lo") {
    cfg.fit_t_lo = parse_real(key, value);
  } else if (key == "fit_t_hi") {
    cfg.fit_t_hi = parse_real(key, value);
  } else if (key == "fit_risk") {
    if (value == "empirical") cfg.fit_risk = RiskColumn::Empirical;
    else if (value == "population") cfg.fit_risk = RiskColumn::Population;
    else throw ConfigError("fit_risk must be 'empirical' or 'population'");
  } else if (key == "alpha") {
    cfg.alpha = parse_real(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "threads") {
    cfg.threads = parse_unsigned<unsigned>(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      apply_setting(base, view.substr(0, eq), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

const std::vector<RunConfig>& presets() {
  static const std::vector<RunConfig> list = [] {
    std::vector<RunConfig> out;
    // Desk-scale gradient-flow runs: m = 200, n = 2000, N_pop = 20000, h = 0.1
    // (descent verified on every preset), t_final = 50, fit over t in [10, 50]
    // on population risk, i.e. after the radial phase.
    const auto fig1 = [](std::string name, std::string target, std::size_t d) {
      RunConfig c;
      c.name = std::move(name);
      c.target = std::move(target);
      c.d = d;
      return c;
    };
    for (std::size_t d : {8, 16, 32})
      out.push_back(fig1("fig1-barron-d" + std::to_string(d), "norm-difference", d));
    for (std::size_t d : {8, 16, 32})
      out.push_back(fig1("fig1-nonbarron-d" + std::to_string(d), "max-difference", d));

    // Longer horizon for the norm traces.
    RunConfig norms = fig1("fig2-norms", "norm-difference", 16);
    norms.steps = 1000;
    norms.fit_t_lo = 20.0;
    norms.fit_t_hi = 100.0;
    out.push_back(norms);
    RunConfig norms_nb = norms;
    norms_nb.name = "fig2-norms-nonbarron";
    norms_nb.target = "max-difference";
    out.push_back(norms_nb);

    // Single-neuron target, network vs random features on the same seed and budget.
    for (std::size_t d : {8, 32}) {
      for (Mode mode : {Mode::MeanFieldNN, Mode::RandomFeature}) {
        RunConfig c = fig1("rf-vs-nn-d" + std::to_string(d) +
                               (mode == Mode::MeanFieldNN ? "-nn" : "-rf"),
                           "single-neuron", d);
        c.mode = mode;
        out.push_back(c);
      }
    }

    // Few samples in high dimension: empirical and population risk separate.
    RunConfig small = fig1("overfit-smalln", "max-difference", 32);
    small.n = 800;
    out.push_back(small);

    for (double alpha : {0.5, 1.0, 2.0}) {
      RunConfig c;
      c.name = alpha == 0.5 ? "oracle-alpha05" : alpha == 1.0 ? "oracle-alpha1" : "oracle-alpha2";
      c.experiment = Experiment::Oracle;
      c.alpha = alpha;
      c.h = 1e-4;
      c.steps = 10000;
      c.record_every = 100;
      c.fit_t_lo = 1e2;
      c.fit_t_hi = 1e4;
      out.push_back(c);
    }
    return out;
  }();
  return list;
}

std::optional<RunConfig> find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  return std::nullopt;
}

RunOutcome run(const RunConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    return RunOutcome{exit_code::invalid_config, std::string("invalid config: ") + e.what(), {}, {}};
  }
  const auto dir = cfg.resolved_output_dir();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return RunOutcome{exit_code::io_error, "cannot create " + dir.string(), dir, {}};

  try {
    const bool oracle = cfg.experiment == Experiment::Oracle;
    write_text(dir / "config.txt", cfg.canonical());
    std::vector<std::string> artifacts{"config.txt", "manifest.json", "summary.json"};
    if (oracle) {
      artifacts.emplace_back("oracle.csv");
    } else {
      artifacts.emplace_back("trajectory.csv");
      artifacts.emplace_back("ensemble_final.csv");
    }
    write_text(dir / "manifest.json", manifest_for(cfg, artifacts).dump(2) + "\n");

    RunOutcome out = oracle ? run_oracle(cfg, dir) : run_training(cfg, dir);
    write_text(dir / "summary.json", out.summary.dump(2) + "\n");
    if (out.message.empty()) out.message = "ok: " + dir.string();
    return out;
  } catch (const std::exception& e) {
    return RunOutcome{exit_code::io_error, e.what(), dir, {}};
  }
}

std::string compare(std::span<const std::filesystem::path> run_dirs) {
  if (run_dirs.size() < 2) throw std::runtime_error("compare needs at least two run directories");
  struct Row {
    std::size_t d;
    std::string target;
    std::string mode;
    std::string name;
    std::string line;
  };
  std::vector<Row> rows;
  std::vector<std::string> problems;
  const auto field = [](const nlohmann::json& v) {
    return v.is_number() ? csv::format_double(v.get<double>()) : std::string();
  };
  for (const auto& dir : run_dirs) {
    std::ifstream in(dir / "summary.json");
    if (!in) {
      problems.push_back(dir.string() + ": missing summary.json");
      continue;
    }
    nlohmann::json s;
    try {
      s = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      problems.push_back(dir.string() + ": unreadable summary.json (" + e.what() + ")");
      continue;
    }
    if (s.value("experiment", "") != "training" || !s.contains("final") || !s.contains("fit")) {
      problems.push_back(dir.string() + ": not a completed training run");
      continue;
    }
    Row r{s.at("d").get<std::size_t>(), s.at("target").get<std::string>(),
          s.at("mode").get<std::string>(), s.at("name").get<std::string>(), {}};
    const auto& fin = s.at("final");
    const auto& fit = s.at("fit");
    r.line = std::to_string(r.d) + ',' + r.target + ',' + r.mode + ',' + r.name + ',' +
             field(fin.at("risk_emp")) + ',' + field(fin.at("risk_pop")) + ',' +
             field(fin.at("path_norm")) + ',' + field(fit.at("exponent")) + ',' +
             field(fit.at("exponent_emp")) + ',' + field(fit.at("exponent_pop"));
    rows.push_back(std::move(r));
  }
  if (!problems.empty()) {
    std::string msg = "compare: unusable run directories:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::runtime_error(msg);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.d, a.target, a.mode, a.name) < std::tie(b.d, b.target, b.mode, b.name);
  });
  std::string out =
      "d,target,mode,name,final_risk_emp,final_risk_pop,final_path_norm,fit_exponent,"
      "fit_exponent_emp,fit_exponent_pop\n";
  for (const auto& r : rows) out += r.line + '\n';
  return out;
}

}  // namespace mfgd
