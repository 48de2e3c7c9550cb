#include "asymalloc/cli.hpp"

#include "asymalloc/calibration.hpp"
#include "asymalloc/criterion.hpp"
#include "asymalloc/errors.hpp"
#include "asymalloc/io.hpp"
#include "asymalloc/mc_oracle.hpp"
#include "asymalloc/moments.hpp"
#include "asymalloc/svg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

namespace asymalloc::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr const char* kBuiltinModel = "builtin";

struct CommonOptions {
  std::string model = kBuiltinModel;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  bool strict = false;
};

struct SimOptions {
  double dt = 0.1;
  double horizon = 1.0e4;
  long paths = 10000;
  std::string scheme = "exact";
  bool noAntithetic = false;
  bool zeroStart = false;
};

struct OptOptions {
  int gridPoints = 61;
  int samplePoints = 4096;
  int restarts = 5;
  double tolerance = 1e-10;
  int maxIterations = 20000;
  std::vector<double> lower, upper;
};

// Everything a command needs to emit outputs and its manifest.
class Session {
 public:
  Session(std::string command, const CommonOptions& common, std::vector<std::string> argv)
      : command_(std::move(command)), common_(common), argv_(std::move(argv)) {}

  const CommonOptions& common() const { return common_; }
  Json& config() { return config_; }

  FactorModel loadModel() {
    config_["model"] = common_.model;
    if (common_.model == kBuiltinModel) return sp500_fixture();
    noteInput(common_.model);
    return io::read_model(common_.model);
  }

  void noteInput(const std::string& path) { inputs_[path] = io::sha256_file(path); }

  void emit(const std::string& name, const std::string& text) {
    io::write_text(fs::path(common_.out) / name, text);
    outputs_.push_back(name);
  }
  void emit(const std::string& name, const Json& j) { emit(name, j.dump(2) + "\n"); }

  void writeManifest() {
    Json m;
    m["tool"] = "asymalloc";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["argv"] = argv_;
    m["config"] = config_;
    m["seed"] = common_.seed;
    m["inputs"] = Json::object();
    for (const auto& [path, hash] : inputs_) m["inputs"][path] = {{"sha256", hash}};
    m["outputs"] = outputs_;
    io::write_json(fs::path(common_.out) / "manifest.json", m);
  }

 private:
  std::string command_;
  CommonOptions common_;
  std::vector<std::string> argv_;
  Json config_ = Json::object();
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::string fmt(double x) { return std::isfinite(x) ? io::format_double(x) : "nan"; }

Strategy make_strategy(const FactorModel& model, const std::vector<double>& h, const std::vector<double>& H) {
  const int m = model.m(), n = model.n();
  Strategy s{Vector::Ones(m), Matrix::Zero(m, n)};
  if (!h.empty()) {
    if (static_cast<int>(h.size()) != m) throw DimensionError("--h needs " + std::to_string(m) + " values");
    s.h = Eigen::Map<const Vector>(h.data(), m);
  }
  if (!H.empty()) {
    if (static_cast<int>(H.size()) != m * n) {
      throw DimensionError("--H needs " + std::to_string(m * n) + " values (row-major m x n)");
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) s.H(i, j) = H[static_cast<std::size_t>(i * n + j)];
    }
  }
  return s;
}

Json strategy_json(const Strategy& s) {
  return {{"h", io::vector_to_json(s.h)}, {"H", io::matrix_to_json(s.H)}};
}

mc::SimConfig sim_config(const SimOptions& o, const CommonOptions& c) {
  mc::SimConfig cfg;
  cfg.dt = o.dt;
  cfg.horizon = o.horizon;
  cfg.paths = o.paths;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.antithetic = !o.noAntithetic;
  cfg.stationaryStart = !o.zeroStart;
  cfg.scheme = o.scheme == "euler" ? mc::FactorScheme::euler : mc::FactorScheme::exact;
  return cfg;
}

Json sim_config_json(const mc::SimConfig& c) {
  return {{"dt", c.dt},
          {"horizon", c.horizon},
          {"paths", c.paths},
          {"seed", c.seed},
          {"scheme", c.scheme == mc::FactorScheme::euler ? "euler" : "exact"},
          {"antithetic", c.antithetic},
          {"stationary_start", c.stationaryStart}};
}

OptimizerConfig opt_config(const OptOptions& o, const CommonOptions& c) {
  OptimizerConfig cfg;
  cfg.gridPoints = o.gridPoints;
  cfg.samplePoints = o.samplePoints;
  cfg.localRestarts = o.restarts;
  cfg.simplexTolerance = o.tolerance;
  cfg.maxIterations = o.maxIterations;
  cfg.seed = c.seed;
  if (!o.lower.empty()) cfg.lower = Eigen::Map<const Vector>(o.lower.data(), static_cast<Eigen::Index>(o.lower.size()));
  if (!o.upper.empty()) cfg.upper = Eigen::Map<const Vector>(o.upper.data(), static_cast<Eigen::Index>(o.upper.size()));
  return cfg;
}

Json opt_config_json(const OptimizerConfig& c) {
  return {{"grid_points", c.gridPoints},
          {"sample_points", c.samplePoints},
          {"restarts", c.localRestarts},
          {"tolerance", c.simplexTolerance},
          {"max_iterations", c.maxIterations},
          {"lower", io::vector_to_json(c.lower)},
          {"upper", io::vector_to_json(c.upper)},
          {"seed", c.seed}};
}

Json estimate_json(const mc::Estimate& e) { return {{"value", e.value}, {"stderr", e.stderr}}; }

double zscore(double estimate, double stderr, double reference) {
  return stderr > 0.0 ? (estimate - reference) / stderr : (estimate == reference ? 0.0 : INFINITY);
}

// Simulated moments against the closed form, as z-scores.
Json oracle_comparison(const mc::PathStats& st, const AsymptoticMoments& mo) {
  const double T = st.horizon;
  Json z;
  z["K"] = zscore(st.meanU.value / T, st.meanU.stderr / T, mo.K);
  z["varRate"] = zscore(st.varU.value / T, st.varU.stderr / T, mo.varRate);
  Json p = Json::array();
  for (std::size_t j = 0; j < st.covUX.size(); ++j) {
    p.push_back(zscore(st.covUX[j].value, st.covUX[j].stderr, mo.P(static_cast<Eigen::Index>(j))));
  }
  z["P"] = p;
  Json j;
  j["horizon"] = T;
  j["paths"] = st.paths;
  j["mean_u"] = estimate_json(st.meanU);
  j["var_u"] = estimate_json(st.varU);
  Json cov = Json::array();
  for (const auto& e : st.covUX) cov.push_back(estimate_json(e));
  j["cov_ux"] = cov;
  j["mc_K"] = st.meanU.value / T;
  j["mc_varRate"] = st.varU.value / T;
  j["z_scores"] = z;
  return j;
}

Json moments_json(const AsymptoticMoments& mo) {
  return {{"K", mo.K},
          {"varRate", mo.varRate},
          {"P", io::vector_to_json(mo.P)},
          {"Delta", io::matrix_to_json(mo.Delta)},
          {"Y", io::vector_to_json(mo.Y)},
          {"S", io::matrix_to_json(mo.S)},
          {"R", io::matrix_to_json(mo.R)}};
}

std::string compact(const Json& j) {
  // Numbers in shortest round-trip form.
  if (j.is_number()) return fmt(j.get<double>());
  std::string s = "[";
  for (std::size_t i = 0; i < j.size(); ++i) s += (i ? ", " : "") + compact(j[i]);
  return s + "]";
}

Json optimum_json(const OptimizeResult& r) {
  Json restarts = Json::array();
  for (const auto& ls : r.restarts) {
    restarts.push_back({{"start", io::vector_to_json(ls.start)},
                        {"x", io::vector_to_json(ls.x)},
                        {"W", ls.W},
                        {"iterations", ls.iterations},
                        {"converged", ls.converged}});
  }
  return {{"strategy", strategy_json(r.strategy)},
          {"W", r.W},
          {"gradient_norm", r.gradientNorm},
          {"stationary", r.stationary},
          {"best_scan_value", r.bestScanValue},
          {"restarts", restarts},
          {"warnings", r.warnings}};
}

std::vector<double> linspace(double from, double to, int points) {
  if (points < 2) throw PreconditionError("--points must be at least 2");
  if (!std::isfinite(from) || !std::isfinite(to) || !(from < to)) {
    throw PreconditionError("range must satisfy --from < --to");
  }
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = from + (to - from) * i / (points - 1);
  return v;
}

// ---- commands --------------------------------------------------------------

struct CalibrateOptions {
  std::string csv;
  std::string returnsUnit = "decimal";
  std::string factorsUnit = "percent";
  bool logPersistence = false;
  bool fromTables = false;
  std::string tables;
};

int cmd_calibrate(Session& s, const CalibrateOptions& o, std::ostream& out) {
  calibration::ContinuousOptions copt;
  copt.logPersistence = o.logPersistence;
  calibration::DiscreteEstimates est;
  auto& cfg = s.config();
  cfg["log_persistence"] = o.logPersistence;
  if (o.fromTables || !o.tables.empty()) {
    if (o.tables.empty()) {
      est = calibration::sp500_table_estimates();
      cfg["source"] = "built-in tables";
    } else {
      s.noteInput(o.tables);
      est = calibration::estimates_from_json(io::read_json(o.tables));
      cfg["source"] = o.tables;
    }
  } else {
    if (o.csv.empty()) throw CLI::ValidationError("calibrate: give --csv PATH or --from-tables");
    s.noteInput(o.csv);
    const auto data = read_time_series_csv(o.csv);
    calibration::UnitConventions units{o.returnsUnit == "percent", o.factorsUnit == "percent"};
    est = calibration::estimate_discrete(data, units);
    cfg["source"] = o.csv;
    cfg["returns_unit"] = o.returnsUnit;
    cfg["factors_unit"] = o.factorsUnit;
  }
  const calibration::CalibrationReport report{calibration::to_continuous(est, copt), est, copt};
  s.emit("model.json", io::model_to_json(report.model));
  s.emit("report.json", calibration::report_to_json(report));
  const auto& mdl = report.model;
  out << "calibrated model (m=" << mdl.m() << ", n=" << mdl.n() << ")\n";
  out << "a      " << compact(io::vector_to_json(mdl.a())) << "\n";
  out << "A      " << compact(io::matrix_to_json(mdl.A())) << "\n";
  out << "B      " << compact(io::matrix_to_json(mdl.B())) << "\n";
  out << "Sigma  " << compact(io::matrix_to_json(mdl.Sigma())) << "\n";
  out << "Lambda " << compact(io::matrix_to_json(mdl.Lambda())) << "\n";
  return kOk;
}

struct StrategyOptions {
  std::vector<double> h, H;
};

int cmd_moments(Session& s, const StrategyOptions& so, bool check, const SimOptions& simo, std::ostream& out) {
  const FactorModel model = s.loadModel();
  const Strategy st = make_strategy(model, so.h, so.H);
  const AsymptoticMoments mo = moments(model, st);
  auto& cfg = s.config();
  cfg["strategy"] = strategy_json(st);
  cfg["check"] = check;

  Json j;
  j["v"] = io::kSchemaVersion;
  j["strategy"] = strategy_json(st);
  j["moments"] = moments_json(mo);
  out << "K       " << fmt(mo.K) << "\n";
  out << "varRate " << fmt(mo.varRate) << "\n";
  out << "P       " << compact(io::vector_to_json(mo.P)) << "\n";
  out << "Delta   " << compact(io::matrix_to_json(mo.Delta)) << "\n";
  out << "Y       " << compact(io::vector_to_json(mo.Y)) << "\n";
  out << "S       " << compact(io::matrix_to_json(mo.S)) << "\n";
  if (check) {
    const auto sc = sim_config(simo, s.common());
    cfg["simulation"] = sim_config_json(sc);
    const auto stats = mc::simulate(model, st, sc);
    const Json cmp = oracle_comparison(stats, mo);
    j["check"] = cmp;
    out << "z(K)       " << fmt(cmp["z_scores"]["K"].get<double>()) << "\n";
    out << "z(varRate) " << fmt(cmp["z_scores"]["varRate"].get<double>()) << "\n";
    out << "z(P)       " << compact(cmp["z_scores"]["P"]) << "\n";
  }
  s.emit("moments.json", j);
  return kOk;
}

struct SweepOptions {
  std::string mode = "H";
  std::optional<double> from, to;
  std::optional<int> points;
  std::vector<double> h, hDir;
  double theta = 1.0;
  std::vector<double> gamma, gammaDir;
  bool svg = false;
};

int cmd_sweep(Session& s, const SweepOptions& o, const OptOptions& oo, std::ostream& out, std::ostream& err) {
  const FactorModel model = s.loadModel();
  const int m = model.m(), n = model.n();
  auto& cfg = s.config();
  cfg["mode"] = o.mode;
  std::ostringstream csv;
  int flagged = 0;

  if (o.mode == "H") {
    const auto grid = linspace(o.from.value_or(-3.0), o.to.value_or(3.0), o.points.value_or(121));
    const Strategy base = make_strategy(model, o.h, {});
    Matrix dir = Matrix::Ones(m, n);
    if (!o.hDir.empty()) dir = make_strategy(model, {}, o.hDir).H;
    cfg["h"] = io::vector_to_json(base.h);
    cfg["H_direction"] = io::matrix_to_json(dir);
    cfg["range"] = {grid.front(), grid.back(), grid.size()};

    const MomentEngine engine(model);
    csv << "H,K";
    for (int j = 0; j < n; ++j) csv << (n == 1 ? std::string(",P") : ",P_" + std::to_string(j + 1));
    csv << ",varRate\n";
    std::vector<double> Ks, Ps, Vs;
    for (double t : grid) {
      const Strategy st{base.h, t * dir};
      const double K = engine.growthRate(st);
      const Vector P = engine.covarianceLimit(st);
      const double V = engine.varianceRate(st).varRate;
      csv << fmt(t) << ',' << fmt(K);
      for (int j = 0; j < n; ++j) csv << ',' << fmt(P(j));
      csv << ',' << fmt(V) << '\n';
      Ks.push_back(K);
      Ps.push_back(P(0));
      Vs.push_back(V);
    }
    s.emit("sweep.csv", csv.str());
    if (o.svg) {
      s.emit("sweep_K.svg", svg::line_plot("Growth rate K against H", "H", grid, {{"K", Ks}}));
      s.emit("sweep_P.svg", svg::line_plot("Covariance limit P against H", "H", grid, {{"P_1", Ps}}));
      s.emit("sweep_varRate.svg", svg::line_plot("Variance rate against H", "H", grid, {{"varRate", Vs}}));
    }
    out << "wrote " << grid.size() << " rows to sweep.csv\n";
    return kOk;
  }

  const OptimizerConfig ocfg = opt_config(oo, s.common());
  cfg["optimizer"] = opt_config_json(ocfg);
  SweepResult res;
  std::vector<double> grid;
  if (o.mode == "theta") {
    grid = linspace(o.from.value_or(0.5), o.to.value_or(20.0), o.points.value_or(40));
    Vector gamma = Vector::Zero(n);
    if (!o.gamma.empty()) {
      if (static_cast<int>(o.gamma.size()) != n) throw DimensionError("--gamma needs " + std::to_string(n) + " values");
      gamma = Eigen::Map<const Vector>(o.gamma.data(), n);
    }
    cfg["gamma"] = io::vector_to_json(gamma);
    res = sweep_theta(model, grid, gamma, ocfg);
  } else if (o.mode == "gamma") {
    grid = linspace(o.from.value_or(0.0), o.to.value_or(0.01), o.points.value_or(11));
    Vector dir = Vector::Zero(n);
    dir(0) = 1.0;
    if (!o.gammaDir.empty()) {
      if (static_cast<int>(o.gammaDir.size()) != n) {
        throw DimensionError("--gamma-dir needs " + std::to_string(n) + " values");
      }
      dir = Eigen::Map<const Vector>(o.gammaDir.data(), n);
    }
    cfg["theta"] = o.theta;
    cfg["gamma_direction"] = io::vector_to_json(dir);
    res = sweep_gamma(model, o.theta, grid, dir, ocfg);
  } else {
    throw CLI::ValidationError("--mode must be H, theta or gamma");
  }
  cfg["range"] = {grid.front(), grid.back(), grid.size()};

  const bool scalar = m == 1 && n == 1;
  csv << "parameter";
  for (int i = 0; i < m; ++i) csv << (scalar ? std::string(",h") : ",h_" + std::to_string(i + 1));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      csv << (scalar ? std::string(",H") : ",H_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    }
  }
  csv << ",W,ratio,status\n";
  std::vector<double> hs, Hs;
  for (const auto& pt : res.points) {
    csv << fmt(pt.parameter);
    if (pt.optimum) {
      const auto& st = pt.optimum->strategy;
      for (int i = 0; i < m; ++i) csv << ',' << fmt(st.h(i));
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) csv << ',' << fmt(st.H(i, j));
      }
      csv << ',' << fmt(pt.optimum->W) << ',' << fmt(pt.ratio) << ','
          << (pt.optimum->stationary ? "ok" : "not_stationary") << '\n';
      hs.push_back(st.h(0));
      Hs.push_back(st.H(0, 0));
    } else {
      for (int i = 0; i < m + m * n + 2; ++i) csv << ",nan";
      csv << ",failed\n";
      hs.push_back(NAN);
      Hs.push_back(NAN);
    }
    if (!pt.ok()) {
      ++flagged;
      err << "warning: " << o.mode << "=" << fmt(pt.parameter) << ": "
          << (pt.optimum ? "first-order condition not met" : pt.error) << "\n";
    }
  }
  s.emit("sweep.csv", csv.str());
  if (o.svg) {
    s.emit("sweep_strategy.svg", svg::line_plot("Optimal strategy against " + o.mode, o.mode, grid,
                                                {{"h*", hs}, {"H*", Hs}}));
  }
  out << "wrote " << res.points.size() << " rows to sweep.csv (" << flagged << " flagged)\n";
  return flagged > 0 && s.common().strict ? kNumericError : kOk;
}

int cmd_simulate(Session& s, const StrategyOptions& so, const SimOptions& simo, bool dumpPaths, std::ostream& out) {
  const FactorModel model = s.loadModel();
  const Strategy st = make_strategy(model, so.h, so.H);
  auto sc = sim_config(simo, s.common());
  sc.keepPaths = dumpPaths;
  auto& cfg = s.config();
  cfg["strategy"] = strategy_json(st);
  cfg["simulation"] = sim_config_json(sc);
  const auto stats = mc::simulate(model, st, sc);
  const auto mo = moments(model, st);
  Json j = oracle_comparison(stats, mo);
  j["v"] = io::kSchemaVersion;
  j["strategy"] = strategy_json(st);
  j["closed_form"] = {{"K", mo.K}, {"varRate", mo.varRate}, {"P", io::vector_to_json(mo.P)}};
  s.emit("simulation.json", j);
  if (dumpPaths) s.emit("paths.csv", mc::paths_to_csv(stats));
  out << "E u(T)/T   " << fmt(j["mc_K"].get<double>()) << "  (closed form " << fmt(mo.K)
      << ", z " << fmt(j["z_scores"]["K"].get<double>()) << ")\n";
  out << "Var u(T)/T " << fmt(j["mc_varRate"].get<double>()) << "  (closed form " << fmt(mo.varRate)
      << ", z " << fmt(j["z_scores"]["varRate"].get<double>()) << ")\n";
  for (std::size_t k = 0; k < stats.covUX.size(); ++k) {
    out << "E u X_" << k + 1 << "    " << fmt(stats.covUX[k].value) << "  (closed form "
        << fmt(mo.P(static_cast<Eigen::Index>(k))) << ", z " << fmt(j["z_scores"]["P"][k].get<double>()) << ")\n";
  }
  return kOk;
}

int cmd_optimize(Session& s, double theta, const std::vector<double>& gammaIn, const OptOptions& oo, std::ostream& out) {
  const FactorModel model = s.loadModel();
  Vector gamma = Vector::Zero(model.n());
  if (!gammaIn.empty()) {
    if (static_cast<int>(gammaIn.size()) != model.n()) {
      throw DimensionError("--gamma needs " + std::to_string(model.n()) + " values");
    }
    gamma = Eigen::Map<const Vector>(gammaIn.data(), model.n());
  }
  const OptimizerConfig ocfg = opt_config(oo, s.common());
  auto& cfg = s.config();
  cfg["theta"] = theta;
  cfg["gamma"] = io::vector_to_json(gamma);
  cfg["optimizer"] = opt_config_json(ocfg);
  const auto r = optimize(model, {theta, gamma}, ocfg);
  Json j = optimum_json(r);
  j["v"] = io::kSchemaVersion;
  j["theta"] = theta;
  j["gamma"] = io::vector_to_json(gamma);
  s.emit("optimum.json", j);
  out << "h* " << compact(io::vector_to_json(r.strategy.h)) << "\n";
  out << "H* " << compact(io::matrix_to_json(r.strategy.H)) << "\n";
  out << "W* " << fmt(r.W) << (r.stationary ? "" : "  (first-order condition not met)") << "\n";
  return !r.stationary && s.common().strict ? kNumericError : kOk;
}

// Drops `--out DIR` / `--out=DIR` so the manifest replays into any directory.
std::vector<std::string> without_out(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

int replay(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.size() < 2) {
    err << "usage: asymalloc --replay MANIFEST [--out DIR]\n";
    return kUsage;
  }
  const Json m = io::read_json(args[1]);
  if (!m.contains("argv") || !m["argv"].is_array()) throw DataError("manifest has no argv");
  const Json inputs = m.value("inputs", Json::object());
  for (const auto& [path, info] : inputs.items()) {
    const std::string expected = info.at("sha256").get<std::string>();
    if (io::sha256_file(path) != expected) throw DataError("input '" + path + "' changed since the manifest was written");
  }
  auto argv = m["argv"].get<std::vector<std::string>>();
  std::string dir = ".";
  for (std::size_t i = 2; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") dir = args[i + 1];
  }
  argv.push_back("--out");
  argv.push_back(dir);
  return run(argv, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && args[0] == "--replay") {
    try {
      return replay(args, out, err);
    } catch (const DataError& e) {
      err << "error: " << e.what() << "\n";
      return kDataError;
    }
  }

  CLI::App app{
      "Asymptotic moments of log-wealth under linear factor strategies, criterion optimization,\n"
      "Monte Carlo validation and calibration. Time unit: month; returns decimal; factors in percent.\n"
      "Use --model builtin (the default) for the built-in one-asset, one-factor model.\n"
      "Re-run any command from its manifest with: asymalloc --replay OUT/manifest.json [--out DIR]",
      "asymalloc"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", common.model, "model JSON, or 'builtin' for the built-in model")->capture_default_str();
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", common.threads, "worker threads for simulation")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("--strict", common.strict, "exit 3 when any optimum fails its first-order check");
  };
  SimOptions simo;
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--dt", simo.dt, "time step in months")->capture_default_str();
    sub->add_option("--horizon", simo.horizon, "simulated horizon T in months")->capture_default_str();
    sub->add_option("--paths", simo.paths, "number of paths")->capture_default_str();
    sub->add_option("--scheme", simo.scheme, "factor discretization")->check(CLI::IsMember({"exact", "euler"}))->capture_default_str();
    sub->add_flag("--no-antithetic", simo.noAntithetic, "disable antithetic pairs");
    sub->add_flag("--zero-start", simo.zeroStart, "start factors at 0 instead of the stationary law");
  };
  OptOptions oo;
  auto add_opt = [&](CLI::App* sub) {
    sub->add_option("--grid-points", oo.gridPoints, "scan points per coordinate")->capture_default_str();
    sub->add_option("--sample-points", oo.samplePoints, "Latin hypercube size for larger problems")->capture_default_str();
    sub->add_option("--restarts", oo.restarts, "Nelder-Mead runs from the best scan points")->capture_default_str();
    sub->add_option("--tolerance", oo.tolerance, "simplex tolerance")->capture_default_str();
    sub->add_option("--max-iterations", oo.maxIterations, "Nelder-Mead iteration cap")->capture_default_str();
    sub->add_option("--lower", oo.lower, "scan box lower corner [h; H row-major] (default -3)")->delimiter(',');
    sub->add_option("--upper", oo.upper, "scan box upper corner (default 3)")->delimiter(',');
  };
  StrategyOptions so;
  auto add_strategy = [&](CLI::App* sub) {
    sub->add_option("--h", so.h, "average weights h, comma separated (default all ones)")->delimiter(',');
    sub->add_option("--H", so.H, "factor sensitivities H, row-major comma separated (default zero)")->delimiter(',');
  };

  auto* cal = app.add_subcommand("calibrate", "estimate a model from monthly data; writes model.json and report.json");
  CalibrateOptions co;
  add_common(cal);
  cal->add_option("--csv", co.csv, "CSV with header date,excess_return_1..m,factor_1..n (dates YYYY-MM)");
  cal->add_option("--returns-unit", co.returnsUnit, "units of returns in the CSV")->check(CLI::IsMember({"decimal", "percent"}))->capture_default_str();
  cal->add_option("--factors-unit", co.factorsUnit, "units of factors in the CSV")->check(CLI::IsMember({"decimal", "percent"}))->capture_default_str();
  cal->add_flag("--log-persistence", co.logPersistence, "map persistence with B = log(Phi) instead of Phi - I");
  cal->add_flag("--from-tables", co.fromTables, "use the built-in 1970-2000 regression tables instead of a CSV");
  cal->add_option("--tables", co.tables, "discrete estimates JSON to map instead of a CSV");

  auto* mom = app.add_subcommand("moments", "closed-form K, varRate, P, Delta, Y, S; writes moments.json");
  bool check = false;
  add_common(mom);
  add_strategy(mom);
  add_sim(mom);
  mom->add_flag("--check", check, "also run the Monte Carlo oracle and print z-scores");

  auto* swp = app.add_subcommand(
      "sweep",
      "writes sweep.csv. mode H: columns H,K,P,varRate along H (default [-3,3], 121 points, h=1).\n"
      "mode theta/gamma: columns parameter,h,H,W,ratio,status of the optimal strategy\n"
      "(theta default [0.5,20], 40 points; gamma default [0,0.01], 11 points, theta=1).\n"
      "ratio is H*_11/h*_1. Non-scalar models use indexed columns h_i, H_i_j, P_j.");
  SweepOptions swo;
  add_common(swp);
  add_opt(swp);
  swp->add_option("--mode", swo.mode, "H, theta or gamma")->check(CLI::IsMember({"H", "theta", "gamma"}))->capture_default_str();
  swp->add_option("--from", swo.from, "range start");
  swp->add_option("--to", swo.to, "range end");
  swp->add_option("--points", swo.points, "number of grid points");
  swp->add_option("--h", swo.h, "h for mode H (default all ones)")->delimiter(',');
  swp->add_option("--H-dir", swo.hDir, "direction of H for mode H, row-major (default all ones)")->delimiter(',');
  swp->add_option("--theta", swo.theta, "risk sensitivity for mode gamma")->capture_default_str();
  swp->add_option("--gamma", swo.gamma, "factor sensitivity for mode theta (default zero)")->delimiter(',');
  swp->add_option("--gamma-dir", swo.gammaDir, "direction of Gamma for mode gamma (default e_1)")->delimiter(',');
  swp->add_flag("--svg", swo.svg, "also write SVG line plots");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of E u, Var u, E uX at T; writes simulation.json");
  bool dumpPaths = false;
  add_common(sim);
  add_strategy(sim);
  add_sim(sim);
  sim->add_flag("--dump-paths", dumpPaths, "write paths.csv with columns path,T,u,x_1..x_n");

  auto* opt = app.add_subcommand("optimize", "maximize W = K - theta/4 varRate + Gamma P; writes optimum.json");
  double theta = 1.0;
  std::vector<double> gamma;
  add_common(opt);
  add_opt(opt);
  opt->add_option("--theta", theta, "risk sensitivity (>= 0)")->capture_default_str();
  opt->add_option("--gamma", gamma, "factor sensitivity, comma separated (default zero)")->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Session session(chosen->get_name(), common, without_out(args));
  try {
    int code = kOk;
    if (chosen == cal) code = cmd_calibrate(session, co, out);
    if (chosen == mom) code = cmd_moments(session, so, check, simo, out);
    if (chosen == swp) code = cmd_sweep(session, swo, oo, out, err);
    if (chosen == sim) code = cmd_simulate(session, so, simo, dumpPaths, out);
    if (chosen == opt) code = cmd_optimize(session, theta, gamma, oo, out);
    session.writeManifest();
    return code;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const ValidationError& e) {
    // A model file that breaks the invariants is bad input; a calibrated one is a numeric failure.
    err << "error: " << e.what() << "\n";
    return chosen == cal ? kNumericError : kDataError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace asymalloc::cli
