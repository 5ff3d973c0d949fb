#include "addwav/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>

#include "addwav/error.hpp"
#include "addwav/parallel.hpp"
#include "addwav/rng.hpp"

namespace addwav {
namespace fs = std::filesystem;

namespace {

constexpr Eigen::Index kTruthGrid = Eigen::Index{1} << 12;
constexpr Eigen::Index kEvalGrid = Eigen::Index{1} << 10;

template <typename T>
T field(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError("config: missing field '" + path + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field '" + path + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const std::string& path, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, path, key) : fallback;
}

const json& object_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing field '") + key + "'");
  if (!j.at(key).is_object()) throw ConfigError(std::string("config: field '") + key + "' must be an object");
  return j.at(key);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

json check_json(const CheckResult& c) {
  return {{"name", c.name}, {"error", c.error}, {"tolerance", c.tolerance}, {"passed", c.passed()}};
}

/// Left-Riemann integral of (t/L)^r b(t) over the table samples, L the support length.
double table_moment(const BasisTable& table, BasisKind kind, int r) {
  const auto& s = table.samples(kind);
  const double step = table.step();
  const double scale = step / table.family().support_length;
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < s.size(); ++i) acc += std::pow(static_cast<double>(i) * scale, r) * s[i];
  return acc * step;
}

int report_exception(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const BudgetExceeded*>(&e)) return kExitBudget;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e))
    return kExitUsage;
  return kExitVerification;
}

double aggregate(std::vector<double> v, bool median) {
  if (!median) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void sigint_handler(int) { interrupt_flag().store(true); }

}  // namespace

// ---- config ----------------------------------------------------------------

ScenarioSpec ExperimentConfig::scenario() const { return ScenarioSpec::make(components, mu, noise_halfwidth); }

MixingProcessSpec ExperimentConfig::process_template() const {
  MixingProcessSpec p;
  p.d = d;
  p.n = n_grid.empty() ? 1 : n_grid.front();
  p.a = a;
  p.copula_theta = copula_theta;
  p.seed = master_seed;
  return p;
}

double ExperimentConfig::observation_count() const {
  double s = 0.0;
  for (auto n : n_grid) s += static_cast<double>(n);
  return s * reps;
}

json ExperimentConfig::to_json() const {
  json kappa_mode = kappa_fixed ? json{{"fixed", *kappa_fixed}} : json("calibrated");
  json j = {{"schema_version", kSchemaVersion},
            {"scenario", {{"components", components}, {"mu", mu}, {"noise_halfwidth", noise_halfwidth}}},
            {"process", {{"d", d}, {"a", a}, {"copula_theta", copula_theta}}},
            {"n_grid", n_grid},
            {"reps", reps},
            {"kappa_mode", kappa_mode},
            {"calibration_reps", calibration_reps},
            {"family_R", family_R},
            {"depth", depth},
            {"ell", ell},
            {"output_dir", output_dir},
            {"master_seed", master_seed},
            {"aggregate", median ? "median" : "mean"},
            {"budget_cap", budget_cap}};
  if (planted_exponent) j["planted_exponent"] = *planted_exponent;
  return j;
}

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  if (j.contains("schema_version") && field<std::string>(j, "", "schema_version") != kSchemaVersion)
    throw ConfigError("config: field 'schema_version' must be \"" + std::string(kSchemaVersion) + "\"");
  ExperimentConfig c;

  const json& sc = object_field(j, "scenario");
  c.components = field<std::vector<std::string>>(sc, "scenario.", "components");
  if (c.components.empty()) throw ConfigError("config: field 'scenario.components' must not be empty");
  for (const auto& name : c.components) {
    try {
      test_function(name);
    } catch (const InvalidArgument&) {
      throw ConfigError("config: field 'scenario.components' names unknown function '" + name + "'");
    }
  }
  c.mu = field_or<double>(sc, "scenario.", "mu", 0.0);
  c.noise_halfwidth = field_or<double>(sc, "scenario.", "noise_halfwidth", 0.0);
  if (!(c.noise_halfwidth >= 0.0)) throw ConfigError("config: field 'scenario.noise_halfwidth' must be >= 0");

  const json process = j.contains("process") ? object_field(j, "process") : json::object();
  c.d = field_or<int>(process, "process.", "d", static_cast<int>(c.components.size()));
  if (c.d != static_cast<int>(c.components.size()))
    throw ConfigError("config: field 'process.d' disagrees with the number of scenario components");
  c.a = field_or<double>(process, "process.", "a", 0.0);
  if (!(std::abs(c.a) < 1.0)) throw ConfigError("config: field 'process.a' must satisfy |a| < 1");
  c.copula_theta = field_or<double>(process, "process.", "copula_theta", 0.0);
  if (!(std::abs(c.copula_theta) < 1.0))
    throw ConfigError("config: field 'process.copula_theta' must satisfy |theta| < 1");
  if (c.copula_theta != 0.0 && c.d != 2)
    throw ConfigError("config: field 'process.copula_theta' requires d = 2");

  c.n_grid = field<std::vector<Eigen::Index>>(j, "", "n_grid");
  if (c.n_grid.empty()) throw ConfigError("config: field 'n_grid' must not be empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 2) throw ConfigError("config: field 'n_grid' entries must be >= 2");
    if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1])
      throw ConfigError("config: field 'n_grid' must be strictly increasing");
  }
  c.reps = field_or<int>(j, "", "reps", 1);
  if (c.reps < 1) throw ConfigError("config: field 'reps' must be >= 1");

  if (j.contains("kappa_mode")) {
    const json& km = j.at("kappa_mode");
    if (km.is_string() && km.get<std::string>() == "calibrated") {
      c.kappa_fixed.reset();
    } else if (km.is_object() && km.contains("fixed") && km.at("fixed").is_number()) {
      c.kappa_fixed = km.at("fixed").get<double>();
      if (!(*c.kappa_fixed >= 0.0)) throw ConfigError("config: field 'kappa_mode.fixed' must be >= 0");
    } else {
      throw ConfigError("config: field 'kappa_mode' must be \"calibrated\" or {\"fixed\": number}");
    }
  }
  c.calibration_reps = field_or<int>(j, "", "calibration_reps", c.calibration_reps);
  if (c.calibration_reps < 1) throw ConfigError("config: field 'calibration_reps' must be >= 1");
  c.family_R = field_or<int>(j, "", "family_R", c.family_R);
  if (c.family_R < 1 || c.family_R > 10) throw ConfigError("config: field 'family_R' must lie in 1..10");
  c.depth = field_or<int>(j, "", "depth", c.depth);
  if (c.depth < 6 || c.depth > 16) throw ConfigError("config: field 'depth' must lie in 6..16");
  c.ell = field_or<int>(j, "", "ell", c.ell);
  if (c.ell < 1 || c.ell > c.d) throw ConfigError("config: field 'ell' must lie in 1..d");
  c.output_dir = field_or<std::string>(j, "", "output_dir", c.output_dir);
  c.master_seed = field_or<std::uint64_t>(j, "", "master_seed", 0);
  const auto agg = field_or<std::string>(j, "", "aggregate", "mean");
  if (agg != "mean" && agg != "median") throw ConfigError("config: field 'aggregate' must be \"mean\" or \"median\"");
  c.median = agg == "median";
  if (j.contains("planted_exponent")) c.planted_exponent = field<double>(j, "", "planted_exponent");
  c.budget_cap = field_or<double>(j, "", "budget_cap", c.budget_cap);
  if (!(c.budget_cap > 0.0)) throw ConfigError("config: field 'budget_cap' must be > 0");
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path.string() + "': " + e.what());
  }
  return parse_experiment_config(j);
}

// ---- basis-check -------------------------------------------------------------

double gram_deviation(const BasisTable& table, int j0, int j_max) {
  if (j0 < 0 || j_max < j0) throw InvalidArgument("gram_deviation: need 0 <= j0 <= j_max");
  const Eigen::Index dim = Eigen::Index{1} << (j_max + 1);
  // Quadrature nodes land on table samples at every level <= j_max.
  const Eigen::Index nodes = Eigen::Index{1} << (table.depth() + j_max);
  constexpr Eigen::Index chunk = 4096;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd block(dim, chunk);
  for (Eigen::Index start = 0; start < nodes; start += chunk) {
    block.setZero();
    for (Eigen::Index c = 0; c < chunk; ++c) {
      const double x = static_cast<double>(start + c) / static_cast<double>(nodes);
      double* col = block.col(c).data();
      accumulate_periodized(table, BasisKind::scaling, j0, x, 1.0, std::span<double>(col, std::size_t{1} << j0));
      for (int j = j0; j <= j_max; ++j)
        accumulate_periodized(table, BasisKind::wavelet, j, x, 1.0,
                              std::span<double>(col + (Eigen::Index{1} << j), std::size_t{1} << j));
    }
    gram.noalias() += block * block.transpose();
  }
  gram /= static_cast<double>(nodes);
  // Rows [0, 2^j0) hold phi_{j0}; rows [2^j, 2^{j+1}) hold psi_j.
  return (gram - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
}

std::vector<CheckResult> basis_checks(const BasisTable& table, int max_level) {
  const int R = table.family().R;
  const int tau = table.family().tau;
  const bool haar = table.piecewise_constant();
  const double tight = 1e-12;
  std::vector<CheckResult> out;

  // Integer-shift partition of unity on the sample lattice.
  {
    const int per_unit = 1 << table.depth();
    const auto& phi = table.phi_samples();
    double err = 0.0;
    for (int off = 0; off < per_unit; ++off) {
      double s = 0.0;
      for (Eigen::Index i = off; i + 1 < phi.size(); i += per_unit) s += phi[i];
      err = std::max(err, std::abs(s - 1.0));
    }
    out.push_back({"partition_of_unity_lattice", err, haar ? tight : 1e-6});
  }
  // Periodized partition of unity off the lattice.
  {
    double err = 0.0;
    for (int j = tau; j <= max_level; ++j) {
      std::vector<double> acc(std::size_t{1} << j);
      for (int i = 0; i < 1000; ++i) {
        const double x = (i + 0.318309886) / 1000.0;
        std::fill(acc.begin(), acc.end(), 0.0);
        accumulate_periodized(table, BasisKind::scaling, j, x, 1.0, acc);
        double s = 0.0;
        for (double v : acc) s += v;
        err = std::max(err, std::abs(s / std::sqrt(std::ldexp(1.0, j)) - 1.0));
      }
    }
    out.push_back({"partition_of_unity_periodized", err, haar ? tight : 1e-6});
  }
  out.push_back({"scaling_mass", std::abs(table_moment(table, BasisKind::scaling, 0) - 1.0), haar ? tight : 1e-6});
  for (int r = 0; r < R; ++r)
    out.push_back({"wavelet_moment_" + std::to_string(r), std::abs(table_moment(table, BasisKind::wavelet, r)),
                   haar ? tight : 1e-6});
  out.push_back({"gram_j" + std::to_string(tau) + "_to_j" + std::to_string(max_level),
                 gram_deviation(table, tau, max_level), haar ? tight : 1e-4});
  return out;
}

int cmd_basis_check(int R, int depth, std::ostream& out, std::ostream& err) {
  std::vector<CheckResult> checks;
  WaveletFamily family;
  try {
    family = make_family(R);
    const BasisTable table = cascade_table(family, depth);
    checks = basis_checks(table);
  } catch (const std::exception& e) {
    return report_exception(e, err);
  }
  json list = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    list.push_back(check_json(c));
    ok = ok && c.passed();
  }
  const json report = {{"schema_version", kSchemaVersion}, {"command", "basis-check"}, {"family", family_to_json(family)},
                       {"depth", depth},    {"checks", list}, {"all_passed", ok}};
  out << report.dump(2) << '\n';
  return ok ? kExitOk : kExitVerification;
}

// ---- simulate ----------------------------------------------------------------

std::vector<fs::path> run_simulate(const ExperimentConfig& config, const fs::path& dir) {
  const ScenarioSpec scenario = config.scenario();
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (Eigen::Index n : config.n_grid) {
    for (int r = 0; r < config.reps; ++r) {
      MixingProcessSpec p = config.process_template();
      p.n = n;
      p.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r));
      DatasetFile file;
      file.data = simulate(p, scenario);
      file.process = p;
      file.scenario = scenario;
      file.spec_hash = spec_hash(p, scenario);
      const std::string stem = "dataset_n" + std::to_string(n) + "_r" + std::to_string(r);
      std::ostringstream csv;
      write_dataset_csv(csv, file.data);
      write_text(dir / (stem + ".csv"), csv.str());
      write_text(dir / (stem + ".json"), dataset_to_json(file).dump() + "\n");
      written.push_back(dir / (stem + ".csv"));
      written.push_back(dir / (stem + ".json"));
    }
  }
  return written;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = load_experiment_config(opts.config_path);
    if (opts.seed) config.master_seed = *opts.seed;
    const fs::path dir = opts.output_dir ? *opts.output_dir : fs::path(config.output_dir);
    const auto files = run_simulate(config, dir);
    json listing = json::array();
    for (const auto& f : files) listing.push_back(f.filename().string());
    out << json{{"schema_version", kSchemaVersion}, {"command", "simulate"}, {"output_dir", dir.string()},
                {"files", listing}}
               .dump(2)
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_exception(e, err);
  }
}

// ---- estimate ----------------------------------------------------------------

DatasetFile load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("dataset: cannot open '" + path.string() + "'");
  if (path.extension() == ".csv") {
    std::string header;
    std::getline(in, header);
    const int d = static_cast<int>(std::count(header.begin(), header.end(), ',')) - 1;
    if (d < 1) throw ConfigError("dataset csv: header must be i,y,x1..xd");
    in.clear();
    in.seekg(0);
    DatasetFile file;
    file.data = read_dataset_csv(in, DesignDensity::uniform(d));
    return file;
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("dataset: '" + path.string() + "': " + e.what());
  }
  return dataset_from_json(j);
}

EstimateResult run_estimate(const EstimateOptions& opts) {
  const DatasetFile file = load_dataset(opts.dataset_path);
  const int d = file.data.dim();
  if (opts.ell < 1 || opts.ell > d)
    throw InvalidArgument("estimate: ell = " + std::to_string(opts.ell) + " is outside 1..d with d = " +
                          std::to_string(d));
  if (!(opts.kappa >= 0.0)) throw InvalidArgument("estimate: kappa must be >= 0");
  const BasisTable table = cascade_table(make_family(opts.family_R), opts.depth);

  RhoSpec rho = file.scenario ? file.scenario->rho : RhoSpec::identity(file.data.y.cwiseAbs().maxCoeff());
  EstimatorConfig cfg;
  cfg.kappa = opts.kappa;
  cfg.axis = opts.ell - 1;

  EstimateResult res;
  res.estimate = fit_component(file.data, rho, table, cfg);
  const Eigen::VectorXd g_hat = eval_estimate_grid(res.estimate, table, kEvalGrid);

  std::optional<TestFunction> truth;
  if (file.scenario) truth = file.scenario->components[static_cast<std::size_t>(cfg.axis)];
  if (truth) res.ise = ise(res.estimate, table, truth->sample(kTruthGrid));

  std::ostringstream csv;
  csv << (truth ? "x,g_hat,g_true\n" : "x,g_hat\n");
  for (Eigen::Index i = 0; i < kEvalGrid; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(kEvalGrid);
    csv << format_double(x) << ',' << format_double(g_hat[i]);
    if (truth) csv << ',' << format_double((*truth)(x));
    csv << '\n';
  }
  write_text(opts.output_dir / "estimate.json", estimate_to_json(res.estimate).dump(2) + "\n");
  write_text(opts.output_dir / "evaluation.csv", csv.str());

  res.summary = {{"schema_version", kSchemaVersion},
                 {"command", "estimate"},
                 {"n", file.data.n()},
                 {"d", d},
                 {"ell", opts.ell},
                 {"kappa", opts.kappa},
                 {"family_R", opts.family_R},
                 {"j1", res.estimate.j1},
                 {"lambda_n", res.estimate.lambda_n},
                 {"kept_count", res.estimate.kept_count()},
                 {"detail_count", res.estimate.detail_count()},
                 {"truth_embedded", truth.has_value()},
                 {"ise", res.ise ? json(*res.ise) : json(nullptr)}};
  return res;
}

int cmd_estimate(const EstimateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const EstimateResult res = run_estimate(opts);
    out << res.summary.dump(2) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_exception(e, err);
  }
}

// ---- mc-rate -----------------------------------------------------------------

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

json ExperimentReport::to_json(bool include_timing) const {
  json recs = json::array();
  for (const auto& r : records) {
    json o = {{"n", r.n},         {"rep", r.rep},           {"seed", r.seed}, {"ise", r.ise},
              {"kept_count", r.kept_count}, {"j1", r.j1}, {"lambda_n", r.lambda_n}, {"kappa", r.kappa}};
    if (include_timing) o["runtime_ms"] = r.runtime_ms;
    recs.push_back(std::move(o));
  }
  json agg = json::array();
  for (const auto& [n, v] : per_n) agg.push_back({{"n", n}, {config.median ? "median_ise" : "mean_ise", v}});
  json cals = json::array();
  for (const auto& [n, c] : calibrations)
    cals.push_back({{"n", n}, {"kappa", c.kappa}, {"quantile_value", c.quantile_value},
                    {"quantile_level", c.quantile_level}, {"reps", c.reps}, {"first_level", c.first_level},
                    {"last_level", c.last_level}});
  return {{"schema_version", kSchemaVersion},
          {"command", "mc-rate"},
          {"complete", complete},
          {"config", config.to_json()},
          {"records", std::move(recs)},
          {"per_n", std::move(agg)},
          {"kappa_calibration", std::move(cals)},
          {"rate_fit", fit ? rate_fit_to_json(*fit) : json(nullptr)}};
}

std::string ExperimentReport::determinism_digest() const { return fnv1a_hex(to_json(false).dump()); }

ExperimentReport run_mc_rate(const ExperimentConfig& config, bool allow_over_budget, const std::atomic<bool>* stop) {
  ExperimentReport report;
  report.config = config;
  const ScenarioSpec scenario = config.scenario();
  const auto table = std::make_shared<const BasisTable>(cascade_table(make_family(config.family_R), config.depth));
  const int axis = config.ell - 1;
  const int tau = table->family().tau;

  if (!config.planted_exponent && !allow_over_budget && config.observation_count() > config.budget_cap)
    throw BudgetExceeded("mc-rate: reps * sum(n) = " + format_double(config.observation_count()) +
                         " exceeds the budget cap " + format_double(config.budget_cap) +
                         " (pass --allow-over-budget to run anyway)");

  std::vector<double> kappas(config.n_grid.size(), config.kappa_fixed.value_or(0.0));
  if (!config.kappa_fixed && !config.planted_exponent) {
    MonteCarloSetup setup{scenario, config.process_template(), table, axis, config.master_seed,
                          std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
      const KappaCalibration cal = calibrate_kappa(setup, config.n_grid[i], config.calibration_reps);
      kappas[i] = cal.kappa;
      report.calibrations.emplace_back(config.n_grid[i], cal);
    }
  }

  const GridFunction truth = scenario.components[static_cast<std::size_t>(axis)].sample(kTruthGrid);
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  const std::size_t cells = config.n_grid.size() * reps;
  std::vector<std::optional<CellRecord>> slots(cells);

  parallel_for(
      cells,
      [&](std::size_t cell) {
        const std::size_t ni = cell / reps;
        CellRecord rec;
        rec.n = config.n_grid[ni];
        rec.rep = static_cast<int>(cell % reps);
        rec.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(rec.n), static_cast<std::uint64_t>(rec.rep));
        rec.kappa = kappas[ni];
        const auto t0 = std::chrono::steady_clock::now();
        if (config.planted_exponent) {
          const double nn = static_cast<double>(rec.n);
          rec.ise = std::pow(std::log(nn) / nn, *config.planted_exponent);
          rec.j1 = resolution_j1(rec.n, tau);
          rec.lambda_n = threshold_lambda(rec.n);
        } else {
          MixingProcessSpec p = config.process_template();
          p.n = rec.n;
          p.seed = rec.seed;
          const Dataset data = simulate(p, scenario);
          EstimatorConfig cfg;
          cfg.kappa = rec.kappa;
          cfg.axis = axis;
          const ComponentEstimate est = fit_component(data, scenario.rho, *table, cfg);
          rec.ise = ise(est, *table, truth);
          rec.kept_count = est.kept_count();
          rec.j1 = est.j1;
          rec.lambda_n = est.lambda_n;
        }
        rec.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        slots[cell] = rec;
      },
      stop);

  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    std::vector<double> values;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& s = slots[ni * reps + r];
      if (!s) continue;
      report.records.push_back(*s);
      values.push_back(s->ise);
    }
    if (values.size() == reps) report.per_n.emplace_back(config.n_grid[ni], aggregate(values, config.median));
    else report.complete = false;
  }
  if (report.per_n.size() >= 4) {
    try {
      report.fit = rate_fit(report.per_n);
    } catch (const InvalidArgument&) {
      report.fit.reset();
    }
  }
  return report;
}

int cmd_mc_rate(const McRateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = load_experiment_config(opts.config_path);
    if (opts.seed) config.master_seed = *opts.seed;
    if (opts.kappa) {
      if (!(*opts.kappa >= 0.0)) throw InvalidArgument("--kappa must be >= 0");
      config.kappa_fixed = *opts.kappa;
    }
    if (opts.family_R) config.family_R = *opts.family_R;
    if (opts.depth) config.depth = *opts.depth;
    const fs::path path = opts.output ? *opts.output : fs::path(config.output_dir) / "mc_rate_report.json";

    interrupt_flag().store(false);
    const auto previous = std::signal(SIGINT, sigint_handler);
    ExperimentReport report;
    try {
      report = run_mc_rate(config, opts.allow_over_budget, &interrupt_flag());
    } catch (...) {
      std::signal(SIGINT, previous);
      throw;
    }
    std::signal(SIGINT, previous);

    json j = report.to_json(true);
    j["determinism_digest"] = report.determinism_digest();
    write_text(path, j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "n,rep,ise,kept_count,j1,lambda_n,kappa,runtime_ms\n";
    for (const auto& r : report.records)
      csv << r.n << ',' << r.rep << ',' << format_double(r.ise) << ',' << r.kept_count << ',' << r.j1 << ','
          << format_double(r.lambda_n) << ',' << format_double(r.kappa) << ',' << format_double(r.runtime_ms) << '\n';
    fs::path csv_path = path;
    csv_path.replace_extension(".csv");
    write_text(csv_path, csv.str());

    json summary = {{"schema_version", kSchemaVersion},
                    {"command", "mc-rate"},
                    {"report", path.string()},
                    {"complete", report.complete},
                    {"records", report.records.size()},
                    {"determinism_digest", report.determinism_digest()},
                    {"exponent", report.fit ? json(report.fit->slope) : json(nullptr)}};
    out << summary.dump(2) << '\n';
    if (!report.complete) {
      err << "interrupted: partial results written to " << path.string() << '\n';
      return kExitInterrupted;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return report_exception(e, err);
  }
}

}  // namespace addwav
