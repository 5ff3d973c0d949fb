#include "addwav/serialization.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "addwav/error.hpp"

namespace addwav {
namespace {

template <typename T>
T require(const json& j, const char* field, const char* where) {
  if (!j.contains(field)) throw ConfigError(std::string(where) + ": missing field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + ": field '" + field + "' has the wrong type (" + e.what() + ")");
  }
}

const char* kind_name(BasisKind k) { return k == BasisKind::scaling ? "scaling" : "wavelet"; }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json family_to_json(const WaveletFamily& family) {
  return {{"R", family.R},
          {"tau", family.tau},
          {"support_length", family.support_length},
          {"low_pass", std::vector<double>(family.low_pass.data(), family.low_pass.data() + family.low_pass.size())}};
}

json estimate_to_json(const ComponentEstimate& est) {
  json levels = json::array();
  for (const auto& lv : est.levels) {
    json coeffs = json::array();
    for (Eigen::Index k = 0; k < lv.values.size(); ++k)
      coeffs.push_back({{"k", k}, {"value", lv.values[k]}, {"kept", static_cast<bool>(lv.kept[k])}});
    levels.push_back({{"j", lv.j}, {"coeffs", std::move(coeffs)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"mu_hat", est.mu_hat},
          {"tau", est.tau},
          {"j1", est.j1},
          {"lambda_n", est.lambda_n},
          {"kappa", est.kappa},
          {"ell", est.axis + 1},
          {"family_R", est.family_R},
          {"kept_count", est.kept_count()},
          {"a_hat", std::vector<double>(est.a_hat.data(), est.a_hat.data() + est.a_hat.size())},
          {"levels", std::move(levels)}};
}

ComponentEstimate estimate_from_json(const json& j) {
  const char* where = "estimate";
  ComponentEstimate est;
  est.mu_hat = require<double>(j, "mu_hat", where);
  est.tau = require<int>(j, "tau", where);
  est.j1 = require<int>(j, "j1", where);
  est.lambda_n = require<double>(j, "lambda_n", where);
  est.kappa = require<double>(j, "kappa", where);
  est.axis = j.value("ell", 1) - 1;
  est.family_R = j.value("family_R", 1);
  const auto a = require<std::vector<double>>(j, "a_hat", where);
  est.a_hat = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  if (!j.contains("levels") || !j["levels"].is_array()) throw ConfigError("estimate: missing field 'levels'");
  for (const auto& jl : j["levels"]) {
    DetailLevel lv;
    lv.j = require<int>(jl, "j", "estimate.levels[]");
    const auto& coeffs = jl.at("coeffs");
    lv.values.resize(static_cast<Eigen::Index>(coeffs.size()));
    lv.kept.resize(static_cast<Eigen::Index>(coeffs.size()));
    for (const auto& c : coeffs) {
      const auto k = require<Eigen::Index>(c, "k", "estimate.levels[].coeffs[]");
      if (k < 0 || k >= lv.values.size()) throw ConfigError("estimate: coefficient index out of range");
      lv.values[k] = require<double>(c, "value", "estimate.levels[].coeffs[]");
      lv.kept[k] = require<bool>(c, "kept", "estimate.levels[].coeffs[]");
    }
    est.levels.push_back(std::move(lv));
  }
  return est;
}

json moment_report_to_json(const MomentReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"kind", kind_name(r.index.kind)},
          {"j", r.index.j},
          {"k", r.index.k},
          {"ell", r.axis + 1},
          {"reps", r.reps},
          {"n", r.n},
          {"mean_hat", r.mean_hat},
          {"var_hat", r.var_hat},
          {"m4_hat", r.m4_hat},
          {"true_value", r.true_value}};
}

json rate_fit_to_json(const RateFit& f) {
  json pts = json::array();
  for (const auto& [n, e] : f.points) pts.push_back({{"n", n}, {"mean_ise", e}});
  return {{"schema_version", kSchemaVersion},
          {"points", std::move(pts)},
          {"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared}};
}

json process_to_json(const MixingProcessSpec& p) {
  return {{"d", p.d}, {"n", p.n}, {"a", p.a}, {"copula_theta", p.copula_theta}, {"seed", p.seed}};
}

json scenario_to_json(const ScenarioSpec& s) {
  return {{"components", s.names()},
          {"mu", s.mu},
          {"noise_halfwidth", s.noise_halfwidth},
          {"rho", "identity"},
          {"rho_sup_bound", s.rho.sup_bound}};
}

std::string spec_hash(const MixingProcessSpec& p, const ScenarioSpec& s) {
  const json canon = {{"process", process_to_json(p)}, {"scenario", scenario_to_json(s)}};
  return fnv1a_hex(canon.dump());
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "i,y";
  for (int v = 0; v < data.dim(); ++v) out << ",x" << (v + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << i << ',' << format_double(data.y[i]);
    for (int v = 0; v < data.dim(); ++v) out << ',' << format_double(data.x(i, v));
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, const DesignDensity& density) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "i" || header[1] != "y")
    throw ConfigError("dataset csv: header must be i,y,x1..xd");
  const int d = static_cast<int>(header.size()) - 2;
  for (int v = 0; v < d; ++v)
    if (header[static_cast<std::size_t>(v + 2)] != "x" + std::to_string(v + 1))
      throw ConfigError("dataset csv: header column " + std::to_string(v + 3) + " must be x" + std::to_string(v + 1));

  std::vector<double> ys, xs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma)
        throw ConfigError("dataset csv: line " + std::to_string(lineno) + ", field " + std::to_string(row.size() + 1) +
                          ": not a number");
      row.push_back(v);
      p = comma + 1;
    }
    if (static_cast<int>(row.size()) != d + 2)
      throw ConfigError("dataset csv: line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(d + 2));
    ys.push_back(row[1]);
    xs.insert(xs.end(), row.begin() + 2, row.end());
  }
  Dataset data;
  const auto n = static_cast<Eigen::Index>(ys.size());
  data.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), n, d);
  data.density = density;
  data.validate();
  return data;
}

json dataset_to_json(const DatasetFile& file) {
  const Dataset& data = file.data;
  json provenance = json::object();
  if (file.process) {
    provenance["process"] = process_to_json(*file.process);
    provenance["seed"] = file.process->seed;
  }
  if (file.scenario) provenance["scenario"] = scenario_to_json(*file.scenario);
  if (!file.spec_hash.empty()) provenance["spec_hash"] = file.spec_hash;
  provenance["density"] = data.density.description;

  json xs = json::array();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    json row = json::array();
    for (int v = 0; v < data.dim(); ++v) row.push_back(data.x(i, v));
    xs.push_back(std::move(row));
  }
  return {{"schema_version", kSchemaVersion},
          {"n", data.n()},
          {"d", data.dim()},
          {"provenance", std::move(provenance)},
          {"y", std::vector<double>(data.y.data(), data.y.data() + data.y.size())},
          {"x", std::move(xs)}};
}

DatasetFile dataset_from_json(const json& j) {
  const char* where = "dataset";
  DatasetFile file;
  const auto n = require<Eigen::Index>(j, "n", where);
  const int d = require<int>(j, "d", where);
  const auto ys = require<std::vector<double>>(j, "y", where);
  const auto xs = require<std::vector<std::vector<double>>>(j, "x", where);
  if (static_cast<Eigen::Index>(ys.size()) != n || static_cast<Eigen::Index>(xs.size()) != n)
    throw ConfigError("dataset: y/x lengths disagree with n");
  file.data.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  file.data.x.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<int>(xs[static_cast<std::size_t>(i)].size()) != d)
      throw ConfigError("dataset: row " + std::to_string(i) + " of x has wrong width");
    for (int v = 0; v < d; ++v) file.data.x(i, v) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)];
  }
  double theta = 0.0;
  if (j.contains("provenance")) {
    const auto& prov = j["provenance"];
    if (prov.contains("process")) {
      const auto& p = prov["process"];
      MixingProcessSpec spec;
      spec.d = require<int>(p, "d", "dataset.provenance.process");
      spec.n = require<Eigen::Index>(p, "n", "dataset.provenance.process");
      spec.a = require<double>(p, "a", "dataset.provenance.process");
      spec.copula_theta = require<double>(p, "copula_theta", "dataset.provenance.process");
      spec.seed = require<std::uint64_t>(p, "seed", "dataset.provenance.process");
      theta = spec.copula_theta;
      file.process = spec;
    }
    if (prov.contains("scenario")) {
      const auto& s = prov["scenario"];
      file.scenario = ScenarioSpec::make(require<std::vector<std::string>>(s, "components", "dataset.provenance.scenario"),
                                         require<double>(s, "mu", "dataset.provenance.scenario"),
                                         require<double>(s, "noise_halfwidth", "dataset.provenance.scenario"));
    }
    file.spec_hash = prov.value("spec_hash", std::string());
  }
  file.data.density = theta != 0.0 ? DesignDensity::fgm(theta) : DesignDensity::uniform(d);
  file.data.validate();
  return file;
}

}  // namespace addwav
