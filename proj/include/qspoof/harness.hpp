#pragma once

// Experiment harness behind the qspoof command line: JSON run configs,
// (n, lambda) sweeps, decay-rate reports and single-point inspection dumps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <locale>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspoof/analysis.hpp"
#include "qspoof/attacker.hpp"
#include "qspoof/detector.hpp"
#include "qspoof/qmat.hpp"
#include "qspoof/radar.hpp"

namespace qspoof::cli {

using json = nlohmann::json;

struct RunConfig {
  radar::ScenarioConfig scenario = radar::default_scenario();
  /// Numerical tolerance for eigenvector-level checks (product tests).
  double eigen_tolerance = 1e-9;
  double log_floor = qmat::kDefaultLogFloor;
};

namespace detail {

inline double number_field(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

inline std::size_t count_field(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace detail

/// Reads a flat JSON object. Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "K",     "N_B",   "k",       "l",      "x",             "basis_mode",      "c0bar",
      "d0bar", "c1bar", "d1bar",   "lambdas", "n_max",        "dimension_cap",   "eigen_tolerance",
      "log_floor"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfig cfg;
  auto& s = cfg.scenario;
  if (j.contains("K")) s.K = detail::count_field(j, "K");
  if (j.contains("N_B")) s.N_B = detail::number_field(j, "N_B");
  if (j.contains("k")) s.k = detail::number_field(j, "k");
  if (j.contains("l")) s.l = detail::number_field(j, "l");
  if (j.contains("x")) s.x = detail::number_field(j, "x");
  if (j.contains("basis_mode")) {
    if (!j.at("basis_mode").is_string()) throw ConfigError("config key 'basis_mode' must be a string");
    s.basis_mode = radar::basis_mode_from_string(j.at("basis_mode").get<std::string>());
  }
  double c0 = s.threshold.c0bar(), d0 = s.threshold.d0bar();
  double c1 = s.threshold.c1bar(), d1 = s.threshold.d1bar();
  if (j.contains("c0bar")) c0 = detail::number_field(j, "c0bar");
  if (j.contains("d0bar")) d0 = detail::number_field(j, "d0bar");
  if (j.contains("c1bar")) c1 = detail::number_field(j, "c1bar");
  if (j.contains("d1bar")) d1 = detail::number_field(j, "d1bar");
  try {
    s.threshold = detector::ThresholdSchedule(c0, d0, c1, d1);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config keys 'c0bar','d0bar','c1bar','d1bar': ") + e.what());
  }
  if (j.contains("lambdas")) {
    const auto& arr = j.at("lambdas");
    if (!arr.is_array()) throw ConfigError("config key 'lambdas' must be an array of numbers");
    s.lambdas.clear();
    for (const auto& v : arr) {
      if (!v.is_number()) throw ConfigError("config key 'lambdas' must be an array of numbers");
      s.lambdas.push_back(v.get<double>());
    }
  }
  if (j.contains("n_max")) s.n_max = detail::count_field(j, "n_max");
  if (j.contains("dimension_cap")) s.dimension_cap = detail::count_field(j, "dimension_cap");
  if (j.contains("eigen_tolerance")) cfg.eigen_tolerance = detail::number_field(j, "eigen_tolerance");
  if (j.contains("log_floor")) cfg.log_floor = detail::number_field(j, "log_floor");
  if (!(cfg.eigen_tolerance > 0.0)) throw ConfigError("config key 'eigen_tolerance' must be positive");
  if (!(cfg.log_floor > 0.0)) throw ConfigError("config key 'log_floor' must be positive");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline json config_to_json(const RunConfig& cfg) {
  const auto& s = cfg.scenario;
  return json{{"K", s.K},
              {"N_B", s.N_B},
              {"k", s.k},
              {"l", s.l},
              {"x", s.x},
              {"basis_mode", radar::to_string(s.basis_mode)},
              {"c0bar", s.threshold.c0bar()},
              {"d0bar", s.threshold.d0bar()},
              {"c1bar", s.threshold.c1bar()},
              {"d1bar", s.threshold.d1bar()},
              {"lambdas", s.lambdas},
              {"n_max", s.n_max},
              {"dimension_cap", s.dimension_cap},
              {"eigen_tolerance", cfg.eigen_tolerance},
              {"log_floor", cfg.log_floor}};
}

/// Full validation including the dimension budget. Returns the resolved-config
/// echo followed by any warnings; throws ConfigError on the first failing rule.
inline std::string validate(const RunConfig& cfg) {
  const auto warnings = radar::validate_scenario(cfg.scenario, true);
  std::ostringstream out;
  out << config_to_json(cfg).dump(2) << "\n";
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  out << "dimension at n_max: "
      << qmat::checked_power(cfg.scenario.single_dim(), cfg.scenario.n_max, cfg.scenario.dimension_cap)
      << " (cap " << cfg.scenario.dimension_cap << ")\n";
  return out.str();
}

struct SweepRow {
  std::size_t n = 0;
  double lambda = 0.0;
  double tau = 0.0;
  double p_d_clean = 0.0;
  double p_f_clean = 0.0;
  double p_d_attacked = 0.0;
  double p_f_attacked = 0.0;
  double miss_clean = 0.0;
  double miss_attacked = 0.0;
  double rel_entropy_cost = 0.0;
  double wasserstein = 0.0;
  bool separable_eigvecs = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

inline std::vector<double> sorted_lambdas(std::vector<double> lambdas) {
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  return lambdas;
}

inline attacker::BestResponseOptions best_response_options(const RunConfig& cfg) {
  attacker::BestResponseOptions opts;
  opts.log_floor = cfg.log_floor;
  opts.dimension_cap = cfg.scenario.dimension_cap;
  return opts;
}

/// Every row for one n. Detector and clean quantities are shared across lambdas.
inline std::vector<SweepRow> evaluate_n(const RunConfig& cfg,
                                        const detector::HypothesisPair<double>& h, std::size_t n,
                                        const std::vector<double>& lambdas) {
  const auto& s = cfg.scenario;
  const auto rho1n = qmat::tensor_power(h.rho1(), n, s.dimension_cap);
  const auto rho0n = attacker::best_response_rho0(h.rho0(), n, s.dimension_cap);
  const double tau = detector::threshold(s.threshold, n);
  detector::HelstromOptions hopts;
  hopts.dimension_cap = s.dimension_cap;
  const auto effect = detector::helstrom_effect(rho1n, rho0n, tau, hopts);
  const auto clean = detector::rates(effect, rho1n, rho0n);

  const auto local = qmat::eig_hermitian(h.rho1().op());
  const auto clean_spec = qmat::tensor_power(local, n, s.dimension_cap);
  const qmat::FactorDims dims(n, s.single_dim());
  analysis::SeparabilityOptions sep;
  sep.product_tolerance = cfg.eigen_tolerance;
  sep.certify_factors = false;

  std::vector<SweepRow> rows;
  for (double lam : lambdas) {
    SweepRow row;
    row.n = n;
    row.lambda = lam;
    row.tau = tau;
    row.p_d_clean = clean.p_d;
    row.p_f_clean = clean.p_f;
    const auto b = attacker::beta(attacker::AttackConfig(lam), n);
    if (!b || effect.rank() == 0) {
      row.p_d_attacked = clean.p_d;
      row.p_f_attacked = clean.p_f;
      row.rel_entropy_cost = 0.0;
      row.wasserstein = 0.0;
      // The exponent is ln rho1^{(x)n}, diagonal in the product eigenbasis.
      const auto log_spec = tensor_power(
          qmat::SpectralDecomposition<double>{
              local.eigenvalues.unaryExpr([&](double v) { return std::log(std::max(v, cfg.log_floor)); }),
              local.eigenvectors},
          n, s.dimension_cap);
      row.separable_eigvecs = analysis::separability_report(log_spec, dims, sep).all_product;
    } else {
      const auto dist = attacker::distort_rho1(h.rho1(), effect, *b, n, best_response_options(cfg));
      // rho0 is never distorted, so the attacked false-alarm rate is the clean one.
      const auto rates = detector::rates(effect, dist.state, rho0n);
      row.p_d_attacked = rates.p_d;
      row.p_f_attacked = rates.p_f;
      const qmat::SpectralDecomposition<double> star{dist.weights, dist.exponent.eigenvectors};
      row.rel_entropy_cost = analysis::relative_entropy(star, clean_spec);
      row.wasserstein = analysis::wasserstein_single(dist.state, rho1n);
      row.separable_eigvecs = analysis::separability_report(dist.exponent, dims, sep).all_product;
    }
    row.miss_clean = 1.0 - row.p_d_clean;
    row.miss_attacked = 1.0 - row.p_d_attacked;
    rows.push_back(row);
  }
  return rows;
}

/// Rows ordered by n then lambda. n values beyond the dimension cap are
/// skipped and reported in `warnings`. With jobs > 1, distinct n are
/// evaluated concurrently; output order is unaffected.
inline SweepResult run_sweep(const RunConfig& cfg, unsigned jobs = 1) {
  SweepResult result;
  result.warnings = radar::validate_scenario(cfg.scenario, false);
  const auto h = radar::build_hypotheses(cfg.scenario);
  const auto lambdas = sorted_lambdas(cfg.scenario.lambdas);

  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= cfg.scenario.n_max; ++n) {
    try {
      qmat::checked_power(cfg.scenario.single_dim(), n, cfg.scenario.dimension_cap);
      ns.push_back(n);
    } catch (const DimensionCapExceeded& e) {
      result.warnings.push_back("n=" + std::to_string(n) + " skipped: " + e.what());
    }
  }

  std::vector<std::vector<SweepRow>> groups(ns.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < ns.size(); ++i) groups[i] = evaluate_n(cfg, h, ns[i], lambdas);
  } else {
    for (std::size_t start = 0; start < ns.size(); start += jobs) {
      std::vector<std::future<std::vector<SweepRow>>> pending;
      const std::size_t stop = std::min(ns.size(), start + jobs);
      for (std::size_t i = start; i < stop; ++i) {
        pending.push_back(std::async(std::launch::async, [&, i] { return evaluate_n(cfg, h, ns[i], lambdas); }));
      }
      for (std::size_t i = start; i < stop; ++i) groups[i] = pending[i - start].get();
    }
  }
  for (auto& g : groups) result.rows.insert(result.rows.end(), g.begin(), g.end());
  return result;
}

inline constexpr const char* kCsvHeader =
    "n,lambda,tau,p_d_clean,p_f_clean,p_d_attacked,p_f_attacked,miss_clean,miss_attacked,"
    "rel_entropy_cost,wasserstein,separable_eigvecs";

/// %.12g in the C locale, with negative zero printed as 0.
inline std::string format_number(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  if (v == 0.0) v = 0.0;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  out << std::setprecision(12) << v;
  return out.str();
}

inline std::string format_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_number(r.lambda) << ',' << format_number(r.tau) << ','
        << format_number(r.p_d_clean) << ',' << format_number(r.p_f_clean) << ','
        << format_number(r.p_d_attacked) << ',' << format_number(r.p_f_attacked) << ','
        << format_number(r.miss_clean) << ',' << format_number(r.miss_attacked) << ','
        << format_number(r.rel_entropy_cost) << ',' << format_number(r.wasserstein) << ','
        << (r.separable_eigvecs ? "true" : "false") << "\n";
  }
  return out.str();
}

inline double parse_number(const std::string& field, std::size_t line) {
  std::istringstream in(field);
  in.imbue(std::locale::classic());
  double v = 0.0;
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  if (!(in >> v) || !in.eof()) {
    throw ParseError("line " + std::to_string(line) + ": '" + field + "' is not a number");
  }
  return v;
}

inline std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ParseError("sweep CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("sweep CSV header does not match the expected columns");

  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 12) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 12 fields, got " +
                       std::to_string(f.size()));
    }
    SweepRow r;
    const double n = parse_number(f[0], lineno);
    if (n < 1 || std::floor(n) != n) throw ParseError("line " + std::to_string(lineno) + ": bad n");
    r.n = static_cast<std::size_t>(n);
    r.lambda = parse_number(f[1], lineno);
    r.tau = parse_number(f[2], lineno);
    r.p_d_clean = parse_number(f[3], lineno);
    r.p_f_clean = parse_number(f[4], lineno);
    r.p_d_attacked = parse_number(f[5], lineno);
    r.p_f_attacked = parse_number(f[6], lineno);
    r.miss_clean = parse_number(f[7], lineno);
    r.miss_attacked = parse_number(f[8], lineno);
    r.rel_entropy_cost = parse_number(f[9], lineno);
    r.wasserstein = parse_number(f[10], lineno);
    if (f[11] != "true" && f[11] != "false") {
      throw ParseError("line " + std::to_string(lineno) + ": separable_eigvecs must be true or false");
    }
    r.separable_eigvecs = f[11] == "true";
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError("sweep CSV has no data rows");
  return rows;
}

/// Writes the CSV and, when rows were skipped, `<out>.warnings.txt`.
inline SweepResult cmd_sweep(const std::string& config_path, const std::string& out_path, unsigned jobs = 1) {
  const auto cfg = load_config(config_path);
  auto result = run_sweep(cfg, jobs);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + out_path + "'");
  out << format_csv(result.rows);
  const std::string sidecar = out_path + ".warnings.txt";
  if (!result.warnings.empty()) {
    std::ofstream w(sidecar, std::ios::binary);
    for (const auto& msg : result.warnings) w << msg << "\n";
  } else {
    std::remove(sidecar.c_str());
  }
  return result;
}

struct SeriesFit {
  std::string series;
  /// "ok", "exact zero" or "insufficient data".
  std::string status;
  std::optional<analysis::DecayFit> fit;
  std::string message;
};

struct LambdaRates {
  double lambda = 0.0;
  std::vector<SeriesFit> series;
};

struct RatesReport {
  std::vector<LambdaRates> groups;

  const SeriesFit* find(double lambda, const std::string& series) const {
    for (const auto& g : groups) {
      if (g.lambda != lambda) continue;
      for (const auto& s : g.series) {
        if (s.series == series) return &s;
      }
    }
    return nullptr;
  }
};

inline SeriesFit fit_series(const std::string& name, const std::vector<analysis::DecayPoint>& pts) {
  SeriesFit out{name, "ok", std::nullopt, ""};
  try {
    out.fit = analysis::decay_rate_fit(pts);
  } catch (const AllErrorsZero& e) {
    out.status = "exact zero";
    out.message = "exact zero, exponent -inf sentinel";
  } catch (const InsufficientData& e) {
    out.status = "insufficient data";
    out.message = e.what();
  }
  return out;
}

/// Decay fits of miss_clean, miss_attacked and p_f_attacked for every lambda group.
inline RatesReport compute_rates(const std::vector<SweepRow>& rows) {
  std::map<double, std::vector<const SweepRow*>> by_lambda;
  for (const auto& r : rows) by_lambda[r.lambda].push_back(&r);
  RatesReport report;
  for (const auto& [lam, group] : by_lambda) {
    std::vector<analysis::DecayPoint> miss_clean, miss_attacked, false_alarm;
    for (const auto* r : group) {
      miss_clean.push_back({r->n, std::clamp(r->miss_clean, 0.0, 1.0)});
      miss_attacked.push_back({r->n, std::clamp(r->miss_attacked, 0.0, 1.0)});
      false_alarm.push_back({r->n, std::clamp(r->p_f_attacked, 0.0, 1.0)});
    }
    LambdaRates g;
    g.lambda = lam;
    g.series.push_back(fit_series("miss_clean", miss_clean));
    g.series.push_back(fit_series("miss_attacked", miss_attacked));
    g.series.push_back(fit_series("p_f_attacked", false_alarm));
    report.groups.push_back(std::move(g));
  }
  return report;
}

inline std::string format_rates_text(const RatesReport& report) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::left << std::setw(10) << "lambda" << std::setw(15) << "series" << std::setw(19) << "status"
      << std::right << ' ' << std::setw(19) << "slope" << ' ' << std::setw(19) << "intercept" << ' ' << std::setw(15)
      << "r_squared" << ' ' << std::setw(7) << "points" << "\n";
  for (const auto& g : report.groups) {
    for (const auto& s : g.series) {
      out << std::left << std::setw(10) << format_number(g.lambda) << std::setw(15) << s.series
          << std::setw(19) << s.status << std::right;
      if (s.fit) {
        out << ' ' << std::setw(19) << format_number(s.fit->slope) << ' ' << std::setw(19)
            << format_number(s.fit->intercept) << ' ' << std::setw(15) << format_number(s.fit->r_squared) << ' '
            << std::setw(7) << s.fit->points.size();
      } else if (s.status == "exact zero") {
        out << ' ' << std::setw(19) << "-inf" << ' ' << std::setw(19) << "-" << ' ' << std::setw(15) << "-" << ' '
            << std::setw(7) << 0;
      } else {
        out << ' ' << std::setw(19) << "-" << ' ' << std::setw(19) << "-" << ' ' << std::setw(15) << "-" << ' '
            << std::setw(7) << 0;
      }
      out << "\n";
    }
  }
  return out.str();
}

inline std::string format_rates_csv(const RatesReport& report) {
  std::ostringstream out;
  out << "lambda,series,status,slope,intercept,r_squared,points,dropped_zero\n";
  for (const auto& g : report.groups) {
    for (const auto& s : g.series) {
      out << format_number(g.lambda) << ',' << s.series << ',' << s.status << ',';
      if (s.fit) {
        out << format_number(s.fit->slope) << ',' << format_number(s.fit->intercept) << ','
            << format_number(s.fit->r_squared) << ',' << s.fit->points.size() << ',' << s.fit->dropped_zero;
      } else if (s.status == "exact zero") {
        out << "-inf,,,0,";
      } else {
        out << ",,,0,";
      }
      out << "\n";
    }
  }
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// Dense dump of one (n, lambda) point: clean and attacked states, the
/// Helstrom effect, the exponent spectrum, separability and stationarity.
inline json attack_inspect(const RunConfig& cfg, std::size_t n, double lambda) {
  radar::validate_scenario(cfg.scenario, false);
  const auto& s = cfg.scenario;
  const auto h = radar::build_hypotheses(s);
  const auto rho1n = qmat::tensor_power(h.rho1(), n, s.dimension_cap);
  const auto rho0n = qmat::tensor_power(h.rho0(), n, s.dimension_cap);
  const auto rho0_star = attacker::best_response_rho0(h.rho0(), n, s.dimension_cap);
  const double tau = detector::threshold(s.threshold, n);
  detector::HelstromOptions hopts;
  hopts.dimension_cap = s.dimension_cap;
  const auto effect = detector::helstrom_effect(rho1n, rho0n, tau, hopts);
  const auto b = attacker::beta(attacker::AttackConfig(lambda), n);

  const qmat::FactorDims dims(n, s.single_dim());
  analysis::SeparabilityOptions sep;
  sep.product_tolerance = cfg.eigen_tolerance;

  json out;
  out["n"] = n;
  out["lambda"] = lambda;
  out["beta"] = b ? json(*b) : json(nullptr);
  out["tau"] = tau;
  out["basis_mode"] = radar::to_string(s.basis_mode);
  out["rho1_clean"] = matrix_json(rho1n.matrix());
  out["rho0_clean"] = matrix_json(rho0n.matrix());
  out["rho0_attacked"] = matrix_json(rho0_star.matrix());
  out["helstrom_effect"] = matrix_json(effect.matrix());
  out["helstrom_rank"] = effect.rank();

  std::optional<qmat::DensityOperator<double>> star;
  analysis::SeparabilityReport<double> report;
  if (!b || effect.rank() == 0) {
    star = rho1n;
    const auto local = qmat::eig_hermitian(h.rho1().op());
    const auto log_spec = qmat::tensor_power(
        qmat::SpectralDecomposition<double>{
            local.eigenvalues.unaryExpr([&](double v) { return std::log(std::max(v, cfg.log_floor)); }),
            local.eigenvectors},
        n, s.dimension_cap);
    out["exponent_eigenvalues"] = vector_json(log_spec.eigenvalues);
    report = analysis::separability_report(log_spec, dims, sep, star);
    out["stationarity_residual"] = nullptr;
  } else {
    auto dist = attacker::distort_rho1(h.rho1(), effect, *b, n, best_response_options(cfg));
    star = dist.state;
    out["exponent_eigenvalues"] = vector_json(dist.exponent.eigenvalues);
    report = analysis::separability_report(dist.exponent, dims, sep, star);
    out["stationarity_residual"] = attacker::verify_stationarity(*star, effect, rho1n, *b, 20);
  }
  out["rho1_attacked"] = matrix_json(star->matrix());

  json sepj;
  sepj["all_product"] = report.all_product;
  json per = json::array();
  for (const auto& e : report.per_vector) {
    per.push_back({{"eigenvalue", e.eigenvalue}, {"is_product", e.is_product}, {"residual", e.residual}});
  }
  sepj["per_vector"] = std::move(per);
  json factors = json::array();
  for (const auto& f : report.factors) factors.push_back(matrix_json(f.matrix()));
  sepj["factors"] = std::move(factors);
  sepj["factor_distance"] = report.factor_distance ? json(*report.factor_distance) : json(nullptr);
  sepj["factorizes"] = report.factorizes;
  out["separability"] = std::move(sepj);

  const auto clean = detector::rates(effect, rho1n, rho0n);
  const auto attacked = detector::rates(effect, *star, rho0_star);
  out["rates"] = {{"p_d_clean", clean.p_d},
                  {"p_f_clean", clean.p_f},
                  {"p_d_attacked", attacked.p_d},
                  {"p_f_attacked", attacked.p_f}};
  return out;
}

}  // namespace qspoof::cli
