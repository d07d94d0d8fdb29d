// Acceptance run: one PASS/FAIL line per criterion with the measured value,
// the tolerance and the wall time. Exit status is nonzero if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qspoof/qspoof.hpp"

using namespace qspoof;
using qmat::Complex;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; <= 0 means none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

using Dens = qmat::DensityOperator<double>;
using Herm = qmat::HermitianOperator<double>;

cli::RunConfig config(const cli::json& j) { return cli::parse_config(j); }

Outcome classical_oracle() {
  const auto cfg = config({{"K", 2}, {"basis_mode", "number"}});
  const auto h = radar::build_hypotheses(cfg.scenario);
  std::vector<double> r0(3), r1(3);
  for (int i = 0; i < 3; ++i) {
    r0[i] = h.rho0().matrix()(i, i);
    r1[i] = h.rho1().matrix()(i, i);
  }
  double worst = 0.0;
  for (std::size_t n = 1; n <= 5; ++n) {
    const double tau = detector::threshold(cfg.scenario.threshold, n);
    const auto rho1n = qmat::tensor_power(h.rho1(), n);
    const auto rho0n = qmat::tensor_power(h.rho0(), n);
    const auto r = detector::rates(detector::helstrom_effect(rho1n, rho0n, tau), rho1n, rho0n);
    const auto ref = oracle::classical_lrt(r1, r0, n, tau);
    worst = std::max({worst, std::abs(r.p_d - ref.p_d), std::abs(r.p_f - ref.p_f)});
  }
  return {worst <= 1e-10, "max|diff| = " + fmt("%.3g", worst) + " (tol 1e-10), n = 1..5"};
}

Outcome stationarity() {
  double worst = 0.0;
  for (const char* mode : {"number", "coherent"}) {
    const auto cfg = config({{"K", 4}, {"basis_mode", mode}});
    const auto h = radar::build_hypotheses(cfg.scenario);
    for (std::size_t n : {1u, 2u}) {
      const auto rho1n = qmat::tensor_power(h.rho1(), n);
      const auto rho0n = qmat::tensor_power(h.rho0(), n);
      const auto effect =
          detector::helstrom_effect(rho1n, rho0n, detector::threshold(cfg.scenario.threshold, n));
      for (double lam : {0.5, 1.0, 2.0}) {
        const double b = *attacker::beta(attacker::AttackConfig(lam), n);
        const auto star = attacker::best_response_rho1(h.rho1(), effect, b, n);
        worst = std::max(worst, attacker::verify_stationarity(star, effect, rho1n, b, 20));
      }
    }
  }
  return {worst <= 1e-4, "max directional derivative = " + fmt("%.3g", worst) + " (tol 1e-4), 24 cases x 20 dirs"};
}

// Shared by criteria 3 and 4: the default coherent sweep plus a number-mode sweep.
const std::vector<cli::SweepRow>& sweep_rows() {
  static const std::vector<cli::SweepRow> rows = [] {
    auto a = cli::run_sweep(cli::RunConfig{}).rows;
    const auto b = cli::run_sweep(config({{"K", 2}, {"basis_mode", "number"}, {"n_max", 5}})).rows;
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }();
  return rows;
}

Outcome no_gain_and_monotone() {
  double worst_gain = -1.0;
  for (const auto& r : sweep_rows()) worst_gain = std::max(worst_gain, r.p_d_attacked - r.p_d_clean);

  double worst_drop = 0.0;
  for (const char* mode : {"number", "coherent"}) {
    const auto cfg = config({{"basis_mode", mode}});
    const auto h = radar::build_hypotheses(cfg.scenario);
    const std::size_t n = 2;
    const auto effect = detector::helstrom_effect(h, n, detector::threshold(cfg.scenario.threshold, n));
    double prev = -1.0;
    for (double b : {0.1, 0.5, 1.0, 5.0, 25.0}) {
      const auto star = attacker::best_response_rho1(h.rho1(), effect, b, n);
      const double pd = qmat::trace_of_product(effect.matrix(), star.matrix());
      if (prev >= 0.0) worst_drop = std::max(worst_drop, prev - pd);
      prev = pd;
    }
  }
  const bool pass = worst_gain <= 1e-10 && worst_drop <= 1e-10;
  return {pass, "max(p_d* - p_d) = " + fmt("%.3g", worst_gain) + " over " + std::to_string(sweep_rows().size()) +
                    " rows; max decrease over beta grid = " + fmt("%.3g", worst_drop) + " (slack 1e-10)"};
}

Outcome null_undistorted() {
  double worst = 0.0;
  for (const auto& r : sweep_rows()) worst = std::max(worst, std::abs(r.p_f_attacked - r.p_f_clean));
  return {worst <= 1e-12, "max|p_f* - p_f| = " + fmt("%.3g", worst) + " (tol 1e-12) over " +
                              std::to_string(sweep_rows().size()) + " rows"};
}

Outcome decay_and_slowdown() {
  const auto cfg = config({{"K", 4}, {"basis_mode", "coherent"}, {"lambdas", {0, 0.5}}, {"n_max", 5}});
  const auto rows = cli::run_sweep(cfg).rows;
  std::vector<analysis::DecayPoint> clean, attacked;
  for (const auto& r : rows) {
    if (r.lambda == 0.0) clean.push_back({r.n, r.miss_clean});
    if (r.lambda == 0.5) attacked.push_back({r.n, r.miss_attacked});
  }
  const auto fc = analysis::decay_rate_fit(clean);
  const auto fa = analysis::decay_rate_fit(attacked);
  const double gap = fa.slope - fc.slope;
  const bool pass = fc.slope < -0.05 && fc.r_squared >= 0.99 && gap >= 0.01;
  return {pass, "clean slope = " + fmt("%.6f", fc.slope) + " (< -0.05), r^2 = " + fmt("%.6f", fc.r_squared) +
                    " (>= 0.99), attacked slope = " + fmt("%.6f", fa.slope) + ", gap = " + fmt("%.6f", gap) +
                    " (>= 0.01)"};
}

Outcome large_beta() {
  double worst = 0.0;
  for (const char* mode : {"number", "coherent"}) {
    const auto cfg = config({{"basis_mode", mode}});
    const auto h = radar::build_hypotheses(cfg.scenario);
    for (std::size_t n : {1u, 2u}) {
      const auto effect = detector::helstrom_effect(h, n, detector::threshold(cfg.scenario.threshold, n));
      const auto star = attacker::best_response_rho1(h.rho1(), effect, 1e6, n);
      worst = std::max(worst, analysis::wasserstein_single(star, qmat::tensor_power(h.rho1(), n)));
    }
  }
  return {worst <= 1e-4, "max trace distance = " + fmt("%.3g", worst) + " (tol 1e-4)"};
}

Outcome information_suite() {
  std::mt19937_64 rng(4242);
  using DC = qmat::DensityOperator<Complex>;
  using HC = qmat::HermitianOperator<Complex>;
  double additivity = 0.0, klein = analysis::kInfinity;
  for (int t = 0; t < 25; ++t) {
    const DC a(HC(oracle::random_density<Complex>(2, rng))), b(HC(oracle::random_density<Complex>(3, rng)));
    const DC c(HC(oracle::random_density<Complex>(2, rng))), d(HC(oracle::random_density<Complex>(3, rng)));
    const double joint = analysis::relative_entropy(qmat::tensor_product(a, b), qmat::tensor_product(c, d));
    additivity = std::max(additivity, std::abs(joint - analysis::relative_entropy(a, c) -
                                               analysis::relative_entropy(b, d)));
    klein = std::min({klein, joint, analysis::relative_entropy(a, c)});
  }
  const double ln2 = analysis::relative_entropy(Dens::diagonal({1.0, 0.0}), Dens::diagonal({0.5, 0.5}));
  const double viol = analysis::relative_entropy(Dens::diagonal({0.5, 0.5}), Dens::diagonal({1.0, 0.0}));
  const bool pass = additivity <= 1e-9 && klein >= -1e-12 && std::abs(ln2 - std::log(2.0)) <= 1e-10 &&
                    std::isinf(viol) && viol > 0;
  return {pass, "additivity err = " + fmt("%.3g", additivity) + ", min S = " + fmt("%.3g", klein) +
                    ", |S - ln2| = " + fmt("%.3g", std::abs(ln2 - std::log(2.0))) +
                    ", violation -> " + fmt("%g", viol)};
}

Outcome separability() {
  std::mt19937_64 rng(99);
  bool products = true;
  double worst_factor = 0.0;
  for (std::size_t n : {2u, 3u}) {
    const Eigen::MatrixXd a = oracle::random_density<double>(3, rng);
    const Herm op(oracle::kron_power(a, n));
    const Dens state = Dens::from_trusted(op);
    const auto report =
        analysis::separability_report(op, qmat::FactorDims(n, 3), analysis::SeparabilityOptions{},
                                      std::optional<Dens>(state));
    products = products && report.all_product;
    if (!report.all_product) continue;
    auto product = report.factors.front();
    for (std::size_t j = 1; j < report.factors.size(); ++j) product = qmat::tensor_product(product, report.factors[j]);
    worst_factor = std::max(worst_factor, oracle::trace_distance(product.matrix(), state.matrix()));
  }
  Eigen::Matrix4d swap = Eigen::Matrix4d::Zero();
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
  const bool singlet_rejected = !analysis::separability_report(Herm(swap), {2, 2}).all_product;
  const bool pass = products && singlet_rejected && worst_factor <= 1e-8;
  return {pass, std::string("Kronecker powers all_product = ") + (products ? "true" : "false") +
                    ", singlet operator all_product = " + (singlet_rejected ? "false" : "true") +
                    ", factor trace distance = " + fmt("%.3g", worst_factor) + " (tol 1e-8)"};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const auto cfg = std::string(QSPOOF_SOURCE_DIR) + "/configs/default.json";
  const auto dir = fs::temp_directory_path() / "qspoof_acceptance";
  fs::create_directories(dir);
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  cli::cmd_sweep(cfg, a);
  cli::cmd_sweep(cfg, b);
  const auto ta = cli::read_file(a), tb = cli::read_file(b);
  return {ta == tb && !ta.empty(), std::to_string(ta.size()) + " bytes, identical = " + (ta == tb ? "true" : "false")};
}

Outcome derived_points() {
  const auto cfg = config({{"K", 2}, {"basis_mode", "number"}});
  const auto h = radar::build_hypotheses(cfg.scenario);
  const auto effect = detector::helstrom_effect(h, 1, detector::threshold(cfg.scenario.threshold, 1));
  const double pi_err = (effect.matrix() - Herm::diagonal({0.0, 0.0, 1.0}).matrix()).cwiseAbs().maxCoeff();
  const auto r = detector::rates(effect, h.rho1(), h.rho0());
  const auto star = attacker::best_response_rho1(h.rho1(), effect, *attacker::beta(attacker::AttackConfig(1.0), 1), 1);
  const double pd_star = detector::outcome_probability(effect, star);
  const bool pass = pi_err <= 1e-12 && std::abs(r.p_d - 0.8) <= 1e-12 && std::abs(r.p_f) <= 1e-12 &&
                    std::abs(pd_star - 0.595390) <= 1e-6;
  return {pass, "|Pi - diag(0,0,1)| = " + fmt("%.3g", pi_err) + ", p_d = " + fmt("%.12g", r.p_d) +
                    ", p_f = " + fmt("%.3g", r.p_f) + ", attacked p_d = " + fmt("%.7f", pd_star) +
                    " (0.595390 +- 1e-6)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "classical-oracle equivalence", 10, classical_oracle},
      {2, "best-response stationarity", 60, stationarity},
      {3, "no-gain and beta-monotonicity", 30, no_gain_and_monotone},
      {4, "undistorted null hypothesis", 0, null_undistorted},
      {5, "exponential decay and attack slowdown", 300, decay_and_slowdown},
      {6, "large-beta recovery", 0, large_beta},
      {7, "information-theory suite", 0, information_suite},
      {8, "separability machinery", 0, separability},
      {9, "sweep determinism", 0, determinism},
      {10, "derived point checks", 0, derived_points},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2fs", secs);
    if (c.time_limit > 0) {
      timing += fmt(" (limit %gs)", c.time_limit);
      if (secs >= c.time_limit) {
        out.pass = false;
        out.detail += "; over time limit";
      }
    }
    if (!out.pass) ++failures;
    std::printf("%s  criterion %2d  %-38s %s  [%s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
