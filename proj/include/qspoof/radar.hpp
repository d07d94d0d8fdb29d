#pragma once

// Quantum-radar spoofing scenario: truncated coherent states and the
// target-absent / target-present hypotheses.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "qspoof/detector.hpp"
#include "qspoof/qmat.hpp"

namespace qspoof::radar {

using qmat::DensityOperator;
using qmat::HermitianOperator;
using qmat::StateVector;

/// How the noise and target labels k, l become kets.
enum class BasisMode {
  /// |k>, |l> are photon-number states; k and l must be integers.
  kNumber,
  /// |k>, |l> are truncated coherent states with mean photon number k, l.
  kCoherent,
};

inline std::string to_string(BasisMode mode) {
  return mode == BasisMode::kNumber ? "number" : "coherent";
}

inline BasisMode basis_mode_from_string(const std::string& s) {
  if (s == "number") return BasisMode::kNumber;
  if (s == "coherent") return BasisMode::kCoherent;
  throw ConfigError("basis_mode must be \"number\" or \"coherent\", got \"" + s + "\"");
}

struct ScenarioConfig {
  /// Photon-number truncation; the single-copy dimension is K + 1.
  std::size_t K = 8;
  double N_B = 0.4;
  double k = 1.0;
  double l = 2.0;
  double x = 0.8;
  BasisMode basis_mode = BasisMode::kCoherent;
  detector::ThresholdSchedule threshold{0.7, 1.5, 1.0, 1.0};
  std::vector<double> lambdas{0.0, 0.25, 0.5, 1.0, 2.0};
  std::size_t n_max = 3;
  std::size_t dimension_cap = qmat::kDefaultDimensionCap;

  std::size_t single_dim() const { return K + 1; }
};

/// The published radar parameterization with K = 8 and the largest n_max
/// that fits the default dimension cap.
inline ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  std::size_t n = 1;
  while (true) {
    try {
      qmat::checked_power(cfg.single_dim(), n + 1, cfg.dimension_cap);
      ++n;
    } catch (const DimensionCapExceeded&) {
      break;
    }
  }
  cfg.n_max = n;
  return cfg;
}

inline bool is_integer(double v) { return std::floor(v) == v; }

/// Checks every scenario rule and throws ConfigError naming the first one
/// that fails. Returns non-fatal warnings. The dimension budget rule can be
/// skipped for callers that handle oversized n themselves.
inline std::vector<std::string> validate_scenario(const ScenarioConfig& cfg, bool check_budget = true) {
  std::vector<std::string> warnings;
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (cfg.K < 1) fail("K must be at least 1");
  if (!(cfg.N_B >= 0.0 && cfg.N_B <= 1.0)) fail("N_B must lie in [0, 1]");
  if (!(cfg.x >= 0.0 && cfg.x <= 1.0)) fail("x must lie in [0, 1]");
  if (!(cfg.k >= 0.0) || !std::isfinite(cfg.k)) fail("k must be a nonnegative number");
  if (!(cfg.l >= 0.0) || !std::isfinite(cfg.l)) fail("l must be a nonnegative number");
  if (cfg.basis_mode == BasisMode::kNumber) {
    if (!is_integer(cfg.k)) fail("k must be integer in number mode");
    if (!is_integer(cfg.l)) fail("l must be integer in number mode");
  }
  const auto kmax = static_cast<double>(cfg.K);
  if (cfg.k > kmax) fail("k must not exceed the truncation K");
  if (cfg.l > kmax) fail("l must not exceed the truncation K");
  if (cfg.basis_mode == BasisMode::kCoherent) {
    if (cfg.k > kmax / 2.0) warnings.push_back("k exceeds K/2; the truncated coherent state is distorted");
    if (cfg.l > kmax / 2.0) warnings.push_back("l exceeds K/2; the truncated coherent state is distorted");
  }
  if (cfg.n_max < 1) fail("n_max must be at least 1");
  if (cfg.lambdas.empty()) fail("lambdas must be nonempty");
  for (double lam : cfg.lambdas) {
    if (!(lam >= 0.0) || !std::isfinite(lam)) fail("lambdas must be finite and nonnegative");
  }
  if (check_budget) {
    try {
      qmat::checked_power(cfg.single_dim(), cfg.n_max, cfg.dimension_cap);
    } catch (const DimensionCapExceeded& e) {
      fail(std::string("n_max too large: ") + e.what());
    }
  }
  return warnings;
}

/// Truncated coherent state with real amplitude zeta on photon numbers 0..K,
/// amplitudes proportional to zeta^i / sqrt(i!) and normalized numerically.
inline StateVector<double> coherent_state(double zeta, std::size_t K) {
  Eigen::VectorXd amps(static_cast<qmat::Index>(K + 1));
  double term = 1.0;
  amps(0) = term;
  for (std::size_t i = 1; i <= K; ++i) {
    term *= zeta / std::sqrt(static_cast<double>(i));
    amps(static_cast<qmat::Index>(i)) = term;
  }
  return StateVector<double>(std::move(amps));
}

/// Z_K making exp(-|zeta|^2) / Z_K * sum_i zeta^i / sqrt(i!) |i) unit norm.
inline double coherent_normalizer(double zeta, std::size_t K) {
  double term = 1.0, sum = 1.0;
  for (std::size_t i = 1; i <= K; ++i) {
    term *= zeta * zeta / static_cast<double>(i);
    sum += term;
  }
  return std::exp(-zeta * zeta) * std::sqrt(sum);
}

inline StateVector<double> number_state(std::size_t i, std::size_t K) {
  return StateVector<double>::basis(static_cast<qmat::Index>(K + 1), static_cast<qmat::Index>(i));
}

/// Ket for a photon label under the configured basis mode.
inline StateVector<double> label_state(double label, const ScenarioConfig& cfg) {
  if (cfg.basis_mode == BasisMode::kNumber) {
    return number_state(static_cast<std::size_t>(label), cfg.K);
  }
  return coherent_state(std::sqrt(label), cfg.K);
}

/// rho0 = (1 - N_B)|0><0| + N_B |k><k|,  rho1 = (1 - x) rho0 + x |l><l|.
inline detector::HypothesisPair<double> build_hypotheses(const ScenarioConfig& cfg) {
  validate_scenario(cfg, false);
  const auto vacuum = number_state(0, cfg.K);
  const auto noise = label_state(cfg.k, cfg);
  const auto target = label_state(cfg.l, cfg);
  const Eigen::MatrixXd rho0 = (1.0 - cfg.N_B) * HermitianOperator<double>::projector(vacuum).matrix() +
                               cfg.N_B * HermitianOperator<double>::projector(noise).matrix();
  const Eigen::MatrixXd rho1 =
      (1.0 - cfg.x) * rho0 + cfg.x * HermitianOperator<double>::projector(target).matrix();
  return {DensityOperator<double>(HermitianOperator<double>(rho0)),
          DensityOperator<double>(HermitianOperator<double>(rho1))};
}

}  // namespace qspoof::radar
