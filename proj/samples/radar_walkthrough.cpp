// Number-mode radar at n = 1..3: Helstrom detector, attacker best response
// for a few lambdas, and the resulting detection rates.

#include <cstdio>

#include "qspoof/qspoof.hpp"

using namespace qspoof;

int main() {
  auto cfg = radar::default_scenario();
  cfg.basis_mode = radar::BasisMode::kNumber;
  cfg.K = 2;
  const auto h = radar::build_hypotheses(cfg);

  std::printf("%2s %7s %8s %10s %10s %10s %10s\n", "n", "lambda", "tau", "p_d", "p_f", "p_d*", "S(rho*||rho)");
  for (std::size_t n = 1; n <= 3; ++n) {
    const double tau = detector::threshold(cfg.threshold, n);
    const auto effect = detector::helstrom_effect(h, n, tau);
    const auto rho1n = qmat::tensor_power(h.rho1(), n);
    const auto rho0n = qmat::tensor_power(h.rho0(), n);
    const auto clean = detector::rates(effect, rho1n, rho0n);
    for (double lam : {0.0, 0.5, 1.0, 2.0}) {
      const auto b = attacker::beta(attacker::AttackConfig(lam), n);
      const auto star = attacker::best_response_rho1(h.rho1(), effect, b, n);
      const double pd = detector::outcome_probability(effect, star);
      std::printf("%2zu %7.2f %8.4f %10.6f %10.6f %10.6f %10.6f\n", n, lam, tau, clean.p_d, clean.p_f, pd,
                  analysis::relative_entropy(star, rho1n));
    }
  }
}
