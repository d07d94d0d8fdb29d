#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qspoof/attacker.hpp"

using namespace qspoof;
using namespace qspoof::attacker;
using qmat::Complex;

using Herm = qmat::HermitianOperator<double>;
using HermC = qmat::HermitianOperator<Complex>;
using Dens = qmat::DensityOperator<double>;
using DensC = qmat::DensityOperator<Complex>;
using Effect = detector::ProjectiveEffect<double>;

namespace {

const Dens& radar_rho1() {
  static const Dens rho = Dens::diagonal({0.12, 0.08, 0.8});
  return rho;
}
const Dens& radar_rho0() {
  static const Dens rho = Dens::diagonal({0.6, 0.4, 0.0});
  return rho;
}

Effect radar_effect(std::size_t n) {
  const double tau = detector::threshold(detector::ThresholdSchedule(0.7, 1.5, 1.0, 1.0), n);
  return detector::helstrom_effect(qmat::tensor_power(radar_rho1(), n), qmat::tensor_power(radar_rho0(), n), tau);
}

template <typename M>
M exp_log_minus(const M& rho, const M& pi, double beta) {
  Eigen::SelfAdjointEigenSolver<M> es(rho);
  const Eigen::VectorXd l = es.eigenvalues().array().log().matrix();
  const M expo = es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint() - pi / beta;
  Eigen::SelfAdjointEigenSolver<M> ee(expo);
  const Eigen::VectorXd w = ee.eigenvalues().array().exp().matrix();
  const M out = ee.eigenvectors() * w.asDiagonal() * ee.eigenvectors().adjoint();
  return out / std::real(out.trace());
}

}  // namespace

TEST(Beta, Examples) {
  EXPECT_NEAR(*beta(AttackConfig(0.5), 3), 0.125, 1e-15);
  for (std::size_t n : {1u, 4u, 9u}) EXPECT_EQ(*beta(AttackConfig(1.0), n), 1.0);
  EXPECT_FALSE(beta(AttackConfig(0.0), 2).has_value());
  EXPECT_EQ(*beta(AttackConfig(0.0, false), 2), 0.0);
  EXPECT_THROW(AttackConfig(-0.1), DomainError);
  EXPECT_THROW(beta(AttackConfig(1.0), 0), DomainError);
}

TEST(BestResponse, DiagonalTiltExample) {
  const auto e = radar_effect(1);
  const auto star = best_response_rho1(radar_rho1(), e, 1.0, 1);
  double z = 0.0;
  const auto w = oracle::diagonal_tilt({0.12, 0.08, 0.8}, {0.0, 0.0, 1.0}, 1.0, &z);
  EXPECT_NEAR(z, 0.4943036, 1e-7);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(star.matrix()(i, i), w[i], 1e-10);
  EXPECT_NEAR(star.matrix()(0, 0), 0.242766, 1e-6);
  EXPECT_NEAR(star.matrix()(1, 1), 0.161844, 1e-6);
  EXPECT_NEAR(star.matrix()(2, 2), 0.595390, 1e-6);
}

TEST(BestResponse, CommutingClosedFormAcrossN) {
  const std::vector<double> r{0.12, 0.08, 0.8};
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto e = radar_effect(n);
    std::vector<double> rn(1, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> next;
      for (double a : rn)
        for (double b : r) next.push_back(a * b);
      rn = next;
    }
    std::vector<double> pi(rn.size());
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = e.matrix()(i, i);
    // The Helstrom effect here is diagonal and commutes with rho1^n.
    EXPECT_LT((e.matrix() - Eigen::MatrixXd(e.matrix().diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
    for (double b : {0.3, 1.0, 4.0}) {
      const auto star = best_response_rho1(radar_rho1(), e, b, n);
      const auto w = oracle::diagonal_tilt(rn, pi, b);
      for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(star.matrix()(i, i), w[i], 1e-10);
    }
  }
}

TEST(BestResponse, MatchesDenseFormulaOnFullRankNoncommuting) {
  std::mt19937_64 rng(301);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXcd rho = oracle::random_density<Complex>(3, rng);
    const Eigen::MatrixXcd rho0 = oracle::random_density<Complex>(3, rng);
    const DensC r1{HermC(rho)}, r0{HermC(rho0)};
    const auto e = detector::helstrom_effect(qmat::tensor_power(r1, 2), qmat::tensor_power(r0, 2), 1.0);
    const double b = 0.7;
    const auto star = best_response_rho1(r1, e, b, 2);
    const Eigen::MatrixXcd ref = exp_log_minus<Eigen::MatrixXcd>(oracle::kron(rho, rho), e.matrix(), b);
    EXPECT_LT((star.matrix() - ref).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(BestResponse, LargeBetaRecoversClean) {
  for (std::size_t n : {1u, 2u}) {
    const auto e = radar_effect(n);
    const auto star = best_response_rho1(radar_rho1(), e, 1e6, n);
    EXPECT_LE(analysis::wasserstein_single(star, qmat::tensor_power(radar_rho1(), n)), 1e-4);
  }
}

TEST(BestResponse, ZeroEffectAndAttackOffReturnClean) {
  for (std::size_t n : {1u, 2u}) {
    const auto clean = qmat::tensor_power(radar_rho1(), n);
    const auto dim = clean.dim();
    EXPECT_EQ(best_response_rho1(radar_rho1(), Effect::zero(dim), 0.5, n).matrix(), clean.matrix());
    EXPECT_EQ(best_response_rho1(radar_rho1(), radar_effect(n), std::nullopt, n).matrix(), clean.matrix());
  }
}

TEST(BestResponse, ResultIsValidState) {
  std::mt19937_64 rng(303);
  const DensC r1{HermC(oracle::random_density<Complex>(3, rng))};
  const DensC r0{HermC(oracle::random_density<Complex>(3, rng))};
  const auto e = detector::helstrom_effect(qmat::tensor_power(r1, 2), qmat::tensor_power(r0, 2), 0.9);
  const auto star = best_response_rho1(r1, e, 0.2, 2);
  EXPECT_NO_THROW(DensC(star.op(), 1e-10));
  EXPECT_NEAR(star.op().trace(), 1.0, 1e-12);
}

TEST(BestResponse, Errors) {
  EXPECT_THROW(best_response_rho1(radar_rho1(), radar_effect(1), -1.0, 1), DomainError);
  EXPECT_THROW(best_response_rho1(radar_rho1(), radar_effect(2), 1.0, 1), ShapeMismatch);
  BestResponseOptions opts;
  opts.dimension_cap = 10;
  EXPECT_THROW(best_response_rho1(radar_rho1(), radar_effect(2), 1.0, 3, opts), DimensionCapExceeded);
}

TEST(BestResponse, RankDeficientSupportRespected) {
  // Coherent-style rank-2 rho1 with an effect that leaks outside its support.
  const Eigen::Vector3d v0(1.0, 0.0, 0.0);
  const Eigen::Vector3d v1 = Eigen::Vector3d(1.0, 1.0, 0.5).normalized();
  const Eigen::Matrix3d rho = 0.3 * v0 * v0.transpose() + 0.7 * v1 * v1.transpose();
  const Dens r1{Herm(rho)};
  const Eigen::Vector3d p = Eigen::Vector3d(0.0, 1.0, 1.0).normalized();
  const Effect e{Herm(Eigen::Matrix3d(p * p.transpose()))};
  const auto star = best_response_rho1(r1, e, 0.5, 1);
  const Eigen::Vector3d kernel = v0.cross(v1).normalized();
  EXPECT_LT(kernel.dot(star.matrix() * kernel), 1e-12);
  EXPECT_LT(analysis::relative_entropy(star, r1), analysis::kInfinity);
}

TEST(BestResponseRho0, ExactPower) {
  EXPECT_EQ(best_response_rho0(radar_rho0(), 1).matrix(), radar_rho0().matrix());
  EXPECT_EQ(best_response_rho0(radar_rho0(), 2).matrix(), qmat::tensor_power(radar_rho0(), 2).matrix());
  const auto pure = best_response_rho0(Dens::diagonal({1.0, 0.0}), 3);
  EXPECT_EQ(pure.matrix()(0, 0), 1.0);
  EXPECT_EQ(pure.matrix().cwiseAbs().sum(), 1.0);
  EXPECT_EQ((pure.matrix() - oracle::kron_power(Dens::diagonal({1.0, 0.0}).matrix(), 3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Properties, NoGainAndMonotoneInBeta) {
  std::mt19937_64 rng(305);
  std::vector<std::pair<DensC, DensC>> cases;
  cases.emplace_back(DensC(HermC(radar_rho0().matrix().cast<Complex>())),
                     DensC(HermC(radar_rho1().matrix().cast<Complex>())));
  for (int i = 0; i < 3; ++i) {
    cases.emplace_back(DensC(HermC(oracle::random_density<Complex>(3, rng))),
                       DensC(HermC(oracle::random_density<Complex>(3, rng))));
  }
  for (const auto& [r0, r1] : cases) {
    for (std::size_t n : {1u, 2u}) {
      const auto r1n = qmat::tensor_power(r1, n);
      const auto e = detector::helstrom_effect(r1n, qmat::tensor_power(r0, n), 1.0);
      const double clean_pd = detector::outcome_probability(e, r1n);
      double prev_pd = -1.0, prev_cost = analysis::kInfinity;
      for (double b : {0.1, 0.5, 1.0, 5.0, 25.0}) {
        const auto star = best_response_rho1(r1, e, b, n);
        const double pd = qmat::trace_of_product(e.matrix(), star.matrix());
        const double cost = analysis::relative_entropy(star, r1n);
        EXPECT_LE(pd, clean_pd + 1e-10);
        EXPECT_GE(pd, prev_pd - 1e-10);
        EXPECT_LE(cost, prev_cost + 1e-10);
        prev_pd = pd;
        prev_cost = cost;
      }
    }
  }
}

TEST(Objective, CleanInputs) {
  const auto e = radar_effect(2);
  const auto r1n = qmat::tensor_power(radar_rho1(), 2);
  const auto r0n = qmat::tensor_power(radar_rho0(), 2);
  EXPECT_NEAR(attacker_objective(r1n, r0n, e, r1n, r0n, 0.7), qmat::trace_of_product(e.matrix(), r1n.matrix()),
              1e-15);
}

TEST(Objective, SupportViolationIsInfinite) {
  const auto e = radar_effect(1);
  const auto off = Dens::diagonal({0.5, 0.5, 0.0});
  EXPECT_EQ(attacker_objective(radar_rho1(), off, e, radar_rho1(), radar_rho0(), 1.0), 0.8 + 1.0 * 0.0 +
            analysis::relative_entropy(off, radar_rho0()));
  const auto leaky = Dens::diagonal({0.5, 0.5});
  const auto pure = Dens::diagonal({1.0, 0.0});
  EXPECT_EQ(attacker_objective(leaky, pure, Effect::zero(2), pure, pure, 1.0), analysis::kInfinity);
}

TEST(Objective, TiltBeatsClean) {
  const auto e = radar_effect(1);
  const auto star = best_response_rho1(radar_rho1(), e, 1.0, 1);
  const double obj = attacker_objective(star, radar_rho0(), e, radar_rho1(), radar_rho0(), 1.0);
  const auto w = oracle::diagonal_tilt({0.12, 0.08, 0.8}, {0, 0, 1}, 1.0);
  EXPECT_NEAR(obj, w[2] + oracle::kl(w, {0.12, 0.08, 0.8}), 1e-10);
  EXPECT_NEAR(obj, 0.704605, 1e-6);
  EXPECT_LT(obj, 0.8);
}

TEST(Objective, BestResponseMinimizesAgainstPerturbations) {
  std::mt19937_64 rng(307);
  const auto e = radar_effect(2);
  const auto r1n = qmat::tensor_power(radar_rho1(), 2);
  const auto r0n = qmat::tensor_power(radar_rho0(), 2);
  const auto star = best_response_rho1(radar_rho1(), e, 0.8, 2);
  const double best = attacker_objective(star, r0n, e, r1n, r0n, 0.8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd other = oracle::random_density<double>(9, rng);
    // Mix toward a random state supported inside supp(rho1^n).
    const Eigen::MatrixXd p = r1n.matrix() * other * r1n.matrix();
    const Eigen::MatrixXd q = p / p.trace();
    const double t = 0.3 * u(rng);
    const Dens mixed{Herm((1 - t) * star.matrix() + t * q)};
    EXPECT_GE(attacker_objective(mixed, r0n, e, r1n, r0n, 0.8), best - 1e-12);
  }
}

TEST(Stationarity, BestResponseIsStationary) {
  for (std::size_t n : {1u, 2u}) {
    const auto e = radar_effect(n);
    const auto r1n = qmat::tensor_power(radar_rho1(), n);
    for (double lam : {0.5, 1.0, 2.0}) {
      const double b = *beta(AttackConfig(lam), n);
      const auto star = best_response_rho1(radar_rho1(), e, b, n);
      EXPECT_LE(verify_stationarity(star, e, r1n, b, 20), 1e-4) << "n=" << n << " lambda=" << lam;
    }
  }
}

TEST(Stationarity, CleanStateIsNotStationaryUnderPenalty) {
  const auto e = radar_effect(1);
  EXPECT_GT(verify_stationarity(radar_rho1(), e, radar_rho1(), 1.0, 20), 1e-2);
}

TEST(Stationarity, CleanStateIsStationaryWithoutPenalty) {
  EXPECT_LE(verify_stationarity(radar_rho1(), Effect::zero(3), radar_rho1(), 1.0, 20), 1e-4);
}

TEST(Stationarity, DegenerateSupport) {
  const auto pure = Dens::diagonal({1.0, 0.0});
  EXPECT_THROW(verify_stationarity(pure, Effect::zero(2), pure, 1.0, 5), DomainError);
}

TEST(Kraus, Examples) {
  const Eigen::Matrix2cd x = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  const auto unitary = kraus_completeness_check(KrausChannel<Complex>({x}));
  EXPECT_TRUE(unitary.complete);
  EXPECT_LT(unitary.residual, 1e-15);

  const auto mix = kraus_completeness_check(
      KrausChannel<Complex>({std::sqrt(0.5) * Eigen::Matrix2cd::Identity().eval(), (std::sqrt(0.5) * x).eval()}));
  EXPECT_TRUE(mix.complete);

  const auto shrink = kraus_completeness_check(KrausChannel<Complex>({(0.9 * Eigen::Matrix2cd::Identity()).eval()}));
  EXPECT_FALSE(shrink.complete);
  EXPECT_NEAR(shrink.residual, 0.19, 1e-12);
}

TEST(Kraus, ConventionsDifferForNonUnital) {
  // Amplitude damping: trace preserving, not unital.
  const double g = 0.3;
  Eigen::Matrix2d e0, e1;
  e0 << 1, 0, 0, std::sqrt(1 - g);
  e1 << 0, std::sqrt(g), 0, 0;
  const KrausChannel<double> ch({e0, e1});
  EXPECT_TRUE(kraus_completeness_check(ch, KrausConvention::kInputSide).complete);
  const auto out = kraus_completeness_check(ch, KrausConvention::kOutputSide);
  EXPECT_FALSE(out.complete);
  EXPECT_NEAR(out.residual, g, 1e-12);
}

TEST(Kraus, ShapeErrors) {
  EXPECT_THROW(KrausChannel<double>({}), DomainError);
  EXPECT_THROW(KrausChannel<double>({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)}),
               ShapeMismatch);
}
