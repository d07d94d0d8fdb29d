#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qspoof/harness.hpp"

using namespace qspoof;
using namespace qspoof::cli;
namespace fs = std::filesystem;

namespace {

RunConfig small_number_config() {
  return parse_config(json{{"K", 2}, {"basis_mode", "number"}, {"lambdas", {1, 0}}, {"n_max", 3}});
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qspoof_harness_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  const auto cfg = parse_config(json::object());
  EXPECT_EQ(cfg.scenario.K, 8u);
  EXPECT_EQ(cfg.scenario.basis_mode, radar::BasisMode::kCoherent);
  EXPECT_EQ(cfg.eigen_tolerance, 1e-9);
  EXPECT_EQ(cfg.log_floor, 1e-18);
  EXPECT_EQ(cfg.scenario.dimension_cap, 4096u);
}

TEST(Config, UnknownKeyNamed) {
  try {
    parse_config(json{{"Kay", 3}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'Kay'"), std::string::npos);
  }
}

TEST(Config, IllTypedKeyNamed) {
  for (const auto& [key, value] : std::vector<std::pair<std::string, json>>{
           {"N_B", "high"}, {"K", 2.5}, {"lambdas", 1.0}, {"basis_mode", 3}, {"n_max", -1}}) {
    try {
      parse_config(json{{key, value}});
      FAIL() << key;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("'" + key + "'"), std::string::npos) << e.what();
    }
  }
}

TEST(Config, RoundtripThroughJson) {
  const auto cfg = small_number_config();
  const auto again = parse_config(config_to_json(cfg));
  EXPECT_EQ(config_to_json(again), config_to_json(cfg));
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"default.json", "number_mode.json", "coherent_k4.json"}) {
    EXPECT_NO_THROW(load_config(std::string(QSPOOF_SOURCE_DIR) + "/configs/" + name)) << name;
  }
  const auto def = load_config(std::string(QSPOOF_SOURCE_DIR) + "/configs/default.json");
  EXPECT_EQ(config_to_json(def), config_to_json(RunConfig{}));
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(load_config("/nonexistent/qspoof.json"), ConfigError);
  const auto p = scratch("bad.json");
  write_text(p, "{ \"K\": ");
  EXPECT_THROW(load_config(p.string()), ConfigError);
}

TEST(Validate, DefaultPassesAndEchoes) {
  const auto text = validate(RunConfig{});
  EXPECT_NE(text.find("\"basis_mode\": \"coherent\""), std::string::npos);
  EXPECT_NE(text.find("729"), std::string::npos);
}

TEST(Validate, FirstFailingRuleNamed) {
  auto cfg = parse_config(json{{"basis_mode", "number"}, {"k", 1.5}});
  try {
    validate(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "k must be integer in number mode");
  }
  cfg = parse_config(json{{"n_max", 4}});
  try {
    validate(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("9^4 = 6561"), std::string::npos);
  }
}

TEST(Sweep, RowOrderAndInvariants) {
  const auto res = run_sweep(small_number_config());
  ASSERT_EQ(res.rows.size(), 6u);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    EXPECT_EQ(res.rows[i].n, i / 2 + 1);
    EXPECT_EQ(res.rows[i].lambda, i % 2 == 0 ? 0.0 : 1.0);
  }
  for (const auto& r : res.rows) {
    EXPECT_NEAR(r.miss_clean, 1.0 - r.p_d_clean, 1e-12);
    EXPECT_NEAR(r.miss_attacked, 1.0 - r.p_d_attacked, 1e-12);
    EXPECT_NEAR(r.p_f_attacked, r.p_f_clean, 1e-12);
    EXPECT_LE(r.p_d_attacked, r.p_d_clean + 1e-10);
    EXPECT_TRUE(r.separable_eigvecs);
  }
}

TEST(Sweep, NumberModeDerivedPoints) {
  const auto res = run_sweep(small_number_config());
  const auto& clean = res.rows[0];
  EXPECT_NEAR(clean.p_d_clean, 0.8, 1e-12);
  EXPECT_EQ(clean.p_f_clean, 0.0);
  EXPECT_EQ(clean.p_d_attacked, clean.p_d_clean);
  EXPECT_EQ(clean.rel_entropy_cost, 0.0);
  const auto& attacked = res.rows[1];
  EXPECT_NEAR(attacked.p_d_attacked, 0.595390, 1e-6);
  const auto w = oracle::diagonal_tilt({0.12, 0.08, 0.8}, {0, 0, 1}, 1.0);
  EXPECT_NEAR(attacked.rel_entropy_cost, oracle::kl(w, {0.12, 0.08, 0.8}), 1e-10);
  EXPECT_NEAR(attacked.wasserstein, 0.40921935, 1e-7);
}

TEST(Sweep, MatchesClassicalOracleInNumberMode) {
  const auto res = run_sweep(small_number_config());
  for (const auto& r : res.rows) {
    const auto ref = oracle::classical_lrt({0.12, 0.08, 0.8}, {0.6, 0.4, 0.0}, r.n, r.tau);
    EXPECT_NEAR(r.p_d_clean, ref.p_d, 1e-10);
    EXPECT_NEAR(r.p_f_clean, ref.p_f, 1e-10);
  }
}

TEST(Sweep, AttackOffOnlyGivesCleanColumns) {
  auto cfg = small_number_config();
  cfg.scenario.lambdas = {0.0};
  for (const auto& r : run_sweep(cfg).rows) {
    EXPECT_EQ(r.p_d_attacked, r.p_d_clean);
    EXPECT_EQ(r.p_f_attacked, r.p_f_clean);
    EXPECT_EQ(r.wasserstein, 0.0);
  }
}

TEST(Sweep, ParallelMatchesSerial) {
  auto cfg = parse_config(json{{"K", 2}, {"lambdas", {0, 0.5, 1}}, {"n_max", 4}});
  EXPECT_EQ(format_csv(run_sweep(cfg, 1).rows), format_csv(run_sweep(cfg, 3).rows));
}

TEST(Sweep, CapExceededRowsSkippedWithWarning) {
  auto cfg = small_number_config();
  cfg.scenario.n_max = 9;
  cfg.scenario.dimension_cap = 100;
  const auto res = run_sweep(cfg);
  ASSERT_EQ(res.rows.size(), 8u);
  EXPECT_EQ(res.rows.back().n, 4u);
  ASSERT_FALSE(res.warnings.empty());
  EXPECT_NE(res.warnings.front().find("n=5 skipped"), std::string::npos);
}

TEST(CmdSweep, DeterministicAndSidecar) {
  const auto cfg_path = scratch("cfg.json");
  write_text(cfg_path, json{{"K", 2}, {"basis_mode", "number"}, {"lambdas", {0, 1}}, {"n_max", 6},
                            {"dimension_cap", 300}}
                           .dump());
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  cmd_sweep(cfg_path.string(), a.string());
  cmd_sweep(cfg_path.string(), b.string());
  EXPECT_EQ(read_file(a.string()), read_file(b.string()));
  ASSERT_TRUE(fs::exists(a.string() + ".warnings.txt"));
  EXPECT_NE(read_file(a.string() + ".warnings.txt").find("n=6 skipped"), std::string::npos);
}

TEST(Csv, HeaderAndFormatting) {
  SweepRow r;
  r.n = 2;
  r.lambda = 0.25;
  r.tau = 29.0 / 30.0;
  r.p_f_clean = -0.0;
  r.separable_eigvecs = true;
  const auto text = format_csv({r});
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  const auto line = text.substr(text.find('\n') + 1);
  EXPECT_EQ(line, "2,0.25,0.966666666667,0,0,0,0,0,0,0,0,true\n");
}

TEST(Csv, ParseRoundtrip) {
  const auto rows = run_sweep(small_number_config()).rows;
  const auto text = format_csv(rows);
  const auto back = parse_sweep_csv(text);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].n, rows[i].n);
    EXPECT_NEAR(back[i].p_d_attacked, rows[i].p_d_attacked, 1e-11);
    EXPECT_EQ(back[i].separable_eigvecs, rows[i].separable_eigvecs);
  }
  EXPECT_EQ(format_csv(back), text);
}

TEST(Csv, ParseErrors) {
  EXPECT_THROW(parse_sweep_csv(""), ParseError);
  EXPECT_THROW(parse_sweep_csv(std::string(kCsvHeader) + "\n"), ParseError);
  EXPECT_THROW(parse_sweep_csv("n,lambda\n1,0\n"), ParseError);
  EXPECT_THROW(parse_sweep_csv(std::string(kCsvHeader) + "\n1,0,1\n"), ParseError);
  EXPECT_THROW(parse_sweep_csv(std::string(kCsvHeader) + "\n1,x,1,1,1,1,1,1,1,1,1,true\n"), ParseError);
  EXPECT_THROW(parse_sweep_csv(std::string(kCsvHeader) + "\n1,0,1,1,1,1,1,1,1,1,1,yes\n"), ParseError);
}

TEST(Rates, GeometricSyntheticSlope) {
  std::vector<SweepRow> rows;
  for (std::size_t n = 1; n <= 5; ++n) {
    SweepRow r;
    r.n = n;
    r.lambda = 0.5;
    r.miss_clean = r.miss_attacked = std::pow(0.2, static_cast<double>(n));
    r.p_f_attacked = 0.0;
    rows.push_back(r);
  }
  const auto report = compute_rates(parse_sweep_csv(format_csv(rows)));
  const auto* miss = report.find(0.5, "miss_attacked");
  ASSERT_NE(miss, nullptr);
  ASSERT_TRUE(miss->fit.has_value());
  EXPECT_NEAR(miss->fit->slope, -1.609438, 1e-6);
  const auto* pf = report.find(0.5, "p_f_attacked");
  ASSERT_NE(pf, nullptr);
  EXPECT_EQ(pf->status, "exact zero");
  EXPECT_NE(pf->message.find("-inf sentinel"), std::string::npos);
  const auto text = format_rates_text(report);
  EXPECT_NE(text.find("exact zero"), std::string::npos);
  EXPECT_NE(format_rates_csv(report).find("p_f_attacked,exact zero,-inf"), std::string::npos);
}

TEST(Rates, InsufficientDataIsReportedNotFatal) {
  const auto rows = run_sweep(parse_config(json{{"K", 2}, {"basis_mode", "number"}, {"lambdas", {0}}, {"n_max", 2}})).rows;
  const auto report = compute_rates(rows);
  const auto* miss = report.find(0.0, "miss_clean");
  ASSERT_NE(miss, nullptr);
  EXPECT_EQ(miss->status, "insufficient data");
}

TEST(Inspect, NumberModeSingleCopy) {
  const auto cfg = parse_config(json{{"K", 2}, {"basis_mode", "number"}});
  const auto dump = attack_inspect(cfg, 1, 1.0);
  const auto& star = dump.at("rho1_attacked");
  EXPECT_NEAR(star[0][0].get<double>(), 0.242766, 1e-6);
  EXPECT_NEAR(star[1][1].get<double>(), 0.161844, 1e-6);
  EXPECT_NEAR(star[2][2].get<double>(), 0.595390, 1e-6);
  EXPECT_EQ(dump.at("rho0_attacked"), dump.at("rho0_clean"));
  EXPECT_LE(dump.at("stationarity_residual").get<double>(), 1e-4);
  EXPECT_TRUE(dump.at("separability").at("all_product").get<bool>());
  EXPECT_EQ(dump.at("helstrom_rank").get<int>(), 1);
}

TEST(Inspect, Rho0UndistortedAcrossGrid) {
  const auto cfg = parse_config(json{{"K", 3}});
  for (std::size_t n : {1u, 2u}) {
    for (double lam : {0.0, 0.5, 2.0}) {
      const auto dump = attack_inspect(cfg, n, lam);
      EXPECT_EQ(dump.at("rho0_attacked"), dump.at("rho0_clean"));
      EXPECT_EQ(dump.at("rates").at("p_f_attacked"), dump.at("rates").at("p_f_clean"));
    }
  }
}

TEST(Inspect, CoherentStationarity) {
  const auto cfg = parse_config(json{{"K", 4}});
  const auto dump = attack_inspect(cfg, 2, 0.5);
  EXPECT_LE(dump.at("stationarity_residual").get<double>(), 1e-4);
}
