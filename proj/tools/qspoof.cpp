#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qspoof/qspoof.hpp"
#ifdef QSPOOF_WITH_PLOT
#include "qspoof/svg_plot.hpp"
#endif

namespace {

int run_validate(const std::string& config) {
  const auto cfg = qspoof::cli::load_config(config);
  std::cout << qspoof::cli::validate(cfg);
  return 0;
}

int run_sweep(const std::string& config, const std::string& out, unsigned jobs) {
  const auto result = qspoof::cli::cmd_sweep(config, out, jobs);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "wrote " << result.rows.size() << " rows to " << out << "\n";
  return 0;
}

int run_rates(const std::string& csv, const std::string& out) {
  const auto rows = qspoof::cli::parse_sweep_csv(qspoof::cli::read_file(csv));
  const auto report = qspoof::cli::compute_rates(rows);
  std::cout << qspoof::cli::format_rates_text(report);
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw qspoof::Error("cannot write '" + out + "'");
    f << qspoof::cli::format_rates_csv(report);
  }
  return 0;
}

int run_inspect(const std::string& config, std::size_t n, double lambda, const std::string& out) {
  const auto cfg = qspoof::cli::load_config(config);
  const auto dump = qspoof::cli::attack_inspect(cfg, n, lambda).dump(2);
  if (out.empty()) {
    std::cout << dump << "\n";
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw qspoof::Error("cannot write '" + out + "'");
    f << dump << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qspoof: quantum hypothesis testing under a Stackelberg spoofing attacker"};
  app.require_subcommand(1);

  std::string config, out, csv;
  std::size_t n = 1;
  double lambda = 0.0;
  unsigned jobs = 1;

  auto* validate = app.add_subcommand("validate", "check a config and echo the resolved values");
  validate->add_option("--config", config, "JSON config")->required();

  auto* sweep = app.add_subcommand("sweep", "run the (n, lambda) grid and write CSV");
  sweep->add_option("--config", config, "JSON config")->required();
  sweep->add_option("--out", out, "output CSV")->required();
  sweep->add_option("--jobs", jobs, "concurrent n values")->check(CLI::PositiveNumber);

  auto* rates = app.add_subcommand("rates", "fit decay exponents to a sweep CSV");
  rates->add_option("--csv", csv, "sweep CSV")->required();
  rates->add_option("--out", out, "optional machine-readable report CSV");

  auto* inspect = app.add_subcommand("attack-inspect", "dump states, effect and diagnostics as JSON");
  inspect->add_option("--config", config, "JSON config")->required();
  inspect->add_option("--n", n, "number of copies")->required()->check(CLI::PositiveNumber);
  inspect->add_option("--lambda", lambda, "attacker lambda")->required()->check(CLI::NonNegativeNumber);
  inspect->add_option("--out", out, "output JSON (default stdout)");

#ifdef QSPOOF_WITH_PLOT
  auto* plot = app.add_subcommand("plot", "render a sweep CSV as a log-scale SVG");
  plot->add_option("--csv", csv, "sweep CSV")->required();
  plot->add_option("--out", out, "output SVG")->required();
#endif

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return run_validate(config);
    if (*sweep) return run_sweep(config, out, jobs);
    if (*rates) return run_rates(csv, out);
    if (*inspect) return run_inspect(config, n, lambda, out);
#ifdef QSPOOF_WITH_PLOT
    if (*plot) {
      qspoof::plot::cmd_plot(csv, out);
      return 0;
    }
#endif
  } catch (const qspoof::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qspoof::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const qspoof::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
