// oldb: scenario runner for the Oldroyd-B lab.
//
//   oldb run <config> [--out DIR] [--seed N] [--threads N]
//   oldb verify-linear [--out DIR] [--n N] [--seed N]
//   oldb fit <records.csv> [--column NAME]... [--t-start T] [--out FILE]
//
// Exit codes: 0 pass, 1 scenario failure, 2 configuration error, 3 I/O error.
// OLDB_THREADS overrides --threads.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "oldroyd/experiment/scenarios.hpp"

namespace {

using namespace oldroyd;
using namespace oldroyd::experiment;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;
constexpr int kIo = 3;

int effective_threads(int flag) {
  if (const char* env = std::getenv("OLDB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v < 1) throw std::invalid_argument("nonpositive");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("OLDB_THREADS: expected a positive integer, got '") + env + "'");
    }
  }
  return std::max(1, flag);
}

int execute(const Scenario& sc, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_scenario(sc, threads);
  emit_outputs(res.artifacts, sc.out_dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << to_string(sc.kind) << ": " << (res.pass ? "PASS" : "FAIL") << " (" << secs << " s) -> " << sc.out_dir
            << "\n";
  if (!res.pass && res.summary.contains("failures"))
    for (const auto& f : res.summary["failures"]) std::cout << "  " << f.get<std::string>() << "\n";
  return res.pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oldroyd-B torus experiments"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Concurrent sweep members")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run a scenario config");
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--out", out, "Output directory (overrides out_dir)");
  run->add_option("--seed", seed, "Seed (overrides seed)");
  run->add_option("--threads", threads, "Concurrent sweep members")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify-linear", "Green's matrix and band-decay verification");
  int verify_n = 32;
  std::optional<std::string> verify_out;
  std::optional<std::uint64_t> verify_seed;
  verify->add_option("--out", verify_out, "Output directory");
  verify->add_option("--n", verify_n, "Grid points per axis");
  verify->add_option("--seed", verify_seed, "Seed of the band field");

  auto* fit = app.add_subcommand("fit", "Decay-rate fits of a record CSV");
  std::string csv_path;
  std::vector<std::string> columns;
  std::optional<double> t_start;
  std::optional<std::string> fit_out;
  fit->add_option("csv", csv_path, "Record CSV")->required();
  fit->add_option("--column", columns, "Columns to fit (default h3_u, h2_grad_tau)");
  fit->add_option("--t-start", t_start, "Start of the fit window (default: last 60% of samples)");
  fit->add_option("--out", fit_out, "Write the JSON report here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) {
      Scenario sc = parse_config(config_path);
      if (out) sc.out_dir = *out;
      if (seed) sc.config.seed = *seed;
      return execute(sc, effective_threads(threads));
    }
    if (*verify) {
      Scenario sc;
      sc.kind = ScenarioKind::linear_verify;
      sc.config.n = verify_n;
      sc.config.init.k_max = std::min(sc.config.init.k_max, verify_n / 3);
      if (verify_seed) sc.config.seed = *verify_seed;
      sc.out_dir = verify_out.value_or("verify-linear");
      // round trip through the parser so the same validation applies
      sc = parse_config_text(resolved_text(sc));
      return execute(sc, effective_threads(threads));
    }
    if (*fit) {
      std::ifstream in(csv_path);
      if (!in) throw IoError("cannot open " + csv_path);
      if (columns.empty()) columns = {"h3_u", "h2_grad_tau"};
      const auto report = fit_records_csv(in, columns, diag::FitWindow{t_start, {}});
      const std::string text = dump(report);
      std::cout << text;
      if (fit_out) {
        std::ofstream os(*fit_out);
        if (!(os << text)) throw IoError("cannot write " + *fit_out);
      }
      return kPass;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const InputError& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kFail;
  } catch (const BlowUpError& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kFail;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  return kConfig;
}
