// qirka_cli: batch front end for structure-preserving H2 reduction.
//
//   qirka_cli run      --config run.ini   [--out dir]
//   qirka_cli sweep    --config sweep.ini [--out dir] [--workers k]
//   qirka_cli diagnose --model dir [--basis V.txt]
//
// Exit status: 0 converged with clean defects, 1 finished but not converged
// or defects above 1e-10, 2 configuration / input / engine error.

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "qirka/cli/runner.hpp"

namespace {

namespace fs = std::filesystem;
using qirka::io::format_double;

fs::path pick_out(const std::string& flag, const fs::path& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  return "qirka_out";
}

void print_report(const qirka::cli::RunReport& r) {
  std::cout << r.benchmark << " " << r.variant << " n=" << r.n << " m=" << r.m << " r=" << r.r
            << " iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
            << " h2_rel=" << format_double(r.h2_rel) << " h2_abs=" << format_double(r.h2_abs)
            << " seconds=" << format_double(r.seconds);
  if (!r.error_code.empty()) std::cout << " error=" << r.error_code;
  std::cout << '\n';
  if (!r.message.empty()) std::cerr << "  " << r.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving H2 model reduction for linear quantum systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir, model_dir, basis_path;
  unsigned workers = 1;

  auto* run = app.add_subcommand("run", "Run Q-IRKA on one configuration");
  run->add_option("--config", config_path, "INI configuration file")->required();
  run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run an (n, m, r) sweep");
  sweep->add_option("--config", config_path, "INI configuration file with a [sweep] section")
      ->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* diagnose = app.add_subcommand("diagnose", "PR residuals and basis defects of a model");
  diagnose->add_option("--model", model_dir, "Directory with A.txt B.txt C.txt D.txt")->required();
  diagnose->add_option("--basis", basis_path, "Trial basis V in matrix format");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = qirka::cli::load_run_config(config_path);
      const auto report = qirka::cli::cmd_run(cfg, pick_out(out_dir, cfg.output_dir));
      print_report(report);
      return report.exit_status;
    }
    if (*sweep) {
      const auto cfg = qirka::cli::load_sweep_config(config_path);
      const auto reports = qirka::cli::cmd_sweep(qirka::cli::expand_sweep(cfg),
                                                 pick_out(out_dir, cfg.base.output_dir), workers);
      int status = 0;
      for (const auto& r : reports) {
        print_report(r);
        status = std::max(status, r.exit_status);
      }
      return status;
    }
    if (*diagnose) {
      std::optional<fs::path> basis;
      if (!basis_path.empty()) basis = basis_path;
      const auto d = qirka::cli::cmd_diagnose(model_dir, basis);
      std::cout << "r1_norm " << format_double(d.pr.r1_norm) << '\n'
                << "r2_norm " << format_double(d.pr.r2_norm) << '\n'
                << "r3_norm " << format_double(d.pr.r3_norm) << '\n';
      if (d.basis) {
        std::cout << "symp_defect " << format_double(d.basis->symp_defect) << '\n'
                  << "left_defect " << format_double(d.basis->left_defect) << '\n'
                  << "identity_defect " << format_double(d.basis->identity_defect) << '\n';
      }
      return 0;
    }
  } catch (const qirka::Error& e) {
    std::cerr << "error [" << qirka::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
