#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrum/cli.hpp"
#include "rrum/common.hpp"

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rrum::io_error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw rrum::io_error("bad config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw rrum::io_error("config must be a JSON object");
  return j;
}

// Config-file values act as defaults: they fill any option the command line
// left untouched.
template <typename T>
void fill(const CLI::App& app, const json& cfg, const std::string& flag,
          const std::string& key, T& value) {
  const CLI::Option* opt = app.get_option_no_throw(flag);
  if (opt != nullptr && opt->count() > 0) return;
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RRUM simulation and MCMC estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path;

  rrum::cli::SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate correlated attributes and RRUM responses");
  simulate->add_option("--config", config_path, "JSON config mirroring flags");
  simulate->add_option("--qmatrix", sim.qmatrix, "Q-matrix CSV");
  simulate->add_option("--examinees,-n", sim.examinees, "number of examinees");
  simulate->add_option("--rho", sim.rho, "pairwise attribute correlation");
  simulate->add_option("--guess", sim.guess, "guessing level g");
  simulate->add_option("--slip", sim.slip, "slipping level s");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out,-o", sim.out, "output directory");

  rrum::cli::FitArgs fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Estimate the RRUM by MCMC from responses");
  fit_cmd->add_option("--config", config_path, "JSON config mirroring flags");
  fit_cmd->add_option("--responses", fit.responses, "responses CSV");
  fit_cmd->add_option("--qmatrix", fit.qmatrix, "Q-matrix CSV");
  fit_cmd->add_option("--iters,-T", fit.iters, "total iterations");
  fit_cmd->add_option("--burnin,-B", fit.burnin, "burn-in iterations");
  fit_cmd->add_option("--delta", fit.delta, "MH proposal half-width");
  fit_cmd->add_option("--seed", fit.seed, "RNG seed");
  fit_cmd->add_option("--thin", fit.thin, "keep every n-th draw");
  fit_cmd->add_flag("--tune", fit.tune, "tune delta during burn-in");
  fit_cmd->add_option("--classify", fit.classify,
                      "pattern classification: modal, rounded, or average");
  fit_cmd->add_option("--out,-o", fit.out, "output directory");

  rrum::cli::ReplicateArgs rep;
  CLI::App* replicate = app.add_subcommand(
      "replicate", "Simulate-fit-score grid over sizes and correlations");
  replicate->add_option("--config", config_path, "JSON config mirroring flags");
  replicate->add_option("--study", rep.study, "bundled Q-matrix: I or II");
  replicate->add_option("--qmatrix", rep.qmatrix, "explicit Q-matrix CSV");
  replicate->add_option("--sizes", rep.sizes, "examinee counts")
      ->delimiter(',');
  replicate->add_option("--rhos", rep.rhos, "correlations")->delimiter(',');
  replicate->add_option("--replicates,-R", rep.replicates,
                        "datasets per cell");
  replicate->add_option("--iters,-T", rep.iters, "chain length per fit");
  replicate->add_option("--burnin,-B", rep.burnin, "burn-in per fit");
  replicate->add_option("--delta", rep.delta, "MH proposal half-width");
  replicate->add_option("--guess", rep.guess, "guessing level g");
  replicate->add_option("--slip", rep.slip, "slipping level s");
  replicate->add_option("--seed", rep.seed, "master RNG seed");
  replicate->add_option("--workers,-w", rep.workers,
                        "parallel fits (0: RRUM_WORKERS env)");
  replicate->add_option("--out,-o", rep.out, "output directory");

  rrum::cli::ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Tabulate parameter estimates from fit summaries");
  report_cmd->add_option("--config", config_path, "JSON config mirroring flags");
  report_cmd->add_option("--summary", report.summaries, "fit summary JSON")
      ->expected(-1);
  report_cmd->add_option("--baseline", report.baseline,
                         "external estimate CSV (pi, r1..rK per item)");
  report_cmd->add_option("--out,-o", report.out,
                         "directory for report.txt + manifest");

  rrum::cli::ReplayArgs replay;
  CLI::App* replay_cmd = app.add_subcommand(
      "replay", "Re-run a manifest and verify artifact hashes");
  replay_cmd->add_option("--config", config_path, "JSON config mirroring flags");
  replay_cmd->add_option("--manifest", replay.manifest, "manifest.json path");
  replay_cmd->add_option("--out,-o", replay.out, "output directory");

  try {
    app.parse(argc, argv);

    if (!config_path.empty()) {
      const json cfg = load_config_file(config_path);
      if (simulate->parsed()) {
        fill(*simulate, cfg, "--qmatrix", "qmatrix", sim.qmatrix);
        fill(*simulate, cfg, "--examinees", "examinees", sim.examinees);
        fill(*simulate, cfg, "--rho", "rho", sim.rho);
        fill(*simulate, cfg, "--guess", "guess", sim.guess);
        fill(*simulate, cfg, "--slip", "slip", sim.slip);
        fill(*simulate, cfg, "--seed", "seed", sim.seed);
        fill(*simulate, cfg, "--out", "out", sim.out);
      } else if (fit_cmd->parsed()) {
        fill(*fit_cmd, cfg, "--responses", "responses", fit.responses);
        fill(*fit_cmd, cfg, "--qmatrix", "qmatrix", fit.qmatrix);
        fill(*fit_cmd, cfg, "--iters", "iters", fit.iters);
        fill(*fit_cmd, cfg, "--burnin", "burnin", fit.burnin);
        fill(*fit_cmd, cfg, "--delta", "delta", fit.delta);
        fill(*fit_cmd, cfg, "--seed", "seed", fit.seed);
        fill(*fit_cmd, cfg, "--thin", "thin", fit.thin);
        fill(*fit_cmd, cfg, "--tune", "tune", fit.tune);
        fill(*fit_cmd, cfg, "--classify", "classify", fit.classify);
        fill(*fit_cmd, cfg, "--out", "out", fit.out);
      } else if (replicate->parsed()) {
        fill(*replicate, cfg, "--study", "study", rep.study);
        fill(*replicate, cfg, "--qmatrix", "qmatrix", rep.qmatrix);
        fill(*replicate, cfg, "--sizes", "sizes", rep.sizes);
        fill(*replicate, cfg, "--rhos", "rhos", rep.rhos);
        fill(*replicate, cfg, "--replicates", "replicates", rep.replicates);
        fill(*replicate, cfg, "--iters", "iters", rep.iters);
        fill(*replicate, cfg, "--burnin", "burnin", rep.burnin);
        fill(*replicate, cfg, "--delta", "delta", rep.delta);
        fill(*replicate, cfg, "--guess", "guess", rep.guess);
        fill(*replicate, cfg, "--slip", "slip", rep.slip);
        fill(*replicate, cfg, "--seed", "seed", rep.seed);
        fill(*replicate, cfg, "--workers", "workers", rep.workers);
        fill(*replicate, cfg, "--out", "out", rep.out);
      } else if (report_cmd->parsed()) {
        fill(*report_cmd, cfg, "--summary", "summaries", report.summaries);
        fill(*report_cmd, cfg, "--baseline", "baseline", report.baseline);
        fill(*report_cmd, cfg, "--out", "out", report.out);
      } else if (replay_cmd->parsed()) {
        fill(*replay_cmd, cfg, "--manifest", "manifest", replay.manifest);
        fill(*replay_cmd, cfg, "--out", "out", replay.out);
      }
    }

    if (simulate->parsed()) return rrum::cli::run_simulate(sim);
    if (fit_cmd->parsed()) return rrum::cli::run_fit(fit);
    if (replicate->parsed()) return rrum::cli::run_replicate(rep);
    if (report_cmd->parsed()) return rrum::cli::run_report(report);
    if (replay_cmd->parsed()) return rrum::cli::run_replay(replay);
    return rrum::cli::kExitValidation;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rrum::cli::kExitValidation;
  } catch (const rrum::validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return rrum::cli::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return rrum::cli::kExitRuntime;
  }
}
