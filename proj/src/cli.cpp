#include "rrum/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "rrum/analysis.hpp"
#include "rrum/csv_io.hpp"
#include "rrum/manifest.hpp"
#include "rrum/replicate.hpp"
#include "rrum/simulate.hpp"

namespace rrum::cli {

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef RRUM_DEFAULT_DATA_DIR
#define RRUM_DEFAULT_DATA_DIR "data"
#endif

std::string data_dir() {
  if (const char* env = std::getenv("RRUM_DATA_DIR")) return env;
  return RRUM_DEFAULT_DATA_DIR;
}

namespace {

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir.string());
  return dir;
}

std::string abs_path(const std::string& p) {
  return fs::absolute(fs::path(p)).lexically_normal().string();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (std::isnan(v))
        row.push_back(nullptr);
      else
        row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json binary_matrix_json(const BinaryMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(int(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
  if (!out) throw io_error("write failed: " + path.string());
}

fs::path resolve_study_qmatrix(const ReplicateArgs& args) {
  if (!args.qmatrix.empty()) return args.qmatrix;
  if (args.study == "I") return fs::path(data_dir()) / "qmatrix_sim1.csv";
  if (args.study == "II") return fs::path(data_dir()) / "qmatrix_sim2.csv";
  throw validation_error("replicate: pass --study I|II or --qmatrix PATH");
}

}  // namespace

int run_simulate(const SimulateArgs& args) {
  const QMatrix q = load_qmatrix_csv(args.qmatrix);
  SimConfig config;
  config.examinees = args.examinees;
  config.q = &q;
  config.rho = args.rho;
  config.guess = args.guess;
  config.slip = args.slip;
  config.seed = args.seed;
  config.validate();

  const SimResult result = simulate_dataset(config);
  const fs::path dir = ensure_out_dir(args.out);
  const fs::path responses_path = dir / "responses.csv";
  const fs::path truth_path = dir / "attributes_true.csv";
  save_matrix_csv(result.responses, responses_path);
  save_matrix_csv(result.attributes, truth_path);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config = {{"qmatrix", abs_path(args.qmatrix)},
                     {"examinees", args.examinees},
                     {"rho", args.rho},
                     {"guess", args.guess},
                     {"slip", args.slip},
                     {"seed", args.seed}};
  manifest.seed = args.seed;
  manifest.add_input(args.qmatrix);
  manifest.add_output(responses_path);
  manifest.add_output(truth_path);
  manifest.write(dir);

  std::printf("simulated %zu x %zu responses -> %s\n", result.responses.rows(),
              result.responses.cols(), responses_path.string().c_str());
  return kExitOk;
}

namespace {

json fit_summary_json(const FitArgs& args, const QMatrix& q,
                      const ChainDraws& draws) {
  const ParamSummary summary = summarize_params(draws, q);
  const Matrix alpha_mean = alpha_marginal_mean(draws);
  const auto modal = modal_patterns(draws);
  const auto mode = args.classify == "rounded"
                        ? ClassificationMode::rounded_marginal
                    : args.classify == "average"
                        ? ClassificationMode::draw_average
                        : ClassificationMode::modal_pattern;
  const ClassificationReport classification = classification_rates(draws, mode);
  const DiagnosticsReport diag = diagnose(draws);

  json r_acceptance = json::array();
  for (std::size_t c = 0; c < draws.r_coords.size(); ++c) {
    const auto [j, k] = draws.r_coords[c];
    const double rate =
        draws.r_proposals[c]
            ? double(draws.r_accepts[c]) / double(draws.r_proposals[c])
            : 0.0;
    r_acceptance.push_back({{"item", j}, {"attr", k}, {"rate", rate}});
  }
  json pi_acceptance = json::array();
  for (std::size_t j = 0; j < draws.items; ++j)
    pi_acceptance.push_back(
        draws.pi_proposals[j]
            ? double(draws.pi_accepts[j]) / double(draws.pi_proposals[j])
            : 0.0);

  json diag_params = json::array();
  for (const auto& d : diag.params) {
    json entry = {{"name", d.name},
                  {"acceptance", d.acceptance},
                  {"ess", d.ess},
                  {"flagged", d.flagged}};
    entry["z"] = std::isfinite(d.z) ? json(d.z) : json(nullptr);
    diag_params.push_back(std::move(entry));
  }

  json j;
  j["kind"] = "fit_summary";
  j["config"] = {{"iters", args.iters},   {"burnin", args.burnin},
                 {"delta", args.delta},   {"seed", args.seed},
                 {"thin", args.thin},     {"tune", args.tune},
                 {"classify", args.classify}};
  j["data"] = {{"examinees", draws.examinees},
               {"items", draws.items},
               {"attrs", draws.attrs},
               {"patterns", draws.pattern_count},
               {"stored_draws", draws.stored}};
  j["q"] = binary_matrix_json(q.entries());
  j["attr_names"] = q.attr_names();
  j["posterior"] = {{"pi_mean", summary.pi_mean},
                    {"pi_sd", summary.pi_sd},
                    {"r_mean", matrix_json(summary.r_mean)},
                    {"r_sd", matrix_json(summary.r_sd)},
                    {"theta_mean", summary.theta_mean}};
  j["alpha_marginal_mean"] = matrix_json(alpha_mean);
  j["modal_pattern"] = modal;
  const char* mode_name = mode == ClassificationMode::modal_pattern
                              ? "modal_pattern"
                          : mode == ClassificationMode::rounded_marginal
                              ? "rounded_marginal"
                              : "draw_average";
  j["classification"] = {{"mode", mode_name}, {"rates", classification.rates}};
  j["acceptance"] = {{"overall", diag.overall_acceptance},
                     {"pi", pi_acceptance},
                     {"r", r_acceptance}};
  j["diagnostics"] = {{"flagged", diag.flagged_count}, {"params", diag_params}};
  j["delta_used"] = draws.delta_used;
  return j;
}

void write_trace(const fs::path& path, const ChainDraws& draws) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  json header;
  header["type"] = "header";
  header["examinees"] = draws.examinees;
  header["items"] = draws.items;
  header["attrs"] = draws.attrs;
  header["patterns"] = draws.pattern_count;
  json coords = json::array();
  for (const auto& [j, k] : draws.r_coords) coords.push_back({j, k});
  header["r_coords"] = coords;
  out << header.dump() << '\n';

  for (std::size_t s = 0; s < draws.stored; ++s) {
    json rec;
    rec["type"] = "draw";
    rec["iter"] = draws.config.burn_in + 1 + long(s) * draws.config.thin;
    rec["theta"] = std::vector<double>(draws.theta(s).begin(),
                                       draws.theta(s).end());
    rec["pi"] = std::vector<double>(
        draws.pi_draws.begin() + s * draws.items,
        draws.pi_draws.begin() + (s + 1) * draws.items);
    rec["r"] = std::vector<double>(
        draws.r_draws.begin() + s * draws.r_coords.size(),
        draws.r_draws.begin() + (s + 1) * draws.r_coords.size());
    rec["patterns"] = std::vector<std::uint32_t>(draws.patterns(s).begin(),
                                                 draws.patterns(s).end());
    out << rec.dump() << '\n';
  }
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace

int run_fit(const FitArgs& args) {
  const QMatrix q = load_qmatrix_csv(args.qmatrix);
  const auto responses = load_matrix_csv(args.responses, MatrixKind::responses);
  if (responses.values.cols() != q.items())
    throw validation_error(
        "responses have " + std::to_string(responses.values.cols()) +
        " items but Q-matrix has " + std::to_string(q.items()));
  if (args.classify != "modal" && args.classify != "rounded" &&
      args.classify != "average")
    throw validation_error("fit: --classify must be modal, rounded, or average");

  ChainConfig config;
  config.total_iters = args.iters;
  config.burn_in = args.burnin;
  config.delta = args.delta;
  config.seed = args.seed;
  config.thin = args.thin;
  config.tune_delta = args.tune;
  config.validate();

  const ChainDraws draws = run_chain(responses.values, q, config);

  const fs::path dir = ensure_out_dir(args.out);
  const fs::path trace_path = dir / "trace.jsonl";
  const fs::path summary_path = dir / "summary.json";
  const fs::path attr_path = dir / "attributes_est.csv";
  write_trace(trace_path, draws);
  write_text(summary_path, fit_summary_json(args, q, draws).dump(2) + "\n");

  // Point estimate of each mastery cell: marginal mean rounded (ties up).
  const Matrix alpha_mean = alpha_marginal_mean(draws);
  BinaryMatrix alpha_est(alpha_mean.rows(), alpha_mean.cols());
  for (std::size_t i = 0; i < alpha_mean.rows(); ++i)
    for (std::size_t k = 0; k < alpha_mean.cols(); ++k)
      alpha_est(i, k) = alpha_mean(i, k) >= 0.5 ? 1 : 0;
  save_matrix_csv(alpha_est, attr_path);

  RunManifest manifest;
  manifest.command = "fit";
  manifest.config = {{"responses", abs_path(args.responses)},
                     {"qmatrix", abs_path(args.qmatrix)},
                     {"iters", args.iters},
                     {"burnin", args.burnin},
                     {"delta", args.delta},
                     {"seed", args.seed},
                     {"thin", args.thin},
                     {"tune", args.tune},
                     {"classify", args.classify}};
  manifest.seed = args.seed;
  manifest.add_input(args.responses);
  manifest.add_input(args.qmatrix);
  manifest.add_output(trace_path);
  manifest.add_output(summary_path);
  manifest.add_output(attr_path);
  manifest.write(dir);

  const DiagnosticsReport diag = diagnose(draws);
  std::printf("fit: %zu stored draws, MH acceptance %.3f, %d flagged traces\n",
              draws.stored, diag.overall_acceptance, diag.flagged_count);
  return kExitOk;
}

namespace {

std::string grid_text(const ReplicationGrid& grid,
                      const std::vector<std::size_t>& sizes,
                      const std::vector<double>& rhos) {
  std::string text;
  char buf[64];
  text += "Size";
  for (double rho : rhos) {
    std::snprintf(buf, sizeof buf, "%14s=%.2f", "rho", rho);
    text += buf;
  }
  text += '\n';
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    std::snprintf(buf, sizeof buf, "%-6zu", sizes[si]);
    text += buf;
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      const CellResult& cell = grid.cell(si, ri, rhos.size());
      std::snprintf(buf, sizeof buf, "  %.3f (%.3f)", cell.mean_delta,
                    cell.se_delta);
      text += buf;
    }
    text += '\n';
  }
  return text;
}

}  // namespace

int run_replicate(const ReplicateArgs& args) {
  const fs::path q_path = resolve_study_qmatrix(args);
  const QMatrix q = load_qmatrix_csv(q_path);

  int workers = args.workers;
  if (workers == 0) {
    if (const char* env = std::getenv("RRUM_WORKERS"))
      workers = std::atoi(env);
    if (workers <= 0) workers = 1;
  }

  ReplicateConfig config;
  config.q = &q;
  config.sizes = args.sizes;
  config.rhos = args.rhos;
  config.replicates = args.replicates;
  config.chain.total_iters = args.iters;
  config.chain.burn_in = args.burnin;
  config.chain.delta = args.delta;
  config.guess = args.guess;
  config.slip = args.slip;
  config.seed = args.seed;
  config.workers = workers;
  config.validate();

  const ReplicationGrid grid = run_replication(
      config, [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "\rreplicate: %zu/%zu fits", done, total);
        if (done == total) std::fprintf(stderr, "\n");
      });

  json cells = json::array();
  for (const CellResult& cell : grid.cells)
    cells.push_back({{"size", cell.size},
                     {"rho", cell.rho},
                     {"mean_delta", cell.mean_delta},
                     {"se_delta", cell.se_delta},
                     {"mean_acceptance", cell.mean_acceptance},
                     {"delta_per_rep", cell.delta_per_rep}});
  json grid_json;
  grid_json["kind"] = "replication_grid";
  grid_json["config"] = {{"qmatrix", abs_path(q_path.string())},
                         {"study", args.study},
                         {"sizes", args.sizes},
                         {"rhos", args.rhos},
                         {"replicates", args.replicates},
                         {"iters", args.iters},
                         {"burnin", args.burnin},
                         {"delta", args.delta},
                         {"guess", args.guess},
                         {"slip", args.slip},
                         {"seed", args.seed}};
  grid_json["cells"] = cells;

  const std::string text = grid_text(grid, args.sizes, args.rhos);
  const fs::path dir = ensure_out_dir(args.out);
  const fs::path text_path = dir / "grid.txt";
  const fs::path json_path = dir / "grid.json";
  write_text(text_path, text);
  write_text(json_path, grid_json.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "replicate";
  manifest.config = grid_json["config"];
  manifest.config["workers"] = workers;
  manifest.seed = args.seed;
  manifest.add_input(q_path);
  manifest.add_output(text_path);
  manifest.add_output(json_path);
  manifest.write(dir);

  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

namespace {

struct ReportSource {
  std::string label;
  std::vector<std::vector<int>> q;  // J x K
  std::vector<double> pi;
  std::vector<std::vector<double>> r;  // J x K, NaN masked
  std::vector<double> class_rates;    // empty for baselines
  std::string class_mode;
};

ReportSource source_from_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open summary " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("bad summary " + path.string() + ": " + e.what());
  }
  if (!j.contains("posterior") || !j.contains("q"))
    throw io_error("summary " + path.string() + " lacks posterior estimates");
  ReportSource src;
  src.label = path.stem().string();
  src.q = j["q"].get<std::vector<std::vector<int>>>();
  src.pi = j["posterior"]["pi_mean"].get<std::vector<double>>();
  for (const auto& row : j["posterior"]["r_mean"]) {
    std::vector<double> vals;
    for (const auto& cell : row)
      vals.push_back(cell.is_null() ? std::nan("") : cell.get<double>());
    src.r.push_back(std::move(vals));
  }
  if (j.contains("classification")) {
    src.class_rates = j["classification"]["rates"].get<std::vector<double>>();
    src.class_mode = j["classification"]["mode"].get<std::string>();
  }
  return src;
}

ReportSource source_from_baseline(const fs::path& path, std::size_t items,
                                  std::size_t attrs,
                                  const std::vector<std::vector<int>>& q) {
  const NumericCsv csv = load_numeric_csv(path);
  if (csv.rows.size() != items)
    throw validation_error("baseline has " + std::to_string(csv.rows.size()) +
                           " items, summary has " + std::to_string(items));
  ReportSource src;
  src.label = path.stem().string();
  src.q = q;
  for (const auto& row : csv.rows) {
    if (row.size() != attrs + 1)
      throw validation_error("baseline rows must hold pi followed by " +
                             std::to_string(attrs) + " r cells");
    src.pi.push_back(row[0]);
    src.r.emplace_back(row.begin() + 1, row.end());
  }
  return src;
}

std::string report_text(const std::vector<ReportSource>& sources) {
  const std::size_t J = sources[0].pi.size();
  const std::size_t K = sources[0].q.empty() ? 0 : sources[0].q[0].size();
  char buf[64];
  std::string text = "Item  Q";
  for (std::size_t pad = K > 1 ? K - 1 : 0; pad > 0; --pad) text += ' ';
  for (const auto& src : sources) {
    std::snprintf(buf, sizeof buf, "  |%10.10s pi*", src.label.c_str());
    text += buf;
    for (std::size_t k = 0; k < K; ++k) {
      std::snprintf(buf, sizeof buf, "   r*%zu", k + 1);
      text += buf;
    }
  }
  if (sources.size() == 2) text += "   d(pi*)";
  text += '\n';

  for (std::size_t j = 0; j < J; ++j) {
    std::snprintf(buf, sizeof buf, "%-5zu ", j + 1);
    text += buf;
    for (std::size_t k = 0; k < K; ++k)
      text += char('0' + sources[0].q[j][k]);
    for (const auto& src : sources) {
      std::snprintf(buf, sizeof buf, "  |%10.3f    ", src.pi[j]);
      text += buf;
      for (std::size_t k = 0; k < K; ++k) {
        if (std::isnan(src.r[j][k]))
          text += "     -";
        else {
          std::snprintf(buf, sizeof buf, " %.3f", src.r[j][k]);
          text += buf;
        }
      }
    }
    if (sources.size() == 2) {
      std::snprintf(buf, sizeof buf, "  %+.3f", sources[0].pi[j] - sources[1].pi[j]);
      text += buf;
    }
    text += '\n';
  }

  // Pattern classification block, one row per source that carries rates.
  bool any_rates = false;
  for (const auto& src : sources) any_rates |= !src.class_rates.empty();
  if (any_rates && K <= 4) {
    const std::size_t M = 1u << K;
    text += "\nClassification rate\n          ";
    for (std::size_t m = 0; m < M; ++m) {
      std::string label = "(";
      for (std::size_t k = 0; k < K; ++k) {
        label += char('0' + ((m >> (K - 1 - k)) & 1u));
        if (k + 1 < K) label += ',';
      }
      label += ')';
      std::snprintf(buf, sizeof buf, " %8s", label.c_str());
      text += buf;
    }
    text += '\n';
    for (const auto& src : sources) {
      if (src.class_rates.empty()) continue;
      std::snprintf(buf, sizeof buf, "%-10.10s", src.label.c_str());
      text += buf;
      for (std::size_t m = 0; m < M && m < src.class_rates.size(); ++m) {
        std::snprintf(buf, sizeof buf, " %8.3f", src.class_rates[m]);
        text += buf;
      }
      std::snprintf(buf, sizeof buf, "  [%s]\n", src.class_mode.c_str());
      text += buf;
    }
  }
  return text;
}

}  // namespace

int run_report(const ReportArgs& args) {
  if (args.summaries.empty())
    throw validation_error("report: pass at least one --summary file");
  std::vector<ReportSource> sources;
  for (const auto& path : args.summaries)
    sources.push_back(source_from_summary(path));
  const std::size_t J = sources[0].pi.size();
  if (J == 0) throw validation_error("report: summary holds no items");
  const std::size_t K = sources[0].q[0].size();
  for (const auto& src : sources)
    if (src.pi.size() != J)
      throw validation_error("report: summaries disagree on item count");
  if (!args.baseline.empty())
    sources.push_back(source_from_baseline(args.baseline, J, K, sources[0].q));

  const std::string text = report_text(sources);
  std::fputs(text.c_str(), stdout);

  if (!args.out.empty()) {
    const fs::path dir = ensure_out_dir(args.out);
    const fs::path report_path = dir / "report.txt";
    write_text(report_path, text);
    RunManifest manifest;
    manifest.command = "report";
    json summaries = json::array();
    for (const auto& s : args.summaries) summaries.push_back(abs_path(s));
    manifest.config = {{"summaries", summaries},
                       {"baseline", args.baseline.empty()
                                        ? json(nullptr)
                                        : json(abs_path(args.baseline))}};
    for (const auto& s : args.summaries) manifest.add_input(s);
    if (!args.baseline.empty()) manifest.add_input(args.baseline);
    manifest.add_output(report_path);
    manifest.write(dir);
  }
  return kExitOk;
}

int run_replay(const ReplayArgs& args) {
  if (args.manifest.empty())
    throw validation_error("replay: pass --manifest (flag or config)");
  const RunManifest recorded = load_manifest(args.manifest);
  const json& c = recorded.config;
  const fs::path dir = ensure_out_dir(args.out);

  if (recorded.command == "simulate") {
    SimulateArgs sim;
    sim.qmatrix = c.at("qmatrix").get<std::string>();
    sim.examinees = c.at("examinees").get<std::size_t>();
    sim.rho = c.at("rho").get<double>();
    sim.guess = c.at("guess").get<double>();
    sim.slip = c.at("slip").get<double>();
    sim.seed = c.at("seed").get<std::uint64_t>();
    sim.out = dir.string();
    run_simulate(sim);
  } else if (recorded.command == "fit") {
    FitArgs fit;
    fit.responses = c.at("responses").get<std::string>();
    fit.qmatrix = c.at("qmatrix").get<std::string>();
    fit.iters = c.at("iters").get<int>();
    fit.burnin = c.at("burnin").get<int>();
    fit.delta = c.at("delta").get<double>();
    fit.seed = c.at("seed").get<std::uint64_t>();
    fit.thin = c.at("thin").get<int>();
    fit.tune = c.at("tune").get<bool>();
    fit.classify = c.at("classify").get<std::string>();
    fit.out = dir.string();
    run_fit(fit);
  } else if (recorded.command == "replicate") {
    ReplicateArgs rep;
    rep.qmatrix = c.at("qmatrix").get<std::string>();
    rep.sizes = c.at("sizes").get<std::vector<std::size_t>>();
    rep.rhos = c.at("rhos").get<std::vector<double>>();
    rep.replicates = c.at("replicates").get<int>();
    rep.iters = c.at("iters").get<int>();
    rep.burnin = c.at("burnin").get<int>();
    rep.delta = c.at("delta").get<double>();
    rep.guess = c.at("guess").get<double>();
    rep.slip = c.at("slip").get<double>();
    rep.seed = c.at("seed").get<std::uint64_t>();
    rep.workers = c.at("workers").get<int>();
    rep.out = dir.string();
    run_replicate(rep);
  } else {
    throw validation_error("replay: command '" + recorded.command +
                           "' cannot be replayed");
  }

  // Compare fresh output hashes against the recorded ones by file name.
  int mismatches = 0;
  for (const auto& [path, hash] : recorded.outputs) {
    const fs::path fresh = dir / fs::path(path).filename();
    const std::string fresh_hash = hash_file(fresh);
    const bool ok = fresh_hash == hash;
    std::printf("%s  %s\n", ok ? "match   " : "MISMATCH",
                fresh.string().c_str());
    if (!ok) ++mismatches;
  }
  if (mismatches) {
    std::fprintf(stderr, "replay: %d artifact(s) differ from manifest\n",
                 mismatches);
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rrum::cli
