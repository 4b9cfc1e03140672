#ifndef RRUM_CLI_HPP
#define RRUM_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace rrum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

struct SimulateArgs {
  std::string qmatrix;
  std::string out = ".";
  std::size_t examinees = 500;
  double rho = 0.3;
  double guess = 0.2;
  double slip = 0.2;
  std::uint64_t seed = 0;
};

struct FitArgs {
  std::string responses;
  std::string qmatrix;
  std::string out = ".";
  int iters = 7000;
  int burnin = 2000;
  double delta = 0.052;
  std::uint64_t seed = 0;
  int thin = 1;
  bool tune = false;
  std::string classify = "modal";  // or "rounded"
};

struct ReplicateArgs {
  std::string study;    // "I" or "II" selects a bundled Q-matrix fixture
  std::string qmatrix;  // explicit path wins over --study
  std::string out = ".";
  std::vector<std::size_t> sizes = {500};
  std::vector<double> rhos = {0.1, 0.3, 0.5};
  int replicates = 5;
  int iters = 3500;
  int burnin = 1000;
  double delta = 0.052;
  double guess = 0.2;
  double slip = 0.2;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: RRUM_WORKERS env, else 1
};

struct ReportArgs {
  std::vector<std::string> summaries;
  std::string baseline;
  std::string out;  // empty: stdout only, no files
};

struct ReplayArgs {
  std::string manifest;
  std::string out = ".";
};

int run_simulate(const SimulateArgs& args);
int run_fit(const FitArgs& args);
int run_replicate(const ReplicateArgs& args);
int run_report(const ReportArgs& args);
int run_replay(const ReplayArgs& args);

/// Bundled fixture directory: RRUM_DATA_DIR env when set, else the
/// compile-time default.
std::string data_dir();

}  // namespace rrum::cli

#endif  // RRUM_CLI_HPP
