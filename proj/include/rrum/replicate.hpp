#ifndef RRUM_REPLICATE_HPP
#define RRUM_REPLICATE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "rrum/patterns.hpp"
#include "rrum/sampler.hpp"

namespace rrum {

/// One simulate-fit-score grid in the style of a recovery study: for every
/// (sample size, rho) cell, R datasets are simulated and fit, and the mean
/// attribute-recovery accuracy is reported.
struct ReplicateConfig {
  const QMatrix* q = nullptr;
  std::vector<std::size_t> sizes;
  std::vector<double> rhos;
  int replicates = 5;
  ChainConfig chain;  // total_iters/burn_in/delta applied to every fit
  double guess = 0.2;
  double slip = 0.2;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct CellResult {
  std::size_t size = 0;
  double rho = 0.0;
  std::vector<double> delta_per_rep;
  double mean_delta = 0.0;
  double se_delta = 0.0;  // standard error of the mean over replicates
  double mean_acceptance = 0.0;
};

struct ReplicationGrid {
  std::vector<CellResult> cells;  // sizes-major, rhos-minor order

  const CellResult& cell(std::size_t size_idx, std::size_t rho_idx,
                         std::size_t rho_count) const {
    return cells[size_idx * rho_count + rho_idx];
  }
};

/// Runs every (size, rho, replicate) job, optionally across worker threads.
/// Job seeds derive from (seed, cell index, replicate index), so results do
/// not depend on the worker count. The optional callback fires once per
/// finished replicate with (done, total).
ReplicationGrid run_replication(
    const ReplicateConfig& config,
    const std::function<void(std::size_t, std::size_t)>& progress = {});

}  // namespace rrum

#endif  // RRUM_REPLICATE_HPP
