#include "rrum/replicate.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "rrum/analysis.hpp"
#include "rrum/simulate.hpp"

namespace rrum {

void ReplicateConfig::validate() const {
  if (q == nullptr) throw validation_error("ReplicateConfig: missing Q-matrix");
  if (sizes.empty() || rhos.empty())
    throw validation_error("ReplicateConfig: need at least one size and rho");
  if (replicates < 1)
    throw validation_error("ReplicateConfig: replicates must be >= 1");
  if (workers < 1) throw validation_error("ReplicateConfig: workers must be >= 1");
  chain.validate();
  for (std::size_t n : sizes)
    if (n < 1) throw validation_error("ReplicateConfig: size must be >= 1");
  for (double rho : rhos)
    CorrelationSpec{static_cast<int>(q->attrs()), rho}.validate();
}

namespace {

struct RepOutcome {
  double delta = 0.0;
  double acceptance = 0.0;
};

RepOutcome run_one(const ReplicateConfig& config, std::size_t cell_idx,
                   int rep, std::size_t size, double rho) {
  SimConfig sim;
  sim.examinees = size;
  sim.q = config.q;
  sim.rho = rho;
  sim.guess = config.guess;
  sim.slip = config.slip;
  sim.seed = mix_seed(config.seed, cell_idx + 1, static_cast<std::uint64_t>(rep) + 1);
  const SimResult data = simulate_dataset(sim);

  ChainConfig chain = config.chain;
  chain.seed = mix_seed(sim.seed, 0x9d5c);
  const ChainDraws draws = run_chain(data.responses, *config.q, chain);

  RepOutcome out;
  out.delta = delta_alpha({alpha_marginal_mean(draws)}, data.attributes)
                  .delta_alpha;
  const std::uint64_t acc =
      std::accumulate(draws.pi_accepts.begin(), draws.pi_accepts.end(),
                      std::uint64_t{0}) +
      std::accumulate(draws.r_accepts.begin(), draws.r_accepts.end(),
                      std::uint64_t{0});
  const std::uint64_t prop =
      std::accumulate(draws.pi_proposals.begin(), draws.pi_proposals.end(),
                      std::uint64_t{0}) +
      std::accumulate(draws.r_proposals.begin(), draws.r_proposals.end(),
                      std::uint64_t{0});
  out.acceptance = prop ? static_cast<double>(acc) / prop : 0.0;
  return out;
}

}  // namespace

ReplicationGrid run_replication(
    const ReplicateConfig& config,
    const std::function<void(std::size_t, std::size_t)>& progress) {
  config.validate();

  struct Job {
    std::size_t cell_idx, size;
    double rho;
    int rep;
  };
  std::vector<Job> jobs;
  const std::size_t cell_count = config.sizes.size() * config.rhos.size();
  for (std::size_t c = 0; c < cell_count; ++c) {
    const std::size_t size = config.sizes[c / config.rhos.size()];
    const double rho = config.rhos[c % config.rhos.size()];
    for (int r = 0; r < config.replicates; ++r)
      jobs.push_back({c, size, rho, r});
  }

  std::vector<RepOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      try {
        outcomes[idx] = run_one(config, job.cell_idx, job.rep, job.size, job.rho);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, jobs.size());
      }
    }
  };

  const int threads = std::min<int>(config.workers, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ReplicationGrid grid;
  grid.cells.resize(cell_count);
  for (std::size_t c = 0; c < cell_count; ++c) {
    CellResult& cell = grid.cells[c];
    cell.size = config.sizes[c / config.rhos.size()];
    cell.rho = config.rhos[c % config.rhos.size()];
  }
  for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
    CellResult& cell = grid.cells[jobs[idx].cell_idx];
    cell.delta_per_rep.push_back(outcomes[idx].delta);
    cell.mean_acceptance += outcomes[idx].acceptance;
  }
  for (CellResult& cell : grid.cells) {
    const std::size_t R = cell.delta_per_rep.size();
    cell.mean_delta =
        std::accumulate(cell.delta_per_rep.begin(), cell.delta_per_rep.end(), 0.0) / R;
    cell.mean_acceptance /= R;
    double var = 0.0;
    for (double d : cell.delta_per_rep)
      var += (d - cell.mean_delta) * (d - cell.mean_delta);
    cell.se_delta = R > 1 ? std::sqrt(var / (R - 1) / R) : 0.0;
  }
  return grid;
}

}  // namespace rrum
