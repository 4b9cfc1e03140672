#ifndef RRUM_SAMPLER_HPP
#define RRUM_SAMPLER_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rrum/common.hpp"
#include "rrum/model.hpp"
#include "rrum/patterns.hpp"
#include "rrum/rng.hpp"

namespace rrum {

/// Block structure of the Metropolis step: propose each scalar on its own,
/// each item's masked r* row jointly, or the whole parameter vector at once.
enum class MhGranularity { scalar, item_block, vector };

struct ChainConfig {
  int total_iters = 7000;
  int burn_in = 2000;
  double delta = 0.052;  // MH proposal half-width
  std::uint64_t seed = 0;
  int thin = 1;
  double init_pi = 0.8;
  double init_r = 0.5;
  MhGranularity granularity = MhGranularity::scalar;
  /// Adjust delta toward the 25-40% acceptance band during burn-in.
  /// Off by default so runs honor the configured delta exactly.
  bool tune_delta = false;

  void validate() const;
};

/// Post-burn-in draws plus Metropolis bookkeeping. Scalar traces are stored
/// row-major: draw s of pi*_j sits at pi_draws[s*items + j].
struct ChainDraws {
  std::size_t examinees = 0;
  std::size_t items = 0;
  int attrs = 0;
  std::uint32_t pattern_count = 0;  // M = 2^K
  std::size_t stored = 0;

  std::vector<std::uint32_t> pattern_draws;  // stored x I
  std::vector<double> theta_draws;           // stored x M
  std::vector<double> pi_draws;              // stored x J
  std::vector<double> r_draws;               // stored x r_coords.size()

  /// Masked (item, attribute) coordinates, 0-based, row-major item order.
  std::vector<std::pair<std::uint16_t, std::uint16_t>> r_coords;

  std::vector<std::uint64_t> pi_accepts, pi_proposals;  // per item
  std::vector<std::uint64_t> r_accepts, r_proposals;    // per masked coord

  double delta_used = 0.0;
  ChainConfig config;

  std::span<const std::uint32_t> patterns(std::size_t s) const {
    return {pattern_draws.data() + s * examinees, examinees};
  }
  std::span<const double> theta(std::size_t s) const {
    return {theta_draws.data() + s * pattern_count, pattern_count};
  }
};

/// Gamma(shape, 1) building block for the Dirichlet construction; shape >= 1.
double sample_gamma(double shape, Rng& rng);

/// Dirichlet(1 + counts) drawn as normalized Gamma(1 + count, 1) variates.
std::vector<double> sample_dirichlet(std::span<const std::uint64_t> counts,
                                     Rng& rng);

/// One sweep of the pattern update: for each examinee, posterior weights
/// theta_m * L(y_i | pattern m) are normalized in log space and sampled by
/// partitioning (0,1) at the cumulative probabilities.
std::vector<std::uint32_t> update_attributes(const ResponseMatrix& y,
                                             std::span<const double> theta,
                                             const ItemParams& params,
                                             const QMatrix& q, Rng& rng);

/// One Metropolis sweep over every masked r*_jk: propose
/// Uniform(r - delta, r + delta), reject outside (0,1), otherwise accept
/// with the item-j likelihood ratio (flat priors cancel). Acceptance flags
/// follow r_coords order when a sink is given.
void update_r_star(const ResponseMatrix& y, const AttributeMatrix& alpha,
                   ItemParams& params, const QMatrix& q, double delta,
                   Rng& rng, std::vector<std::uint8_t>* accepted = nullptr);

/// Same scheme for each pi*_j.
void update_pi_star(const ResponseMatrix& y, const AttributeMatrix& alpha,
                    ItemParams& params, const QMatrix& q, double delta,
                    Rng& rng, std::vector<std::uint8_t>* accepted = nullptr);

/// The full four-step chain: theta | alpha counts, alpha | theta and params,
/// then Metropolis sweeps for r* and pi*. Deterministic under config.seed.
ChainDraws run_chain(const ResponseMatrix& y, const QMatrix& q,
                     const ChainConfig& config);

}  // namespace rrum

#endif  // RRUM_SAMPLER_HPP
