#include "rrum/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rrum {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shared scratch for one chain: response index lists, per-pattern likelihood
// tables, and per-(item, local mask) response counts for the MH sweeps.
struct Workspace {
  const ResponseMatrix& y;
  const QMatrix& q;
  std::size_t I, J, K;
  std::uint32_t M;

  // CSR lists of items answered correctly per examinee.
  std::vector<std::uint32_t> correct_items;
  std::vector<std::size_t> correct_offsets;

  // Likelihood tables under the current parameters:
  //   base[m]      = sum_j log(1 - P_mj)
  //   w[m*J + j]   = log P_mj - log(1 - P_mj)
  // so loglik(i, m) = base[m] + sum over i's correct items of w.
  std::vector<double> base, w;

  // Step-4 counts: per item, responses aggregated by the local mask over the
  // item's required attributes (bit t of the mask = mastery of required(j)[t]).
  std::vector<std::vector<std::uint32_t>> n1, n0;

  Workspace(const ResponseMatrix& y_, const QMatrix& q_)
      : y(y_), q(q_), I(y_.rows()), J(q_.items()), K(q_.attrs()),
        M(1u << K) {
    if (y.cols() != 0 && y.cols() != J)
      throw validation_error("responses have " + std::to_string(y.cols()) +
                             " items but Q-matrix has " + std::to_string(J));
    correct_offsets.assign(I + 1, 0);
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < y.cols(); ++j)
        if (y(i, j)) correct_items.push_back(static_cast<std::uint32_t>(j));
      correct_offsets[i + 1] = correct_items.size();
    }
    base.assign(M, 0.0);
    w.assign(static_cast<std::size_t>(M) * J, 0.0);
    n1.resize(J);
    n0.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      n1[j].assign(1u << q.required(j).size(), 0);
      n0[j].assign(1u << q.required(j).size(), 0);
    }
  }

  std::uint32_t local_mask(std::uint32_t m, std::size_t j) const {
    const auto& req = q.required(j);
    std::uint32_t mask = 0;
    for (std::size_t t = 0; t < req.size(); ++t)
      mask |= static_cast<std::uint32_t>((m >> (K - 1 - req[t])) & 1u) << t;
    return mask;
  }

  // P_mj for item j when the required attributes not in `mask` are lacked.
  double item_prob(std::size_t j, std::uint32_t mask,
                   const ItemParams& params) const {
    const auto& req = q.required(j);
    double p = params.pi_star[j];
    for (std::size_t t = 0; t < req.size(); ++t)
      if (!((mask >> t) & 1u)) p *= params.r(j, req[t]);
    return p;
  }

  void rebuild_tables(const ItemParams& params) {
    const bool have_items = y.cols() != 0;
    if (!have_items) return;
    for (std::uint32_t m = 0; m < M; ++m) {
      double b = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double p = clamp_prob(item_prob(j, local_mask(m, j), params));
        const double lp = std::log(p);
        const double l1mp = std::log1p(-p);
        b += l1mp;
        w[m * J + j] = lp - l1mp;
      }
      base[m] = b;
    }
  }

  // Inverse-transform draw of each examinee's pattern given log weights.
  void sample_patterns(std::span<const double> log_theta, Rng& rng,
                       std::span<std::uint32_t> out) const {
    const bool have_items = y.cols() != 0;
    std::vector<double> logw(M), prob(M);
    for (std::size_t i = 0; i < I; ++i) {
      double lmax = kNegInf;
      for (std::uint32_t m = 0; m < M; ++m) {
        double l = log_theta[m];
        if (have_items && l != kNegInf) {
          l += base[m];
          const double* wm = w.data() + static_cast<std::size_t>(m) * J;
          for (std::size_t c = correct_offsets[i]; c < correct_offsets[i + 1]; ++c)
            l += wm[correct_items[c]];
        }
        logw[m] = l;
        lmax = std::max(lmax, l);
      }
      if (lmax == kNegInf)
        throw numeric_error("pattern posterior vanished for examinee " +
                            std::to_string(i + 1));
      double total = 0.0;
      for (std::uint32_t m = 0; m < M; ++m) {
        prob[m] = std::exp(logw[m] - lmax);
        total += prob[m];
      }
      // Partition (0,1) at the cumulative sums and locate the draw.
      const double u = rng.uniform01() * total;
      double cum = 0.0;
      std::uint32_t pick = M - 1;
      for (std::uint32_t m = 0; m < M; ++m) {
        cum += prob[m];
        if (u <= cum) {
          pick = m;
          break;
        }
      }
      out[i] = pick;
    }
  }

  void refresh_mask_counts(std::span<const std::uint32_t> alpha_idx) {
    for (std::size_t j = 0; j < J; ++j) {
      std::fill(n1[j].begin(), n1[j].end(), 0);
      std::fill(n0[j].begin(), n0[j].end(), 0);
    }
    if (y.cols() == 0) return;
    for (std::size_t i = 0; i < I; ++i) {
      const std::uint32_t m = alpha_idx[i];
      for (std::size_t j = 0; j < J; ++j) {
        const std::uint32_t mask = local_mask(m, j);
        if (y(i, j))
          ++n1[j][mask];
        else
          ++n0[j][mask];
      }
    }
  }

  // Item-j log-likelihood difference when one parameter changes, summed over
  // local masks via the response counts.
  double loglik_delta(std::size_t j, const ItemParams& cur,
                      const ItemParams& cand, bool only_lacking_attr,
                      std::size_t t_changed) const {
    double delta = 0.0;
    const std::uint32_t masks = 1u << q.required(j).size();
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
      if (only_lacking_attr && ((mask >> t_changed) & 1u)) continue;
      if (n1[j][mask] == 0 && n0[j][mask] == 0) continue;
      const double p_old = clamp_prob(item_prob(j, mask, cur));
      const double p_new = clamp_prob(item_prob(j, mask, cand));
      if (n1[j][mask])
        delta += n1[j][mask] * (std::log(p_new) - std::log(p_old));
      if (n0[j][mask])
        delta += n0[j][mask] * (std::log1p(-p_new) - std::log1p(-p_old));
    }
    return delta;
  }

  // One Metropolis sweep over the masked r* coordinates. Flags and tallies
  // are optional and follow the masked coordinate order. Granularity picks
  // the block size: every scalar on its own, one block per item, or the
  // whole masked vector at once.
  void mh_sweep_r(ItemParams& params, double delta, Rng& rng,
                  MhGranularity granularity,
                  std::vector<std::uint8_t>* flags,
                  std::vector<std::uint64_t>* accepts,
                  std::vector<std::uint64_t>* proposals) {
    std::size_t coord = 0;
    ItemParams cand = params;

    auto propose_item = [&](std::size_t j, bool& in_range) {
      const auto& req = q.required(j);
      for (std::size_t t = 0; t < req.size(); ++t) {
        const double prop = rng.uniform(params.r(j, req[t]) - delta,
                                        params.r(j, req[t]) + delta);
        if (!(prop > 0.0 && prop < 1.0)) in_range = false;
        cand.r(j, req[t]) = prop;
      }
    };
    auto settle = [&](std::size_t first_item, std::size_t last_item,
                      std::size_t first_coord, bool accept) {
      std::size_t c = first_coord;
      for (std::size_t j = first_item; j <= last_item; ++j) {
        const auto& req = q.required(j);
        for (std::size_t t = 0; t < req.size(); ++t, ++c) {
          if (accept)
            params.r(j, req[t]) = cand.r(j, req[t]);
          else
            cand.r(j, req[t]) = params.r(j, req[t]);
          if (proposals) ++(*proposals)[c];
          if (accept && accepts) ++(*accepts)[c];
          if (flags) (*flags)[c] = accept ? 1 : 0;
        }
      }
    };

    if (granularity == MhGranularity::scalar) {
      for (std::size_t j = 0; j < J; ++j) {
        const auto& req = q.required(j);
        for (std::size_t t = 0; t < req.size(); ++t, ++coord) {
          const int k = req[t];
          const double cur = params.r(j, k);
          const double prop = rng.uniform(cur - delta, cur + delta);
          if (proposals) ++(*proposals)[coord];
          bool accept = false;
          if (prop > 0.0 && prop < 1.0) {  // zero prior mass outside (0,1)
            cand.r(j, k) = prop;
            const double dll = loglik_delta(j, params, cand, true, t);
            accept = std::log(rng.uniform01()) <= dll;
            if (!accept) cand.r(j, k) = cur;
          }
          if (accept) {
            params.r(j, k) = prop;
            if (accepts) ++(*accepts)[coord];
          }
          if (flags) (*flags)[coord] = accept ? 1 : 0;
        }
      }
      return;
    }

    if (granularity == MhGranularity::item_block) {
      for (std::size_t j = 0; j < J; ++j) {
        bool in_range = true;
        propose_item(j, in_range);
        bool accept = false;
        if (in_range) {
          const double dll = loglik_delta(j, params, cand, false, 0);
          accept = std::log(rng.uniform01()) <= dll;
        }
        settle(j, j, coord, accept);
        coord += q.required(j).size();
      }
      return;
    }

    // Whole-vector proposal: likelihood differences add across items.
    bool in_range = true;
    for (std::size_t j = 0; j < J; ++j) propose_item(j, in_range);
    bool accept = false;
    if (in_range) {
      double dll = 0.0;
      for (std::size_t j = 0; j < J; ++j)
        dll += loglik_delta(j, params, cand, false, 0);
      accept = std::log(rng.uniform01()) <= dll;
    }
    settle(0, J - 1, 0, accept);
  }

  void mh_sweep_pi(ItemParams& params, double delta, Rng& rng,
                   MhGranularity granularity,
                   std::vector<std::uint8_t>* flags,
                   std::vector<std::uint64_t>* accepts,
                   std::vector<std::uint64_t>* proposals) {
    ItemParams cand = params;
    if (granularity == MhGranularity::vector) {
      bool in_range = true;
      for (std::size_t j = 0; j < J; ++j) {
        const double prop = rng.uniform(params.pi_star[j] - delta,
                                        params.pi_star[j] + delta);
        if (!(prop > 0.0 && prop < 1.0)) in_range = false;
        cand.pi_star[j] = prop;
      }
      bool accept = false;
      if (in_range) {
        double dll = 0.0;
        for (std::size_t j = 0; j < J; ++j)
          dll += loglik_delta(j, params, cand, false, 0);
        accept = std::log(rng.uniform01()) <= dll;
      }
      for (std::size_t j = 0; j < J; ++j) {
        if (accept) params.pi_star[j] = cand.pi_star[j];
        if (proposals) ++(*proposals)[j];
        if (accept && accepts) ++(*accepts)[j];
        if (flags) (*flags)[j] = accept ? 1 : 0;
      }
      return;
    }

    // pi*_j is a single coordinate, so scalar and item_block coincide.
    for (std::size_t j = 0; j < J; ++j) {
      const double cur = params.pi_star[j];
      const double prop = rng.uniform(cur - delta, cur + delta);
      if (proposals) ++(*proposals)[j];
      bool accept = false;
      if (prop > 0.0 && prop < 1.0) {
        cand.pi_star[j] = prop;
        const double dll = loglik_delta(j, params, cand, false, 0);
        accept = std::log(rng.uniform01()) <= dll;
        if (!accept) cand.pi_star[j] = cur;
      }
      if (accept) {
        params.pi_star[j] = prop;
        if (accepts) ++(*accepts)[j];
      }
      if (flags) (*flags)[j] = accept ? 1 : 0;
    }
  }
};

std::vector<std::uint32_t> patterns_from_matrix(const AttributeMatrix& alpha) {
  std::vector<std::uint32_t> idx(alpha.rows());
  for (std::size_t i = 0; i < alpha.rows(); ++i)
    idx[i] = pattern_to_index(alpha.row(i));
  return idx;
}

std::vector<std::pair<std::uint16_t, std::uint16_t>> masked_coords(
    const QMatrix& q) {
  std::vector<std::pair<std::uint16_t, std::uint16_t>> coords;
  for (std::size_t j = 0; j < q.items(); ++j)
    for (int k : q.required(j))
      coords.emplace_back(static_cast<std::uint16_t>(j),
                          static_cast<std::uint16_t>(k));
  return coords;
}

}  // namespace

void ChainConfig::validate() const {
  if (total_iters < 1) throw validation_error("ChainConfig: total_iters must be >= 1");
  if (burn_in < 0 || burn_in >= total_iters)
    throw validation_error("ChainConfig: need 0 <= burn_in < total_iters");
  if (!(delta > 0.0 && delta < 0.5))
    throw validation_error("ChainConfig: delta must lie in (0, 0.5)");
  if (thin < 1) throw validation_error("ChainConfig: thin must be >= 1");
  if (!(init_pi > 0.0 && init_pi < 1.0) || !(init_r > 0.0 && init_r < 1.0))
    throw validation_error("ChainConfig: init values must lie in (0,1)");
}

double sample_gamma(double shape, Rng& rng) { return rng.gamma(shape); }

std::vector<double> sample_dirichlet(std::span<const std::uint64_t> counts,
                                     Rng& rng) {
  if (counts.empty()) throw validation_error("sample_dirichlet: empty counts");
  std::vector<double> w(counts.size());
  double tau = 0.0;
  for (std::size_t m = 0; m < counts.size(); ++m) {
    w[m] = rng.gamma(1.0 + static_cast<double>(counts[m]));
    tau += w[m];
  }
  for (double& v : w) v /= tau;
  return w;
}

std::vector<std::uint32_t> update_attributes(const ResponseMatrix& y,
                                             std::span<const double> theta,
                                             const ItemParams& params,
                                             const QMatrix& q, Rng& rng) {
  Workspace ws(y, q);
  if (theta.size() != ws.M)
    throw validation_error("update_attributes: theta has wrong length");
  ws.rebuild_tables(params);
  std::vector<double> log_theta(ws.M);
  for (std::uint32_t m = 0; m < ws.M; ++m) log_theta[m] = std::log(theta[m]);
  std::vector<std::uint32_t> out(ws.I);
  ws.sample_patterns(log_theta, rng, out);
  return out;
}

void update_r_star(const ResponseMatrix& y, const AttributeMatrix& alpha,
                   ItemParams& params, const QMatrix& q, double delta,
                   Rng& rng, std::vector<std::uint8_t>* accepted) {
  Workspace ws(y, q);
  const auto idx = patterns_from_matrix(alpha);
  ws.refresh_mask_counts(idx);
  if (accepted) accepted->assign(masked_coords(q).size(), 0);
  ws.mh_sweep_r(params, delta, rng, MhGranularity::scalar, accepted, nullptr,
                nullptr);
}

void update_pi_star(const ResponseMatrix& y, const AttributeMatrix& alpha,
                    ItemParams& params, const QMatrix& q, double delta,
                    Rng& rng, std::vector<std::uint8_t>* accepted) {
  Workspace ws(y, q);
  const auto idx = patterns_from_matrix(alpha);
  ws.refresh_mask_counts(idx);
  if (accepted) accepted->assign(q.items(), 0);
  ws.mh_sweep_pi(params, delta, rng, MhGranularity::scalar, accepted, nullptr,
                 nullptr);
}

ChainDraws run_chain(const ResponseMatrix& y, const QMatrix& q,
                     const ChainConfig& config) {
  config.validate();
  Workspace ws(y, q);

  ChainDraws draws;
  draws.examinees = ws.I;
  draws.items = ws.J;
  draws.attrs = static_cast<int>(ws.K);
  draws.pattern_count = ws.M;
  draws.config = config;
  draws.r_coords = masked_coords(q);
  draws.pi_accepts.assign(ws.J, 0);
  draws.pi_proposals.assign(ws.J, 0);
  draws.r_accepts.assign(draws.r_coords.size(), 0);
  draws.r_proposals.assign(draws.r_coords.size(), 0);

  const std::size_t keep =
      (static_cast<std::size_t>(config.total_iters - config.burn_in) +
       config.thin - 1) /
      config.thin;
  draws.pattern_draws.reserve(keep * ws.I);
  draws.theta_draws.reserve(keep * ws.M);
  draws.pi_draws.reserve(keep * ws.J);
  draws.r_draws.reserve(keep * draws.r_coords.size());

  Rng rng(config.seed);
  ItemParams params = ItemParams::constant(q, config.init_pi, config.init_r);

  // Overdispersed start: uniform pattern per examinee, uniform theta.
  std::vector<std::uint32_t> alpha_idx(ws.I);
  for (auto& m : alpha_idx)
    m = static_cast<std::uint32_t>(rng.below(ws.M));
  std::vector<double> theta(ws.M, 1.0 / ws.M);

  double delta = config.delta;
  std::uint64_t tune_accepts = 0, tune_proposals = 0;
  std::vector<std::uint64_t> counts(ws.M);
  std::vector<double> log_theta(ws.M);

  for (int t = 1; t <= config.total_iters; ++t) {
    ws.rebuild_tables(params);

    // Step 2: theta | alpha via Dirichlet(1 + pattern counts).
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint32_t m : alpha_idx) ++counts[m];
    if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) != ws.I)
      throw numeric_error("pattern counts lost an examinee");
    theta = sample_dirichlet(counts, rng);

    // Step 3: alpha | theta, params.
    for (std::uint32_t m = 0; m < ws.M; ++m) log_theta[m] = std::log(theta[m]);
    ws.sample_patterns(log_theta, rng, alpha_idx);

    // Step 4: r* then pi*, scalar Metropolis with item-local ratios.
    ws.refresh_mask_counts(alpha_idx);
    const std::uint64_t acc_before =
        std::accumulate(draws.r_accepts.begin(), draws.r_accepts.end(),
                        std::uint64_t{0}) +
        std::accumulate(draws.pi_accepts.begin(), draws.pi_accepts.end(),
                        std::uint64_t{0});
    ws.mh_sweep_r(params, delta, rng, config.granularity, nullptr,
                  &draws.r_accepts, &draws.r_proposals);
    ws.mh_sweep_pi(params, delta, rng, config.granularity, nullptr,
                   &draws.pi_accepts, &draws.pi_proposals);

    if (config.tune_delta && t <= config.burn_in) {
      const std::uint64_t acc_after =
          std::accumulate(draws.r_accepts.begin(), draws.r_accepts.end(),
                          std::uint64_t{0}) +
          std::accumulate(draws.pi_accepts.begin(), draws.pi_accepts.end(),
                          std::uint64_t{0});
      tune_accepts += acc_after - acc_before;
      tune_proposals += draws.r_coords.size() + ws.J;
      if (t % 100 == 0 && tune_proposals > 0) {
        const double rate = static_cast<double>(tune_accepts) / tune_proposals;
        if (rate > 0.40) delta = std::min(delta * 1.1, 0.49);
        if (rate < 0.25) delta = std::max(delta / 1.1, 1e-4);
        tune_accepts = tune_proposals = 0;
      }
    }

    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0) {
      draws.pattern_draws.insert(draws.pattern_draws.end(), alpha_idx.begin(),
                                 alpha_idx.end());
      draws.theta_draws.insert(draws.theta_draws.end(), theta.begin(),
                               theta.end());
      draws.pi_draws.insert(draws.pi_draws.end(), params.pi_star.begin(),
                            params.pi_star.end());
      for (const auto& [j, k] : draws.r_coords)
        draws.r_draws.push_back(params.r(j, k));
      ++draws.stored;
    }
  }

  draws.delta_used = delta;
  return draws;
}

}  // namespace rrum
