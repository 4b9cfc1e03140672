#include "rrum/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace rrum {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_draws(const ChainDraws& draws) {
  if (draws.stored == 0)
    throw validation_error("chain holds no stored draws");
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double var_of(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return s / (xs.size() - 1);
}

// Trace of one scalar from a row-major draws block.
std::vector<double> column(const std::vector<double>& block, std::size_t width,
                           std::size_t col, std::size_t rows) {
  std::vector<double> out(rows);
  for (std::size_t s = 0; s < rows; ++s) out[s] = block[s * width + col];
  return out;
}

}  // namespace

Matrix alpha_marginal_mean(const ChainDraws& draws) {
  require_draws(draws);
  const std::size_t I = draws.examinees;
  const int K = draws.attrs;
  Matrix mean(I, K, 0.0);
  for (std::size_t s = 0; s < draws.stored; ++s) {
    const auto pats = draws.patterns(s);
    for (std::size_t i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k)
        mean(i, k) += static_cast<double>((pats[i] >> (K - 1 - k)) & 1u);
  }
  for (std::size_t i = 0; i < I; ++i)
    for (int k = 0; k < K; ++k) mean(i, k) /= draws.stored;
  return mean;
}

std::vector<std::uint32_t> modal_patterns(const ChainDraws& draws) {
  require_draws(draws);
  const std::size_t I = draws.examinees;
  std::vector<std::uint32_t> modal(I, 0);
  std::unordered_map<std::uint32_t, std::size_t> freq;
  for (std::size_t i = 0; i < I; ++i) {
    freq.clear();
    for (std::size_t s = 0; s < draws.stored; ++s) ++freq[draws.patterns(s)[i]];
    std::size_t best_count = 0;
    std::uint32_t best = 0;
    for (const auto& [m, c] : freq)
      if (c > best_count || (c == best_count && m < best)) {
        best_count = c;
        best = m;
      }
    modal[i] = best;
  }
  return modal;
}

RecoveryReport delta_alpha(const std::vector<Matrix>& estimates,
                           const AttributeMatrix& truth) {
  if (estimates.empty()) throw validation_error("delta_alpha: no estimates");
  RecoveryReport report;
  const std::size_t N = truth.rows(), K = truth.cols();
  for (const auto& est : estimates) {
    if (est.rows() != N || est.cols() != K)
      throw validation_error("delta_alpha: estimate shape mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < K; ++k) {
        const double v = est(i, k);
        if (!(v >= 0.0 && v <= 1.0))
          throw validation_error("delta_alpha: estimate outside [0,1]");
        const int rounded = v >= 0.5 ? 1 : 0;  // ties round up
        wrong += static_cast<std::size_t>(rounded != truth(i, k));
      }
    report.per_replicate.push_back(1.0 - static_cast<double>(wrong) / (N * K));
  }
  report.delta_alpha = mean_of(report.per_replicate);
  return report;
}

ClassificationReport classification_rates(const ChainDraws& draws,
                                          ClassificationMode mode) {
  require_draws(draws);
  ClassificationReport report;
  report.mode = mode;
  report.rates.assign(draws.pattern_count, 0.0);

  if (mode == ClassificationMode::draw_average) {
    for (std::size_t s = 0; s < draws.stored; ++s)
      for (std::uint32_t m : draws.patterns(s)) report.rates[m] += 1.0;
    for (double& r : report.rates) r /= draws.stored * draws.examinees;
    return report;
  }

  std::vector<std::uint32_t> assigned;
  if (mode == ClassificationMode::modal_pattern) {
    assigned = modal_patterns(draws);
  } else {
    const Matrix mean = alpha_marginal_mean(draws);
    assigned.resize(draws.examinees);
    for (std::size_t i = 0; i < draws.examinees; ++i) {
      std::uint32_t m = 0;
      for (int k = 0; k < draws.attrs; ++k)
        m = (m << 1) | (mean(i, k) >= 0.5 ? 1u : 0u);
      assigned[i] = m;
    }
  }
  for (std::uint32_t m : assigned) report.rates[m] += 1.0;
  for (double& r : report.rates) r /= draws.examinees;
  return report;
}

ParamSummary summarize_params(const ChainDraws& draws, const QMatrix& q) {
  require_draws(draws);
  const std::size_t J = draws.items;
  const std::size_t S = draws.stored;
  ParamSummary out;
  out.pi_mean.assign(J, 0.0);
  out.pi_sd.assign(J, 0.0);
  out.r_mean = Matrix(J, q.attrs(), kNaN);
  out.r_sd = Matrix(J, q.attrs(), kNaN);
  out.theta_mean.assign(draws.pattern_count, 0.0);

  for (std::size_t j = 0; j < J; ++j) {
    const auto trace = column(draws.pi_draws, J, j, S);
    out.pi_mean[j] = mean_of(trace);
    out.pi_sd[j] = std::sqrt(var_of(trace, out.pi_mean[j]));
  }
  for (std::size_t c = 0; c < draws.r_coords.size(); ++c) {
    const auto [j, k] = draws.r_coords[c];
    const auto trace = column(draws.r_draws, draws.r_coords.size(), c, S);
    out.r_mean(j, k) = mean_of(trace);
    out.r_sd(j, k) = std::sqrt(var_of(trace, out.r_mean(j, k)));
  }
  for (std::size_t s = 0; s < S; ++s) {
    const auto th = draws.theta(s);
    for (std::uint32_t m = 0; m < draws.pattern_count; ++m)
      out.theta_mean[m] += th[m];
  }
  for (double& v : out.theta_mean) v /= S;
  return out;
}

double geweke_z(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 4) return 0.0;
  const std::size_t na = std::max<std::size_t>(1, n / 10);
  const std::size_t nb = std::max<std::size_t>(1, n / 2);
  const auto head = trace.subspan(0, na);
  const auto tail = trace.subspan(n - nb, nb);
  const double ma = mean_of(head), mb = mean_of(tail);
  // Standard errors scale by the effective draw count, not the raw length,
  // so autocorrelated chains are not over-flagged.
  const double denom =
      std::sqrt(var_of(head, ma) / effective_sample_size(head) +
                var_of(tail, mb) / effective_sample_size(tail));
  if (denom == 0.0)
    return ma == mb ? 0.0 : std::numeric_limits<double>::infinity();
  return (ma - mb) / denom;
}

double effective_sample_size(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = mean_of(trace);
  const double c0 = var_of(trace, mean);
  if (c0 == 0.0) return 1.0;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t)
      s += (trace[t] - mean) * (trace[t + lag] - mean);
    return s / (n - 1);
  };

  // Sum paired autocorrelations while the pair sums stay positive.
  double rho_sum = 0.0;
  for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / c0;
    if (pair <= 0.0) break;
    rho_sum += pair;
  }
  const double ess = n / (1.0 + 2.0 * rho_sum);
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

DiagnosticsReport diagnose(const ChainDraws& draws) {
  require_draws(draws);
  DiagnosticsReport report;
  const std::size_t J = draws.items;
  const std::size_t S = draws.stored;
  std::uint64_t accepted = 0, proposed = 0;

  auto add = [&](const std::string& name, std::uint64_t acc, std::uint64_t prop,
                 std::vector<double> trace) {
    ScalarDiagnostic d;
    d.name = name;
    d.acceptance = prop ? static_cast<double>(acc) / prop : 0.0;
    d.z = geweke_z(trace);
    d.ess = effective_sample_size(trace);
    d.flagged = std::abs(d.z) > 2.58;
    accepted += acc;
    proposed += prop;
    if (d.flagged) ++report.flagged_count;
    report.params.push_back(std::move(d));
  };

  for (std::size_t j = 0; j < J; ++j)
    add("pi[" + std::to_string(j + 1) + "]", draws.pi_accepts[j],
        draws.pi_proposals[j], column(draws.pi_draws, J, j, S));
  for (std::size_t c = 0; c < draws.r_coords.size(); ++c) {
    const auto [j, k] = draws.r_coords[c];
    add("r[" + std::to_string(j + 1) + "," + std::to_string(k + 1) + "]",
        draws.r_accepts[c], draws.r_proposals[c],
        column(draws.r_draws, draws.r_coords.size(), c, S));
  }
  report.overall_acceptance =
      proposed ? static_cast<double>(accepted) / proposed : 0.0;
  return report;
}

}  // namespace rrum
