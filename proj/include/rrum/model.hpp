#ifndef RRUM_MODEL_HPP
#define RRUM_MODEL_HPP

#include <span>
#include <vector>

#include "rrum/common.hpp"
#include "rrum/patterns.hpp"

namespace rrum {

/// Response probabilities are clamped to [kProbClamp, 1-kProbClamp] before
/// taking logs so Metropolis ratios stay finite.
inline constexpr double kProbClamp = 1e-12;

inline double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

/// RRUM item parameters: pi_star[j] is the correct-response probability for
/// a full master of item j; r(j,k) is the multiplicative penalty for lacking
/// attribute k, defined only where q_jk = 1 (NaN elsewhere, never read).
struct ItemParams {
  std::vector<double> pi_star;  // length J
  std::vector<double> r_star;   // J*K row-major, masked by Q
  std::size_t items = 0;
  std::size_t attrs = 0;

  double r(std::size_t j, std::size_t k) const { return r_star[j * attrs + k]; }
  double& r(std::size_t j, std::size_t k) { return r_star[j * attrs + k]; }
  std::span<const double> r_row(std::size_t j) const {
    return {r_star.data() + j * attrs, attrs};
  }

  /// Constant starting values on the masked support.
  static ItemParams constant(const QMatrix& q, double pi0, double r0);

  /// Enforces 0 < pi* < 1 and 0 < r* < 1 on the masked support.
  void validate(const QMatrix& q) const;
};

/// Per-(item, attribute) slip and guess probabilities masked by Q, with the
/// monotonicity constraint 1 - s > g wherever q_jk = 1.
struct SlipGuess {
  Matrix guess;  // J x K
  Matrix slip;   // J x K

  static SlipGuess constant(const QMatrix& q, double g, double s);
  void validate(const QMatrix& q) const;
};

/// pi*_j = prod_k (1 - s_jk)^q_jk; in (0,1].
double pi_star_from_slips(std::span<const double> slip_row,
                          std::span<const std::uint8_t> q_row);

/// r*_jk = g / (1 - s); requires 0 <= g < 1 - s.
double r_star_from_slip_guess(double g, double s);

/// ItemParams from slips and guesses via the two identities above.
ItemParams derive_item_params(const SlipGuess& sg, const QMatrix& q);

/// P(X_j = 1 | pattern) = pi*_j * prod_k (r_jk^(1-alpha_k))^q_jk.
double irf(std::span<const std::uint8_t> pattern,
           std::span<const std::uint8_t> q_row, double pi_star_j,
           std::span<const double> r_row);

/// Bernoulli log term with the probability clamp applied.
double bernoulli_log(double p, std::uint8_t x);

/// Item j's log-likelihood summed over examinees.
double log_likelihood_item(const ResponseMatrix& y, std::size_t j,
                           const AttributeMatrix& alpha, const QMatrix& q,
                           const ItemParams& params);

/// Examinee i's log-likelihood under a hypothetical pattern.
double log_likelihood_pattern(const ResponseMatrix& y, std::size_t i,
                              std::span<const std::uint8_t> pattern,
                              const QMatrix& q, const ItemParams& params);

/// Joint log-likelihood, factored over items.
double joint_log_likelihood(const ResponseMatrix& y,
                            const AttributeMatrix& alpha, const QMatrix& q,
                            const ItemParams& params);

}  // namespace rrum

#endif  // RRUM_MODEL_HPP
