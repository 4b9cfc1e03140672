#ifndef RRUM_SIMULATE_HPP
#define RRUM_SIMULATE_HPP

#include <cstdint>

#include "rrum/common.hpp"
#include "rrum/model.hpp"
#include "rrum/patterns.hpp"

namespace rrum {

/// Exchangeable correlation: 1 on the diagonal, rho elsewhere. Positive
/// definite iff -1/(K-1) < rho < 1.
struct CorrelationSpec {
  int attrs = 0;
  double rho = 0.0;

  void validate() const;
  Matrix sigma() const;
};

struct SimConfig {
  std::size_t examinees = 0;
  const QMatrix* q = nullptr;
  double rho = 0.0;
  double guess = 0.2;
  double slip = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Upper-triangular nu with nu^T nu = sigma. Throws numeric_error naming the
/// failing pivot when sigma is not positive definite.
Matrix choleski_upper(const Matrix& sigma);

/// Correlated mastery states from a Gaussian copula: tau ~ N(0,1) I x K,
/// gamma = tau nu, theta = Phi(gamma), and alpha_ik = 1 iff examinee i's
/// theta_ik reaches attribute k's exceedance threshold k/(K+1) (so attribute
/// k has marginal mastery rate 1 - k/(K+1); ties count as mastered).
/// Draws come from substream 0 of config.seed.
AttributeMatrix generate_attributes(const SimConfig& config);

/// Binary responses from the RRUM IRF under true attributes: P_ij from
/// constant slips/guesses, y_ij = 1 iff a Uniform(0,1) draw falls at or
/// below P_ij. Boundary g = 0 or s = 0 is allowed (P may hit 0 or 1).
ResponseMatrix generate_responses(const AttributeMatrix& alpha, const QMatrix& q,
                                  double guess, double slip, std::uint64_t seed);

struct SimResult {
  AttributeMatrix attributes;
  ResponseMatrix responses;
};

/// Full pipeline; responses use substream 1 of config.seed so either half
/// can be regenerated independently.
SimResult simulate_dataset(const SimConfig& config);

}  // namespace rrum

#endif  // RRUM_SIMULATE_HPP
