#include "rrum/simulate.hpp"

#include <cmath>
#include <string>

#include "rrum/normal.hpp"
#include "rrum/rng.hpp"

namespace rrum {

void CorrelationSpec::validate() const {
  if (attrs < 1) throw validation_error("CorrelationSpec: K must be >= 1");
  const double lower = attrs > 1 ? -1.0 / (attrs - 1) : -1.0;
  if (!(rho > lower && rho < 1.0))
    throw validation_error("CorrelationSpec: rho=" + std::to_string(rho) +
                           " outside PD range (" + std::to_string(lower) +
                           ", 1) for K=" + std::to_string(attrs));
}

Matrix CorrelationSpec::sigma() const {
  validate();
  Matrix s(attrs, attrs, rho);
  for (int k = 0; k < attrs; ++k) s(k, k) = 1.0;
  return s;
}

void SimConfig::validate() const {
  if (examinees < 1) throw validation_error("SimConfig: need at least one examinee");
  if (q == nullptr) throw validation_error("SimConfig: missing Q-matrix");
  CorrelationSpec{static_cast<int>(q->attrs()), rho}.validate();
  SlipGuess::constant(*q, guess, slip);  // validates monotonicity
}

Matrix choleski_upper(const Matrix& sigma) {
  const std::size_t K = sigma.rows();
  if (K == 0 || sigma.cols() != K)
    throw validation_error("choleski_upper: matrix must be square");
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j)
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12)
        throw validation_error("choleski_upper: matrix not symmetric");

  // nu(i,j) for i <= j, with nu^T nu = sigma.
  Matrix nu(K, K, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    double diag = sigma(i, i);
    for (std::size_t r = 0; r < i; ++r) diag -= nu(r, i) * nu(r, i);
    if (diag <= 0.0)
      throw numeric_error("choleski_upper: pivot " + std::to_string(i + 1) +
                          " is not positive; matrix is not positive definite");
    nu(i, i) = std::sqrt(diag);
    for (std::size_t j = i + 1; j < K; ++j) {
      double off = sigma(i, j);
      for (std::size_t r = 0; r < i; ++r) off -= nu(r, i) * nu(r, j);
      nu(i, j) = off / nu(i, i);
    }
  }
  return nu;
}

AttributeMatrix generate_attributes(const SimConfig& config) {
  config.validate();
  const std::size_t I = config.examinees;
  const std::size_t K = config.q->attrs();
  const Matrix nu =
      choleski_upper(CorrelationSpec{static_cast<int>(K), config.rho}.sigma());

  Rng rng = Rng(config.seed).substream(0);
  Matrix tau(I, K);
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t k = 0; k < K; ++k) tau(i, k) = rng.normal();

  AttributeMatrix alpha(I, K);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      // gamma = tau * nu, one cell at a time (nu is upper triangular).
      double gamma = 0.0;
      for (std::size_t r = 0; r <= k; ++r) gamma += tau(i, r) * nu(r, k);
      const double theta = normal_cdf(gamma);
      const double threshold = static_cast<double>(k + 1) / (K + 1);
      alpha(i, k) = theta >= threshold ? 1 : 0;
    }
  }
  return alpha;
}

ResponseMatrix generate_responses(const AttributeMatrix& alpha, const QMatrix& q,
                                  double guess, double slip, std::uint64_t seed) {
  if (alpha.cols() != q.attrs())
    throw validation_error("generate_responses: attribute count mismatch");
  const auto sg = SlipGuess::constant(q, guess, slip);
  const std::size_t I = alpha.rows();
  const std::size_t J = q.items();

  // pi* and r* depend only on the item, so precompute P per (item, pattern
  // of required attributes) lazily through irf on each row.
  std::vector<double> pi(J);
  Matrix r(J, q.attrs(), 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    pi[j] = pi_star_from_slips(sg.slip.row(j), q.row(j));
    for (int k : q.required(j))
      r(j, k) = r_star_from_slip_guess(sg.guess(j, k), sg.slip(j, k));
  }

  Rng rng(seed);
  ResponseMatrix y(I, J);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const double p = irf(alpha.row(i), q.row(j), pi[j], r.row(j));
      y(i, j) = rng.uniform01() <= p ? 1 : 0;
    }
  }
  return y;
}

SimResult simulate_dataset(const SimConfig& config) {
  SimResult out;
  out.attributes = generate_attributes(config);
  const std::uint64_t resp_seed = Rng(config.seed).substream(1).seed();
  out.responses = generate_responses(out.attributes, *config.q, config.guess,
                                     config.slip, resp_seed);
  return out;
}

}  // namespace rrum
