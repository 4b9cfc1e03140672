#include "rrum/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rrum {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string coord(std::size_t j, std::size_t k) {
  return "item " + std::to_string(j + 1) + ", attribute " + std::to_string(k + 1);
}
}  // namespace

ItemParams ItemParams::constant(const QMatrix& q, double pi0, double r0) {
  ItemParams p;
  p.items = q.items();
  p.attrs = q.attrs();
  p.pi_star.assign(p.items, pi0);
  p.r_star.assign(p.items * p.attrs, kNaN);
  for (std::size_t j = 0; j < p.items; ++j)
    for (int k : q.required(j)) p.r(j, k) = r0;
  return p;
}

void ItemParams::validate(const QMatrix& q) const {
  if (items != q.items() || attrs != q.attrs())
    throw validation_error("ItemParams: shape does not match Q-matrix");
  for (std::size_t j = 0; j < items; ++j) {
    if (!(pi_star[j] > 0.0 && pi_star[j] < 1.0))
      throw validation_error("ItemParams: pi* out of (0,1) at item " +
                             std::to_string(j + 1));
    for (int k : q.required(j))
      if (!(r(j, k) > 0.0 && r(j, k) < 1.0))
        throw validation_error("ItemParams: r* out of (0,1) at " + coord(j, k));
  }
}

SlipGuess SlipGuess::constant(const QMatrix& q, double g, double s) {
  SlipGuess sg;
  sg.guess = Matrix(q.items(), q.attrs(), kNaN);
  sg.slip = Matrix(q.items(), q.attrs(), kNaN);
  for (std::size_t j = 0; j < q.items(); ++j)
    for (int k : q.required(j)) {
      sg.guess(j, k) = g;
      sg.slip(j, k) = s;
    }
  sg.validate(q);
  return sg;
}

void SlipGuess::validate(const QMatrix& q) const {
  if (guess.rows() != q.items() || guess.cols() != q.attrs() ||
      slip.rows() != q.items() || slip.cols() != q.attrs())
    throw validation_error("SlipGuess: shape does not match Q-matrix");
  for (std::size_t j = 0; j < q.items(); ++j)
    for (int k : q.required(j)) {
      const double g = guess(j, k), s = slip(j, k);
      if (!(g >= 0.0 && g < 1.0) || !(s >= 0.0 && s < 1.0))
        throw validation_error("SlipGuess: value outside [0,1) at " + coord(j, k));
      if (!(1.0 - s > g))
        throw validation_error("SlipGuess: monotonicity 1-s > g violated at " +
                               coord(j, k));
    }
}

double pi_star_from_slips(std::span<const double> slip_row,
                          std::span<const std::uint8_t> q_row) {
  double p = 1.0;
  for (std::size_t k = 0; k < q_row.size(); ++k) {
    if (!q_row[k]) continue;
    const double s = slip_row[k];
    if (!(s >= 0.0 && s < 1.0))
      throw validation_error("pi_star_from_slips: slip outside [0,1) at attribute " +
                             std::to_string(k + 1));
    p *= 1.0 - s;
  }
  return p;
}

double r_star_from_slip_guess(double g, double s) {
  if (!(g >= 0.0) || !(s >= 0.0 && s < 1.0))
    throw validation_error("r_star_from_slip_guess: g, s out of range");
  if (!(g < 1.0 - s))
    throw validation_error("r_star_from_slip_guess: monotonicity requires g < 1-s");
  return g / (1.0 - s);
}

ItemParams derive_item_params(const SlipGuess& sg, const QMatrix& q) {
  sg.validate(q);
  ItemParams p;
  p.items = q.items();
  p.attrs = q.attrs();
  p.pi_star.resize(p.items);
  p.r_star.assign(p.items * p.attrs, kNaN);
  for (std::size_t j = 0; j < p.items; ++j) {
    p.pi_star[j] = pi_star_from_slips(sg.slip.row(j), q.row(j));
    for (int k : q.required(j))
      p.r(j, k) = r_star_from_slip_guess(sg.guess(j, k), sg.slip(j, k));
  }
  return p;
}

double irf(std::span<const std::uint8_t> pattern,
           std::span<const std::uint8_t> q_row, double pi_star_j,
           std::span<const double> r_row) {
  double p = pi_star_j;
  for (std::size_t k = 0; k < q_row.size(); ++k)
    if (q_row[k] && !pattern[k]) p *= r_row[k];
  return p;
}

double bernoulli_log(double p, std::uint8_t x) {
  p = clamp_prob(p);
  return x ? std::log(p) : std::log1p(-p);
}

double log_likelihood_item(const ResponseMatrix& y, std::size_t j,
                           const AttributeMatrix& alpha, const QMatrix& q,
                           const ItemParams& params) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double p = irf(alpha.row(i), q.row(j), params.pi_star[j], params.r_row(j));
    sum += bernoulli_log(p, y(i, j));
  }
  return sum;
}

double log_likelihood_pattern(const ResponseMatrix& y, std::size_t i,
                              std::span<const std::uint8_t> pattern,
                              const QMatrix& q, const ItemParams& params) {
  double sum = 0.0;
  for (std::size_t j = 0; j < y.cols(); ++j) {
    const double p = irf(pattern, q.row(j), params.pi_star[j], params.r_row(j));
    sum += bernoulli_log(p, y(i, j));
  }
  return sum;
}

double joint_log_likelihood(const ResponseMatrix& y,
                            const AttributeMatrix& alpha, const QMatrix& q,
                            const ItemParams& params) {
  double sum = 0.0;
  for (std::size_t j = 0; j < y.cols(); ++j)
    sum += log_likelihood_item(y, j, alpha, q, params);
  return sum;
}

}  // namespace rrum
