#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rrum/csv_io.hpp"
#include "rrum/normal.hpp"
#include "rrum/rng.hpp"
#include "rrum/simulate.hpp"

using namespace rrum;

namespace {

QMatrix fixture(const char* name) {
  return load_qmatrix_csv(std::filesystem::path(RRUM_TEST_DATA_DIR) / name);
}

QMatrix one_item_q(int attrs) {
  BinaryMatrix m(1, attrs);
  m(0, 0) = 1;
  return QMatrix{m};
}

}  // namespace

TEST_CASE("normal cdf and quantile") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // Classic table values.
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-10));
  CHECK(normal_cdf(-2.0) == doctest::Approx(0.02275013194817921).epsilon(1e-10));

  for (double u = 0.001; u < 1.0; u += 0.0013)
    CHECK(normal_cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-8));

  CHECK_THROWS_AS(normal_quantile(0.0), validation_error);
  CHECK_THROWS_AS(normal_quantile(1.0), validation_error);
}

TEST_CASE("choleski_upper factorizations") {
  SUBCASE("identity") {
    const Matrix nu = choleski_upper(CorrelationSpec{3, 0.0}.sigma());
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(nu(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
  }

  SUBCASE("closed-form 2x2") {
    const Matrix nu = choleski_upper(CorrelationSpec{2, 0.5}.sigma());
    CHECK(nu(0, 0) == doctest::Approx(1.0));
    CHECK(nu(0, 1) == doctest::Approx(0.5));
    CHECK(nu(1, 0) == doctest::Approx(0.0));
    CHECK(nu(1, 1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  }

  SUBCASE("rho below the PD bound is rejected before decomposition") {
    CHECK_THROWS_AS((CorrelationSpec{5, -0.3}.validate()), validation_error);
    // Feeding the non-PD matrix directly names the failing pivot.
    Matrix sigma(5, 5, -0.3);
    for (int k = 0; k < 5; ++k) sigma(k, k) = 1.0;
    CHECK_THROWS_AS(choleski_upper(sigma), numeric_error);
  }

  SUBCASE("reconstruction error across K and rho") {
    for (int K = 2; K <= 12; K += 2) {
      for (double rho : {-0.9 / (K - 1), 0.1, 0.45, 0.8}) {
        const Matrix sigma = CorrelationSpec{K, rho}.sigma();
        const Matrix nu = choleski_upper(sigma);
        for (std::size_t a = 0; a < sigma.rows(); ++a)
          for (std::size_t b = 0; b < sigma.cols(); ++b) {
            double dot = 0.0;  // (nu^T nu)(a,b)
            for (std::size_t r = 0; r < sigma.rows(); ++r)
              dot += nu(r, a) * nu(r, b);
            CHECK(std::abs(dot - sigma(a, b)) <= 1e-10);
          }
      }
    }
  }
}

TEST_CASE("generate_attributes marginal mastery rates at rho=0") {
  const QMatrix q = one_item_q(5);
  SimConfig config;
  config.examinees = 10000;
  config.q = &q;
  config.rho = 0.0;
  config.seed = 1234;
  const AttributeMatrix alpha = generate_attributes(config);
  REQUIRE(alpha.rows() == 10000);
  for (int k = 0; k < 5; ++k) {
    double rate = 0.0;
    for (std::size_t i = 0; i < alpha.rows(); ++i) rate += alpha(i, k);
    rate /= alpha.rows();
    const double expected = 1.0 - (k + 1) / 6.0;
    const double tol = 3.0 * std::sqrt(expected * (1 - expected) / 10000.0);
    CHECK(std::abs(rate - expected) <= tol);
  }
}

TEST_CASE("latent columns inherit the target correlation") {
  // phi correlation of the binary columns rises with rho; compare
  // the empirical exceedance agreement against the independent case.
  const QMatrix q = one_item_q(2);
  auto column_phi = [&](double rho, std::uint64_t seed) {
    SimConfig config;
    config.examinees = 20000;
    config.q = &q;
    config.rho = rho;
    config.seed = seed;
    const AttributeMatrix alpha = generate_attributes(config);
    double m0 = 0, m1 = 0, m01 = 0;
    for (std::size_t i = 0; i < alpha.rows(); ++i) {
      m0 += alpha(i, 0);
      m1 += alpha(i, 1);
      m01 += alpha(i, 0) * alpha(i, 1);
    }
    m0 /= alpha.rows();
    m1 /= alpha.rows();
    m01 /= alpha.rows();
    return (m01 - m0 * m1) /
           std::sqrt(m0 * (1 - m0) * m1 * (1 - m1));
  };
  const double phi_zero = column_phi(0.0, 8);
  const double phi_mid = column_phi(0.5, 9);
  const double phi_high = column_phi(0.95, 10);
  CHECK(std::abs(phi_zero) < 0.03);
  CHECK(phi_mid > 0.2);
  CHECK(phi_high > phi_mid);
}

TEST_CASE("tau * nu reproduces the target correlation") {
  // The copula's latent columns: tau iid N(0,1), gamma = tau nu.
  const std::size_t I = 10000;
  for (double rho : {0.1, 0.3, 0.5}) {
    const int K = 4;
    const Matrix nu = choleski_upper(CorrelationSpec{K, rho}.sigma());
    Rng rng(4000 + int(rho * 10));
    Matrix gamma(I, K, 0.0);
    for (std::size_t i = 0; i < I; ++i) {
      double tau[4];
      for (int k = 0; k < K; ++k) tau[k] = rng.normal();
      for (int k = 0; k < K; ++k) {
        double g = 0.0;
        for (int r = 0; r <= k; ++r) g += tau[r] * nu(r, k);
        gamma(i, k) = g;
      }
    }
    for (int a = 0; a < K; ++a)
      for (int b = a + 1; b < K; ++b) {
        double saa = 0, sbb = 0, sab = 0, ma = 0, mb = 0;
        for (std::size_t i = 0; i < I; ++i) {
          ma += gamma(i, a);
          mb += gamma(i, b);
        }
        ma /= I;
        mb /= I;
        for (std::size_t i = 0; i < I; ++i) {
          saa += (gamma(i, a) - ma) * (gamma(i, a) - ma);
          sbb += (gamma(i, b) - mb) * (gamma(i, b) - mb);
          sab += (gamma(i, a) - ma) * (gamma(i, b) - mb);
        }
        const double corr = sab / std::sqrt(saa * sbb);
        const double se = (1.0 - rho * rho) / std::sqrt(double(I));
        CHECK(std::abs(corr - rho) <= 3.0 * se);
      }
  }
}

TEST_CASE("generate_attributes is deterministic under the seed") {
  const QMatrix q = fixture("qmatrix_sim1.csv");
  SimConfig config;
  config.examinees = 50;
  config.q = &q;
  config.rho = 0.3;
  config.seed = 77;
  CHECK(generate_attributes(config) == generate_attributes(config));
  SimConfig other = config;
  other.seed = 78;
  CHECK_FALSE(generate_attributes(config) == generate_attributes(other));
}

TEST_CASE("generate_responses") {
  const QMatrix q = fixture("qmatrix_sim1.csv");

  SUBCASE("g=s=0 makes responses deterministic") {
    AttributeMatrix alpha(4, 5);
    for (std::size_t k = 0; k < 5; ++k) alpha(0, k) = 1;  // full master
    alpha(1, 0) = 1;                                      // only attribute 1
    const ResponseMatrix y = generate_responses(alpha, q, 0.0, 0.0, 1);
    for (std::size_t j = 0; j < q.items(); ++j) {
      CHECK(y(0, j) == 1);
      bool needs_only_a1 = q.required(j) == std::vector<int>{0};
      CHECK(y(1, j) == (needs_only_a1 ? 1 : 0));
      CHECK(y(3, j) == 0);  // no attributes, no correct answers
    }
  }

  SUBCASE("empirical correct rate approaches the IRF value") {
    AttributeMatrix alpha(20000, 5, 1);  // everyone masters everything
    const ResponseMatrix y = generate_responses(alpha, q, 0.2, 0.2, 99);
    double rate = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i) rate += y(i, 0);  // item 1: one attribute
    rate /= y.rows();
    CHECK(rate == doctest::Approx(0.8).epsilon(0.01));
  }

  SUBCASE("deterministic under seed") {
    AttributeMatrix alpha(10, 5);
    for (std::size_t i = 0; i < 10; ++i) alpha(i, i % 5) = 1;
    CHECK(generate_responses(alpha, q, 0.2, 0.2, 5) ==
          generate_responses(alpha, q, 0.2, 0.2, 5));
  }

  SUBCASE("monotonicity violations are rejected") {
    AttributeMatrix alpha(1, 5, 1);
    CHECK_THROWS_AS(generate_responses(alpha, q, 0.6, 0.4, 1), validation_error);
  }
}

TEST_CASE("conditional correct rate per (pattern, item) matches the IRF") {
  BinaryMatrix qm(2, 2);
  qm(0, 0) = qm(0, 1) = 1;
  qm(1, 1) = 1;
  const QMatrix q{qm};
  const int n = 30000;
  for (std::uint32_t m = 0; m < 4; ++m) {
    const auto pattern = index_to_pattern(m, 2);
    AttributeMatrix alpha(n, 2);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) alpha(i, k) = pattern[k];
    const ResponseMatrix y = generate_responses(alpha, q, 0.2, 0.2, 400 + m);
    const auto params = derive_item_params(SlipGuess::constant(q, 0.2, 0.2), q);
    for (std::size_t j = 0; j < 2; ++j) {
      const double expected =
          irf(pattern, q.row(j), params.pi_star[j], params.r_row(j));
      double rate = 0.0;
      for (int i = 0; i < n; ++i) rate += y(i, j);
      rate /= n;
      const double tol = 4.0 * std::sqrt(expected * (1 - expected) / n) + 1e-9;
      CHECK(std::abs(rate - expected) <= tol);
    }
  }
}

TEST_CASE("simulate_dataset is reproducible and validates its config") {
  const QMatrix q = fixture("qmatrix_sim1.csv");
  SimConfig config;
  config.examinees = 100;
  config.q = &q;
  config.rho = 0.3;
  config.seed = 31;
  const SimResult a = simulate_dataset(config);
  const SimResult b = simulate_dataset(config);
  CHECK(a.attributes == b.attributes);
  CHECK(a.responses == b.responses);

  config.examinees = 0;
  CHECK_THROWS_AS(simulate_dataset(config), validation_error);
  config.examinees = 10;
  config.rho = 1.0;
  CHECK_THROWS_AS(simulate_dataset(config), validation_error);
}
