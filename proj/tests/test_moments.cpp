#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "tmvn/moments.hpp"

using namespace tmvn;

TEST_CASE("half-normal moments") {
  const IntegratorConfig cfg;
  const ModelParams p(Vector::Zero(1), Matrix::Identity(1, 1));
  const auto nu = mean_vector(p, cfg);
  CHECK(nu.value(0) == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-12));
  const auto mp = covariance_matrix(p, cfg);
  CHECK(mp.lambda(0, 0) == doctest::Approx(1 - 2 / std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("one-dimensional truncated normal closed form") {
  const IntegratorConfig cfg;
  for (double m : {-3.0, -0.5, 0.0, 1.2, 6.0}) {
    const double s = 0.8, a = m / s;
    const double lam = oracle::phi(a) / oracle::Phi(a);
    const auto mp = covariance_matrix(ModelParams(Vector::Constant(1, m), Matrix::Constant(1, 1, s * s)), cfg);
    CHECK(mp.nu(0) == doctest::Approx(m + s * lam).epsilon(1e-11));
    CHECK(mp.lambda(0, 0) == doctest::Approx(s * s * (1 - a * lam - lam * lam)).epsilon(1e-7));
  }
}

TEST_CASE("log_mgf of the half-normal") {
  const IntegratorConfig cfg;
  const ModelParams p(Vector::Zero(1), Matrix::Identity(1, 1));
  // E exp(tX) = 2 exp(t^2/2) Phi(t)
  const double expected = std::log(2.0) + 0.5 + std::log(oracle::Phi(1.0));
  CHECK(log_mgf(Vector::Ones(1), p, cfg) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(1.020394).epsilon(1e-6));
  CHECK(log_mgf(Vector::Zero(1), p, cfg) == doctest::Approx(0.0));
}

TEST_CASE("independent coordinates factor") {
  Vector mu(3);
  mu << 0.5, -1.0, 0.1;
  Matrix s = Matrix::Zero(3, 3);
  s.diagonal() << 1.0, 0.5, 2.0;
  const auto mp = covariance_matrix(ModelParams(mu, s), IntegratorConfig{});
  for (int i = 0; i < 3; ++i) {
    const double sd = std::sqrt(s(i, i)), a = mu(i) / sd;
    const double lam = oracle::phi(a) / oracle::Phi(a);
    CHECK(mp.nu(i) == doctest::Approx(mu(i) + sd * lam).epsilon(1e-8));
    CHECK(mp.lambda(i, i) == doctest::Approx(s(i, i) * (1 - a * lam - lam * lam)).epsilon(1e-6));
  }
  CHECK(std::abs(mp.lambda(0, 1)) < 1e-8);
}

TEST_CASE("formula moments agree with a weighted-sampling oracle") {
  Vector mu(2);
  mu << 0.3, -0.6;
  Matrix s(2, 2);
  s << 1.0, 0.5, 0.5, 1.5;
  const auto mp = covariance_matrix(ModelParams(mu, s), IntegratorConfig{});
  const auto o = oracle::truncated_moments(mu, s, 20, 5000, 42);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(mp.nu(i) - o.mean(i)) <= 4 * o.mean_se(i));
    for (int j = 0; j < 2; ++j) CHECK(std::abs(mp.lambda(i, j) - o.cov(i, j)) <= 4 * o.cov_se(i, j));
  }
}

TEST_CASE("steep regime keeps Lambda accurate") {
  // eps = 1e-3 probe point: Sigma = 500 I, mu = -500 (1, 1); exponential limit 1.
  Vector mu = Vector::Constant(2, -500.0);
  const auto mp = covariance_matrix(ModelParams(mu, 500.0 * Matrix::Identity(2, 2)), IntegratorConfig{});
  const double a = -500.0 / std::sqrt(500.0);
  const double lam = std::exp(std::log(oracle::phi(a)) - std::log(0.5 * std::erfc(-a / std::numbers::sqrt2)));
  const double var = 500.0 * (1 - a * lam - lam * lam);
  CHECK(mp.lambda(0, 0) == doctest::Approx(var).epsilon(1e-6));
  CHECK(mp.lambda(0, 0) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(std::abs(mp.lambda(0, 1)) < 1e-6);
}

TEST_CASE("cumulant derivatives at zero give nu and Lambda") {
  Vector mu(2);
  mu << 0.4, -0.3;
  Matrix sig(2, 2);
  sig << 1.0, 0.4, 0.4, 0.8;
  const ModelParams p(mu, sig);
  const IntegratorConfig cfg;
  const auto mp = covariance_matrix(p, cfg);
  const double h = 1e-4;
  for (int i = 0; i < 2; ++i) {
    const Vector e = Vector::Unit(2, i) * h;
    const double g = (log_mgf(e, p, cfg) - log_mgf(-e, p, cfg)) / (2 * h);
    CHECK(g == doctest::Approx(mp.nu(i)).epsilon(1e-5));
  }
  const double k = 1e-3;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vector ei = Vector::Unit(2, i) * k, ej = Vector::Unit(2, j) * k;
      const double hij = (log_mgf(ei + ej, p, cfg) - log_mgf(ei - ej, p, cfg) - log_mgf(ej - ei, p, cfg) +
                          log_mgf(-ei - ej, p, cfg)) / (4 * k * k);
      CHECK(std::abs(hij - mp.lambda(i, j)) < 1e-4);
    }
}
