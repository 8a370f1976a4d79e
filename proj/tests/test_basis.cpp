#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ddpce/basis.hpp"
#include "ddpce/error.hpp"
#include "oracles.hpp"

using namespace ddpce;
using namespace ddpce::basis;
using doctest::Approx;

namespace {

Eigen::MatrixXd empirical_gram(const UnivariateBasis& b, std::span<const double> xs) {
  const int n = b.degree() + 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double x : xs) {
    b.evaluate(x, v);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) g(k, l) += v[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(l)];
  }
  return g / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("empirical moments") {
  const std::vector<double> a{1, 2, 3};
  const auto mu = empirical_moments(a, 2);
  CHECK(mu(0) == 1.0);
  CHECK(mu(1) == Approx(2.0));
  CHECK(mu(2) == Approx(14.0 / 3.0));

  const std::vector<double> zero{0.0};
  const auto mz = empirical_moments(zero, 4);
  CHECK(mz == Eigen::VectorXd::Unit(5, 0));

  const std::vector<double> sym{-1.0, 1.0};
  const auto ms = empirical_moments(sym, 3);
  CHECK(ms(0) == 1.0);
  CHECK(ms(1) == 0.0);
  CHECK(ms(2) == 1.0);
  CHECK(ms(3) == 0.0);
}

TEST_CASE("three-point basis matches hand Gram-Schmidt") {
  const std::vector<double> xs{-1.0, 0.0, 1.0};
  const auto b = build_univariate(xs, 2);
  const Eigen::MatrixXd got = b.monomial_coefficients();
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 3);
  expect(0, 0) = 1.0;
  expect(1, 1) = std::sqrt(1.5);
  expect(2, 0) = -2.0 / std::sqrt(2.0);
  expect(2, 2) = 3.0 / std::sqrt(2.0);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((got - oracle::gram_schmidt_monomials(xs, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((empirical_gram(b, xs) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degree zero basis is the constant one") {
  const std::vector<double> xs{3.0, 3.0, 7.0};
  const auto b = build_univariate(xs, 0);
  CHECK(b.degree() == 0);
  CHECK(b.value(0, -100.0) == 1.0);
  CHECK(b.monomial_coefficients()(0, 0) == 1.0);
  // a constant sample still supports degree 0
  const std::vector<double> flat{2.0, 2.0};
  CHECK(build_univariate(flat, 0).value(0, 5.0) == 1.0);
}

TEST_CASE("normal samples approximate orthonormal Hermite polynomials") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> xs(10000);
  for (double& x : xs) x = g(rng);
  const auto b = build_univariate(xs, 3);
  const Eigen::MatrixXd diff = b.monomial_coefficients() - oracle::hermite_orthonormal(3);
  CHECK(diff.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("rank deficiency reports the achievable degree") {
  const std::vector<double> xs{1.0, 1.0, 2.0, 2.0, 3.0};
  try {
    build_univariate(xs, 3);
    FAIL("expected rank deficiency");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
    CHECK(std::string(e.what()).find("achievable max degree 2") != std::string::npos);
  }
  CHECK(build_univariate(xs, 2).degree() == 2);
}

TEST_CASE("orthonormality, sign and nesting on random samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(10.0, 30.0);
  std::exponential_distribution<double> ex(0.5);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<double> xs(500);
    for (double& x : xs) x = trial % 2 ? u(rng) : ex(rng);
    const auto b6 = build_univariate(xs, 6);
    CHECK((empirical_gram(b6, xs) - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-8);
    for (int k = 0; k <= 6; ++k) CHECK(b6.standardized_coefficients()(k, k) > 0.0);
    const auto b4 = build_univariate(xs, 4);
    CHECK(b6.standardized_coefficients().topLeftCorner(5, 5) == b4.standardized_coefficients());
  }
}

TEST_CASE("Gram-Schmidt and moment Stieltjes routes agree") {
  std::mt19937_64 rng(8);
  std::gamma_distribution<double> gam(3.0, 2.0);
  for (int p = 1; p <= 6; ++p) {
    std::vector<double> xs(2000);
    for (double& x : xs) x = gam(rng);
    const auto b = build_univariate(xs, p);
    const Eigen::MatrixXd s = stieltjes_coefficients(xs, p);
    CHECK((b.standardized_coefficients() - s).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("multi-index sets") {
  const auto a = build_multi_index(3, 2);
  CHECK(a.size() == 10);
  CHECK(a.indices.front() == std::vector<int>{0, 0, 0});

  const auto b = build_multi_index(1, 5);
  REQUIRE(b.size() == 6);
  for (int k = 0; k <= 5; ++k) CHECK(b.indices[static_cast<std::size_t>(k)] == std::vector<int>{k});

  const auto c = build_multi_index(2, 1);
  REQUIRE(c.size() == 3);
  CHECK(c.indices[0] == std::vector<int>{0, 0});
  CHECK(c.indices[1] == std::vector<int>{1, 0});
  CHECK(c.indices[2] == std::vector<int>{0, 1});

  const auto d = build_multi_index(2, 2);
  CHECK(d.indices[3] == std::vector<int>{2, 0});
  CHECK(d.indices[4] == std::vector<int>{1, 1});
  CHECK(d.indices[5] == std::vector<int>{0, 2});

  try {
    build_multi_index(20, 10, 1000);
    FAIL("expected basis too large");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BasisTooLarge);
    CHECK(std::string(e.what()).find("30045015") != std::string::npos);
  }
}

TEST_CASE("multi-index properties over a grid of (d, p)") {
  for (std::size_t d = 1; d <= 5; ++d) {
    for (int p = 0; p <= 5; ++p) {
      const auto s = build_multi_index(d, p);
      CHECK(s.size() == total_degree_count(d, p));
      std::set<std::vector<int>> unique(s.indices.begin(), s.indices.end());
      CHECK(unique.size() == s.size());
      int prev_deg = 0;
      for (std::size_t t = 0; t < s.size(); ++t) {
        int deg = 0;
        for (int v : s.indices[t]) deg += v;
        CHECK(deg <= p);
        CHECK(deg >= prev_deg);
        if (t > 0 && deg == prev_deg) CHECK(s.indices[t - 1] > s.indices[t]);
        prev_deg = deg;
      }
    }
  }
}

TEST_CASE("tensor evaluation") {
  const std::vector<double> xs{-1.0, 0.0, 1.0};
  const sampling::SampleSet s(Eigen::Map<const Eigen::MatrixXd>(xs.data(), 3, 1));
  const auto b = build_multivariate(s, 2);
  const std::vector<double> one{1.0};
  const Eigen::VectorXd v = b.evaluate(one);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == Approx(std::sqrt(1.5)).epsilon(1e-14));
  CHECK(v(2) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  Eigen::MatrixXd x2(4, 2);
  x2 << 0, 1, 1, 2, 2, 0, 3, 5;
  const auto b2 = build_multivariate(sampling::SampleSet(x2), 1);
  CHECK(b2.size() == 3);
  const std::vector<double> pt{0.3, 0.7};
  const Eigen::VectorXd w = b2.evaluate(pt);
  CHECK(w(0) == 1.0);
  CHECK(w(1) == b2.dims()[0].value(1, 0.3));
  CHECK(w(2) == b2.dims()[1].value(1, 0.7));
  CHECK_THROWS_AS(b2.evaluate(one), Error);
}

TEST_CASE("tensor Gram converges to identity for independent inputs") {
  const sampling::InputSpec spec{{sampling::Uniform{-2, 5}, sampling::Normal{3, 0.5}}};
  const auto s = sampling::draw_samples(spec, 50000, 21);
  const auto b = build_multivariate(s, 2);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index i = 0; i < s.x().rows(); ++i) {
    const std::vector<double> x{s.x()(i, 0), s.x()(i, 1)};
    const Eigen::VectorXd v = b.evaluate(x);
    g += v * v.transpose();
  }
  g /= static_cast<double>(s.size());
  CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("basis text round-trip preserves evaluation bit-for-bit") {
  const sampling::InputSpec spec{{sampling::Uniform{0.8, 1.2}, sampling::DiscreteUniform{{0, 1, 2, 3, 4, 5}}}};
  const auto s = sampling::draw_samples(spec, 300, 4);
  const auto b = build_multivariate(s, 3);
  std::stringstream ss;
  write_basis(b, ss);
  const auto back = read_basis(ss);
  REQUIRE(back.size() == b.size());
  CHECK(back.index().indices == b.index().indices);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const std::vector<double> x{s.x()(i, 0), s.x()(i, 1) + 0.25};
    CHECK(back.evaluate(x) == b.evaluate(x));
  }
  std::stringstream bad("ddpce-basis 1\ndims 1\ndim 1 degree x\n");
  CHECK_THROWS_AS(read_basis(bad), Error);
}
