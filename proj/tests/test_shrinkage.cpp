#include "pvarmix/error.hpp"
#include "pvarmix/shrinkage.hpp"

#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace pvarmix;

namespace {

double kurtosis(const std::vector<double>& x) {
  double m2 = 0, m4 = 0;
  for (double v : x) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= x.size();
  m4 /= x.size();
  return m4 / (m2 * m2);
}

}  // namespace

TEST_CASE("xi: gamma conditional moments") {
  RngStream rng(1, 0);
  const NGHyper h;
  const int n = 400000;
  double s = 0;
  for (int k = 0; k < n; ++k) s += draw_xi(Eigen::Vector2d(1.0, 1.0), h, rng);
  // shape 0.21, rate 0.11
  CHECK(s / n == doctest::Approx(0.21 / 0.11).epsilon(0.02));

  double p = 0;
  for (int k = 0; k < n; ++k) p += draw_xi(Eigen::VectorXd(0), h, rng);
  CHECK(p / n == doctest::Approx(1.0).epsilon(0.05));

  NGHyper lit;
  lit.literal_rate = true;
  lit.cc0 = 0.5;
  double l = 0;
  for (int k = 0; k < n; ++k) l += draw_xi(Eigen::Vector2d(4.0, 9.0), lit, rng);
  // shape 0.7, rate 0.5 + 0.05 * (2 + 3)
  CHECK(l / n == doctest::Approx(0.7 / 0.75).epsilon(0.02));
  CHECK_THROWS_AS(draw_xi(Eigen::Vector2d(1.0, 0.0), h, rng), Error);
}

TEST_CASE("xi: large local scales push the global scale down") {
  RngStream rng(2, 0);
  const NGHyper h;
  const Eigen::VectorXd small = Eigen::VectorXd::Constant(20, 0.1);
  const Eigen::VectorXd huge = Eigen::VectorXd::Constant(20, 100.0);
  const int n = 10000;
  std::vector<double> a, b;
  for (int k = 0; k < n; ++k) {
    a.push_back(draw_xi(small, h, rng));
    b.push_back(draw_xi(huge, h, rng));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (int q = 1; q < 10; ++q) CHECK(b[static_cast<std::size_t>(q * n / 10)] < a[static_cast<std::size_t>(q * n / 10)]);
}

TEST_CASE("tau: GIG mean against the Bessel ratio") {
  RngStream rng(3, 0);
  const int n = 1000000;
  double s = 0;
  for (int k = 0; k < n; ++k) s += draw_tau(1.0, 2.0, 0.5, rng);
  // GIG(0, 1, 1): mean K_1(1) / K_0(1)
  const double want = boost::math::cyl_bessel_k(1, 1.0) / boost::math::cyl_bessel_k(0, 1.0);
  CHECK(s / n == doctest::Approx(want).epsilon(0.01));
}

TEST_CASE("tau: escape for large coefficients and collapse at zero") {
  RngStream rng(4, 0);
  const int n = 10000;
  std::vector<double> zero, big;
  for (int k = 0; k < n; ++k) {
    zero.push_back(draw_tau(0.0, 1.0, 0.1, rng));
    big.push_back(draw_tau(3.0, 1.0, 0.1, rng));
  }
  std::sort(zero.begin(), zero.end());
  std::sort(big.begin(), big.end());
  for (int q = 1; q < 10; ++q)
    CHECK(big[static_cast<std::size_t>(q * n / 10)] > zero[static_cast<std::size_t>(q * n / 10)]);

  int near = 0;
  for (int k = 0; k < n; ++k) {
    const double t = draw_tau(1e-8, 1.0, 0.1, rng);
    REQUIRE(t > 0.0);
    near += t < 1e-3;
  }
  CHECK(near > n / 2);
  CHECK_THROWS_AS(draw_tau(1.0, 0.0, 0.1, rng), Error);
}

TEST_CASE("forward prior simulation: variance and heavier tails for small vartheta") {
  RngStream rng(5, 0);
  const int n = 2000000;
  const double xi = 1.5;
  std::vector<double> kurt;
  for (double vt : {0.1, 0.5, 1.0}) {
    std::vector<double> b(n);
    double v = 0;
    for (int k = 0; k < n; ++k) {
      const double t2 = draw_tau_prior(xi, vt, rng);
      b[static_cast<std::size_t>(k)] = std::sqrt(t2) * rng.normal();
      v += b[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
    }
    // same second moment as N(0, 2 t^2 / xi) with E t^2 = 1
    CAPTURE(vt);
    CHECK(v / n == doctest::Approx(2.0 / xi).epsilon(0.03));
    kurt.push_back(kurtosis(b));
  }
  CHECK(kurt[0] > kurt[1]);
  CHECK(kurt[1] > kurt[2]);
  CHECK(kurt[2] > 3.0);
  // excess kurtosis 3 / vartheta
  CHECK(kurt[2] == doctest::Approx(6.0).epsilon(0.1));
  CHECK(unit_local_scale(ng_prior_var(2.0), 3.0) == 3.0);
}

TEST_CASE("alternating conditionals stay positive") {
  RngStream rng(6, 0);
  const NGHyper h;
  Eigen::VectorXd b(12);
  for (int j = 0; j < 12; ++j) b[j] = j % 3 == 0 ? 0.0 : rng.normal();
  Eigen::VectorXd tau2 = Eigen::VectorXd::Ones(12);
  double xi = 1.0;
  for (int it = 0; it < 5000; ++it) {
    xi = draw_xi(tau2, h, rng);
    REQUIRE(xi > 0.0);
    REQUIRE(std::isfinite(xi));
    for (int j = 0; j < 12; ++j) {
      tau2[j] = draw_tau(b[j], xi, h.vartheta, rng);
      REQUIRE(tau2[j] > 0.0);
      REQUIRE(std::isfinite(tau2[j]));
    }
  }
}
