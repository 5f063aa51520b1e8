#include "pvarmix/error.hpp"
#include "pvarmix/mixture.hpp"
#include "pvarmix/panel.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace pvarmix;
using pvarmix::testing::random_panel;
using pvarmix::testing::random_state;

TEST_CASE("design for a hand-built two-country panel") {
  PanelData p;
  p.Y.resize(3, 2);
  p.Y << 1, 10, 2, 20, 3, 30;
  p.countries = {"A", "B"};
  p.variables = {"x"};
  const Design d = build_design(p, 0, 1);
  Eigen::MatrixXd dom(2, 2);
  dom << 1, 1, 1, 2;
  CHECK(d.domestic == dom);
  Eigen::MatrixXd fore(2, 1);
  fore << 10, 20;
  CHECK(d.foreign == fore);
  const Design d1 = build_design(p, 1, 1);
  CHECK(d1.foreign(1, 0) == 2.0);
  CHECK_THROWS_AS(build_design(p, 0, 3), Error);
  CHECK_THROWS_AS(build_design(p, 2, 1), Error);
}

TEST_CASE("intercept column is ones and foreign columns follow the documented order") {
  RngStream rng(1, 0);
  const int N = 4, M = 3, P = 2, T = 12;
  const PanelData p = random_panel(N, M, T, rng);
  for (int i = 0; i < N; ++i) {
    const Design d = build_design(p, i, P);
    CHECK((d.domestic.col(0).array() == 1.0).all());
    for (int c = 0; c < N; ++c) {
      if (c == i) continue;
      for (int lag = 0; lag < P; ++lag)
        for (int v = 0; v < M; ++v) {
          const int col = foreign_column(N, M, i, c, lag, v);
          for (int t = P; t < T; ++t) REQUIRE(d.foreign(t - P, col) == p.Y(t - lag - 1, c * M + v));
        }
    }
  }
}

TEST_CASE("design reproduces the panel equation by direct summation") {
  RngStream rng(2, 0);
  const int N = 3, M = 2, P = 2, T = 15;
  const PanelData p = random_panel(N, M, T, rng);
  const ParameterState s = random_state(N, M, P, 1, T - P, 2, rng);
  for (int i = 0; i < N; ++i) {
    const Design d = build_design(p, i, P);
    const Eigen::MatrixXd& C = s.C[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd& B = s.B[static_cast<std::size_t>(i)];
    for (int t = P; t < T; ++t) {
      for (int j = 0; j < M; ++j) {
        // direct: intercept + own lags + sum over other countries' lags
        double direct = C(j, 0);
        for (int lag = 1; lag <= P; ++lag) {
          for (int v = 0; v < M; ++v) direct += C(j, 1 + (lag - 1) * M + v) * p.Y(t - lag, i * M + v);
          for (int c = 0; c < N; ++c) {
            if (c == i) continue;
            for (int v = 0; v < M; ++v)
              direct += B(j, foreign_column(N, M, i, c, lag - 1, v)) * p.Y(t - lag, c * M + v);
          }
        }
        const double via = d.domestic.row(t - P).dot(C.row(j)) + d.foreign.row(t - P).dot(B.row(j));
        REQUIRE(via == doctest::Approx(direct).epsilon(1e-13));
      }
    }
  }
  // full matrix form agrees and round-trips
  const Eigen::MatrixXd A = full_coefficients(s, P);
  const Eigen::MatrixXd R = residuals(s, p, P);
  for (int t = P; t < T; ++t) {
    const Eigen::VectorXd e = p.Y.row(t).transpose() - A * lag_vector(p.Y, t, P);
    REQUIRE((e - R.row(t - P).transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  ParameterState s2 = s;
  set_from_full_coefficients(s2, A, P);
  for (int i = 0; i < N; ++i) {
    CHECK(s2.C[static_cast<std::size_t>(i)] == s.C[static_cast<std::size_t>(i)]);
    CHECK(s2.B[static_cast<std::size_t>(i)] == s.B[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd c = domestic_vector(s, 1);
  CHECK(c.size() == M * (M * P + 1));
  CHECK(c[M * P + 1] == s.C[1](1, 0));
}

TEST_CASE("conditional loglik with unit variances and zero residuals") {
  const int N = 2, M = 2, P = 1, T = 6;
  RngStream rng(3, 0);
  ParameterState s = random_state(N, M, P, 1, T - P, 1, rng);
  for (auto& c : s.C) c.setZero();
  for (auto& b : s.B) b.setZero();
  s.L.setZero();
  s.Omega.setZero();
  PanelData p = random_panel(N, M, T, rng);
  p.Y.setZero();
  const double want = -0.5 * (T - P) * N * M * std::log(2 * std::numbers::pi);
  CHECK(conditional_loglik(s, p, P) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("conditional loglik matches a dense covariance oracle") {
  const int N = 2, M = 1, P = 1, T = 5;
  RngStream rng(4, 0);
  const PanelData p = random_panel(N, M, T, rng);
  const ParameterState s = random_state(N, M, P, 1, T - P, 1, rng, 0.4);
  const Eigen::MatrixXd A = full_coefficients(s, P);
  double oracle = 0;
  for (int t = P; t < T; ++t) {
    const Eigen::VectorXd e = p.Y.row(t).transpose() - A * lag_vector(p.Y, t, P);
    Eigen::MatrixXd S = s.L * s.H.row(t - P).array().exp().matrix().asDiagonal() * s.L.transpose();
    for (int n = 0; n < N * M; ++n) S(n, n) += std::exp(s.Omega(t - P, n));
    oracle += -0.5 * (N * M * std::log(2 * std::numbers::pi) + std::log(S.determinant()) + e.dot(S.inverse() * e));
  }
  CHECK(conditional_loglik(s, p, P) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("conditional loglik is invariant to label permutations") {
  RngStream rng(5, 0);
  const int N = 4, M = 2, P = 1, T = 10, G = 3;
  const PanelData p = random_panel(N, M, T, rng);
  ParameterState s = random_state(N, M, P, 1, T - P, G, rng);
  const double base = conditional_loglik(s, p, P);
  for (int r = 0; r < 10; ++r) {
    (void)permute_labels(s.mix, rng);
    CHECK(std::abs(conditional_loglik(s, p, P) - base) < 1e-8);
  }
}

TEST_CASE("sigma is symmetric PSD with the documented floor") {
  RngStream rng(6, 0);
  for (int r = 0; r < 50; ++r) {
    const int K = 2 + r % 5;
    const int q = 1 + r % K;
    Eigen::MatrixXd L(K, q);
    for (Eigen::Index k = 0; k < L.size(); ++k) L.data()[k] = rng.normal();
    Eigen::VectorXd h(q), w(K);
    for (int k = 0; k < q; ++k) h[k] = rng.normal();
    for (int k = 0; k < K; ++k) w[k] = rng.normal();
    const Eigen::MatrixXd S = assemble_sigma(L, h, w);
    REQUIRE((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    REQUIRE(es.eigenvalues().minCoeff() >= w.array().exp().minCoeff() * (1 - 1e-10));
  }
  Eigen::VectorXd w(3);
  w << 0.1, -0.2, 0.3;
  const Eigen::MatrixXd S0 = assemble_sigma(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2), w);
  CHECK(S0.isApprox(Eigen::MatrixXd(w.array().exp().matrix().asDiagonal())));
  Eigen::VectorXd h(2);
  h << 0.5, -0.5;
  const Eigen::MatrixXd S1 = assemble_sigma(Eigen::MatrixXd::Identity(2, 2), h, Eigen::VectorXd::Constant(2, -800.0));
  CHECK(S1.isApprox(Eigen::MatrixXd(h.array().exp().matrix().asDiagonal())));
}

TEST_CASE("singular covariance is rejected") {
  const int N = 2, M = 1, P = 1, T = 4;
  RngStream rng(7, 0);
  const PanelData p = random_panel(N, M, T, rng);
  ParameterState s = random_state(N, M, P, 1, T - P, 1, rng);
  s.Omega.setConstant(-800.0);
  CHECK_THROWS_AS(conditional_loglik(s, p, P), Error);
}

TEST_CASE("state layout carries (K+1)q + K free covariance elements") {
  RngStream rng(8, 0);
  const int N = 3, M = 2, q = 2, K = N * M;
  const ParameterState s = random_state(N, M, 1, q, 5, 2, rng);
  // loadings plus one factor and one idiosyncratic log-variance per period
  CHECK(s.L.size() + s.H.cols() + s.Omega.cols() == (K + 1) * q + K);
  ModelConfig cfg;
  cfg.q = q;
  cfg.G = 2;
  CHECK_NOTHROW(validate_state(s, cfg));
  ParameterState bad = s;
  bad.L(0, 1) = 0.3;
  CHECK_THROWS_AS(validate_state(bad, cfg), Error);
}

TEST_CASE("panel validation and head") {
  RngStream rng(9, 0);
  PanelData p = random_panel(2, 2, 5, rng);
  CHECK_NOTHROW(p.validate());
  const PanelData h = p.head(3);
  CHECK(h.T() == 3);
  CHECK(h.dates.size() == 3);
  p.Y(1, 1) = std::nan("");
  CHECK_THROWS_AS(p.validate(), Error);
  ModelConfig cfg;
  cfg.q = 5;
  CHECK_THROWS_AS(cfg.validate(4), Error);
}
