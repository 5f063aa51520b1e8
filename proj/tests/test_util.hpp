#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/panel.hpp"

#include <string>

namespace pvarmix::testing {

inline PanelData random_panel(int N, int M, int T, RngStream& rng) {
  PanelData p;
  p.Y.resize(T, N * M);
  for (Eigen::Index k = 0; k < p.Y.size(); ++k) p.Y.data()[k] = rng.normal();
  for (int i = 0; i < N; ++i) p.countries.push_back("C" + std::to_string(i));
  for (int j = 0; j < M; ++j) p.variables.push_back("V" + std::to_string(j));
  for (int t = 0; t < T; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", 2000 + t / 12, t % 12 + 1);
    p.dates.emplace_back(buf);
  }
  return p;
}

// A structurally valid state with random entries.
inline ParameterState random_state(int N, int M, int P, int q, int t_eff, int G, RngStream& rng, double scale = 0.1) {
  ParameterState s;
  const int K = N * M;
  const int m = M * (M * P + 1);
  const int k = (N - 1) * M * P;
  auto fill = [&](Eigen::MatrixXd& A, double sd) {
    for (Eigen::Index r = 0; r < A.size(); ++r) A.data()[r] = sd * rng.normal();
  };
  s.C.assign(static_cast<std::size_t>(N), Eigen::MatrixXd(M, M * P + 1));
  s.B.assign(static_cast<std::size_t>(N), Eigen::MatrixXd(M, k));
  for (auto& c : s.C) fill(c, scale);
  for (auto& b : s.B) fill(b, scale);
  s.L.resize(K, q);
  fill(s.L, 0.5);
  for (int r = 0; r < q; ++r) {
    for (int c = r; c < q; ++c) s.L(r, c) = 0.0;
    s.L(r, r) = 1.0;
  }
  s.F.resize(t_eff, q);
  s.H.resize(t_eff, q);
  s.Omega.resize(t_eff, K);
  fill(s.F, 1.0);
  fill(s.H, 0.3);
  fill(s.Omega, 0.3);
  s.sv_factor.assign(static_cast<std::size_t>(q), SVParams{0.0, 0.9, 0.1});
  s.sv_idio.assign(static_cast<std::size_t>(K), SVParams{0.0, 0.9, 0.1});
  MixtureState& mx = s.mix;
  mx.w = Eigen::VectorXd::Constant(G, 1.0 / G);
  mx.log_w = mx.w.array().log();
  mx.delta.resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) mx.delta[static_cast<std::size_t>(i)] = i % G;
  mx.mu.resize(m, G);
  fill(mx.mu, 1.0);
  mx.V = Eigen::VectorXd::Constant(m, 0.1);
  mx.lambda = Eigen::VectorXd::Ones(m);
  mx.mu0 = Eigen::VectorXd::Zero(m);
  mx.range_sq = Eigen::VectorXd::Ones(m);
  s.shrink.xi = Eigen::VectorXd::Ones(N);
  s.shrink.tau2 = Eigen::MatrixXd::Constant(N, k, 0.01);
  return s;
}

}  // namespace pvarmix::testing
