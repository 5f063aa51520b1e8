#include "pvarmix/panel.hpp"

#include "pvarmix/error.hpp"

#include <cmath>
#include <numbers>

namespace pvarmix {

void PanelData::validate() const {
  require(N() >= 1 && M() >= 1, ErrorKind::invalid_parameter, "panel needs at least one country and variable");
  require(Y.cols() == K(), ErrorKind::dimension_mismatch, "Y must have N*M columns");
  require(dates.empty() || static_cast<int>(dates.size()) == T(), ErrorKind::dimension_mismatch,
          "one date per row of Y");
  require(Y.allFinite(), ErrorKind::invalid_parameter, "panel contains non-finite values");
}

PanelData PanelData::head(int rows) const {
  require(rows >= 0 && rows <= T(), ErrorKind::dimension_mismatch, "head beyond panel length");
  PanelData out;
  out.Y = Y.topRows(rows);
  out.countries = countries;
  out.variables = variables;
  if (!dates.empty()) out.dates.assign(dates.begin(), dates.begin() + rows);
  return out;
}

void ModelConfig::validate(int K) const {
  require(P >= 1, ErrorKind::invalid_parameter, "P must be >= 1");
  require(q >= 0 && q <= K, ErrorKind::invalid_parameter, "need 0 <= q <= K");
  require(G >= 1, ErrorKind::invalid_parameter, "G must be >= 1");
  for (double v : {w0, w1, nu1, nu2, c0, cc0, cc1, vartheta, sv_phi_var, sv_sigma_shape, sv_sigma_rate, sv_rho_a,
                   sv_rho_b, loading_var, intercept_var, p0_tuning}) {
    require(v > 0 && std::isfinite(v), ErrorKind::invalid_parameter, "hyperparameters must be positive");
  }
  require(draws >= 1 && burnin >= 0 && burnin < draws, ErrorKind::invalid_parameter,
          "need 0 <= burnin < draws");
  require(thin >= 1 && (draws - burnin) % thin == 0, ErrorKind::invalid_parameter,
          "thin must divide draws - burnin");
  require(fixed_range >= 0 && mu0_prior_var >= 0, ErrorKind::invalid_parameter, "test hooks must be >= 0");
}

std::vector<int> MixtureState::counts() const {
  std::vector<int> n(static_cast<std::size_t>(G()), 0);
  for (int d : delta) ++n[static_cast<std::size_t>(d)];
  return n;
}

Eigen::VectorXd domestic_vector(const ParameterState& s, int i) {
  const Eigen::MatrixXd& c = s.C[static_cast<std::size_t>(i)];
  Eigen::VectorXd out(c.size());
  for (Eigen::Index j = 0; j < c.rows(); ++j) out.segment(j * c.cols(), c.cols()) = c.row(j).transpose();
  return out;
}

void set_domestic_vector(ParameterState& s, int i, const Eigen::VectorXd& v) {
  Eigen::MatrixXd& c = s.C[static_cast<std::size_t>(i)];
  require(v.size() == c.size(), ErrorKind::dimension_mismatch, "domestic vector length");
  for (Eigen::Index j = 0; j < c.rows(); ++j) c.row(j) = v.segment(j * c.cols(), c.cols()).transpose();
}

int foreign_column(int N, int M, int i, int c, int p, int v) {
  const int slot = c < i ? c : c - 1;
  return p * (N - 1) * M + slot * M + v;
}

Eigen::MatrixXd full_coefficients(const ParameterState& s, int P) {
  const int N = s.N();
  const int M = s.M();
  const int K = N * M;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, 1 + K * P);
  for (int i = 0; i < N; ++i) {
    const auto& Ci = s.C[static_cast<std::size_t>(i)];
    const auto& Bi = s.B[static_cast<std::size_t>(i)];
    for (int j = 0; j < M; ++j) {
      const int n = i * M + j;
      A(n, 0) = Ci(j, 0);
      for (int p = 0; p < P; ++p) {
        for (int c = 0; c < N; ++c) {
          for (int v = 0; v < M; ++v) {
            const int col = 1 + p * K + c * M + v;
            A(n, col) = c == i ? Ci(j, 1 + p * M + v) : Bi(j, foreign_column(N, M, i, c, p, v));
          }
        }
      }
    }
  }
  return A;
}

void set_from_full_coefficients(ParameterState& s, const Eigen::MatrixXd& A, int P) {
  const int N = s.N();
  const int M = s.M();
  const int K = N * M;
  require(A.rows() == K && A.cols() == 1 + K * P, ErrorKind::dimension_mismatch, "full coefficient matrix shape");
  for (int i = 0; i < N; ++i) {
    auto& Ci = s.C[static_cast<std::size_t>(i)];
    auto& Bi = s.B[static_cast<std::size_t>(i)];
    for (int j = 0; j < M; ++j) {
      const int n = i * M + j;
      Ci(j, 0) = A(n, 0);
      for (int p = 0; p < P; ++p) {
        for (int c = 0; c < N; ++c) {
          for (int v = 0; v < M; ++v) {
            const double a = A(n, 1 + p * K + c * M + v);
            if (c == i) {
              Ci(j, 1 + p * M + v) = a;
            } else {
              Bi(j, foreign_column(N, M, i, c, p, v)) = a;
            }
          }
        }
      }
    }
  }
}

Eigen::VectorXd lag_vector(const Eigen::MatrixXd& Y, int t, int P) {
  const Eigen::Index K = Y.cols();
  Eigen::VectorXd x(1 + K * P);
  x[0] = 1.0;
  for (int p = 0; p < P; ++p) x.segment(1 + p * K, K) = Y.row(t - p - 1).transpose();
  return x;
}

Design build_design(const PanelData& panel, int i, int P) {
  const int N = panel.N();
  const int M = panel.M();
  const int T = panel.T();
  require(i >= 0 && i < N, ErrorKind::invalid_parameter, "country index out of range");
  require(P >= 1, ErrorKind::invalid_parameter, "P must be >= 1");
  require(T > P, ErrorKind::dimension_mismatch, "panel shorter than lag length");
  const int Te = T - P;
  Design d;
  d.domestic.resize(Te, M * P + 1);
  d.foreign.resize(Te, (N - 1) * M * P);
  d.domestic.col(0).setOnes();
  for (int p = 0; p < P; ++p) {
    for (int c = 0; c < N; ++c) {
      const auto block = panel.Y.block(P - p - 1, c * M, Te, M);
      if (c == i) {
        d.domestic.block(0, 1 + p * M, Te, M) = block;
      } else if (M > 0 && N > 1) {
        d.foreign.block(0, foreign_column(N, M, i, c, p, 0), Te, M) = block;
      }
    }
  }
  return d;
}

Eigen::MatrixXd residuals(const ParameterState& s, const PanelData& panel, int P) {
  const int T = panel.T();
  const int K = panel.K();
  require(s.N() == panel.N() && s.M() == panel.M(), ErrorKind::dimension_mismatch, "state does not match panel");
  require(T > P, ErrorKind::dimension_mismatch, "panel shorter than lag length");
  const Eigen::MatrixXd A = full_coefficients(s, P);
  const int Te = T - P;
  Eigen::MatrixXd X(Te, 1 + K * P);
  for (int t = P; t < T; ++t) X.row(t - P) = lag_vector(panel.Y, t, P).transpose();
  return panel.Y.bottomRows(Te) - X * A.transpose();
}

Eigen::MatrixXd assemble_sigma(const Eigen::MatrixXd& L, const Eigen::VectorXd& h, const Eigen::VectorXd& omega) {
  require(L.cols() == h.size() && L.rows() == omega.size(), ErrorKind::dimension_mismatch, "sigma parts");
  Eigen::MatrixXd S = L * h.array().exp().matrix().asDiagonal() * L.transpose();
  S.diagonal() += omega.array().exp().matrix();
  return 0.5 * (S + S.transpose());
}

double conditional_loglik(const ParameterState& s, const PanelData& panel, int P) {
  const Eigen::MatrixXd E = residuals(s, panel, P);
  const Eigen::Index Te = E.rows();
  const Eigen::Index K = E.cols();
  require(s.Omega.rows() == Te && s.H.rows() == Te, ErrorKind::dimension_mismatch, "volatility paths length");
  double ll = 0.0;
  for (Eigen::Index t = 0; t < Te; ++t) {
    const Eigen::MatrixXd S = assemble_sigma(s.L, s.H.row(t).transpose(), s.Omega.row(t).transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    require(llt.info() == Eigen::Success, ErrorKind::numeric_failure, "Sigma_t not positive definite");
    const Eigen::MatrixXd Lc = llt.matrixL();
    const double min_pivot = Lc.diagonal().minCoeff();
    require(min_pivot * min_pivot > 1e-10 * S.diagonal().maxCoeff(), ErrorKind::numeric_failure,
            "Sigma_t numerically singular");
    const Eigen::VectorXd z = Lc.triangularView<Eigen::Lower>().solve(E.row(t).transpose());
    ll += -0.5 * static_cast<double>(K) * std::log(2.0 * std::numbers::pi) - Lc.diagonal().array().log().sum() -
          0.5 * z.squaredNorm();
  }
  return ll;
}

void validate_state(const ParameterState& s, const ModelConfig& cfg) {
  const int N = s.N();
  const int M = s.M();
  const int K = N * M;
  const int P = cfg.P;
  const int q = s.q();
  require(static_cast<int>(s.B.size()) == N, ErrorKind::dimension_mismatch, "B blocks");
  for (int i = 0; i < N; ++i) {
    require(s.C[static_cast<std::size_t>(i)].rows() == M && s.C[static_cast<std::size_t>(i)].cols() == M * P + 1,
            ErrorKind::dimension_mismatch, "C block shape");
    require(s.B[static_cast<std::size_t>(i)].rows() == M &&
                s.B[static_cast<std::size_t>(i)].cols() == (N - 1) * M * P,
            ErrorKind::dimension_mismatch, "B block shape");
  }
  require(s.L.rows() == K, ErrorKind::dimension_mismatch, "L rows");
  for (int r = 0; r < q; ++r) {
    for (int c = 0; c < q; ++c) {
      const double want = r == c ? 1.0 : 0.0;
      if (c >= r) require(s.L(r, c) == want, ErrorKind::numeric_failure, "loading identification block violated");
    }
  }
  require(static_cast<int>(s.sv_factor.size()) == q && static_cast<int>(s.sv_idio.size()) == K,
          ErrorKind::dimension_mismatch, "SV parameter counts");
  auto check_sv = [](const SVParams& p) {
    require(std::isfinite(p.phi) && std::abs(p.rho) < 1.0 && p.sigma > 0.0, ErrorKind::numeric_failure,
            "SV parameters out of range");
  };
  for (const auto& p : s.sv_factor) check_sv(p);
  for (const auto& p : s.sv_idio) check_sv(p);
  require(s.H.allFinite() && s.Omega.allFinite() && s.F.allFinite() && s.L.allFinite(), ErrorKind::numeric_failure,
          "non-finite factor/volatility state");
  const auto& mx = s.mix;
  if (cfg.prior == PriorKind::mixture) {
    require(mx.G() == cfg.G, ErrorKind::dimension_mismatch, "mixture size");
    require(std::abs(mx.w.sum() - 1.0) < 1e-10 && (mx.w.array() >= 0).all(), ErrorKind::numeric_failure,
            "weights off the simplex");
    require(static_cast<int>(mx.delta.size()) == N, ErrorKind::dimension_mismatch, "indicator count");
    for (int d : mx.delta) require(d >= 0 && d < mx.G(), ErrorKind::numeric_failure, "indicator out of range");
    require((mx.V.array() > 0).all() && (mx.lambda.array() > 0).all() && (mx.range_sq.array() > 0).all() &&
                mx.p0 > 0,
            ErrorKind::numeric_failure, "non-positive mixture variance");
  }
  require((s.shrink.xi.array() > 0).all() && (s.shrink.tau2.array() > 0).all(), ErrorKind::numeric_failure,
          "non-positive shrinkage scale");
}

}  // namespace pvarmix
