#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pvarmix {

// Observations for N countries with M variables each. Columns of Y are
// country-major: column i*M + j holds variable j of country i (0-based).
struct PanelData {
  Eigen::MatrixXd Y;
  std::vector<std::string> countries;
  std::vector<std::string> variables;
  std::vector<std::string> dates;

  int N() const { return static_cast<int>(countries.size()); }
  int M() const { return static_cast<int>(variables.size()); }
  int T() const { return static_cast<int>(Y.rows()); }
  int K() const { return N() * M(); }

  // Labels, shapes and finiteness; throws dimension-mismatch / invalid-parameter.
  void validate() const;
  // Rows [0, rows) as a new panel.
  PanelData head(int rows) const;
};

enum class PriorKind {
  mixture,      // domestic blocks from a sparse finite mixture, foreign blocks NG
  lagwise_ng,   // large VAR: every lag coefficient NG with one global scale per lag
};

enum class IdentScheme { coordinate, weight };

struct ModelConfig {
  int P = 1;
  int q = 1;
  int G = 8;
  PriorKind prior = PriorKind::mixture;

  double w0 = 0.01;
  double w1 = 0.01;
  double nu1 = 0.5;
  double nu2 = 0.5;
  double c0 = 10.0;
  double cc0 = 0.01;
  double cc1 = 0.01;
  double vartheta = 0.1;

  // log-volatility AR(1) priors
  double sv_phi_mean = 0.0;
  double sv_phi_var = 100.0;
  double sv_sigma_shape = 0.5;
  double sv_sigma_rate = 0.5;
  double sv_rho_a = 25.0;
  double sv_rho_b = 5.0;

  double loading_var = 1.0;
  double intercept_var = 100.0;  // lagwise_ng only

  int draws = 30000;
  int burnin = 15000;
  int thin = 1;
  std::uint64_t seed = 1;

  double p0_tuning = 1.0;   // initial variance of the log-scale random walk
  bool adapt_p0 = true;
  bool sample_p0 = true;
  bool xi_rate_literal = false;

  IdentScheme ident = IdentScheme::coordinate;
  int ident_coord = 0;

  bool store_paths = false;

  // Hooks for prior-recovery and joint-distribution tests.
  bool likelihood_free = false;
  double fixed_range = 0.0;    // > 0: R2_j held at this value
  double mu0_prior_var = 0.0;  // > 0: proper N(0, v) prior on mu0

  void validate(int K) const;
};

struct SVParams {
  double phi = 0.0;
  double rho = 0.9;
  double sigma = 0.1;
};

struct MixtureState {
  Eigen::VectorXd w;      // [G]
  Eigen::VectorXd log_w;  // [G], kept alongside w for tiny weights
  std::vector<int> delta; // [N], 0-based component labels
  Eigen::MatrixXd mu;     // [m x G]
  Eigen::VectorXd V;      // [m]
  Eigen::VectorXd lambda; // [m]
  Eigen::VectorXd mu0;    // [m]
  Eigen::VectorXd range_sq;
  double p0 = 1.0;
  double p0_tuning = 1.0;

  int G() const { return static_cast<int>(w.size()); }
  Eigen::VectorXd Q0() const { return lambda.cwiseProduct(range_sq); }
  std::vector<int> counts() const;
};

struct ShrinkageState {
  Eigen::VectorXd xi;    // [N] (mixture) or [P] (lagwise_ng)
  Eigen::MatrixXd tau2;  // [N x k] foreign slots, or [K x K*P] lag slots
};

// One full draw. Paths cover the T - P modeled periods.
struct ParameterState {
  std::vector<Eigen::MatrixXd> C;  // N x [M x (M*P + 1)], intercept first
  std::vector<Eigen::MatrixXd> B;  // N x [M x (N-1)*M*P]
  Eigen::MatrixXd L;               // [K x q]
  Eigen::MatrixXd F;               // [T_eff x q]
  Eigen::MatrixXd H;               // [T_eff x q]
  Eigen::MatrixXd Omega;           // [T_eff x K]
  std::vector<SVParams> sv_factor; // [q]
  std::vector<SVParams> sv_idio;   // [K]
  MixtureState mix;
  ShrinkageState shrink;

  int N() const { return static_cast<int>(C.size()); }
  int M() const { return C.empty() ? 0 : static_cast<int>(C[0].rows()); }
  int q() const { return static_cast<int>(L.cols()); }
};

// Domestic coefficients of country i flattened equation by equation:
// entry j*(M*P+1) + r is C_i(j, r).
Eigen::VectorXd domestic_vector(const ParameterState& s, int i);
void set_domestic_vector(ParameterState& s, int i, const Eigen::VectorXd& c);

// Equivalent K x (1 + K*P) coefficient matrix acting on (1, y'_{t-1}, ..., y'_{t-P}).
Eigen::MatrixXd full_coefficients(const ParameterState& s, int P);
void set_from_full_coefficients(ParameterState& s, const Eigen::MatrixXd& A, int P);

// Regressor row (1, y'_{t-1}, ..., y'_{t-P}) for period t >= P.
Eigen::VectorXd lag_vector(const Eigen::MatrixXd& Y, int t, int P);

struct Design {
  Eigen::MatrixXd domestic;  // [(T-P) x (M*P + 1)]
  Eigen::MatrixXd foreign;   // [(T-P) x (N-1)*M*P]
};

// Regressors for country i (0-based). Foreign block: for each lag, the other
// countries in ascending order, each with its M variables.
Design build_design(const PanelData& panel, int i, int P);

// Column of y_{c, t-p} variable v inside country i's foreign block.
int foreign_column(int N, int M, int i, int c, int p, int v);

// Reduced-form residuals y_t - A x_t for t = P..T-1, [T_eff x K].
Eigen::MatrixXd residuals(const ParameterState& s, const PanelData& panel, int P);

// L diag(e^h) L' + diag(e^omega).
Eigen::MatrixXd assemble_sigma(const Eigen::MatrixXd& L, const Eigen::VectorXd& h, const Eigen::VectorXd& omega);

// sum_t log N(eps_t | 0, Sigma_t).
double conditional_loglik(const ParameterState& s, const PanelData& panel, int P);

// Throws if a structural invariant of the state is violated.
void validate_state(const ParameterState& s, const ModelConfig& cfg);

}  // namespace pvarmix
