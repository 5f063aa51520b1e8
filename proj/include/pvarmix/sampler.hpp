#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/draw_store.hpp"
#include "pvarmix/panel.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace pvarmix {

struct SweepStats {
  int p0_accepted = 0;
  int p0_proposed = 0;
  int path_accepted = 0;
  int path_proposed = 0;
};

// One pass through steps 1a-1d, 2a-2g, 3a-3b and the random permutation, in
// that order. Errors are rethrown with the sweep index when one is given.
void gibbs_sweep(ParameterState& state, const PanelData& panel, const ModelConfig& cfg, RngStream& rng,
                 SweepStats* stats = nullptr, int sweep_index = -1);

ParameterState initialize_state(const PanelData& panel, const ModelConfig& cfg, RngStream& rng);

// Copy of a state whose paths are stretched (last row repeated) or cut to
// t_eff rows, for warm starts on a longer sample.
ParameterState resize_paths(const ParameterState& s, int t_eff);

struct RunOptions {
  std::string label = "pvar";
  std::uint64_t stream = 0;
  const ParameterState* init = nullptr;
  std::string checkpoint_dir;  // partial store written here when a sweep fails
  std::function<void(int, const ParameterState&)> on_sweep;
};

struct ChainResult {
  DrawStore store;
  ParameterState final_state;
  SweepStats stats;
};

// Stream id of a chain: the caller's stream mixed with a hash of the label.
std::uint64_t chain_stream(const RunOptions& opts);

ChainResult run_chain(const PanelData& panel, const ModelConfig& cfg, const RunOptions& opts);
DrawStore run_chain(const PanelData& panel, const ModelConfig& cfg);

// Block names written by run_chain.
void declare_blocks(DrawStore& store, const ParameterState& s, const ModelConfig& cfg);
void record_draw(DrawStore& store, const ParameterState& s, const ModelConfig& cfg);

// 1 + 2 sum of autocorrelations, truncated by Geyer's initial positive
// sequence rule (pairs rho_{2k} + rho_{2k+1} summed while positive).
// Throws insufficient-draws below 100 draws and degenerate-input for a
// constant sequence.
double inefficiency_factor(const Eigen::VectorXd& draws);

// Joint prior draw of every parameter and latent path (needs a proper prior:
// cfg.fixed_range > 0 and cfg.mu0_prior_var > 0).
ParameterState draw_from_prior(int N, int M, int t_eff, const ModelConfig& cfg, RngStream& rng);

// y_t = A x_t + L f_t + e^{omega_t/2} u_t for t >= P, the first P rows of
// `initial` held fixed.
PanelData simulate_from_state(const ParameterState& s, const PanelData& initial, int P, RngStream& rng);

}  // namespace pvarmix
