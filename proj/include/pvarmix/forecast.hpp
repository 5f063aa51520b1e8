#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/draw_store.hpp"
#include "pvarmix/panel.hpp"
#include "pvarmix/sampler.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace pvarmix {

struct PredictiveSummary {
  int h = 1;
  Eigen::VectorXd mean;  // [K]
  Eigen::VectorXd var;   // [K]
  std::vector<int> joint_index;
  Eigen::VectorXd joint_mean;
  Eigen::MatrixXd joint_cov;
  int draws = 0;
  int overflow = 0;  // simulated paths dropped for exceeding the magnitude cap
};

// Forward simulation of every retained draw h steps past the end of `panel`.
// Log-volatilities start from the last stored values. `paths_per_draw` paths
// are simulated for each draw.
PredictiveSummary predict(const DrawStore& store, const PanelData& panel, int h, RngStream& rng,
                          const std::vector<int>& joint_index = {}, int paths_per_draw = 1);

// Same, with the shocks suppressed: the deterministic iterate of the median draw.
Eigen::VectorXd predict_deterministic(const Eigen::MatrixXd& A, const PanelData& panel, int P, int h);

double lps_gaussian(double mean, double var, double realized);
double joint_lps(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::VectorXd& realized);

enum class ModelKind { pvar_mix, pvar_g1, var_ng, ar1_sv };
const char* model_name(ModelKind m);
ModelKind parse_model(const std::string& s);

struct FitResult {
  DrawStore store;
  std::optional<ParameterState> final_state;  // not kept for ar1_sv
};

FitResult fit_model(ModelKind kind, const PanelData& panel, const ModelConfig& cfg, const RunOptions& opts);

struct EvaluationPlan {
  int train_end = 0;  // first origin: rows [0, train_end) are the initial sample
  std::vector<int> horizons{1, 3};
  std::vector<ModelKind> models{ModelKind::pvar_mix, ModelKind::pvar_g1, ModelKind::var_ng};
  ModelKind benchmark = ModelKind::ar1_sv;
  int target_variable = 0;  // scored variable, one per country
  bool warm_start = true;
  int paths_per_draw = 1;
  int threads = 1;
};

// One forecast of one model at one origin and horizon.
struct ForecastRecord {
  std::string model;
  int origin = 0;
  int horizon = 0;
  Eigen::VectorXd mean;      // target variable, per country
  Eigen::VectorXd var;
  Eigen::VectorXd realized;
  Eigen::VectorXd lps;       // marginal, per country
  double joint = 0.0;        // joint over the target variable of all countries
};

struct ScoreRow {
  std::string model;
  std::string country;  // "joint" for the joint LPS row
  int horizon = 0;
  int origin = -1;      // -1 in aggregate rows
  double rmse_rel = 0.0;
  double lps_diff = 0.0;
  double lps_model = 0.0;
  double lps_benchmark = 0.0;
};

struct EvaluationResult {
  std::vector<ForecastRecord> records;  // benchmark included
  std::vector<ScoreRow> scores;         // per origin
  std::vector<ScoreRow> aggregate;      // averaged over origins
};

EvaluationResult recursive_evaluation(const PanelData& panel, const ModelConfig& cfg, const EvaluationPlan& plan);

void write_scores_csv(const std::string& path, const std::vector<ScoreRow>& rows, bool aggregate);

}  // namespace pvarmix
