#pragma once

#include "pvarmix/draw_store.hpp"
#include "pvarmix/panel.hpp"
#include "pvarmix/simlab.hpp"

#include <string>

namespace pvarmix {

// Long format with header date,country,variable,value. Countries and
// variables keep their order of first appearance, dates are sorted. Every
// (date, country, variable) cell must appear exactly once; malformed rows
// raise io-error naming the line.
PanelData read_panel_csv(const std::string& path);
void write_panel_csv(const std::string& path, const PanelData& panel);

// truth.json: coefficient matrix, allocations, cluster centers and weights.
void write_truth(const std::string& path, const DgpTruth& truth, const PanelData& panel);

// Posterior summary files written next to a saved store:
//   summary.csv     block,index,mean,median,q05,q95
//   gstar.csv       g,prob                        (mixture fits)
//   log_lambda.csv  coordinate,equation,regressor,q05,q25,median,q75,q95
//   delta_mean.csv  country,delta_mean            (identified labels, 1-based)
void write_fit_summary(const std::string& dir, const DrawStore& store, IdentScheme scheme, int coord);

}  // namespace pvarmix
