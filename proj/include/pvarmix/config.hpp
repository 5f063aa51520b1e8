#pragma once

#include "pvarmix/forecast.hpp"
#include "pvarmix/panel.hpp"
#include "pvarmix/simlab.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pvarmix {

// Everything the command-line tool can be told. Model keys use their plain
// names (G, draws, ...), DGP keys carry a dgp_ prefix.
struct RunConfig {
  std::string command;
  std::string data;
  std::string out = "out";
  int threads = 1;

  ModelConfig model;
  DgpSpec dgp;

  // simulate
  bool experiment = false;
  std::string estimators = "pvar_mix,pvar_g1,var_ng,var_ols";
  std::string T_grid = "80";
  std::string sparsity_grid = "0.3";

  // forecast / evaluate
  int train_end = 0;  // 0: T minus 12
  std::string horizons = "1,3";
  std::string models = "pvar_mix,pvar_g1,var_ng";
  std::string benchmark = "ar1_sv";
  int target_variable = 0;
  bool warm_start = true;
  int paths_per_draw = 1;

  RunConfig();
};

// Keys in registry order.
std::vector<std::string> config_keys();
std::string get_config(const RunConfig& c, const std::string& key);
// Throws config-error on an unknown key or an unparsable value.
void set_config(RunConfig& c, const std::string& key, const std::string& value);
// "key=value" form.
void apply_assignment(RunConfig& c, const std::string& assignment);

// Flat text: one key = value per line, '#' starts a comment.
void load_config_file(RunConfig& c, const std::string& path);
void dump_config(const RunConfig& c, std::ostream& out);

// FNV-1a over the dumped model keys.
std::uint64_t config_hash(const ModelConfig& m);

std::vector<int> parse_int_list(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);
std::vector<std::string> split_list(const std::string& s);

}  // namespace pvarmix
