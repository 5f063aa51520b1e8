#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pvarmix {

struct StoreMeta {
  std::string model;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int draws = 0;
  int burnin = 0;
  int thin = 1;
  int N = 0;
  int M = 0;
  int P = 1;
  int q = 0;
  int G = 0;
  std::vector<std::string> countries;
  std::vector<std::string> variables;
  // free-form diagnostics (acceptance rates, clamp counts), name -> value
  std::vector<std::pair<std::string, double>> stats;

  double stat(const std::string& name, double fallback = 0.0) const;
};

// Retained draws, one named block per parameter group. Each block keeps its
// logical shape and a draws x size table (row per retained draw, the logical
// shape flattened row-major).
class DrawStore {
 public:
  using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct Block {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;
    int size() const;
  };

  StoreMeta meta;

  void add_block(const std::string& name, std::vector<int> shape);
  bool has(const std::string& name) const;
  const Block& block(const std::string& name) const;
  void append(const std::string& name, const double* values, int n);
  void append(const std::string& name, const Eigen::MatrixXd& m);  // row-major flatten

  int retained() const;
  const std::vector<Block>& blocks() const { return blocks_; }

  Table table(const std::string& name) const;
  // Draw d of a block reshaped to its 2-D shape (1-D blocks become a column).
  Eigen::MatrixXd draw(const std::string& name, int d) const;
  // Element-wise posterior median / mean of a block, reshaped like draw().
  Eigen::MatrixXd median(const std::string& name) const;
  Eigen::MatrixXd mean(const std::string& name) const;

  // Directory with meta.json and <block>.bin (header "PVMB", version, rows,
  // cols, then doubles column by column).
  void save(const std::string& dir) const;
  static DrawStore load(const std::string& dir);
  // One row per retained draw, one column per scalar (block[index...]).
  void export_csv(const std::string& path) const;

 private:
  std::vector<Block> blocks_;
  Block& mutable_block(const std::string& name);
};

}  // namespace pvarmix
