#pragma once

#include <filesystem>
#include <span>

#include "fist/layers.hpp"
#include "fist/maze.hpp"
#include "fist/trajectory.hpp"

namespace fist::metric {

struct DistanceConfig {
  int embed_dim = 32;
  int hidden = 128;
  int hidden_layers = 2;
  double lr = 1e-3;
  int batch = 128;
  int epochs = 50;  // schedule is an artifact choice; see README
  int H = 10;       // training pairs are (s_t, s_{t+H-1}) within a window

  void validate() const;
};

// State embedding h(.) trained with an InfoNCE objective: within a batch of
// windows, row i's positive key is its own H-1-step future and the other
// rows' futures are negatives. Query-time distance is the squared Euclidean
// distance between embeddings; the bilinear matrix W only shapes training
// logits.
class DistanceEncoder {
 public:
  DistanceEncoder(const DistanceConfig& cfg, int state_dim, std::uint64_t init_seed);

  std::vector<double> embed(std::span<const double> s) const;
  double distance(std::span<const double> a, std::span<const double> b) const;

  struct PairBatch {
    nn::Tensor query;  // B x state_dim
    nn::Tensor key;    // B x state_dim
    int B = 0;
  };
  PairBatch make_pairs(const std::vector<data::SubTrajectory>& windows) const;

  nn::Tape::Id build_infonce(nn::Binder& bind, const PairBatch& batch) const;
  double infonce_value(const PairBatch& batch) const;
  double train_step(const PairBatch& batch, nn::AdamState& adam);

  static DistanceEncoder train(const data::TrajectoryDataset& ds, const DistanceConfig& cfg,
                               std::uint64_t seed, std::vector<double>* epoch_loss = nullptr);

  // Continues training on demonstration windows (off by default in the
  // pipeline; the encoder normally sees the offline corpus only).
  void finetune(const std::vector<data::Trajectory>& demos, int epochs, std::uint64_t seed);

  void save(const std::filesystem::path& dir) const;
  static DistanceEncoder load(const std::filesystem::path& dir);

  const DistanceConfig& config() const { return cfg_; }
  int state_dim() const { return state_dim_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

 private:
  nn::Tape::Id embed_graph(nn::Binder& bind, nn::Tape::Id x) const;

  DistanceConfig cfg_;
  int state_dim_ = 0;
  nn::ParamSet params_;
  nn::Mlp body_;
};

// Softmax cross-entropy selecting the diagonal of a BxB logit matrix.
nn::Tape::Id infonce_from_logits(nn::Tape& t, nn::Tape::Id logits);

// Squared Euclidean distance on raw states (the distance-function ablation).
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Brute-force nearest-state index over every demo state. With an encoder the
// keys are embeddings; without one the raw states are compared directly, so
// swapping the metric changes nothing else in the control loop.
class DemoIndex {
 public:
  DemoIndex(const data::DemoSet& demos, const DistanceEncoder* encoder);

  // argmin over all (demo, step); ties resolved to the lowest (i, then j).
  std::pair<int, int> nearest(std::span<const double> s) const;

  std::vector<double> state(int i, int j) const;
  // Demo state H-1 steps after (i, j), clamped to the trajectory end.
  std::vector<double> lookahead(int i, int j, int H) const;

  int demo_count() const { return static_cast<int>(demos_->demos.size()); }
  int length(int i) const { return demos_->demos[i].length(); }

 private:
  const data::DemoSet* demos_;
  const DistanceEncoder* encoder_;
  int key_dim_ = 0;
  std::vector<std::vector<double>> keys_;  // per demo, T_i x key_dim flattened
};

struct SeparationStats {
  int batches = 0;
  int separated = 0;
  double fraction = 0.0;
};

// Fraction of evaluation batches in which true H-step pairs have a smaller
// mean embedding distance than random cross-trajectory pairs.
SeparationStats hstep_separation(const DistanceEncoder& enc, const data::TrajectoryDataset& ds,
                                 int n_batches, int batch, std::uint64_t seed);

// Ground-truth variant: simulate the waypoint controller H-1 steps from
// `state` toward the goal cell and return the state it reaches.
maze::MazeState oracle_lookahead(const maze::MazeLayout& layout, const maze::MazeState& state,
                                 maze::Cell goal, int H, const maze::EnvConfig& env);

}  // namespace fist::metric
