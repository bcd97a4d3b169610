#pragma once

#include <filesystem>
#include <span>

#include "fist/layers.hpp"
#include "fist/trajectory.hpp"

namespace fist::imitator {

struct BcConfig {
  int hidden = 128;
  int layers = 5;  // mirrors the skill decoder body
  double lr = 1e-3;
  int batch = 128;
  int pretrain_epochs = 200;
  int finetune_epochs = 50;
  bool goal_conditioned = false;  // q(a_t | s_t, s_{t+H-1}) when true
  int H = 10;

  void validate() const;
};

// Behavior-cloning regressor with an MSE objective. The plain variant maps
// states to actions; the goal-conditioned variant maps (state, H-1-step
// target state) to the first action of the window.
class BcPolicy {
 public:
  BcPolicy(const BcConfig& cfg, int state_dim, int action_dim, std::uint64_t init_seed);

  std::vector<double> act(std::span<const double> s) const;
  std::vector<double> act(std::span<const double> s, std::span<const double> target) const;

  void pretrain(const data::TrajectoryDataset& ds, std::uint64_t seed,
                std::vector<double>* epoch_loss = nullptr);
  void finetune(const std::vector<data::Trajectory>& demos, std::uint64_t seed,
                std::vector<double>* epoch_loss = nullptr);

  // Mean squared action error per element over all windows of the data.
  double mse(const std::vector<data::Trajectory>& trajectories) const;

  void save(const std::filesystem::path& dir) const;
  static BcPolicy load(const std::filesystem::path& dir);

  const BcConfig& config() const { return cfg_; }
  void set_finetune_epochs(int epochs) { cfg_.finetune_epochs = epochs; }
  int state_dim() const { return state_dim_; }
  nn::ParamSet& params() { return params_; }

 private:
  void fit(const std::vector<data::Trajectory>& trajectories, int epochs, std::uint64_t seed,
           std::vector<double>* epoch_loss, const char* phase);
  std::vector<double> forward(std::span<const double> input) const;

  BcConfig cfg_;
  int state_dim_ = 0;
  int action_dim_ = 0;
  nn::ParamSet params_;
  nn::Mlp net_;
};

}  // namespace fist::imitator
