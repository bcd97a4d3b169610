#pragma once

#include <filesystem>
#include <span>

#include "fist/gaussian.hpp"
#include "fist/layers.hpp"
#include "fist/trajectory.hpp"

namespace fist::skills {

struct SkillModelConfig {
  int H = 10;
  int z_dim = 128;
  int hidden = 128;
  int encoder_layers = 1;  // recurrent layers (single-layer cell)
  int decoder_layers = 5;  // hidden layers in the action decoder
  int prior_layers = 5;    // hidden layers in the inverse skill prior
  double beta = 1e-2;
  double lr = 1e-3;
  int batch = 128;
  int pretrain_epochs = 200;
  int finetune_epochs = 50;
  double log_std_lo = -5.0;
  double log_std_hi = 2.0;
  // true: inverse prior q(z | s_t, s_{t+H-1}); false: state-only prior
  // q(z | s_t), which is the SPiRL-style baseline conditioning.
  bool future_conditioned = true;

  void validate() const;
};

struct LossTerms {
  double rec = 0.0;
  double reg = 0.0;    // unweighted KL to N(0, I)
  double prior = 0.0;  // KL(stop_grad(posterior) || prior)
  double total = 0.0;  // rec + beta * reg + prior
};

struct TrainCurve {
  std::vector<double> epoch_loss;  // mean training loss per epoch
  std::vector<double> eval_loss;   // loss on a fixed probe batch, fixed noise
};

// Sequence latent-variable model over H-step windows: a recurrent encoder
// q(z | s_t, a_t, ..), a feed-forward action decoder pi(a | s, z) with unit
// output variance, and a feed-forward skill prior. Training optimizes
// rec + beta * reg + prior jointly; the prior term sees a detached posterior
// so it trains the prior parameters only.
class SkillModel {
 public:
  SkillModel(const SkillModelConfig& cfg, int state_dim, int action_dim, std::uint64_t init_seed);

  struct Batch {
    int B = 0;
    std::vector<nn::Tensor> states;      // H tensors, B x state_dim
    std::vector<nn::Tensor> actions;     // H tensors, B x action_dim
    std::vector<nn::Tensor> enc_inputs;  // H tensors, B x (state_dim+action_dim)
    nn::Tensor noise;                    // B x z_dim
  };
  Batch make_batch(const std::vector<data::SubTrajectory>& windows, Rng& noise_rng) const;

  struct LossIds {
    nn::Tape::Id rec, reg, prior, total;
  };
  LossIds build_loss(nn::Binder& bind, const Batch& batch) const;

  // Loss on the given windows without touching gradients.
  LossTerms eval_loss(const std::vector<data::SubTrajectory>& windows, Rng& noise_rng) const;

  // One optimization step on one batch; throws NumericError on divergence.
  LossTerms train_step(const Batch& batch, nn::AdamState& adam);

  void pretrain(const data::TrajectoryDataset& ds, std::uint64_t seed, TrainCurve* curve = nullptr);
  void finetune(const std::vector<data::Trajectory>& demos, std::uint64_t seed,
                TrainCurve* curve = nullptr);

  // ---- frozen-parameter inference (safe to call concurrently) ----
  nn::DiagGaussian encode_window(const data::SubTrajectory& w) const;
  nn::DiagGaussian infer_skill(std::span<const double> s_now,
                               std::span<const double> s_target) const;
  nn::DiagGaussian infer_skill(std::span<const double> s_now) const;  // state-only prior
  std::vector<double> decode_action(std::span<const double> s, std::span<const double> z) const;

  void save(const std::filesystem::path& dir) const;
  static SkillModel load(const std::filesystem::path& dir);

  const SkillModelConfig& config() const { return cfg_; }
  // Checkpoints carry their training schedule; loaded models can be given a
  // different budget (e.g. a CLI --finetune-epochs override).
  void set_finetune_epochs(int epochs) { cfg_.finetune_epochs = epochs; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

 private:
  void fit(const std::vector<data::Trajectory>& trajectories, int epochs, std::uint64_t seed,
           TrainCurve* curve, const char* phase);
  nn::GaussianNodes encode(nn::Binder& bind, const Batch& batch) const;
  nn::GaussianNodes prior_forward(nn::Binder& bind, nn::Tape::Id s_now,
                                  nn::Tape::Id s_target) const;

  SkillModelConfig cfg_;
  int state_dim_ = 0;
  int action_dim_ = 0;
  nn::ParamSet params_;
  nn::LstmCell enc_cell_;
  nn::GaussianHead enc_head_;
  nn::Mlp decoder_;
  std::vector<nn::Linear> prior_body_;
  nn::GaussianHead prior_head_;
};

// Spec-level loss entry points (values computed on a frozen model).
LossTerms elbo_terms(const SkillModel& model, const std::vector<data::SubTrajectory>& batch,
                     Rng& noise_rng);
double prior_loss(const SkillModel& model, const std::vector<data::SubTrajectory>& batch,
                  Rng& noise_rng);
double joint_loss(const SkillModel& model, const std::vector<data::SubTrajectory>& batch,
                  Rng& noise_rng);

}  // namespace fist::skills
