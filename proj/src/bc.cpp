#include "fist/bc.hpp"

#include <cmath>

#include <json.hpp>

#include "fist/checkpoint.hpp"
#include "fist/errors.hpp"

namespace fist::imitator {

using nn::Binder;
using nn::Tape;
using nn::Tensor;

void BcConfig::validate() const {
  if (hidden < 1 || layers < 0 || batch < 1) throw ConfigError("bc config: bad dims");
  if (lr <= 0) throw ConfigError("bc config: lr must be positive");
  if (goal_conditioned && H < 1) throw ConfigError("bc config: H must be >= 1");
}

BcPolicy::BcPolicy(const BcConfig& cfg, int state_dim, int action_dim, std::uint64_t init_seed)
    : cfg_(cfg), state_dim_(state_dim), action_dim_(action_dim) {
  cfg_.validate();
  Rng rng = Rng(init_seed).derive(0xbc);
  const int in = cfg_.goal_conditioned ? 2 * state_dim : state_dim;
  net_ = nn::Mlp::create(params_, "bc", in, cfg_.hidden, cfg_.layers, action_dim, rng);
}

std::vector<double> BcPolicy::forward(std::span<const double> input) const {
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  Tensor x(1, static_cast<int>(input.size()));
  for (std::size_t i = 0; i < input.size(); ++i) x.data[i] = input[i];
  const Tensor& out = tape.val(net_.forward(bind, tape.constant(std::move(x))));
  return {out.data.begin(), out.data.end()};
}

std::vector<double> BcPolicy::act(std::span<const double> s) const {
  if (cfg_.goal_conditioned) throw ConfigError("bc: goal-conditioned policy needs a target state");
  return forward(s);
}

std::vector<double> BcPolicy::act(std::span<const double> s, std::span<const double> target) const {
  if (!cfg_.goal_conditioned) throw ConfigError("bc: plain policy takes a state only");
  std::vector<double> input(s.begin(), s.end());
  input.insert(input.end(), target.begin(), target.end());
  return forward(input);
}

void BcPolicy::fit(const std::vector<data::Trajectory>& trajectories, int epochs,
                   std::uint64_t seed, std::vector<double>* epoch_loss, const char* phase) {
  const int window = cfg_.goal_conditioned ? cfg_.H : 1;
  std::int64_t n_windows = 0;
  for (const auto& t : trajectories) n_windows += std::max(0, t.length() - window + 1);
  if (n_windows == 0) {
    throw ConfigError(std::string(phase) + ": no window of length " + std::to_string(window));
  }
  const int steps_per_epoch = static_cast<int>((n_windows + cfg_.batch - 1) / cfg_.batch);
  Rng sample_rng = Rng(seed).derive(0x6cf1);
  nn::AdamState adam(nn::AdamConfig{cfg_.lr, 0.9, 0.999, 1e-8});
  const int in_dim = cfg_.goal_conditioned ? 2 * state_dim_ : state_dim_;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    double acc = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      auto windows = data::sample_subtrajectories(trajectories, window, cfg_.batch, sample_rng);
      Tensor x(static_cast<int>(windows.size()), in_dim);
      Tensor y(static_cast<int>(windows.size()), action_dim_);
      for (std::size_t b = 0; b < windows.size(); ++b) {
        auto s = windows[b].state(0);
        for (int i = 0; i < state_dim_; ++i) x.at(static_cast<int>(b), i) = s[i];
        if (cfg_.goal_conditioned) {
          auto g = windows[b].state(window - 1);
          for (int i = 0; i < state_dim_; ++i) x.at(static_cast<int>(b), state_dim_ + i) = g[i];
        }
        auto a = windows[b].action(0);
        for (int i = 0; i < action_dim_; ++i) y.at(static_cast<int>(b), i) = a[i];
      }
      Tape tape;
      Binder bind(tape, params_);
      Tape::Id pred = net_.forward(bind, tape.constant(std::move(x)));
      Tape::Id loss = tape.mean_all(tape.square(tape.sub(pred, tape.constant(std::move(y)))));
      const double value = tape.val(loss).data[0];
      if (!std::isfinite(value)) {
        throw NumericError(std::string(phase) + " diverged at epoch " + std::to_string(epoch));
      }
      tape.backward(loss);
      adam.step(params_);
      acc += value;
    }
    if (epoch_loss) epoch_loss->push_back(acc / steps_per_epoch);
  }
}

void BcPolicy::pretrain(const data::TrajectoryDataset& ds, std::uint64_t seed,
                        std::vector<double>* epoch_loss) {
  fit(ds.trajectories, cfg_.pretrain_epochs, seed, epoch_loss, "bc pretrain");
}

void BcPolicy::finetune(const std::vector<data::Trajectory>& demos, std::uint64_t seed,
                        std::vector<double>* epoch_loss) {
  fit(demos, cfg_.finetune_epochs, seed, epoch_loss, "bc finetune");
}

double BcPolicy::mse(const std::vector<data::Trajectory>& trajectories) const {
  const int window = cfg_.goal_conditioned ? cfg_.H : 1;
  double acc = 0.0;
  std::int64_t n = 0;
  for (const auto& traj : trajectories) {
    for (int t = 0; t + window <= traj.length(); ++t) {
      auto s = traj.state(t);
      std::vector<double> sd(s.begin(), s.end());
      std::vector<double> pred;
      if (cfg_.goal_conditioned) {
        auto g = traj.state(t + window - 1);
        pred = act(sd, std::vector<double>(g.begin(), g.end()));
      } else {
        pred = act(sd);
      }
      auto a = traj.action(t);
      for (int i = 0; i < action_dim_; ++i) {
        const double d = pred[i] - a[i];
        acc += d * d;
        n += 1;
      }
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

void BcPolicy::save(const std::filesystem::path& dir) const {
  nlohmann::json meta;
  meta["model"] = "bc";
  meta["state_dim"] = state_dim_;
  meta["action_dim"] = action_dim_;
  meta["config"] = {{"hidden", cfg_.hidden},           {"layers", cfg_.layers},
                    {"lr", cfg_.lr},                   {"batch", cfg_.batch},
                    {"pretrain_epochs", cfg_.pretrain_epochs},
                    {"finetune_epochs", cfg_.finetune_epochs},
                    {"goal_conditioned", cfg_.goal_conditioned},
                    {"H", cfg_.H}};
  nn::save_params(params_, dir, meta);
}

BcPolicy BcPolicy::load(const std::filesystem::path& dir) {
  nlohmann::json meta = nn::read_checkpoint_meta(dir);
  if (meta.value("model", "") != "bc") {
    throw IoError("checkpoint at " + dir.string() + " is not a behavior-cloning policy");
  }
  const auto& c = meta.at("config");
  BcConfig cfg;
  cfg.hidden = c.at("hidden");
  cfg.layers = c.at("layers");
  cfg.lr = c.at("lr");
  cfg.batch = c.at("batch");
  cfg.pretrain_epochs = c.at("pretrain_epochs");
  cfg.finetune_epochs = c.at("finetune_epochs");
  cfg.goal_conditioned = c.at("goal_conditioned");
  cfg.H = c.at("H");
  BcPolicy policy(cfg, meta.at("state_dim"), meta.at("action_dim"), 0);
  nn::load_params(policy.params_, dir);
  return policy;
}

}  // namespace fist::imitator
