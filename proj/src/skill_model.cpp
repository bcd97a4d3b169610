#include "fist/skill_model.hpp"

#include <cmath>
#include <thread>

#include <json.hpp>

#include "fist/checkpoint.hpp"
#include "fist/errors.hpp"

namespace fist::skills {

using nn::Binder;
using nn::GaussianNodes;
using nn::Tape;
using nn::Tensor;

void SkillModelConfig::validate() const {
  if (H < 2) throw ConfigError("skill config: H must be >= 2");
  if (z_dim < 1 || hidden < 1 || batch < 1) throw ConfigError("skill config: dims must be positive");
  if (encoder_layers != 1) throw ConfigError("skill config: only one recurrent layer is supported");
  if (lr <= 0 || beta < 0) throw ConfigError("skill config: lr must be positive, beta nonnegative");
  if (log_std_lo >= log_std_hi) throw ConfigError("skill config: bad log_std bounds");
}

namespace {

Tensor to_tensor(std::span<const double> v) {
  Tensor t(1, static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) t.data[i] = v[i];
  return t;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

SkillModel::SkillModel(const SkillModelConfig& cfg, int state_dim, int action_dim,
                       std::uint64_t init_seed)
    : cfg_(cfg), state_dim_(state_dim), action_dim_(action_dim) {
  cfg_.validate();
  Rng rng = Rng(init_seed).derive(0x1417);
  enc_cell_ = nn::LstmCell::create(params_, "enc.cell", state_dim + action_dim, cfg_.hidden, rng);
  enc_head_ = nn::GaussianHead::create(params_, "enc.head", cfg_.hidden, cfg_.z_dim, rng,
                                       cfg_.log_std_lo, cfg_.log_std_hi);
  decoder_ = nn::Mlp::create(params_, "dec", state_dim + cfg_.z_dim, cfg_.hidden,
                             cfg_.decoder_layers, action_dim, rng);
  const int prior_in = cfg_.future_conditioned ? 2 * state_dim : state_dim;
  int d = prior_in;
  for (int i = 0; i < cfg_.prior_layers; ++i) {
    prior_body_.push_back(nn::Linear::create(params_, "prior.l" + std::to_string(i), d, cfg_.hidden, rng));
    d = cfg_.hidden;
  }
  prior_head_ = nn::GaussianHead::create(params_, "prior.head", d, cfg_.z_dim, rng,
                                         cfg_.log_std_lo, cfg_.log_std_hi);
}

SkillModel::Batch SkillModel::make_batch(const std::vector<data::SubTrajectory>& windows,
                                         Rng& noise_rng) const {
  if (windows.empty()) throw ConfigError("skill model: empty batch");
  const int B = static_cast<int>(windows.size());
  Batch batch;
  batch.B = B;
  batch.states.assign(cfg_.H, Tensor(B, state_dim_));
  batch.actions.assign(cfg_.H, Tensor(B, action_dim_));
  batch.enc_inputs.assign(cfg_.H, Tensor(B, state_dim_ + action_dim_));
  for (int b = 0; b < B; ++b) {
    if (windows[b].H != cfg_.H) throw ConfigError("skill model: window length differs from H");
    for (int t = 0; t < cfg_.H; ++t) {
      auto s = windows[b].state(t);
      auto a = windows[b].action(t);
      for (int i = 0; i < state_dim_; ++i) {
        batch.states[t].at(b, i) = s[i];
        batch.enc_inputs[t].at(b, i) = s[i];
      }
      for (int i = 0; i < action_dim_; ++i) {
        batch.actions[t].at(b, i) = a[i];
        batch.enc_inputs[t].at(b, state_dim_ + i) = a[i];
      }
    }
  }
  batch.noise = Tensor(B, cfg_.z_dim);
  for (auto& v : batch.noise.data) v = noise_rng.gaussian();
  return batch;
}

GaussianNodes SkillModel::encode(Binder& bind, const Batch& batch) const {
  Tape& t = bind.tape();
  Tape::Id h = t.constant(Tensor::zeros(batch.B, cfg_.hidden));
  Tape::Id c = t.constant(Tensor::zeros(batch.B, cfg_.hidden));
  for (int step = 0; step < cfg_.H; ++step) {
    std::tie(h, c) = enc_cell_.step(bind, t.constant(batch.enc_inputs[step]), h, c);
  }
  return enc_head_.forward(bind, h);
}

GaussianNodes SkillModel::prior_forward(Binder& bind, Tape::Id s_now, Tape::Id s_target) const {
  Tape& t = bind.tape();
  Tape::Id x = cfg_.future_conditioned ? t.concat_cols(s_now, s_target) : s_now;
  for (const auto& layer : prior_body_) x = t.tanh(layer.forward(bind, x));
  return prior_head_.forward(bind, x);
}

SkillModel::LossIds SkillModel::build_loss(Binder& bind, const Batch& batch) const {
  Tape& t = bind.tape();
  GaussianNodes posterior = encode(bind, batch);
  Tape::Id z = nn::gaussian_rsample(t, posterior, t.constant(batch.noise));

  // reconstruction: mean over batch and the H steps
  Tape::Id rec = t.constant(Tensor::zeros(1, 1));
  for (int step = 0; step < cfg_.H; ++step) {
    Tape::Id dec_in = t.concat_cols(t.constant(batch.states[step]), z);
    Tape::Id mean = decoder_.forward(bind, dec_in);
    rec = t.add(rec, nn::gaussian_nll_unit_variance(t, mean, t.constant(batch.actions[step])));
  }
  rec = t.scale(rec, 1.0 / cfg_.H);

  Tape::Id reg = nn::gaussian_kl_to_standard(t, posterior);

  GaussianNodes prior = prior_forward(bind, t.constant(batch.states.front()),
                                      t.constant(batch.states.back()));
  Tape::Id prior_kl = nn::gaussian_kl(t, nn::detach_gaussian(t, posterior), prior);

  Tape::Id total = t.add(t.add(rec, t.scale(reg, cfg_.beta)), prior_kl);
  return LossIds{rec, reg, prior_kl, total};
}

LossTerms SkillModel::eval_loss(const std::vector<data::SubTrajectory>& windows,
                                Rng& noise_rng) const {
  Batch batch = make_batch(windows, noise_rng);
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  LossIds ids = build_loss(bind, batch);
  return LossTerms{tape.val(ids.rec).data[0], tape.val(ids.reg).data[0],
                   tape.val(ids.prior).data[0], tape.val(ids.total).data[0]};
}

namespace {

// Rows [lo, hi) of every tensor in the batch.
SkillModel::Batch slice_batch(const SkillModel::Batch& batch, int lo, int hi) {
  SkillModel::Batch out;
  out.B = hi - lo;
  auto rows = [&](const Tensor& t) {
    Tensor s(out.B, t.cols);
    std::copy(t.data.begin() + static_cast<std::size_t>(lo) * t.cols,
              t.data.begin() + static_cast<std::size_t>(hi) * t.cols, s.data.begin());
    return s;
  };
  for (const auto& t : batch.states) out.states.push_back(rows(t));
  for (const auto& t : batch.actions) out.actions.push_back(rows(t));
  for (const auto& t : batch.enc_inputs) out.enc_inputs.push_back(rows(t));
  out.noise = rows(batch.noise);
  return out;
}

}  // namespace

LossTerms SkillModel::train_step(const Batch& batch, nn::AdamState& adam) {
  // Two fixed shards run forward/backward concurrently; their parameter
  // gradients are combined in shard order, so the result never depends on
  // the machine's core count.
  constexpr int kMinShardRows = 16;
  LossTerms terms;
  if (batch.B < 2 * kMinShardRows) {
    Tape tape;
    Binder bind(tape, params_);
    LossIds ids = build_loss(bind, batch);
    terms = LossTerms{tape.val(ids.rec).data[0], tape.val(ids.reg).data[0],
                      tape.val(ids.prior).data[0], tape.val(ids.total).data[0]};
    if (!std::isfinite(terms.total)) throw NumericError("skill model: non-finite joint loss");
    tape.backward(ids.total);
  } else {
    const int mid = batch.B / 2;
    const Batch halves[2] = {slice_batch(batch, 0, mid), slice_batch(batch, mid, batch.B)};
    Tape tapes[2];
    LossIds ids[2];
    std::exception_ptr error;
    auto run = [&](int k) {
      try {
        Binder bind(tapes[k], params_);
        ids[k] = build_loss(bind, halves[k]);
        tapes[k].backward(ids[k].total, /*flush_params=*/false);
      } catch (...) {
        error = std::current_exception();
      }
    };
    std::thread worker(run, 0);
    run(1);
    worker.join();
    if (error) std::rethrow_exception(error);
    for (int k = 0; k < 2; ++k) {
      const double w = static_cast<double>(halves[k].B) / batch.B;
      tapes[k].accumulate_param_grads(w);
      terms.rec += w * tapes[k].val(ids[k].rec).data[0];
      terms.reg += w * tapes[k].val(ids[k].reg).data[0];
      terms.prior += w * tapes[k].val(ids[k].prior).data[0];
      terms.total += w * tapes[k].val(ids[k].total).data[0];
    }
    if (!std::isfinite(terms.total)) throw NumericError("skill model: non-finite joint loss");
  }
  adam.step(params_);
  return terms;
}

void SkillModel::fit(const std::vector<data::Trajectory>& trajectories, int epochs,
                     std::uint64_t seed, TrainCurve* curve, const char* phase) {
  std::int64_t n_windows = 0;
  for (const auto& t : trajectories) n_windows += std::max(0, t.length() - cfg_.H + 1);
  if (n_windows == 0) {
    throw ConfigError(std::string(phase) + ": no window of length H=" + std::to_string(cfg_.H));
  }
  const int steps_per_epoch =
      static_cast<int>((n_windows + cfg_.batch - 1) / cfg_.batch);
  Rng sample_rng = Rng(seed).derive(0xba7c);
  Rng noise_rng = Rng(seed).derive(0x701e);

  std::vector<data::SubTrajectory> probe;
  if (curve) {
    probe = data::all_subtrajectories(trajectories, cfg_.H);
    if (probe.size() > 512) probe.resize(512);
  }

  nn::AdamState adam(nn::AdamConfig{cfg_.lr, 0.9, 0.999, 1e-8});
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      auto windows = data::sample_subtrajectories(trajectories, cfg_.H, cfg_.batch, sample_rng);
      Batch batch = make_batch(windows, noise_rng);
      try {
        epoch_loss += train_step(batch, adam).total;
      } catch (const NumericError& e) {
        throw NumericError(std::string(phase) + " diverged at epoch " + std::to_string(epoch) +
                           " step " + std::to_string(step) + ": " + e.what());
      }
    }
    if (curve) {
      curve->epoch_loss.push_back(epoch_loss / steps_per_epoch);
      Rng probe_noise = Rng(seed).derive(0x9e0b);
      curve->eval_loss.push_back(eval_loss(probe, probe_noise).total);
    }
  }
}

void SkillModel::pretrain(const data::TrajectoryDataset& ds, std::uint64_t seed,
                          TrainCurve* curve) {
  fit(ds.trajectories, cfg_.pretrain_epochs, seed, curve, "pretrain");
}

void SkillModel::finetune(const std::vector<data::Trajectory>& demos, std::uint64_t seed,
                          TrainCurve* curve) {
  fit(demos, cfg_.finetune_epochs, seed, curve, "finetune");
}

nn::DiagGaussian SkillModel::encode_window(const data::SubTrajectory& w) const {
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  Tape::Id h = tape.constant(Tensor::zeros(1, cfg_.hidden));
  Tape::Id c = tape.constant(Tensor::zeros(1, cfg_.hidden));
  for (int step = 0; step < cfg_.H; ++step) {
    Tensor x(1, state_dim_ + action_dim_);
    auto s = w.state(step);
    auto a = w.action(step);
    for (int i = 0; i < state_dim_; ++i) x.data[i] = s[i];
    for (int i = 0; i < action_dim_; ++i) x.data[state_dim_ + i] = a[i];
    std::tie(h, c) = enc_cell_.step(bind, tape.constant(x), h, c);
  }
  return nn::gaussian_from_row(tape, enc_head_.forward(bind, h));
}

nn::DiagGaussian SkillModel::infer_skill(std::span<const double> s_now,
                                         std::span<const double> s_target) const {
  if (!cfg_.future_conditioned) throw ConfigError("infer_skill: model prior is state-only");
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  GaussianNodes g = prior_forward(bind, tape.constant(to_tensor(s_now)),
                                  tape.constant(to_tensor(s_target)));
  return nn::gaussian_from_row(tape, g);
}

nn::DiagGaussian SkillModel::infer_skill(std::span<const double> s_now) const {
  if (cfg_.future_conditioned) throw ConfigError("infer_skill: model prior needs a target state");
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  GaussianNodes g = prior_forward(bind, tape.constant(to_tensor(s_now)), -1);
  return nn::gaussian_from_row(tape, g);
}

std::vector<double> SkillModel::decode_action(std::span<const double> s,
                                              std::span<const double> z) const {
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  Tape::Id out = decoder_.forward(bind, tape.constant(to_tensor(concat(s, z))));
  const Tensor& v = tape.val(out);
  return {v.data.begin(), v.data.end()};
}

void SkillModel::save(const std::filesystem::path& dir) const {
  nlohmann::json meta;
  meta["model"] = "skill";
  meta["state_dim"] = state_dim_;
  meta["action_dim"] = action_dim_;
  meta["config"] = {{"H", cfg_.H},
                    {"z_dim", cfg_.z_dim},
                    {"hidden", cfg_.hidden},
                    {"encoder_layers", cfg_.encoder_layers},
                    {"decoder_layers", cfg_.decoder_layers},
                    {"prior_layers", cfg_.prior_layers},
                    {"beta", cfg_.beta},
                    {"lr", cfg_.lr},
                    {"batch", cfg_.batch},
                    {"pretrain_epochs", cfg_.pretrain_epochs},
                    {"finetune_epochs", cfg_.finetune_epochs},
                    {"log_std_lo", cfg_.log_std_lo},
                    {"log_std_hi", cfg_.log_std_hi},
                    {"future_conditioned", cfg_.future_conditioned}};
  nn::save_params(params_, dir, meta);
}

SkillModel SkillModel::load(const std::filesystem::path& dir) {
  nlohmann::json meta = nn::read_checkpoint_meta(dir);
  if (meta.value("model", "") != "skill") {
    throw IoError("checkpoint at " + dir.string() + " is not a skill model");
  }
  const auto& c = meta.at("config");
  SkillModelConfig cfg;
  cfg.H = c.at("H");
  cfg.z_dim = c.at("z_dim");
  cfg.hidden = c.at("hidden");
  cfg.encoder_layers = c.at("encoder_layers");
  cfg.decoder_layers = c.at("decoder_layers");
  cfg.prior_layers = c.at("prior_layers");
  cfg.beta = c.at("beta");
  cfg.lr = c.at("lr");
  cfg.batch = c.at("batch");
  cfg.pretrain_epochs = c.at("pretrain_epochs");
  cfg.finetune_epochs = c.at("finetune_epochs");
  cfg.log_std_lo = c.at("log_std_lo");
  cfg.log_std_hi = c.at("log_std_hi");
  cfg.future_conditioned = c.at("future_conditioned");
  SkillModel model(cfg, meta.at("state_dim"), meta.at("action_dim"), /*init_seed=*/0);
  nn::load_params(model.params_, dir);
  return model;
}

LossTerms elbo_terms(const SkillModel& model, const std::vector<data::SubTrajectory>& batch,
                     Rng& noise_rng) {
  return model.eval_loss(batch, noise_rng);
}

double prior_loss(const SkillModel& model, const std::vector<data::SubTrajectory>& batch,
                  Rng& noise_rng) {
  return model.eval_loss(batch, noise_rng).prior;
}

double joint_loss(const SkillModel& model, const std::vector<data::SubTrajectory>& batch,
                  Rng& noise_rng) {
  return model.eval_loss(batch, noise_rng).total;
}

}  // namespace fist::skills
