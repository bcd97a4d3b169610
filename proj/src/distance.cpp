#include "fist/distance.hpp"

#include <cmath>

#include <json.hpp>

#include "fist/checkpoint.hpp"
#include "fist/errors.hpp"

namespace fist::metric {

using nn::Binder;
using nn::Tape;
using nn::Tensor;

void DistanceConfig::validate() const {
  if (embed_dim < 1 || hidden < 1 || hidden_layers < 0) throw ConfigError("distance config: bad dims");
  if (batch < 2) throw ConfigError("distance config: batch must be >= 2 (negatives needed)");
  if (H < 2) throw ConfigError("distance config: H must be >= 2");
  if (lr <= 0) throw ConfigError("distance config: lr must be positive");
}

DistanceEncoder::DistanceEncoder(const DistanceConfig& cfg, int state_dim, std::uint64_t init_seed)
    : cfg_(cfg), state_dim_(state_dim) {
  cfg_.validate();
  Rng rng = Rng(init_seed).derive(0xd157);
  body_ = nn::Mlp::create(params_, "h", state_dim, cfg_.hidden, cfg_.hidden_layers, cfg_.embed_dim,
                          rng);
  // bilinear logit matrix starts as a plain inner product
  Tensor w(cfg_.embed_dim, cfg_.embed_dim);
  for (int i = 0; i < cfg_.embed_dim; ++i) w.at(i, i) = 1.0;
  params_.add("W", std::move(w));
}

nn::Tape::Id DistanceEncoder::embed_graph(Binder& bind, Tape::Id x) const {
  return body_.forward(bind, x);
}

std::vector<double> DistanceEncoder::embed(std::span<const double> s) const {
  if (static_cast<int>(s.size()) != state_dim_) throw ConfigError("embed: dimension mismatch");
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  Tensor x(1, state_dim_);
  for (int i = 0; i < state_dim_; ++i) x.data[i] = s[i];
  const Tensor& out = tape.val(embed_graph(bind, tape.constant(std::move(x))));
  return {out.data.begin(), out.data.end()};
}

double DistanceEncoder::distance(std::span<const double> a, std::span<const double> b) const {
  const auto ha = embed(a);
  const auto hb = embed(b);
  double d = 0.0;
  for (std::size_t i = 0; i < ha.size(); ++i) {
    const double diff = ha[i] - hb[i];
    d += diff * diff;
  }
  return d;
}

DistanceEncoder::PairBatch DistanceEncoder::make_pairs(
    const std::vector<data::SubTrajectory>& windows) const {
  if (windows.size() < 2) throw ConfigError("infonce: batch must contain at least 2 pairs");
  PairBatch batch;
  batch.B = static_cast<int>(windows.size());
  batch.query = Tensor(batch.B, state_dim_);
  batch.key = Tensor(batch.B, state_dim_);
  for (int b = 0; b < batch.B; ++b) {
    auto q = windows[b].state(0);
    auto k = windows[b].state(windows[b].H - 1);
    for (int i = 0; i < state_dim_; ++i) {
      batch.query.at(b, i) = q[i];
      batch.key.at(b, i) = k[i];
    }
  }
  return batch;
}

nn::Tape::Id infonce_from_logits(Tape& t, Tape::Id logits) {
  const Tensor& lv = t.val(logits);
  if (lv.rows != lv.cols || lv.rows < 2) throw ConfigError("infonce: logits must be BxB, B >= 2");
  const int B = lv.rows;
  // stable log-sum-exp with a constant per-row shift
  Tensor shift(B, 1);
  for (int r = 0; r < B; ++r) {
    double m = lv.at(r, 0);
    for (int c = 1; c < B; ++c) m = std::max(m, lv.at(r, c));
    shift.at(r, 0) = m;
  }
  Tape::Id shift_id = t.constant(std::move(shift));
  Tape::Id lse = t.add(t.log(t.row_sum(t.exp(t.sub_col_broadcast(logits, shift_id)))), shift_id);
  Tensor eye(B, B);
  for (int i = 0; i < B; ++i) eye.at(i, i) = 1.0;
  Tape::Id diag = t.row_sum(t.mul(logits, t.constant(std::move(eye))));
  return t.mean_all(t.sub(lse, diag));
}

nn::Tape::Id DistanceEncoder::build_infonce(Binder& bind, const PairBatch& batch) const {
  Tape& t = bind.tape();
  Tape::Id q = embed_graph(bind, t.constant(batch.query));
  Tape::Id k = embed_graph(bind, t.constant(batch.key));
  Tape::Id logits = t.matmul(t.matmul(q, bind["W"]), t.transpose(k));
  return infonce_from_logits(t, logits);
}

double DistanceEncoder::infonce_value(const PairBatch& batch) const {
  Tape tape;
  Binder bind(tape, static_cast<const nn::ParamSet&>(params_));
  return tape.val(build_infonce(bind, batch)).data[0];
}

double DistanceEncoder::train_step(const PairBatch& batch, nn::AdamState& adam) {
  Tape tape;
  Binder bind(tape, params_);
  Tape::Id loss = build_infonce(bind, batch);
  const double value = tape.val(loss).data[0];
  if (!std::isfinite(value)) throw NumericError("distance training: non-finite loss");
  tape.backward(loss);
  adam.step(params_);
  return value;
}

DistanceEncoder DistanceEncoder::train(const data::TrajectoryDataset& ds, const DistanceConfig& cfg,
                                       std::uint64_t seed, std::vector<double>* epoch_loss) {
  DistanceEncoder enc(cfg, ds.meta.state_dim, seed);
  const std::int64_t n_windows = ds.window_count(cfg.H);
  if (n_windows == 0) {
    throw ConfigError("distance training: no window of length H=" + std::to_string(cfg.H));
  }
  const int steps_per_epoch = static_cast<int>((n_windows + cfg.batch - 1) / cfg.batch);
  Rng sample_rng = Rng(seed).derive(0x5a3b);
  nn::AdamState adam(nn::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double acc = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      auto windows = data::sample_subtrajectories(ds, cfg.H, cfg.batch, sample_rng);
      try {
        acc += enc.train_step(enc.make_pairs(windows), adam);
      } catch (const NumericError& e) {
        throw NumericError("distance training diverged at epoch " + std::to_string(epoch) + ": " +
                           e.what());
      }
    }
    if (epoch_loss) epoch_loss->push_back(acc / steps_per_epoch);
  }
  return enc;
}

void DistanceEncoder::finetune(const std::vector<data::Trajectory>& demos, int epochs,
                               std::uint64_t seed) {
  std::int64_t n_windows = 0;
  for (const auto& t : demos) n_windows += std::max(0, t.length() - cfg_.H + 1);
  if (n_windows == 0) {
    throw ConfigError("distance finetune: no window of length H=" + std::to_string(cfg_.H));
  }
  const int steps_per_epoch = static_cast<int>((n_windows + cfg_.batch - 1) / cfg_.batch);
  Rng sample_rng = Rng(seed).derive(0x5a3c);
  nn::AdamState adam(nn::AdamConfig{cfg_.lr, 0.9, 0.999, 1e-8});
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int step = 0; step < steps_per_epoch; ++step) {
      auto windows = data::sample_subtrajectories(demos, cfg_.H, cfg_.batch, sample_rng);
      train_step(make_pairs(windows), adam);
    }
  }
}

void DistanceEncoder::save(const std::filesystem::path& dir) const {
  nlohmann::json meta;
  meta["model"] = "distance";
  meta["state_dim"] = state_dim_;
  meta["config"] = {{"embed_dim", cfg_.embed_dim}, {"hidden", cfg_.hidden},
                    {"hidden_layers", cfg_.hidden_layers}, {"lr", cfg_.lr},
                    {"batch", cfg_.batch}, {"epochs", cfg_.epochs}, {"H", cfg_.H}};
  nn::save_params(params_, dir, meta);
}

DistanceEncoder DistanceEncoder::load(const std::filesystem::path& dir) {
  nlohmann::json meta = nn::read_checkpoint_meta(dir);
  if (meta.value("model", "") != "distance") {
    throw IoError("checkpoint at " + dir.string() + " is not a distance encoder");
  }
  const auto& c = meta.at("config");
  DistanceConfig cfg;
  cfg.embed_dim = c.at("embed_dim");
  cfg.hidden = c.at("hidden");
  cfg.hidden_layers = c.at("hidden_layers");
  cfg.lr = c.at("lr");
  cfg.batch = c.at("batch");
  cfg.epochs = c.at("epochs");
  cfg.H = c.at("H");
  DistanceEncoder enc(cfg, meta.at("state_dim"), 0);
  nn::load_params(enc.params_, dir);
  return enc;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("euclidean_distance: dimension mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

DemoIndex::DemoIndex(const data::DemoSet& demos, const DistanceEncoder* encoder)
    : demos_(&demos), encoder_(encoder) {
  if (demos.demos.empty()) throw ConfigError("DemoIndex: demo set is empty");
  key_dim_ = encoder_ ? encoder_->config().embed_dim : demos.meta.state_dim;
  keys_.reserve(demos.demos.size());
  for (const auto& d : demos.demos) {
    std::vector<double> flat(static_cast<std::size_t>(d.length()) * key_dim_);
    for (int t = 0; t < d.length(); ++t) {
      auto s = d.state(t);
      std::vector<double> sd(s.begin(), s.end());
      if (encoder_) {
        auto h = encoder_->embed(sd);
        std::copy(h.begin(), h.end(), flat.begin() + static_cast<std::size_t>(t) * key_dim_);
      } else {
        std::copy(sd.begin(), sd.end(), flat.begin() + static_cast<std::size_t>(t) * key_dim_);
      }
    }
    keys_.push_back(std::move(flat));
  }
}

std::pair<int, int> DemoIndex::nearest(std::span<const double> s) const {
  std::vector<double> q(s.begin(), s.end());
  if (encoder_) q = encoder_->embed(q);
  double best = std::numeric_limits<double>::infinity();
  std::pair<int, int> arg{-1, -1};
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const auto& flat = keys_[i];
    const int T = demos_->demos[i].length();
    for (int j = 0; j < T; ++j) {
      double d = 0.0;
      const double* k = flat.data() + static_cast<std::size_t>(j) * key_dim_;
      for (int c = 0; c < key_dim_; ++c) {
        const double diff = q[c] - k[c];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        arg = {static_cast<int>(i), j};
      }
    }
  }
  return arg;
}

std::vector<double> DemoIndex::state(int i, int j) const {
  auto s = demos_->demos[i].state(j);
  return {s.begin(), s.end()};
}

std::vector<double> DemoIndex::lookahead(int i, int j, int H) const {
  const int last = demos_->demos[i].length() - 1;
  return state(i, std::min(j + H - 1, last));
}

SeparationStats hstep_separation(const DistanceEncoder& enc, const data::TrajectoryDataset& ds,
                                 int n_batches, int batch, std::uint64_t seed) {
  Rng rng = Rng(seed).derive(0x5e9a);
  const int H = enc.config().H;
  SeparationStats stats;
  stats.batches = n_batches;
  for (int b = 0; b < n_batches; ++b) {
    auto windows = data::sample_subtrajectories(ds, H, batch, rng);
    double true_dist = 0.0, cross_dist = 0.0;
    int cross_n = 0;
    std::vector<std::vector<double>> queries,ks;
    for (const auto& w : windows) {
      std::vector<double> q(w.state(0).begin(), w.state(0).end());
      std::vector<double> k(w.state(H - 1).begin(), w.state(H - 1).end());
      true_dist += enc.distance(q, k);
      queries.push_back(std::move(q));
      ks.push_back(std::move(k));
    }
    for (std::size_t i = 0; i < windows.size(); ++i) {
      // pair with a key from a different trajectory
      for (int attempt = 0; attempt < 16; ++attempt) {
        const auto j = rng.uniform_int(static_cast<std::int64_t>(windows.size()));
        if (windows[j].traj_index != windows[i].traj_index) {
          cross_dist += enc.distance(queries[i], ks[j]);
          cross_n += 1;
          break;
        }
      }
    }
    if (cross_n > 0 && true_dist / windows.size() < cross_dist / cross_n) stats.separated += 1;
  }
  stats.fraction = static_cast<double>(stats.separated) / stats.batches;
  return stats;
}

maze::MazeState oracle_lookahead(const maze::MazeLayout& layout, const maze::MazeState& state,
                                 maze::Cell goal, int H, const maze::EnvConfig& env) {
  auto path = maze::plan_waypoints(layout, layout.cell_at(state.x, state.y), goal);
  maze::MazeState s = state;
  // aim at the next waypoint, not the center of the cell the point is
  // already in; otherwise the simulated controller first doubles back
  std::size_t wp = path.size() > 1 ? 1 : 0;
  for (int t = 0; t < H - 1; ++t) {
    s = maze::step(s, maze::waypoint_policy(s, path, wp, env), layout, env);
  }
  return s;
}

}  // namespace fist::metric
