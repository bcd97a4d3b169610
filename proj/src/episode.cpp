#include "fist/episode.hpp"

#include <algorithm>
#include <cmath>

#include "fist/errors.hpp"

namespace fist::imitator {

PolicyKind policy_from_string(const std::string& s) {
  if (s == "fist") return PolicyKind::fist;
  if (s == "fist_euc") return PolicyKind::fist_euc;
  if (s == "fist_no_ft") return PolicyKind::fist_no_ft;
  if (s == "fist_no_pretrain") return PolicyKind::fist_no_pretrain;
  if (s == "fist_oracle") return PolicyKind::fist_oracle;
  if (s == "spirl") return PolicyKind::spirl;
  if (s == "spirl_closest") return PolicyKind::spirl_closest;
  if (s == "spirl_hstep") return PolicyKind::spirl_hstep;
  if (s == "bc_ft") return PolicyKind::bc_ft;
  if (s == "goal_bc") return PolicyKind::goal_bc;
  throw ConfigError("unknown policy '" + s + "'");
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::fist: return "fist";
    case PolicyKind::fist_euc: return "fist_euc";
    case PolicyKind::fist_no_ft: return "fist_no_ft";
    case PolicyKind::fist_no_pretrain: return "fist_no_pretrain";
    case PolicyKind::fist_oracle: return "fist_oracle";
    case PolicyKind::spirl: return "spirl";
    case PolicyKind::spirl_closest: return "spirl_closest";
    case PolicyKind::spirl_hstep: return "spirl_hstep";
    case PolicyKind::bc_ft: return "bc_ft";
    case PolicyKind::goal_bc: return "goal_bc";
  }
  return "?";
}

bool is_fist_variant(PolicyKind k) {
  return k == PolicyKind::fist || k == PolicyKind::fist_euc || k == PolicyKind::fist_no_ft ||
         k == PolicyKind::fist_no_pretrain || k == PolicyKind::fist_oracle;
}

bool is_spirl_variant(PolicyKind k) {
  return k == PolicyKind::spirl || k == PolicyKind::spirl_closest ||
         k == PolicyKind::spirl_hstep;
}

void EvalConfig::validate(int H) const {
  if (max_steps < 0) throw ConfigError("eval config: max_steps must be >= 0");
  if (resample_period < 1 || resample_period > H) {
    throw ConfigError("eval config: resample_period must lie in [1, H]");
  }
  if (n_starts < 1 || repeats < 1) throw ConfigError("eval config: needs at least one episode");
  if (jobs < 1) throw ConfigError("eval config: jobs must be >= 1");
}

std::optional<std::string> missing_artifact(PolicyKind kind, const PolicyArtifacts& art) {
  if (!art.layout) return "maze layout";
  if (is_fist_variant(kind) && !art.skill) {
    return to_string(kind) + " requires a skill-model checkpoint";
  }
  if (is_spirl_variant(kind) && !art.spirl) {
    return to_string(kind) + " requires a state-prior (spirl) checkpoint";
  }
  const bool needs_index = kind == PolicyKind::fist || kind == PolicyKind::fist_euc ||
                           kind == PolicyKind::fist_no_ft || kind == PolicyKind::fist_no_pretrain ||
                           kind == PolicyKind::spirl_closest || kind == PolicyKind::spirl_hstep ||
                           kind == PolicyKind::goal_bc;
  if (needs_index && !art.index) return to_string(kind) + " requires a demonstration index";
  if (kind == PolicyKind::bc_ft && !art.bc) return "bc_ft requires a bc checkpoint";
  if (kind == PolicyKind::goal_bc && !art.goal_bc) return "goal_bc requires a goal_bc checkpoint";
  return std::nullopt;
}

namespace {

std::vector<double> state_vec(const maze::MazeState& s) { return {s.x, s.y, s.vx, s.vy}; }

void clip_action(std::vector<double>& a) {
  for (auto& v : a) v = std::clamp(v, -1.0, 1.0);
}

bool at_goal(const maze::MazeState& s, const data::GoalDescriptor& goal, double radius) {
  return std::hypot(s.x - goal.x, s.y - goal.y) < radius;
}

std::vector<double> sample_or_mean(const nn::DiagGaussian& g, bool deterministic, Rng& rng) {
  if (deterministic) return g.mean;
  return g.sample(rng);
}

}  // namespace

EpisodeResult run_episode(PolicyKind kind, const PolicyArtifacts& art, const EvalConfig& cfg,
                          const maze::MazeState& start, Rng rng) {
  if (auto missing = missing_artifact(kind, art)) throw MissingArtifactError(*missing);

  const skills::SkillModel* model =
      is_spirl_variant(kind) ? art.spirl : (is_fist_variant(kind) ? art.skill : nullptr);
  const int H = model ? model->config().H
                      : (kind == PolicyKind::goal_bc ? art.goal_bc->config().H : 1);
  if (kind != PolicyKind::bc_ft) cfg.validate(H);

  const maze::Cell goal_cell = art.layout->cell_at(art.goal.x, art.goal.y);

  EpisodeResult result;
  maze::MazeState s = start;
  std::vector<double> z;
  std::vector<double> target;

  for (int step = 0; step < cfg.max_steps; ++step) {
    if (at_goal(s, art.goal, cfg.goal_radius)) {
      result.length = step;
      result.success = true;
      return result;
    }
    if (cfg.keep_traces) result.trace.push_back({s.x, s.y, s.vx, s.vy});

    const auto sv = state_vec(s);
    std::vector<double> action;
    switch (kind) {
      case PolicyKind::bc_ft: {
        action = art.bc->act(sv);
        break;
      }
      case PolicyKind::goal_bc: {
        if (step % cfg.resample_period == 0) {
          auto [i, j] = art.index->nearest(sv);
          target = art.index->lookahead(i, j, H);
        }
        action = art.goal_bc->act(sv, target);
        break;
      }
      case PolicyKind::spirl:
      case PolicyKind::spirl_closest:
      case PolicyKind::spirl_hstep: {
        // a SPiRL skill is an H-step macro-action: commit to each sampled z
        // for the full horizon (the resample-period sweep applies to the
        // future-conditioned variants only)
        if (step % H == 0) {
          std::vector<double> cond = sv;
          if (kind == PolicyKind::spirl_closest) {
            auto [i, j] = art.index->nearest(sv);
            cond = art.index->state(i, j);
          } else if (kind == PolicyKind::spirl_hstep) {
            auto [i, j] = art.index->nearest(sv);
            cond = art.index->lookahead(i, j, H);
          }
          z = sample_or_mean(model->infer_skill(cond), cfg.deterministic_skill, rng);
        }
        action = model->decode_action(sv, z);
        break;
      }
      default: {  // fist family
        if (step % cfg.resample_period == 0) {
          if (kind == PolicyKind::fist_oracle) {
            const maze::MazeState ahead =
                metric::oracle_lookahead(*art.layout, s, goal_cell, H, art.env);
            target = state_vec(ahead);
          } else {
            auto [i, j] = art.index->nearest(sv);
            target = art.index->lookahead(i, j, H);
          }
          z = sample_or_mean(model->infer_skill(sv, target), cfg.deterministic_skill, rng);
        }
        action = model->decode_action(sv, z);
        break;
      }
    }
    clip_action(action);
    s = maze::step(s, maze::MazeAction{action[0], action[1]}, *art.layout, art.env);
  }
  result.length = cfg.max_steps;
  result.success = at_goal(s, art.goal, cfg.goal_radius);
  return result;
}

EpisodeResult run_fist_episode(const PolicyArtifacts& art, const EvalConfig& cfg,
                               const maze::MazeState& start, Rng rng) {
  return run_episode(PolicyKind::fist, art, cfg, start, rng);
}

EpisodeResult run_spirl_episode(const PolicyArtifacts& art, const EvalConfig& cfg,
                                const maze::MazeState& start, Rng rng, SpirlLookup lookup) {
  switch (lookup) {
    case SpirlLookup::none: return run_episode(PolicyKind::spirl, art, cfg, start, rng);
    case SpirlLookup::closest: return run_episode(PolicyKind::spirl_closest, art, cfg, start, rng);
    default: return run_episode(PolicyKind::spirl_hstep, art, cfg, start, rng);
  }
}

}  // namespace fist::imitator
