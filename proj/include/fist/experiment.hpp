#pragma once

#include <filesystem>
#include <set>

#include <json.hpp>

#include "fist/evaluate.hpp"

namespace fist::exp {

// Resolved configuration of one experiment run. The paper-scale training
// budget is the default; the smoke/desk scales override it.
struct ExperimentConfig {
  std::string layout_path;  // empty -> built-in default layout
  std::string region = "left";
  std::int64_t corpus_transitions = 200000;
  double noise_std = 0.1;
  int demo_count = 10;
  int traj_max_steps = 400;
  double start_jitter = 0.3;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool finetune_distance = false;

  skills::SkillModelConfig skill;
  metric::DistanceConfig distance;
  imitator::BcConfig bc;
  imitator::EvalConfig eval;
  maze::EnvConfig env;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& json_file);
  nlohmann::json to_json() const;
  std::string config_hash() const;

  maze::MazeLayout layout() const;
  maze::Region blocked_region() const;
  void validate() const;
};

// Artifact locations inside a run directory.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path corpus() const { return root / "data" / "corpus"; }
  std::filesystem::path demos() const { return root / "data" / "demos"; }
  std::filesystem::path model(const std::string& name) const { return root / "models" / name; }
  std::filesystem::path episodes() const { return root / "eval" / "episodes.jsonl"; }
  std::filesystem::path report_csv() const { return root / "eval" / "report.csv"; }
  std::filesystem::path chart() const { return root / "report" / "scores.svg"; }
  std::filesystem::path curve(const std::string& name) const {
    return root / "models" / (name + ".loss.json");
  }
};

// ---- pipeline commands (the CLI subcommand cores) ----

void cmd_gen_data(const ExperimentConfig& cfg);
// models: subset of {"fist", "spirl", "bc", "goal_bc"}
void cmd_train_skills(const ExperimentConfig& cfg, const std::set<std::string>& models);
void cmd_train_distance(const ExperimentConfig& cfg);
// models as above plus "fist_no_pretrain" (demos-only training)
void cmd_finetune(const ExperimentConfig& cfg, const std::set<std::string>& models);
std::vector<imitator::EvalRow> cmd_eval(const ExperimentConfig& cfg,
                                        const std::vector<imitator::PolicyKind>& policies);
// Full ablation set: fist_euc / fist_no_ft / fist_no_pretrain / fist_oracle /
// spirl_closest / spirl_hstep / goal_bc plus the resample-period sweep.
std::vector<imitator::EvalRow> cmd_ablate(const ExperimentConfig& cfg);
void cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                const std::filesystem::path& out_csv, const std::filesystem::path& out_svg);

}  // namespace fist::exp
