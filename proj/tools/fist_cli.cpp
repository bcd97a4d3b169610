// Experiment driver: data generation, training, fine-tuning, evaluation,
// ablation sweeps and report emission for the point-maze few-shot imitation
// pipeline. One subcommand per pipeline stage; see README for the usual
// order. Exit codes: 0 ok, 2 config, 3 missing artifact, 4 io, 5 numeric,
// 6 planning.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "fist/errors.hpp"
#include "fist/experiment.hpp"
#include "fist/report.hpp"

namespace {

using fist::exp::ExperimentConfig;

struct CommonArgs {
  std::string config_file;
  std::string out_dir;
  std::string layout_path;
  std::string region;
  std::int64_t seed = -1;
  std::int64_t transitions = -1;
  double noise = -1.0;
  int demos = -1;
  int pretrain_epochs = -1;
  int finetune_epochs = -1;
  int distance_epochs = -1;
  int resample = -1;
  int repeats = -1;
  int n_starts = -1;
  int max_steps = -1;
  int jobs = -1;
  bool deterministic = false;
  bool finetune_distance = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "experiment config JSON (flags override fields)");
  cmd->add_option("--out", args.out_dir, "run directory (or $FIST_OUT_ROOT/<region>-<seed>)");
  cmd->add_option("--layout", args.layout_path, "maze layout file (default: built-in map)");
  cmd->add_option("--region", args.region, "blocked region: left|right|bottom");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--transitions", args.transitions, "offline corpus size");
  cmd->add_option("--noise", args.noise, "action noise std for data generation");
  cmd->add_option("--demos", args.demos, "number of downstream demonstrations");
  cmd->add_option("--pretrain-epochs", args.pretrain_epochs, "skill/bc pretraining epochs");
  cmd->add_option("--finetune-epochs", args.finetune_epochs, "fine-tuning epochs");
  cmd->add_option("--distance-epochs", args.distance_epochs, "distance-metric training epochs");
  cmd->add_option("--resample", args.resample, "skill resample period t in [1, H]");
  cmd->add_option("--repeats", args.repeats, "episode repeats per start");
  cmd->add_option("--n-starts", args.n_starts, "number of fixed evaluation starts");
  cmd->add_option("--max-steps", args.max_steps, "maximum episode length");
  cmd->add_option("--jobs", args.jobs, "parallel evaluation episodes");
  cmd->add_flag("--deterministic", args.deterministic, "use prior means instead of samples");
  cmd->add_flag("--finetune-distance", args.finetune_distance,
                "also fine-tune the distance encoder on demos (off by default)");
}

ExperimentConfig resolve(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_file.empty()) cfg = ExperimentConfig::load(args.config_file);
  if (!args.layout_path.empty()) cfg.layout_path = args.layout_path;
  if (!args.region.empty()) cfg.region = args.region;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.transitions >= 0) cfg.corpus_transitions = args.transitions;
  if (args.noise >= 0) cfg.noise_std = args.noise;
  if (args.demos >= 0) cfg.demo_count = args.demos;
  if (args.pretrain_epochs >= 0) {
    cfg.skill.pretrain_epochs = args.pretrain_epochs;
    cfg.bc.pretrain_epochs = args.pretrain_epochs;
  }
  if (args.finetune_epochs >= 0) {
    cfg.skill.finetune_epochs = args.finetune_epochs;
    cfg.bc.finetune_epochs = args.finetune_epochs;
  }
  if (args.distance_epochs >= 0) cfg.distance.epochs = args.distance_epochs;
  if (args.resample >= 0) cfg.eval.resample_period = args.resample;
  if (args.repeats >= 0) cfg.eval.repeats = args.repeats;
  if (args.n_starts >= 0) cfg.eval.n_starts = args.n_starts;
  if (args.max_steps >= 0) cfg.eval.max_steps = args.max_steps;
  if (args.jobs >= 0) cfg.eval.jobs = args.jobs;
  if (args.deterministic) cfg.eval.deterministic_skill = true;
  if (args.finetune_distance) cfg.finetune_distance = true;

  if (!args.out_dir.empty()) {
    cfg.out_dir = args.out_dir;
  } else if (cfg.out_dir.empty()) {
    if (const char* root = std::getenv("FIST_OUT_ROOT")) {
      cfg.out_dir = std::string(root) + "/" + cfg.region + "-" + std::to_string(cfg.seed);
    }
  }
  return cfg;
}

std::set<std::string> split_set(const std::string& csv) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto item = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.insert(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_rows(const std::vector<fist::imitator::EvalRow>& rows) {
  for (const auto& r : rows) {
    std::cout << r.policy << " (" << r.task << ", t=" << r.resample_period << "): length "
              << r.mean_length << " +/- " << r.length_stderr << ", success " << r.success_rate
              << " +/- " << r.success_std << ", score " << r.normalized_score << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot imitation with skill transition models on a point maze"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string models_csv = "fist,spirl,bc";
  std::string policies_csv = "fist,spirl,bc_ft";
  std::vector<std::string> run_dirs;
  std::string out_csv = "report.csv";
  std::string out_svg = "report.svg";

  auto* gen = app.add_subcommand("gen-data", "generate the offline corpus and demonstrations");
  add_common(gen, args);

  auto* train = app.add_subcommand("train-skills", "pretrain skill/baseline models on the corpus");
  add_common(train, args);
  train->add_option("--models", models_csv, "comma list of fist,spirl,bc,goal_bc");

  auto* dist = app.add_subcommand("train-distance", "train the contrastive distance encoder");
  add_common(dist, args);

  auto* ft = app.add_subcommand("finetune", "fine-tune models on the demonstrations");
  add_common(ft, args);
  ft->add_option("--models", models_csv, "comma list of fist,spirl,bc,goal_bc,fist_no_pretrain");

  auto* ev = app.add_subcommand("eval", "run evaluation episodes and write reports");
  add_common(ev, args);
  ev->add_option("--policies", policies_csv,
                 "comma list of fist,fist_euc,fist_no_ft,fist_no_pretrain,fist_oracle,"
                 "spirl,spirl_closest,spirl_hstep,bc_ft,goal_bc");

  auto* ab = app.add_subcommand("ablate", "run the ablation policy set and resample sweep");
  add_common(ab, args);

  auto* rep = app.add_subcommand("report", "aggregate run directories into CSV + SVG");
  rep->add_option("--runs", run_dirs, "run directories")->required();
  rep->add_option("--out-csv", out_csv, "output CSV path");
  rep->add_option("--out-svg", out_svg, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      fist::exp::cmd_gen_data(resolve(args));
    } else if (train->parsed()) {
      fist::exp::cmd_train_skills(resolve(args), split_set(models_csv));
    } else if (dist->parsed()) {
      fist::exp::cmd_train_distance(resolve(args));
    } else if (ft->parsed()) {
      fist::exp::cmd_finetune(resolve(args), split_set(models_csv));
    } else if (ev->parsed()) {
      std::vector<fist::imitator::PolicyKind> kinds;
      for (const auto& name : split_set(policies_csv)) {
        kinds.push_back(fist::imitator::policy_from_string(name));
      }
      print_rows(fist::exp::cmd_eval(resolve(args), kinds));
    } else if (ab->parsed()) {
      print_rows(fist::exp::cmd_ablate(resolve(args)));
    } else if (rep->parsed()) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      fist::exp::cmd_report(dirs, out_csv, out_svg);
    }
  } catch (const fist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
