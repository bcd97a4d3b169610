#include "fist/experiment.hpp"

#include <chrono>
#include <fstream>
#include <optional>

#include "fist/datagen.hpp"
#include "fist/dataset_io.hpp"
#include "fist/errors.hpp"
#include "fist/hashing.hpp"
#include "fist/report.hpp"

namespace fist::exp {

namespace fs = std::filesystem;
using imitator::EvalRow;
using imitator::PolicyKind;

namespace {

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

void merge_skill(const nlohmann::json& j, skills::SkillModelConfig& c) {
  get_if(j, "H", c.H);
  get_if(j, "z_dim", c.z_dim);
  get_if(j, "hidden", c.hidden);
  get_if(j, "encoder_layers", c.encoder_layers);
  get_if(j, "decoder_layers", c.decoder_layers);
  get_if(j, "prior_layers", c.prior_layers);
  get_if(j, "beta", c.beta);
  get_if(j, "lr", c.lr);
  get_if(j, "batch", c.batch);
  get_if(j, "pretrain_epochs", c.pretrain_epochs);
  get_if(j, "finetune_epochs", c.finetune_epochs);
  get_if(j, "log_std_lo", c.log_std_lo);
  get_if(j, "log_std_hi", c.log_std_hi);
}

void merge_distance(const nlohmann::json& j, metric::DistanceConfig& c) {
  get_if(j, "embed_dim", c.embed_dim);
  get_if(j, "hidden", c.hidden);
  get_if(j, "hidden_layers", c.hidden_layers);
  get_if(j, "lr", c.lr);
  get_if(j, "batch", c.batch);
  get_if(j, "epochs", c.epochs);
  get_if(j, "H", c.H);
}

void merge_bc(const nlohmann::json& j, imitator::BcConfig& c) {
  get_if(j, "hidden", c.hidden);
  get_if(j, "layers", c.layers);
  get_if(j, "lr", c.lr);
  get_if(j, "batch", c.batch);
  get_if(j, "pretrain_epochs", c.pretrain_epochs);
  get_if(j, "finetune_epochs", c.finetune_epochs);
  get_if(j, "H", c.H);
}

void merge_eval(const nlohmann::json& j, imitator::EvalConfig& c) {
  get_if(j, "max_steps", c.max_steps);
  get_if(j, "resample_period", c.resample_period);
  get_if(j, "n_starts", c.n_starts);
  get_if(j, "repeats", c.repeats);
  get_if(j, "goal_radius", c.goal_radius);
  get_if(j, "deterministic_skill", c.deterministic_skill);
  get_if(j, "keep_traces", c.keep_traces);
  get_if(j, "jobs", c.jobs);
}

void merge_env(const nlohmann::json& j, maze::EnvConfig& c) {
  get_if(j, "dt", c.dt);
  get_if(j, "v_max", c.v_max);
  get_if(j, "max_steps", c.max_steps);
  get_if(j, "goal_radius", c.goal_radius);
  get_if(j, "kp", c.kp);
  get_if(j, "kd", c.kd);
  get_if(j, "waypoint_radius", c.waypoint_radius);
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

void update_manifest(const RunPaths& paths, const ExperimentConfig& cfg,
                     const std::string& command, const std::vector<fs::path>& artifacts) {
  nlohmann::json manifest;
  if (fs::exists(paths.manifest())) {
    std::ifstream in(paths.manifest());
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception&) {
      manifest = nlohmann::json::object();
    }
  }
  manifest["config_hash"] = cfg.config_hash();
  if (!manifest.contains("history")) manifest["history"] = nlohmann::json::array();
  manifest["history"].push_back({{"command", command}, {"timestamp", now_iso8601()}});
  if (!manifest.contains("artifacts")) manifest["artifacts"] = nlohmann::json::object();

  for (const auto& artifact : artifacts) {
    std::vector<fs::path> files;
    if (fs::is_directory(artifact)) {
      for (const auto& entry : fs::recursive_directory_iterator(artifact)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
    } else if (fs::is_regular_file(artifact)) {
      files.push_back(artifact);
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
      manifest["artifacts"][fs::relative(f, paths.root).string()] = {
          {"crc32", crc32(bytes)}, {"bytes", bytes.size()}};
    }
  }
  fs::create_directories(paths.root);
  std::ofstream out(paths.manifest());
  out << manifest.dump(2) << "\n";
}

void write_config(const RunPaths& paths, const ExperimentConfig& cfg) {
  fs::create_directories(paths.root);
  std::ofstream out(paths.config());
  if (!out) throw IoError("cannot write " + paths.config().string());
  out << cfg.to_json().dump(2) << "\n";
}

void require(bool present, const fs::path& what, const std::string& produce_hint) {
  if (!present) {
    throw MissingArtifactError("missing " + what.string() + "; run `fist " + produce_hint +
                               "` first");
  }
}

std::uint64_t stream_seed(const ExperimentConfig& cfg, std::string_view label) {
  return Rng(cfg.seed).derive(fnv1a(label)).seed();
}

void write_curve(const fs::path& file, const std::vector<double>& train,
                 const std::vector<double>& eval) {
  fs::create_directories(file.parent_path());
  std::ofstream out(file);
  out << nlohmann::json{{"epoch_loss", train}, {"eval_loss", eval}}.dump(2) << "\n";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  get_if(j, "layout_path", cfg.layout_path);
  get_if(j, "region", cfg.region);
  get_if(j, "corpus_transitions", cfg.corpus_transitions);
  get_if(j, "noise_std", cfg.noise_std);
  get_if(j, "demo_count", cfg.demo_count);
  get_if(j, "traj_max_steps", cfg.traj_max_steps);
  get_if(j, "start_jitter", cfg.start_jitter);
  get_if(j, "seed", cfg.seed);
  get_if(j, "out_dir", cfg.out_dir);
  get_if(j, "finetune_distance", cfg.finetune_distance);
  if (j.contains("skill")) merge_skill(j.at("skill"), cfg.skill);
  if (j.contains("distance")) merge_distance(j.at("distance"), cfg.distance);
  if (j.contains("bc")) merge_bc(j.at("bc"), cfg.bc);
  if (j.contains("eval")) merge_eval(j.at("eval"), cfg.eval);
  if (j.contains("env")) merge_env(j.at("env"), cfg.env);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& json_file) {
  std::ifstream in(json_file);
  if (!in) throw MissingArtifactError("missing config file: " + json_file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed config " + json_file.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  return nlohmann::json{
      {"layout_path", layout_path},
      {"region", region},
      {"corpus_transitions", corpus_transitions},
      {"noise_std", noise_std},
      {"demo_count", demo_count},
      {"traj_max_steps", traj_max_steps},
      {"start_jitter", start_jitter},
      {"seed", seed},
      {"out_dir", out_dir},
      {"finetune_distance", finetune_distance},
      {"skill",
       {{"H", skill.H},
        {"z_dim", skill.z_dim},
        {"hidden", skill.hidden},
        {"encoder_layers", skill.encoder_layers},
        {"decoder_layers", skill.decoder_layers},
        {"prior_layers", skill.prior_layers},
        {"beta", skill.beta},
        {"lr", skill.lr},
        {"batch", skill.batch},
        {"pretrain_epochs", skill.pretrain_epochs},
        {"finetune_epochs", skill.finetune_epochs},
        {"log_std_lo", skill.log_std_lo},
        {"log_std_hi", skill.log_std_hi}}},
      {"distance",
       {{"embed_dim", distance.embed_dim},
        {"hidden", distance.hidden},
        {"hidden_layers", distance.hidden_layers},
        {"lr", distance.lr},
        {"batch", distance.batch},
        {"epochs", distance.epochs},
        {"H", distance.H}}},
      {"bc",
       {{"hidden", bc.hidden},
        {"layers", bc.layers},
        {"lr", bc.lr},
        {"batch", bc.batch},
        {"pretrain_epochs", bc.pretrain_epochs},
        {"finetune_epochs", bc.finetune_epochs},
        {"H", bc.H}}},
      {"eval",
       {{"max_steps", eval.max_steps},
        {"resample_period", eval.resample_period},
        {"n_starts", eval.n_starts},
        {"repeats", eval.repeats},
        {"goal_radius", eval.goal_radius},
        {"deterministic_skill", eval.deterministic_skill},
        {"keep_traces", eval.keep_traces},
        {"jobs", eval.jobs}}},
      {"env",
       {{"dt", env.dt},
        {"v_max", env.v_max},
        {"max_steps", env.max_steps},
        {"goal_radius", env.goal_radius},
        {"kp", env.kp},
        {"kd", env.kd},
        {"waypoint_radius", env.waypoint_radius}}}};
}

std::string ExperimentConfig::config_hash() const {
  // evaluation settings do not affect produced training artifacts, so they
  // stay out of the hash; sweeping resample periods reuses the same run dir
  nlohmann::json j = to_json();
  j.erase("eval");
  j.erase("out_dir");
  return fnv1a_hex(j.dump());
}

maze::MazeLayout ExperimentConfig::layout() const {
  return layout_path.empty() ? maze::MazeLayout::default_layout()
                             : maze::MazeLayout::load(layout_path);
}

maze::Region ExperimentConfig::blocked_region() const {
  return maze::region_from_string(region);
}

void ExperimentConfig::validate() const {
  if (blocked_region() == maze::Region::none) {
    throw ConfigError("experiment: region must be left, right or bottom");
  }
  if (out_dir.empty()) throw ConfigError("experiment: out_dir is required");
  if (demo_count < 1) throw ConfigError("experiment: demo_count must be >= 1");
  if (corpus_transitions < 0) throw ConfigError("experiment: corpus_transitions must be >= 0");
  skill.validate();
  distance.validate();
  bc.validate();
  if (distance.H != skill.H) {
    throw ConfigError("experiment: distance.H must equal skill.H (training pairs and lookups "
                      "share the horizon)");
  }
  if (bc.H != skill.H) throw ConfigError("experiment: bc.H must equal skill.H");
  eval.validate(skill.H);
}

void cmd_gen_data(const ExperimentConfig& cfg) {
  cfg.validate();
  RunPaths paths{cfg.out_dir};
  const maze::MazeLayout layout = cfg.layout();

  maze::DataGenConfig gen;
  gen.n_transitions = cfg.corpus_transitions;
  gen.noise_std = cfg.noise_std;
  gen.traj_max_steps = cfg.traj_max_steps;
  gen.start_jitter = cfg.start_jitter;
  gen.env = cfg.env;

  auto corpus = maze::generate_offline_data(layout, cfg.blocked_region(), gen,
                                            stream_seed(cfg, "data.corpus"));
  data::save_dataset(corpus, paths.corpus());

  auto demos = maze::generate_demos(layout, cfg.blocked_region(), cfg.demo_count, cfg.env,
                                    stream_seed(cfg, "data.demos"));
  data::save_demos(demos, paths.demos());

  write_config(paths, cfg);
  update_manifest(paths, cfg, "gen-data", {paths.corpus(), paths.demos(), paths.config()});
}

void cmd_train_skills(const ExperimentConfig& cfg, const std::set<std::string>& models) {
  cfg.validate();
  RunPaths paths{cfg.out_dir};
  require(fs::exists(paths.corpus() / "manifest.json"), paths.corpus(), "gen-data");
  auto corpus = data::load_dataset(paths.corpus());

  for (const auto& name : models) {
    std::string dir_name = name;
    if (name == "fist" || name == "spirl") {
      dir_name = (name == "fist") ? "skills" : "spirl";
      skills::SkillModelConfig mc = cfg.skill;
      mc.future_conditioned = (name == "fist");
      skills::SkillModel model(mc, corpus.meta.state_dim, corpus.meta.action_dim,
                               stream_seed(cfg, "init." + name));
      skills::TrainCurve curve;
      model.pretrain(corpus, stream_seed(cfg, "train." + name), &curve);
      model.save(paths.model(dir_name));
      write_curve(paths.curve(dir_name), curve.epoch_loss, curve.eval_loss);
    } else if (name == "bc" || name == "goal_bc") {
      imitator::BcConfig bc = cfg.bc;
      bc.goal_conditioned = (name == "goal_bc");
      imitator::BcPolicy policy(bc, corpus.meta.state_dim, corpus.meta.action_dim,
                                stream_seed(cfg, "init." + name));
      std::vector<double> losses;
      policy.pretrain(corpus, stream_seed(cfg, "train." + name), &losses);
      policy.save(paths.model(name));
      write_curve(paths.curve(name), losses, {});
    } else {
      throw ConfigError("train-skills: unknown model '" + name +
                        "' (expected fist|spirl|bc|goal_bc)");
    }
    update_manifest(paths, cfg, "train-skills:" + name, {paths.model(dir_name)});
  }
}

void cmd_train_distance(const ExperimentConfig& cfg) {
  cfg.validate();
  RunPaths paths{cfg.out_dir};
  require(fs::exists(paths.corpus() / "manifest.json"), paths.corpus(), "gen-data");
  auto corpus = data::load_dataset(paths.corpus());
  std::vector<double> losses;
  auto enc = metric::DistanceEncoder::train(corpus, cfg.distance,
                                            stream_seed(cfg, "train.distance"), &losses);
  enc.save(paths.model("distance"));
  write_curve(paths.curve("distance"), losses, {});
  update_manifest(paths, cfg, "train-distance", {paths.model("distance")});
}

void cmd_finetune(const ExperimentConfig& cfg, const std::set<std::string>& models) {
  cfg.validate();
  RunPaths paths{cfg.out_dir};
  require(fs::exists(paths.demos() / "manifest.json"), paths.demos(), "gen-data");
  auto demos = data::load_demos(paths.demos());

  for (const auto& name : models) {
    if (name == "fist" || name == "spirl") {
      // the future-conditioned model checkpoint is stored under "skills"
      const auto pretrain_dir = name == "fist" ? paths.model("skills") : paths.model("spirl");
      require(fs::exists(pretrain_dir / "manifest.json"), pretrain_dir,
              "train-skills --models " + name);
      auto model = skills::SkillModel::load(pretrain_dir);
      model.set_finetune_epochs(cfg.skill.finetune_epochs);
      skills::TrainCurve curve;
      model.finetune(demos.demos, stream_seed(cfg, "finetune." + name), &curve);
      model.save(paths.model(name == "fist" ? "skills_ft" : "spirl_ft"));
      write_curve(paths.curve(name + "_ft"), curve.epoch_loss, curve.eval_loss);
    } else if (name == "bc" || name == "goal_bc") {
      const auto pretrain_dir = paths.model(name);
      require(fs::exists(pretrain_dir / "manifest.json"), pretrain_dir,
              "train-skills --models " + name);
      auto policy = imitator::BcPolicy::load(pretrain_dir);
      policy.set_finetune_epochs(cfg.bc.finetune_epochs);
      policy.finetune(demos.demos, stream_seed(cfg, "finetune." + name));
      policy.save(paths.model(name + "_ft"));
    } else if (name == "fist_no_pretrain") {
      skills::SkillModelConfig mc = cfg.skill;
      skills::SkillModel model(mc, demos.meta.state_dim, demos.meta.action_dim,
                               stream_seed(cfg, "init.fist_no_pretrain"));
      model.finetune(demos.demos, stream_seed(cfg, "finetune.fist_no_pretrain"));
      model.save(paths.model("fist_no_pretrain"));
    } else {
      throw ConfigError("finetune: unknown model '" + name + "'");
    }
    update_manifest(paths, cfg, "finetune:" + name, {paths.root / "models"});
  }

  if (cfg.finetune_distance) {
    const auto dist_dir = paths.model("distance");
    require(fs::exists(dist_dir / "manifest.json"), dist_dir, "train-distance");
    auto enc = metric::DistanceEncoder::load(dist_dir);
    enc.finetune(demos.demos, cfg.skill.finetune_epochs, stream_seed(cfg, "finetune.distance"));
    enc.save(paths.model("distance_ft"));
    update_manifest(paths, cfg, "finetune:distance", {paths.model("distance_ft")});
  }
}

namespace {

// Lazily loaded artifact bundle shared across the evaluated policies.
struct Workspace {
  const ExperimentConfig& cfg;
  RunPaths paths;
  maze::MazeLayout layout;
  data::DemoSet demos;
  std::optional<skills::SkillModel> skills_ft, skills_pre, spirl_ft, no_pretrain;
  std::optional<metric::DistanceEncoder> distance;
  std::optional<metric::DemoIndex> index_contrastive, index_euclidean;

  Workspace(const ExperimentConfig& c)
      : cfg(c), paths{c.out_dir}, layout(c.layout()), demos(data::load_demos(paths.demos())) {}

  const skills::SkillModel* skill_model(const std::string& dir_name,
                                        std::optional<skills::SkillModel>& slot,
                                        const std::string& hint) {
    if (!slot) {
      const auto dir = paths.model(dir_name);
      require(fs::exists(dir / "manifest.json"), dir, hint);
      slot.emplace(skills::SkillModel::load(dir));
      if (slot->config().H != cfg.skill.H) {
        throw ConfigError("checkpoint " + dir.string() + " was trained with H=" +
                          std::to_string(slot->config().H) + ", config says H=" +
                          std::to_string(cfg.skill.H));
      }
    }
    return &*slot;
  }

  const metric::DistanceEncoder* distance_encoder() {
    if (!distance) {
      const auto ft = paths.model("distance_ft");
      const auto dir = fs::exists(ft / "manifest.json") ? ft : paths.model("distance");
      require(fs::exists(dir / "manifest.json"), paths.model("distance"), "train-distance");
      distance.emplace(metric::DistanceEncoder::load(dir));
      if (distance->config().H != cfg.skill.H) {
        throw ConfigError("distance checkpoint H mismatch: " + dir.string());
      }
    }
    return &*distance;
  }

  const metric::DemoIndex* contrastive_index() {
    if (!index_contrastive) index_contrastive.emplace(demos, distance_encoder());
    return &*index_contrastive;
  }

  const metric::DemoIndex* euclidean_index() {
    if (!index_euclidean) index_euclidean.emplace(demos, nullptr);
    return &*index_euclidean;
  }

  imitator::PolicyArtifacts artifacts_for(PolicyKind kind) {
    imitator::PolicyArtifacts art;
    art.layout = &layout;
    art.env = cfg.env;
    art.goal = demos.goal;
    switch (kind) {
      case PolicyKind::fist:
      case PolicyKind::fist_oracle:
        art.skill = skill_model("skills_ft", skills_ft, "finetune --models fist");
        break;
      case PolicyKind::fist_euc:
        art.skill = skill_model("skills_ft", skills_ft, "finetune --models fist");
        art.index = euclidean_index();
        break;
      case PolicyKind::fist_no_ft:
        art.skill = skill_model("skills", skills_pre, "train-skills --models fist");
        break;
      case PolicyKind::fist_no_pretrain:
        art.skill = skill_model("fist_no_pretrain", no_pretrain,
                                "finetune --models fist_no_pretrain");
        break;
      case PolicyKind::spirl:
      case PolicyKind::spirl_closest:
      case PolicyKind::spirl_hstep: {
        const auto dir = paths.model("spirl_ft");
        require(fs::exists(dir / "manifest.json"), dir, "finetune --models spirl");
        if (!spirl_ft) {
          spirl_ft.emplace(skills::SkillModel::load(dir));
          if (spirl_ft->config().H != cfg.skill.H) {
            throw ConfigError("spirl checkpoint H mismatch");
          }
        }
        art.spirl = &*spirl_ft;
        break;
      }
      case PolicyKind::bc_ft:
      case PolicyKind::goal_bc:
        break;
    }
    const bool wants_contrastive =
        kind == PolicyKind::fist || kind == PolicyKind::fist_no_ft ||
        kind == PolicyKind::fist_no_pretrain || kind == PolicyKind::spirl_closest ||
        kind == PolicyKind::spirl_hstep || kind == PolicyKind::goal_bc;
    if (wants_contrastive) art.index = contrastive_index();
    return art;
  }
};

std::vector<EvalRow> run_policies(Workspace& ws, const ExperimentConfig& cfg,
                                  const std::vector<std::pair<PolicyKind, int>>& kinds_periods,
                                  const char* command) {
  // bc policies are loaded fresh per request (cheap, and kept out of Workspace
  // since several kinds never need them)
  std::optional<imitator::BcPolicy> bc_ft, goal_bc;
  imitator::EvalConfig eval_cfg = cfg.eval;
  eval_cfg.seed = stream_seed(cfg, "eval");
  auto starts = maze::sample_start_states(ws.layout, cfg.blocked_region(), eval_cfg.n_starts,
                                          cfg.seed);

  std::vector<imitator::EpisodeLogEntry> log;
  std::vector<EvalRow> rows;
  for (const auto& [kind, period] : kinds_periods) {
    imitator::PolicyArtifacts art = ws.artifacts_for(kind);
    if (kind == PolicyKind::bc_ft) {
      const auto dir = ws.paths.model("bc_ft");
      require(fs::exists(dir / "manifest.json"), dir, "finetune --models bc");
      if (!bc_ft) bc_ft.emplace(imitator::BcPolicy::load(dir));
      art.bc = &*bc_ft;
    }
    if (kind == PolicyKind::goal_bc) {
      const auto dir = ws.paths.model("goal_bc_ft");
      require(fs::exists(dir / "manifest.json"), dir, "finetune --models goal_bc");
      if (!goal_bc) goal_bc.emplace(imitator::BcPolicy::load(dir));
      art.goal_bc = &*goal_bc;
    }
    imitator::EvalConfig per = eval_cfg;
    per.resample_period = period;
    rows.push_back(imitator::evaluate(kind, art, per, starts, &log));
  }

  append_episode_log(ws.paths.episodes(), log);
  const auto full_log = read_episode_log(ws.paths.episodes());
  write_report_csv(ws.paths.report_csv(), rows_from_log(full_log, cfg.eval.max_steps));
  update_manifest(ws.paths, cfg, command, {ws.paths.episodes(), ws.paths.report_csv()});
  return rows;
}

}  // namespace

std::vector<EvalRow> cmd_eval(const ExperimentConfig& cfg,
                              const std::vector<PolicyKind>& policies) {
  cfg.validate();
  RunPaths paths{cfg.out_dir};
  require(fs::exists(paths.demos() / "manifest.json"), paths.demos(), "gen-data");
  Workspace ws(cfg);
  std::vector<std::pair<PolicyKind, int>> kinds;
  for (PolicyKind k : policies) kinds.push_back({k, cfg.eval.resample_period});
  return run_policies(ws, cfg, kinds, "eval");
}

std::vector<EvalRow> cmd_ablate(const ExperimentConfig& cfg) {
  cfg.validate();
  RunPaths paths{cfg.out_dir};
  require(fs::exists(paths.demos() / "manifest.json"), paths.demos(), "gen-data");

  // train the ablation-only artifacts on demand
  if (!fs::exists(paths.model("fist_no_pretrain") / "manifest.json")) {
    cmd_finetune(cfg, {"fist_no_pretrain"});
  }
  if (!fs::exists(paths.model("goal_bc") / "manifest.json")) {
    cmd_train_skills(cfg, {"goal_bc"});
  }
  if (!fs::exists(paths.model("goal_bc_ft") / "manifest.json")) {
    cmd_finetune(cfg, {"goal_bc"});
  }

  Workspace ws(cfg);
  std::vector<std::pair<PolicyKind, int>> kinds{
      {PolicyKind::fist_euc, cfg.eval.resample_period},
      {PolicyKind::fist_no_ft, cfg.eval.resample_period},
      {PolicyKind::fist_no_pretrain, cfg.eval.resample_period},
      {PolicyKind::fist_oracle, cfg.eval.resample_period},
      {PolicyKind::spirl_closest, cfg.eval.resample_period},
      {PolicyKind::spirl_hstep, cfg.eval.resample_period},
      {PolicyKind::goal_bc, cfg.eval.resample_period},
  };
  for (int t : {1, 5, 10}) {
    if (t == cfg.eval.resample_period || t > cfg.skill.H) continue;
    kinds.push_back({PolicyKind::fist, t});
  }
  return run_policies(ws, cfg, kinds, "ablate");
}

void cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out_csv,
                const fs::path& out_svg) {
  std::vector<EvalRow> all_rows;
  for (const auto& dir : run_dirs) {
    RunPaths paths{dir};
    const auto cfg = ExperimentConfig::load(paths.config());
    const auto log = read_episode_log(paths.episodes());
    if (log.empty()) throw IoError("episode log is empty: " + paths.episodes().string());
    auto rows = rows_from_log(log, cfg.eval.max_steps);
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
  }
  if (all_rows.empty()) throw ConfigError("report: no runs given");
  write_report_csv(out_csv, all_rows);
  write_score_chart(out_svg, all_rows);
}

}  // namespace fist::exp
