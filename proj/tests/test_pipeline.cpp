#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fist/dataset_io.hpp"
#include "fist/errors.hpp"
#include "fist/experiment.hpp"
#include "fist/report.hpp"

using namespace fist;
using namespace fist::exp;
namespace fs = std::filesystem;

namespace {

ExperimentConfig micro_config(const fs::path& out, std::uint64_t seed = 5) {
  ExperimentConfig cfg;
  cfg.region = "left";
  cfg.corpus_transitions = 3000;
  cfg.noise_std = 0.1;
  cfg.demo_count = 4;
  cfg.seed = seed;
  cfg.out_dir = out.string();

  cfg.skill.H = 5;
  cfg.skill.z_dim = 8;
  cfg.skill.hidden = 24;
  cfg.skill.decoder_layers = 2;
  cfg.skill.prior_layers = 2;
  cfg.skill.batch = 64;
  cfg.skill.pretrain_epochs = 6;
  cfg.skill.finetune_epochs = 8;

  cfg.distance.embed_dim = 8;
  cfg.distance.hidden = 24;
  cfg.distance.hidden_layers = 1;
  cfg.distance.epochs = 4;
  cfg.distance.H = 5;

  cfg.bc.hidden = 24;
  cfg.bc.layers = 2;
  cfg.bc.pretrain_epochs = 6;
  cfg.bc.finetune_epochs = 8;
  cfg.bc.H = 5;

  cfg.eval.max_steps = 300;
  cfg.eval.n_starts = 3;
  cfg.eval.repeats = 1;
  cfg.eval.jobs = 2;
  return cfg;
}

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("full pipeline on a micro corpus completes end-to-end") {
  const fs::path root = fs::temp_directory_path() / "fist_pipeline_test";
  fs::remove_all(root);
  ExperimentConfig cfg = micro_config(root / "run");
  RunPaths paths{cfg.out_dir};

  SUBCASE("eval before training names the missing artifact") {
    cmd_gen_data(cfg);
    CHECK_THROWS_WITH_AS(cmd_eval(cfg, {imitator::PolicyKind::fist}),
                         doctest::Contains("skills_ft"), MissingArtifactError);
    CHECK_THROWS_WITH_AS(cmd_train_skills(micro_config(root / "fresh"), {"fist"}),
                         doctest::Contains("gen-data"), MissingArtifactError);
  }

  SUBCASE("gen-data, train, finetune, eval, report") {
    cmd_gen_data(cfg);
    CHECK(fs::exists(paths.corpus() / "states.bin"));
    CHECK(fs::exists(paths.demos() / "manifest.json"));
    CHECK(fs::exists(paths.config()));
    CHECK(fs::exists(paths.manifest()));

    auto corpus = data::load_dataset(paths.corpus());
    CHECK(corpus.total_transitions() == 3000);
    auto demos = data::load_demos(paths.demos());
    CHECK(demos.demos.size() == 4);
    CHECK(demos.goal.region == "left");

    cmd_train_skills(cfg, {"fist", "spirl", "bc"});
    cmd_train_distance(cfg);
    cmd_finetune(cfg, {"fist", "spirl", "bc"});
    CHECK(fs::exists(paths.model("skills_ft") / "manifest.json"));
    CHECK(fs::exists(paths.model("spirl_ft") / "manifest.json"));
    CHECK(fs::exists(paths.model("bc_ft") / "manifest.json"));

    auto rows = cmd_eval(cfg, {imitator::PolicyKind::fist, imitator::PolicyKind::spirl,
                               imitator::PolicyKind::bc_ft});
    CHECK(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(r.episodes == 3);
      CHECK(r.mean_length <= cfg.eval.max_steps);
    }

    // report values recompute exactly from the raw episode log
    auto log = read_episode_log(paths.episodes());
    CHECK(log.size() == 9);
    auto recomputed = rows_from_log(log, cfg.eval.max_steps);
    for (const auto& row : recomputed) {
      double score = 0;
      int n = 0;
      for (const auto& e : log) {
        if (e.policy == row.policy) {
          score += imitator::normalized_score(e.length, cfg.eval.max_steps);
          n += 1;
        }
      }
      CHECK(row.normalized_score == doctest::Approx(score / n).epsilon(1e-12));
    }

    cmd_report({paths.root}, root / "combined.csv", root / "combined.svg");
    CHECK(fs::exists(root / "combined.csv"));
    auto svg = file_bytes(root / "combined.svg");
    CHECK(svg.size() > 100);
    CHECK(std::string(svg.begin(), svg.begin() + 4) == "<svg");

    // ablation set runs on the same artifacts (trains goal_bc + no-pretrain)
    auto ablate_rows = cmd_ablate(cfg);
    CHECK(ablate_rows.size() >= 7);
  }

  SUBCASE("rerunning gen-data with the same seed is bit-identical") {
    cmd_gen_data(cfg);
    auto first_states = file_bytes(paths.corpus() / "states.bin");
    auto first_demo_states = file_bytes(paths.demos() / "states.bin");

    ExperimentConfig other = micro_config(root / "run2");
    cmd_gen_data(other);
    RunPaths p2{other.out_dir};
    CHECK(file_bytes(p2.corpus() / "states.bin") == first_states);
    CHECK(file_bytes(p2.demos() / "states.bin") == first_demo_states);

    ExperimentConfig different = micro_config(root / "run3", /*seed=*/6);
    cmd_gen_data(different);
    RunPaths p3{different.out_dir};
    CHECK(file_bytes(p3.corpus() / "states.bin") != first_states);
  }

  SUBCASE("config json round trip") {
    auto j = cfg.to_json();
    ExperimentConfig back = ExperimentConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.config_hash() == cfg.config_hash());

    // eval settings do not change the artifact hash
    ExperimentConfig swept = cfg;
    swept.eval.resample_period = 5;
    swept.eval.repeats = 3;
    CHECK(swept.config_hash() == cfg.config_hash());

    ExperimentConfig changed = cfg;
    changed.corpus_transitions += 1;
    CHECK(changed.config_hash() != cfg.config_hash());
  }

  SUBCASE("report on an empty run set fails without writing") {
    CHECK_THROWS_AS(cmd_report({}, root / "no.csv", root / "no.svg"), ConfigError);
    CHECK(!fs::exists(root / "no.csv"));
    CHECK(!fs::exists(root / "no.svg"));
  }

  SUBCASE("bar chart heights recompute from the normalized scores") {
    imitator::EvalRow row;
    row.policy = "fist";
    row.task = "left";
    row.episodes = 1;
    row.normalized_score = 0.5;
    fs::create_directories(root);
    write_score_chart(root / "one_bar.svg", {row});
    std::ifstream in(root / "one_bar.svg");
    std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // single bar: plot height 240 * score 0.5 = 120
    CHECK(svg.find("height=\"120\"") != std::string::npos);
    CHECK(svg.find(">left</text>") != std::string::npos);
    CHECK(svg.find(">fist</text>") != std::string::npos);
  }

  fs::remove_all(root);
}
