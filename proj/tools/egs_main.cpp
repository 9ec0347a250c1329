// Command-line front end: scene generation, training, evaluation, budget
// sweeps, same-budget comparison, training-variant ablation and debug renders.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "egs/config.hpp"
#include "egs/error.hpp"
#include "egs/harness.hpp"
#include "egs/metrics.hpp"
#include "egs/render.hpp"
#include "egs/text.hpp"

namespace fs = std::filesystem;
using namespace egs;

namespace {

std::vector<int> parse_budget_list(const std::string& csv) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) out.push_back(static_cast<int>(parse_int(tok, "budgets")));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ArgumentError("budgets: empty list");
  return out;
}

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> runtime_source;
};

// --seed / --runtime-source override whatever the config or checkpoint says.
void apply_overrides(RunConfig& cfg, const GlobalOpts& g) {
  if (g.seed) cfg.trainer.seed = *g.seed;
  if (g.runtime_source) {
    cfg.reward.runtime_source = runtime_source_from_string(*g.runtime_source);
  }
}

int run_gen_scenes(const std::string& spec_path, const std::string& out_dir,
                   const GlobalOpts& g) {
  SceneGenConfig cfg = SceneGenConfig::from_file(spec_path);
  if (g.seed) cfg.spec.seed = *g.seed;
  fs::create_directories(out_dir);
  for (int i = 0; i < cfg.scene_count; ++i) {
    SceneSpec spec = cfg.spec;
    spec.seed = cfg.spec.seed + static_cast<std::uint64_t>(i);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%03d.scene", i);
    const fs::path path = fs::path(out_dir) / name;
    write_scene(generate_scene(spec), path);
    std::cout << path.string() << "\n";
  }
  return 0;
}

int run_train(const std::string& config_path, const std::string& scenes_dir,
              const std::string& out_dir, std::optional<TrainStage> forced_stage,
              const GlobalOpts& g) {
  RunConfig cfg = RunConfig::from_file(config_path);
  if (forced_stage) cfg.trainer.stage = *forced_stage;
  apply_overrides(cfg, g);
  cfg.validate();

  const auto scenes = load_scenes(scenes_dir);
  const TrainArtifacts artifacts = run_training(cfg, scenes, out_dir);
  for (const std::string& w : artifacts.result.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  std::cout << "checkpoint: " << artifacts.checkpoint.string() << "\n";
  std::cout << "trace: " << artifacts.trace.string() << " ("
            << artifacts.result.bandit.trace.size() << " bandit steps)\n";
  if (artifacts.result.sft_steps > 0) {
    std::cout << "sft: " << artifacts.result.sft_steps << " steps, loss "
              << format_double(artifacts.result.sft_first_loss) << " -> "
              << format_double(artifacts.result.sft_last_loss) << "\n";
  }
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& scenes_dir,
             const std::string& budgets_csv, const std::string& out_dir,
             const GlobalOpts& g, bool sweep_mode) {
  LoadedPolicy loaded = load_policy(ckpt);
  RunConfig& cfg = loaded.config;
  apply_overrides(cfg, g);

  const auto scenes = load_scenes(scenes_dir);
  std::vector<int> budgets =
      budgets_csv.empty() ? cfg.budgets : parse_budget_list(budgets_csv);
  if (sweep_mode) budgets = cfg.budgets;  // the frontier covers the whole set

  std::vector<Frame> all_frames;
  for (const auto& s : scenes) {
    all_frames.insert(all_frames.end(), s.frames.begin(), s.frames.end());
  }
  Environment env(cfg.reward,
                  RenderView{scene_bounds(all_frames), cfg.image_width, cfg.image_height});

  const auto records =
      eval_fast(loaded.policy, cfg, env, scenes, budgets, cfg.trainer.seed);
  fs::create_directories(out_dir);
  write_records_csv(records, fs::path(out_dir) / "records.csv");

  if (sweep_mode) {
    const auto rows = frontier_sweep(records, cfg.budget_set());
    write_frontier_csv(rows, fs::path(out_dir) / "frontier.csv");
    emit_report(records, rows, {}, out_dir);
  } else {
    emit_report(records, {}, {}, out_dir);
  }
  std::cout << (fs::path(out_dir) / "records.csv").string() << " (" << records.size()
            << " records)\n";
  return 0;
}

int run_compare(const std::string& records_path, const std::string& out_path) {
  const auto records = read_records_csv(records_path);
  const auto rows = compare_same_budget(records);
  write_compare_csv(rows, out_path);
  for (const auto& c : rows) {
    std::cout << "budget " << c.budget << ": wins " << c.wins << "/" << c.pairs
              << " ties " << c.ties << " mean dPSNR " << format_double(c.mean_delta_psnr)
              << " dB\n";
  }
  return 0;
}

int run_ablate(const std::string& config_path, const std::string& scenes_dir,
               const std::string& out_dir, const GlobalOpts& g) {
  RunConfig cfg = RunConfig::from_file(config_path);
  apply_overrides(cfg, g);
  const auto scenes = load_scenes(scenes_dir);
  const auto rows = ablate_variants(
      cfg, {TrainStage::kSft, TrainStage::kRl, TrainStage::kSftRl}, scenes);
  fs::create_directories(out_dir);
  write_variants_csv(rows, fs::path(out_dir) / "variants.csv");
  for (const auto& r : rows) {
    std::cout << to_string(r.stage) << ": tail budget " << format_double(r.tail_budget);
    if (r.applicable) std::cout << ", tail reward " << format_double(r.tail_reward);
    std::cout << "\n";
  }
  return 0;
}

int run_render_debug(const std::string& scene_path, std::uint32_t frame_no,
                     const std::string& subset_path, const std::string& out_path) {
  const auto frames = read_scene(scene_path);
  const Frame* frame = nullptr;
  for (const Frame& f : frames) {
    if (f.index == frame_no) frame = &f;
  }
  if (!frame) throw ArgumentError("render-debug: no frame " + std::to_string(frame_no));

  const RenderView view{scene_bounds(frames), 64, 64};
  Image img;
  if (subset_path.empty()) {
    img = render_frame(*frame, view);
  } else {
    std::ifstream in(subset_path);
    if (!in) throw IoError("cannot open subset file: " + subset_path);
    std::vector<std::uint32_t> indices;
    std::string tok;
    while (in >> tok) {
      indices.push_back(static_cast<std::uint32_t>(parse_u64(tok, "subset index")));
    }
    img = render_indices(*frame, indices, view);
  }
  write_pgm(img, out_path);
  std::cout << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-aware anchor sampling over Gaussian scenes"};
  app.require_subcommand(1);

  GlobalOpts g;
  std::uint64_t seed_opt = 2026;
  std::string runtime_opt;
  app.add_option("--seed", seed_opt, "Run seed (default 2026)")
      ->each([&](const std::string&) { g.seed = seed_opt; });
  app.add_option("--runtime-source", runtime_opt, "model|measured")
      ->each([&](const std::string& v) { g.runtime_source = v; });

  std::string spec_path, out_dir, config_path, scenes_dir, ckpt_path, budgets_csv;
  std::string records_path, out_path, scene_path, subset_path;
  std::uint32_t frame_no = 0;

  auto* gen = app.add_subcommand("gen-scenes", "Generate procedural scene files");
  gen->add_option("--spec", spec_path, "Scene spec file")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* sft = app.add_subcommand("sft", "Imitation warm-start only");
  sft->add_option("--config", config_path)->required();
  sft->add_option("--scenes", scenes_dir)->required();
  sft->add_option("--out", out_dir)->required();

  auto* train = app.add_subcommand("train", "Train per the configured stage");
  train->add_option("--config", config_path)->required();
  train->add_option("--scenes", scenes_dir)->required();
  train->add_option("--out", out_dir)->required();

  auto* eval = app.add_subcommand("eval", "Fast-mode evaluation at fixed budgets");
  eval->add_option("--ckpt", ckpt_path)->required();
  eval->add_option("--scenes", scenes_dir)->required();
  eval->add_option("--budgets", budgets_csv, "Comma-separated budget list");
  eval->add_option("--out", out_dir)->required();

  auto* sweep = app.add_subcommand("sweep", "Budget-frontier sweep over the full set");
  sweep->add_option("--ckpt", ckpt_path)->required();
  sweep->add_option("--scenes", scenes_dir)->required();
  sweep->add_option("--out", out_dir)->required();

  auto* compare = app.add_subcommand("compare", "Same-budget rl-vs-fps comparison");
  compare->add_option("--records", records_path, "records.csv from eval")->required();
  compare->add_option("--out", out_path, "Output csv path")->required();

  auto* ablate = app.add_subcommand("ablate", "Train sft / rl / sft+rl variants");
  ablate->add_option("--config", config_path)->required();
  ablate->add_option("--scenes", scenes_dir)->required();
  ablate->add_option("--out", out_dir)->required();

  auto* rdebug = app.add_subcommand("render-debug", "Dump a PGM render of a frame");
  rdebug->add_option("--scene", scene_path)->required();
  rdebug->add_option("--frame", frame_no)->required();
  rdebug->add_option("--subset", subset_path, "File of frame indices; omit for all");
  rdebug->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_scenes(spec_path, out_dir, g);
    if (sft->parsed()) return run_train(config_path, scenes_dir, out_dir, TrainStage::kSft, g);
    if (train->parsed()) return run_train(config_path, scenes_dir, out_dir, std::nullopt, g);
    if (eval->parsed()) return run_eval(ckpt_path, scenes_dir, budgets_csv, out_dir, g, false);
    if (sweep->parsed()) return run_eval(ckpt_path, scenes_dir, "", out_dir, g, true);
    if (compare->parsed()) return run_compare(records_path, out_path);
    if (ablate->parsed()) return run_ablate(config_path, scenes_dir, out_dir, g);
    if (rdebug->parsed()) return run_render_debug(scene_path, frame_no, subset_path, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
