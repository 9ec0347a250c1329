#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egs/checkpoint.hpp"
#include "egs/config.hpp"
#include "egs/policy.hpp"
#include "egs/reward.hpp"
#include "egs/trainer.hpp"

namespace egs {

struct FrameRecord {
  std::string scene_id;
  std::uint32_t frame{0};
  std::string method;  // fps | rl | random
  int budget{0};       // requested budget, always a BudgetSet entry
  double psnr_db{0.0};
  double dssim_val{0.0};
  double t_frame{0.0};    // seconds
  double sampler_ms{0.0};
};

struct BudgetComparison {
  int budget{0};
  std::size_t pairs{0};
  std::size_t wins{0};  // strict psnr_rl > psnr_fps
  std::size_t ties{0};
  double mean_delta_psnr{0.0};
  double runtime_ratio{0.0};  // mean t(fps) / mean t(rl)
};

struct FrontierRow {
  int budget{0};
  double dp_fps{0.0};     // mean psnr(rl) - psnr(fps) at the same budget
  double dp_ref{0.0};  // mean psnr(rl) - mean psnr(fps @ max budget)
  double rt_vs_fps{0.0};  // time(fps @ budget) / time(rl @ budget)
  double rt_vs_ref{0.0};  // time(fps @ max budget) / time(rl @ budget)
};

struct VariantRow {
  TrainStage stage{TrainStage::kSft};
  bool applicable{true};     // false for stages with no bandit trace
  std::size_t window{0};     // rows actually averaged
  double tail_budget{0.0};   // mean kappa; max(B) for sft-only
  double tail_dpsnr{0.0};    // mean psnr_rl - psnr_tgt
  double tail_speed{0.0};    // mean t_ref / t_rl
  double tail_reward{0.0};
  std::string note;
};

std::vector<PreparedScene> load_scenes(const std::filesystem::path& dir);

// Frozen-checkpoint evaluation: for every (scene, frame, budget) emits one
// record per method (rl via deterministic forced-budget inference, fps, and a
// seeded random baseline). With runtime_source=model the records are
// bit-reproducible.
std::vector<FrameRecord> eval_fast(PolicyNet& policy, const RunConfig& cfg,
                                   Environment& env,
                                   const std::vector<PreparedScene>& scenes,
                                   const std::vector<int>& budgets, std::uint64_t seed);

// Per-budget win counts and mean PSNR delta of rl over fps; ties counted
// separately. Throws AggregationError naming the first missing pair.
std::vector<BudgetComparison> compare_same_budget(const std::vector<FrameRecord>& records);

// One row per budget against the same-budget FPS baseline and the
// FPS-at-max-budget reference; ratios follow time(baseline)/time(ours).
std::vector<FrontierRow> frontier_sweep(const std::vector<FrameRecord>& records,
                                        const BudgetSet& budgets);

inline constexpr std::size_t kTailWindow = 60;

// Trains one policy per stage on the same scenes and summarizes the final
// `kTailWindow` trace rows. Short traces fall back to the whole trace with a
// note; stages without bandit steps report not-applicable metrics and the
// max-budget effective allocation.
std::vector<VariantRow> ablate_variants(const RunConfig& base,
                                        const std::vector<TrainStage>& stages,
                                        const std::vector<PreparedScene>& scenes);

VariantRow summarize_variant(TrainStage stage, const std::vector<TraceRow>& trace,
                             const BudgetSet& budgets);

// Deterministic CSV/JSON emission. Curve files mirror the trace (step vs
// kappa, reward and PSNR-vs-target delta) for external plotting.
void emit_report(const std::vector<FrameRecord>& records,
                 const std::vector<FrontierRow>& frontier,
                 const std::vector<TraceRow>& trace, const std::filesystem::path& out_dir);

void write_records_csv(const std::vector<FrameRecord>& records,
                       const std::filesystem::path& path);
std::vector<FrameRecord> read_records_csv(const std::filesystem::path& path);
void write_compare_csv(const std::vector<BudgetComparison>& rows,
                       const std::filesystem::path& path);
void write_frontier_csv(const std::vector<FrontierRow>& rows,
                        const std::filesystem::path& path);
void write_variants_csv(const std::vector<VariantRow>& rows,
                        const std::filesystem::path& path);

// Training driver shared by the CLI and tests: trains on the scene directory
// contents, then writes checkpoint.ckpt and trace.csv under out_dir.
struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path trace;
  TrainResult result;
};

TrainArtifacts run_training(const RunConfig& cfg,
                            const std::vector<PreparedScene>& scenes,
                            const std::filesystem::path& out_dir);

// Rebuilds the policy and its run configuration from a checkpoint's META.
struct LoadedPolicy {
  RunConfig config;
  PolicyNet policy;
  CheckpointMeta meta;
};

LoadedPolicy load_policy(const std::filesystem::path& checkpoint_path);

}  // namespace egs
