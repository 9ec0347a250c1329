#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "egs/config.hpp"
#include "egs/policy.hpp"
#include "egs/reward.hpp"

namespace egs {

// Teacher labels for the imitation warm-start: +1 for pool positions that
// coincide with the FPS teacher set, plus the budget-set entry nearest the
// effective teacher budget.
struct SftLabels {
  std::vector<double> select_labels;  // 0/1 per pool position
  std::size_t budget_label{0};
  int effective_teacher_budget{0};    // after clamping to the pool size
};

SftLabels sft_labels(const CandidatePool& pool, int teacher_budget,
                     const BudgetSet& budgets);

struct SftLosses {
  double bce{0.0};
  double ce{0.0};
  double total() const { return bce + ce; }
};

// One bandit-step trace record; the CSV column order below is frozen.
struct TraceRow {
  std::uint64_t step{0};
  std::uint32_t frame{0};
  int kappa{0};
  double log_prob{0.0};
  double entropy{0.0};
  double psnr_rl{0.0};
  double psnr_tgt{0.0};
  double t_rl{0.0};
  double t_ref{0.0};
  double term_budget{0.0};
  double term_time{0.0};
  double term_violation{0.0};
  double term_gain{0.0};
  double reward{0.0};
  double ema_baseline{0.0};  // value after this step's update

  // Audit-only fields, not part of the CSV schema.
  bool clamped{false};
  std::size_t subset_size{0};
  bool subset_sorted_unique{false};
};

inline constexpr const char* kTraceHeader =
    "step,frame,kappa,log_prob,entropy,psnr_rl,psnr_tgt,t_rl,t_ref,term_budget,"
    "term_time,term_violation,term_gain,reward,ema_baseline";

std::string trace_row_csv(const TraceRow& row);
void write_trace(const std::vector<TraceRow>& rows, const std::filesystem::path& path);
std::vector<TraceRow> read_trace(const std::filesystem::path& path);

struct BanditState {
  double ema_baseline{0.0};
  std::uint64_t step{0};
  std::vector<TraceRow> trace;
};

// A scene prepared for training: pool and features are pure functions of the
// frame, so they are computed once and shared.
struct PreparedFrame {
  std::string scene_id;
  const Frame* frame{nullptr};
  CandidatePool pool;
  std::vector<FeatureDescriptor> descriptors;
};

struct PreparedScene {
  std::string scene_id;
  std::vector<Frame> frames;
};

struct TrainResult {
  std::uint64_t sft_steps{0};
  double sft_first_loss{0.0};
  double sft_last_loss{0.0};
  BanditState bandit;
  std::vector<std::string> warnings;
};

// Two-stage trainer: imitation warm-start against FPS labels, then REINFORCE
// bandit updates with an EMA baseline and annealed entropy bonus.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, PolicyNet& policy, Environment& env);

  SftLosses sft_step(const PreparedFrame& pf, const SftLabels& labels,
                     std::uint64_t dropout_step);

  // Samples an action, scores it against the mixed FPS target, applies one
  // policy-gradient update and then refreshes the EMA baseline (the advantage
  // uses the pre-update baseline). Infeasible pools are skipped by the caller.
  void bandit_step(const PreparedFrame& pf, BanditState& state);

  double entropy_weight_at(std::uint64_t step) const;

  TrainResult train(const std::vector<PreparedScene>& scenes);

  // Deterministic frame preparation shared with the harness.
  static std::vector<PreparedFrame> prepare(const std::vector<PreparedScene>& scenes,
                                            const PoolConfig& pool_cfg);

 private:
  AdamWConfig adamw_config() const;

  const RunConfig& cfg_;
  PolicyNet& policy_;
  Environment& env_;
  BudgetSet budgets_;
  Rng action_rng_;
};

struct EstimatorCheckCase {
  std::vector<double> budget_logits;
  std::vector<double> select_logits;          // <= 3 candidates
  std::vector<std::vector<double>> rewards;   // [budget][subset bitmask]
};

struct EstimatorCheckReport {
  double max_rel_error{0.0};
  std::size_t action_count{0};
  bool passed{false};
};

// Enumerates the policy's product density (budget categorical x per-candidate
// Bernoulli, all 2^M subsets) and compares the exact gradient of E[reward]
// against the enumerated expectation of the score-function estimate. Both
// routes run through the autodiff graph; agreement to `tol` relative error
// certifies the estimator is unbiased on this instance.
EstimatorCheckReport estimator_check(const EstimatorCheckCase& env, double tol = 1e-6);

}  // namespace egs
