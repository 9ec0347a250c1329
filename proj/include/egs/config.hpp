#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egs/policy.hpp"
#include "egs/reward.hpp"
#include "egs/sampling.hpp"
#include "egs/scene.hpp"

namespace egs {

enum class TrainStage { kSft, kRl, kSftRl };

std::string to_string(TrainStage s);
TrainStage train_stage_from_string(const std::string& s);

struct TrainerConfig {
  TrainStage stage{TrainStage::kSftRl};
  double lr{1e-4};
  double weight_decay{0.01};
  double beta1{0.9};
  double beta2{0.95};
  double grad_clip{1.0};
  int sft_epochs{1};
  int rl_steps{5000};
  double ema_momentum{0.9};     // mu
  double entropy_weight{0.01};  // beta
  bool entropy_anneal{true};    // linear decay to beta/10 across the run
  bool train_dropout{true};     // dropout stays active while sampling actions
  std::uint64_t seed{2026};

  void validate() const;
};

// Everything a run needs: trainer + reward settings, the budget set, policy
// architecture, pool capping and render dimensions. One flat key=value file
// maps onto this; unknown keys are errors.
struct RunConfig {
  TrainerConfig trainer;
  RewardConfig reward;
  std::vector<int> budgets{8, 16, 32, 64, 96, 128, 192, 256};
  PolicyConfig policy;
  PoolConfig pool;
  int image_width{64};
  int image_height{64};

  BudgetSet budget_set() const { return BudgetSet(budgets); }

  // Applies the kappa_max = max(budgets) invariant and, when the reference
  // budgets were left at 0, the ref = max(B) / teacher = 2*max(B) defaults.
  void finalize();
  void validate() const;

  // Canonical "key = value" serialization (fixed key order); reparsing it
  // reproduces the config exactly.
  std::string serialize() const;
  std::string hash_hex() const;

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_text(const std::string& text, const std::string& origin);
};

// Scene-generation recipe file: the SceneSpec fields plus `scene_count` for
// emitting a suite of scenes with consecutive seeds.
struct SceneGenConfig {
  SceneSpec spec;
  int scene_count{1};

  static SceneGenConfig from_file(const std::filesystem::path& path);
};

}  // namespace egs
