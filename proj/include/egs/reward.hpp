#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>

#include "egs/metrics.hpp"
#include "egs/policy.hpp"
#include "egs/render.hpp"
#include "egs/sampling.hpp"

namespace egs {

enum class RuntimeSource { kModel, kMeasured };

std::string to_string(RuntimeSource s);
RuntimeSource runtime_source_from_string(const std::string& s);

struct RewardConfig {
  double lambda_kappa{0.1};
  double lambda_time{0.5};
  double lambda_violation{1.0};
  double lambda_gain{0.5};
  double delta_db{0.1};       // PSNR tolerance before the violation hinge bites
  double eta{0.5};            // reference/teacher mix weight
  int kappa_max{256};         // max of the budget set
  int ref_budget{256};
  int teacher_budget{512};    // >= ref_budget
  RuntimeSource runtime_source{RuntimeSource::kModel};
  // Affine cost model t = a + b * kappa (seconds), used when runtime_source
  // is kModel so traces and CI stay bit-reproducible.
  double time_model_a{2e-3};
  double time_model_b{1e-5};

  void validate() const;
};

// The four reward terms plus everything needed to audit them.
struct RewardBreakdown {
  double psi_rl{0.0};
  double psi_ref{0.0};
  double psi_tea{0.0};
  double psi_tgt{0.0};
  double t_rl{0.0};
  double t_ref{0.0};
  double term_budget{0.0};     // <= 0
  double term_time{0.0};       // <= 0
  double term_violation{0.0};  // <= 0
  double term_gain{0.0};       // >= 0
  double total{0.0};
};

// psi_tgt = eta * psi_ref + (1 - eta) * psi_tea.
double mixed_target(double psi_ref, double psi_tea, double eta);

// Fills the four terms:
//   -lambda_kappa * kappa / kappa_max
//   -lambda_time * max(0, t_rl / t_ref - 1)
//   -lambda_violation * max(0, psi_tgt - psi_rl - delta)
//   +lambda_gain * max(0, psi_rl - psi_tgt)
RewardBreakdown compute_reward(const AnchorAction& action, double psi_rl, double psi_tgt,
                               double t_rl, double t_ref, const RewardConfig& cfg);

struct ReferenceQuality {
  double psi_ref{0.0};
  double psi_tea{0.0};
  double t_ref{0.0};
};

// The frozen environment: renders, scores and prices anchor subsets. Reference
// qualities are memoized per (scene, frame, budgets); the cache is guarded for
// concurrent readers with single-writer insertion.
class Environment {
 public:
  Environment(RewardConfig cfg, RenderView view);

  const RewardConfig& config() const { return cfg_; }
  const RenderView& view() const { return view_; }

  // Ground truth for a frame (the full render), memoized.
  const Image& full_render(const std::string& scene_id, const Frame& frame);

  // FPS reference / teacher qualities on the capped pool plus the reference
  // runtime. Budgets larger than the pool run at the pool size.
  ReferenceQuality references(const std::string& scene_id, const Frame& frame,
                              const CandidatePool& pool);

  // PSNR of the subset render (pool positions) against the full-frame render.
  double subset_quality(const std::string& scene_id, const Frame& frame,
                        const CandidatePool& pool,
                        std::span<const std::uint32_t> subset);

  // Runtime for a subset selection: the affine model in kModel mode, the
  // caller-measured seconds otherwise.
  double runtime_seconds(int kappa, double measured_seconds) const;

 private:
  RewardConfig cfg_;
  RenderView view_;
  std::mutex mutex_;
  std::map<std::pair<std::string, std::uint32_t>, Image> full_cache_;
  std::map<std::tuple<std::string, std::uint32_t, int, int>, ReferenceQuality> ref_cache_;
};

}  // namespace egs
