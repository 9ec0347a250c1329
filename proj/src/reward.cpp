#include "egs/reward.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "egs/error.hpp"

namespace egs {

std::string to_string(RuntimeSource s) {
  return s == RuntimeSource::kModel ? "model" : "measured";
}

RuntimeSource runtime_source_from_string(const std::string& s) {
  if (s == "model") return RuntimeSource::kModel;
  if (s == "measured") return RuntimeSource::kMeasured;
  throw ValidationError("runtime_source must be 'model' or 'measured', got '" + s + "'");
}

void RewardConfig::validate() const {
  if (lambda_kappa < 0.0 || lambda_time < 0.0 || lambda_violation < 0.0 ||
      lambda_gain < 0.0) {
    throw ValidationError("reward config: lambda weights must be non-negative");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ValidationError("reward config: eta must lie in [0, 1]");
  }
  if (delta_db < 0.0) throw ValidationError("reward config: delta_db must be >= 0");
  if (kappa_max < 1) throw ValidationError("reward config: kappa_max must be >= 1");
  if (ref_budget < 1) throw ValidationError("reward config: ref_budget must be >= 1");
  if (teacher_budget < ref_budget) {
    throw ValidationError("reward config: teacher_budget must be >= ref_budget");
  }
  if (!(time_model_a > 0.0) || !(time_model_b >= 0.0)) {
    throw ValidationError("reward config: time model needs a > 0 and b >= 0");
  }
}

double mixed_target(double psi_ref, double psi_tea, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ArgumentError("mixed_target: eta must lie in [0, 1]");
  }
  return eta * psi_ref + (1.0 - eta) * psi_tea;
}

RewardBreakdown compute_reward(const AnchorAction& action, double psi_rl, double psi_tgt,
                               double t_rl, double t_ref, const RewardConfig& cfg) {
  if (!(t_ref > 0.0)) throw ArgumentError("compute_reward: t_ref must be > 0");
  if (action.kappa > cfg.kappa_max) {
    throw ArgumentError("compute_reward: kappa " + std::to_string(action.kappa) +
                        " exceeds kappa_max " + std::to_string(cfg.kappa_max));
  }

  RewardBreakdown r;
  r.psi_rl = psi_rl;
  r.psi_tgt = psi_tgt;
  r.t_rl = t_rl;
  r.t_ref = t_ref;
  r.term_budget = -cfg.lambda_kappa * (static_cast<double>(action.kappa) /
                                       static_cast<double>(cfg.kappa_max));
  r.term_time = -cfg.lambda_time * std::max(0.0, t_rl / t_ref - 1.0);
  r.term_violation = -cfg.lambda_violation * std::max(0.0, psi_tgt - psi_rl - cfg.delta_db);
  r.term_gain = cfg.lambda_gain * std::max(0.0, psi_rl - psi_tgt);
  r.total = r.term_budget + r.term_time + r.term_violation + r.term_gain;
  return r;
}

Environment::Environment(RewardConfig cfg, RenderView view)
    : cfg_(cfg), view_(view) {
  cfg_.validate();
}

const Image& Environment::full_render(const std::string& scene_id, const Frame& frame) {
  const auto key = std::make_pair(scene_id, frame.index);
  {
    std::lock_guard lock(mutex_);
    auto it = full_cache_.find(key);
    if (it != full_cache_.end()) return it->second;
  }
  Image img = render_frame(frame, view_);
  std::lock_guard lock(mutex_);
  return full_cache_.emplace(key, std::move(img)).first->second;
}

ReferenceQuality Environment::references(const std::string& scene_id, const Frame& frame,
                                         const CandidatePool& pool) {
  if (pool.candidates.empty()) throw ArgumentError("references: empty candidate pool");
  const auto key =
      std::make_tuple(scene_id, frame.index, cfg_.ref_budget, cfg_.teacher_budget);
  {
    std::lock_guard lock(mutex_);
    auto it = ref_cache_.find(key);
    if (it != ref_cache_.end()) return it->second;
  }

  const std::vector<Vec3> centers = pool.centers();
  const auto clamp_k = [&](int k) {
    return std::min<std::size_t>(static_cast<std::size_t>(k), centers.size());
  };

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::uint32_t> ref_sel = fps(centers, clamp_k(cfg_.ref_budget));
  std::vector<std::uint32_t> ref_frame_idx;
  ref_frame_idx.reserve(ref_sel.size());
  for (std::uint32_t p : ref_sel) ref_frame_idx.push_back(pool.candidates[p].original);
  const Image ref_img = render_indices(frame, ref_frame_idx, view_);
  const auto t1 = std::chrono::steady_clock::now();

  const std::vector<std::uint32_t> tea_sel = fps(centers, clamp_k(cfg_.teacher_budget));
  std::vector<std::uint32_t> tea_frame_idx;
  tea_frame_idx.reserve(tea_sel.size());
  for (std::uint32_t p : tea_sel) tea_frame_idx.push_back(pool.candidates[p].original);
  const Image tea_img = render_indices(frame, tea_frame_idx, view_);

  const Image& full = full_render(scene_id, frame);
  ReferenceQuality q;
  q.psi_ref = psnr(ref_img, full);
  q.psi_tea = psnr(tea_img, full);
  const double measured = std::chrono::duration<double>(t1 - t0).count();
  q.t_ref = runtime_seconds(static_cast<int>(clamp_k(cfg_.ref_budget)), measured);

  std::lock_guard lock(mutex_);
  return ref_cache_.emplace(key, q).first->second;
}

double Environment::subset_quality(const std::string& scene_id, const Frame& frame,
                                   const CandidatePool& pool,
                                   std::span<const std::uint32_t> subset) {
  std::vector<std::uint32_t> frame_idx;
  frame_idx.reserve(subset.size());
  for (std::uint32_t p : subset) {
    if (p >= pool.candidates.size()) {
      throw ArgumentError("subset_quality: pool position out of range");
    }
    frame_idx.push_back(pool.candidates[p].original);
  }
  const Image img = render_indices(frame, frame_idx, view_);
  return psnr(img, full_render(scene_id, frame));
}

double Environment::runtime_seconds(int kappa, double measured_seconds) const {
  if (cfg_.runtime_source == RuntimeSource::kModel) {
    return cfg_.time_model_a + cfg_.time_model_b * static_cast<double>(kappa);
  }
  return measured_seconds;
}

}  // namespace egs
