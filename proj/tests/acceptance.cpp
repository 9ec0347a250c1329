// Acceptance suite: ten go/no-go checks run end to end against frozen toy
// configurations. Each criterion prints one PASS/FAIL line; the binary exits
// nonzero if any fail. Wall time is dominated by the four 5k-step training
// runs and the protocol-analog run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "egs/error.hpp"
#include "egs/harness.hpp"
#include "egs/metrics.hpp"
#include "egs/policy.hpp"
#include "egs/text.hpp"
#include "egs/trainer.hpp"

#include "oracles.hpp"

using namespace egs;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Outcome {
  bool passed{false};
  std::string detail;
};

int g_failures = 0;

void report(const std::string& id, const std::string& name,
            const std::function<Outcome()>& body) {
  const double t0 = now_s();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double dt = now_s() - t0;
  std::printf("[%s] %s %s: %s (%.1fs)\n", out.passed ? "PASS" : "FAIL", id.c_str(),
              name.c_str(), out.detail.c_str(), dt);
  std::fflush(stdout);
  if (!out.passed) ++g_failures;
}

std::vector<PreparedScene> make_scenes(std::uint64_t seed0, int count, int frames,
                                       int clusters, int ppc, double fraction,
                                       const std::string& prefix) {
  std::vector<PreparedScene> out;
  for (int i = 0; i < count; ++i) {
    SceneSpec spec;
    spec.seed = seed0 + static_cast<std::uint64_t>(i);
    spec.num_frames = frames;
    spec.clusters = clusters;
    spec.primitives_per_cluster = ppc;
    spec.fraction_salient = fraction;
    PreparedScene s;
    s.scene_id = prefix + std::to_string(i);
    s.frames = generate_scene(spec);
    out.push_back(std::move(s));
  }
  return out;
}

Environment scene_env(const RunConfig& cfg, const std::vector<PreparedScene>& scenes) {
  std::vector<Frame> all;
  for (const auto& s : scenes) all.insert(all.end(), s.frames.begin(), s.frames.end());
  return Environment(cfg.reward,
                     RenderView{scene_bounds(all), cfg.image_width, cfg.image_height});
}

// ---- Frozen toy configurations -------------------------------------------

// Small pools (96 candidates), three budgets, visible per-anchor runtime cost.
// Used for the 5k-step validity/determinism runs and the stabilization seeds.
RunConfig fast_config(std::uint64_t seed, int rl_steps) {
  RunConfig cfg;
  cfg.budgets = {8, 16, 32};
  cfg.trainer.seed = seed;
  cfg.trainer.sft_epochs = 1;
  cfg.trainer.rl_steps = rl_steps;
  cfg.reward.lambda_gain = 0.1;
  cfg.reward.ref_budget = 32;
  cfg.reward.teacher_budget = 64;
  cfg.reward.time_model_b = 2e-4;
  cfg.finalize();
  cfg.validate();
  return cfg;
}

std::vector<PreparedScene> fast_scenes() {
  return make_scenes(2026, 4, 4, 4, 24, 0.10, "fast");
}

// Larger pools (256 candidates) with strong planted salience; the
// protocol-analog and SFT-recovery runs use these.
RunConfig learn_config(int rl_steps) {
  RunConfig cfg;
  cfg.budgets = {8, 16, 32, 64, 96};
  cfg.trainer.seed = 2026;
  cfg.trainer.sft_epochs = 1;
  cfg.trainer.rl_steps = rl_steps;
  cfg.reward.ref_budget = 96;
  cfg.reward.teacher_budget = 192;
  cfg.finalize();
  cfg.validate();
  return cfg;
}

// Two-scene ablation setup with scarce salience and a reachable target; the
// variant-ordering analog runs here.
RunConfig ablate_config(int rl_steps) {
  RunConfig cfg;
  cfg.budgets = {8, 16, 32, 64};
  cfg.trainer.seed = 2026;
  cfg.trainer.sft_epochs = 1;
  cfg.trainer.rl_steps = rl_steps;
  cfg.reward.lambda_gain = 0.1;
  cfg.reward.ref_budget = 32;
  cfg.reward.teacher_budget = 64;
  cfg.reward.time_model_b = 1e-4;
  cfg.finalize();
  cfg.validate();
  return cfg;
}

std::vector<PreparedScene> ablate_scenes() {
  return make_scenes(2026, 2, 4, 4, 40, 0.1, "abl");
}

constexpr int kFullRunSteps = 5000;

TrainResult run_fast(std::uint64_t seed, int steps,
                     const std::vector<PreparedScene>& scenes) {
  const RunConfig cfg = fast_config(seed, steps);
  Environment env = scene_env(cfg, scenes);
  PolicyNet net(cfg.policy, cfg.budgets.size(), cfg.trainer.seed);
  Trainer trainer(cfg, net, env);
  return trainer.train(scenes);
}

double kappa_std(const std::vector<TraceRow>& tr, std::size_t lo, std::size_t hi) {
  double mean = 0.0;
  for (std::size_t i = lo; i < hi; ++i) mean += tr[i].kappa;
  mean /= static_cast<double>(hi - lo);
  double var = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    var += (tr[i].kappa - mean) * (tr[i].kappa - mean);
  }
  return std::sqrt(var / static_cast<double>(hi - lo));
}

double window_mean(const std::vector<TraceRow>& tr, std::size_t lo, std::size_t hi,
                   const std::function<double(const TraceRow&)>& f) {
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) acc += f(tr[i]);
  return acc / static_cast<double>(hi - lo);
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string round_str(double v, double scale) {
  return format_double(std::round(v * scale) / scale);
}

// ---- Criteria --------------------------------------------------------------

Outcome c1_fps_oracle() {
  const double t0 = now_s();
  Rng rng(2026);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.next_below(64);
    const std::size_t k = 1 + rng.next_below(n);
    std::vector<Vec3> pts(n);
    for (auto& p : pts) {
      p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    if (fps(pts, k) != oracles::brute_fps(pts, k)) {
      return {false, "mismatch at trial " + std::to_string(trial)};
    }
  }
  const double dt = now_s() - t0;
  if (dt >= 10.0) return {false, "exceeded the 10 s budget"};
  return {true, "500/500 point sets match the brute-force greedy oracle exactly"};
}

Outcome c2_autodiff() {
  const double t0 = now_s();
  Rng rng(2026);
  double worst = 0.0;

  auto add_param = [&](ParameterStore& s, const std::string& name, std::size_t r,
                       std::size_t c) {
    Tensor& t = s.create(name, {r, c});
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  };

  using B = std::function<Graph::Var(Graph&, ParameterStore&)>;
  const std::vector<B> ops = {
      [](Graph& g, ParameterStore& s) {
        return g.sum_all(g.matmul(g.param(s, "a"), g.param(s, "b")));
      },
      [](Graph& g, ParameterStore& s) {
        return g.sum_all(g.matmul_nt(g.param(s, "a"), g.param(s, "a2")));
      },
      [](Graph& g, ParameterStore& s) {
        const auto a = g.param(s, "a");
        return g.sum_all(g.mul(g.add(a, g.param(s, "a2")), a));
      },
      [](Graph& g, ParameterStore& s) {
        return g.sum_all(g.add_rowvec(g.relu(g.param(s, "a")), g.param(s, "row")));
      },
      [](Graph& g, ParameterStore& s) {
        const auto a = g.param(s, "a");
        return g.sum_all(g.mul(g.sigmoid(a), g.log_sigmoid(a)));
      },
      [](Graph& g, ParameterStore& s) {
        return g.sum_all(g.mul(g.softmax_rows(g.param(s, "a")), g.param(s, "a2")));
      },
      [](Graph& g, ParameterStore& s) {
        return g.sum_all(g.mul(g.log_softmax_rows(g.param(s, "a")), g.param(s, "a2")));
      },
      [](Graph& g, ParameterStore& s) {
        const auto y = g.layer_norm_rows(g.param(s, "a"), g.param(s, "row"),
                                         g.param(s, "row2"));
        return g.sum_all(g.mul(y, g.param(s, "a2")));
      },
      [](Graph& g, ParameterStore& s) {
        const auto a = g.param(s, "a");
        return g.sum_all(g.concat_cols({g.slice_cols(a, 2, 5), g.slice_cols(a, 0, 2)}));
      },
      [](Graph& g, ParameterStore& s) {
        return g.add(g.mean_all(g.param(s, "a")),
                     g.sum_all(g.mean_rows(g.param(s, "a2"))));
      },
      [](Graph& g, ParameterStore& s) {
        return g.add(g.pick(g.param(s, "a"), 1, 2),
                     g.sum_rows_at(g.log_sigmoid(g.param(s, "col")), {0, 3, 5}));
      },
      [](Graph& g, ParameterStore& s) {
        g.enable_dropout(11, 0);
        return g.mean_all(g.dropout(g.param(s, "a"), 0.3));
      },
      [](Graph& g, ParameterStore& s) {
        return g.sum_all(g.neg(g.add_scalar(g.scale(g.param(s, "a"), 0.7), 0.3)));
      },
  };
  for (const auto& op : ops) {
    ParameterStore store;
    add_param(store, "a", 4, 5);
    add_param(store, "a2", 4, 5);
    add_param(store, "b", 5, 3);
    add_param(store, "row", 1, 5);
    add_param(store, "row2", 1, 5);
    add_param(store, "col", 7, 1);
    {
      Graph g;
      g.backward(op(g, store));
      store.zero_grads();
      g.accumulate_param_grads();
    }
    auto loss_value = [&]() {
      Graph g;
      return g.scalar(op(g, store));
    };
    worst = std::max(worst, oracles::fd_max_rel_error(store, loss_value));
  }

  // Full policy forward pass in compact dimensions.
  {
    PolicyConfig pc;
    pc.embed_dim = 16;
    pc.heads = 2;
    pc.ff_dim = 32;
    PolicyNet net(pc, 4, 17);
    std::vector<FeatureDescriptor> desc(4);
    for (auto& f : desc) {
      f.coords_norm = {rng.next_double(), rng.next_double(), rng.next_double()};
      f.opacity = rng.next_double();
      f.log_mean_scale = rng.uniform(-4, 0);
      f.dist_norm = rng.next_double();
    }
    auto build = [&](Graph& g) {
      const PolicyForward fwd = net.forward(g, desc);
      return g.add(g.mean_all(fwd.select_logits), g.mean_all(fwd.budget_logits));
    };
    {
      Graph g;
      g.backward(build(g));
      net.store().zero_grads();
      g.accumulate_param_grads();
    }
    auto loss_value = [&]() {
      Graph g;
      return g.scalar(build(g));
    };
    worst = std::max(worst, oracles::fd_max_rel_error(net.store(), loss_value));
  }

  const double dt = now_s() - t0;
  if (worst >= 1e-4) {
    return {false, "worst relative error " + format_double(worst)};
  }
  if (dt >= 60.0) return {false, "exceeded the 60 s budget"};
  return {true, "all ops + full policy FD-check, worst rel err " + format_double(worst)};
}

Outcome c3_estimator() {
  Rng rng(2026);
  double worst = 0.0;
  std::size_t instances = 0;
  for (std::size_t n_budgets = 1; n_budgets <= 2; ++n_budgets) {
    for (std::size_t n_cand = 1; n_cand <= 3; ++n_cand) {
      for (int table = 0; table < 10; ++table) {
        EstimatorCheckCase env;
        env.budget_logits.resize(n_budgets);
        for (double& v : env.budget_logits) v = rng.uniform(-1.5, 1.5);
        env.select_logits.resize(n_cand);
        for (double& v : env.select_logits) v = rng.uniform(-1.5, 1.5);
        env.rewards.assign(n_budgets, std::vector<double>(std::size_t{1} << n_cand));
        for (auto& row : env.rewards) {
          for (double& v : row) v = rng.uniform(-2.0, 2.0);
        }
        const auto rep = estimator_check(env, 1e-6);
        worst = std::max(worst, rep.max_rel_error);
        ++instances;
        if (!rep.passed) {
          return {false, "biased estimate on instance " + std::to_string(instances) +
                             ", rel err " + format_double(rep.max_rel_error)};
        }
      }
    }
  }
  return {true, std::to_string(instances) + " enumerable instances, worst rel err " +
                    format_double(worst)};
}

Outcome c4_reward_algebra() {
  Rng rng(2026);
  for (int i = 0; i < 50; ++i) {
    RewardConfig cfg;
    cfg.lambda_kappa = rng.uniform(0.0, 1.0);
    cfg.lambda_time = rng.uniform(0.0, 1.0);
    cfg.lambda_violation = rng.uniform(0.0, 2.0);
    cfg.lambda_gain = rng.uniform(0.0, 1.0);
    cfg.delta_db = rng.uniform(0.0, 0.5);
    cfg.kappa_max = 256;
    cfg.ref_budget = 128;
    cfg.teacher_budget = 256;
    AnchorAction a;
    a.kappa = 1 + static_cast<int>(rng.next_below(256));
    const double psi_rl = rng.uniform(5, 45), psi_tgt = rng.uniform(5, 45);
    const double t_rl = rng.uniform(0.001, 0.02), t_ref = rng.uniform(0.001, 0.02);
    const auto got = compute_reward(a, psi_rl, psi_tgt, t_rl, t_ref, cfg);
    const auto want = oracles::eq4_reference(a.kappa, 256, psi_rl, psi_tgt, t_rl, t_ref,
                                             cfg.lambda_kappa, cfg.lambda_time,
                                             cfg.lambda_violation, cfg.lambda_gain,
                                             cfg.delta_db);
    if (got.term_budget != want.budget || got.term_time != want.time ||
        got.term_violation != want.violation || got.term_gain != want.gain ||
        got.total != want.total) {
      return {false, "tuple " + std::to_string(i) + " diverges from the reference"};
    }
  }

  // Hinge boundaries with dyadic values so the arithmetic is exact.
  RewardConfig cfg;
  cfg.kappa_max = 256;
  cfg.ref_budget = 128;
  cfg.teacher_budget = 256;
  cfg.delta_db = 0.125;
  AnchorAction a;
  a.kappa = 64;
  if (compute_reward(a, 29.875, 30.0, 1.0, 1.0, cfg).term_violation != 0.0) {
    return {false, "violation edge nonzero"};
  }
  if (compute_reward(a, 30.0, 30.0, 1.0, 1.0, cfg).term_time != 0.0) {
    return {false, "time edge nonzero"};
  }
  if (compute_reward(a, 30.0, 30.0, 0.5, 1.0, cfg).term_gain != 0.0) {
    return {false, "gain edge nonzero"};
  }

  // Exact budget monotonicity with dyadic weights: everything else fixed.
  RewardConfig dyadic = cfg;
  dyadic.lambda_kappa = 0.125;
  for (int k1 : {8, 16, 32, 64, 128}) {
    for (int k2 : {16, 64, 160, 256}) {
      if (k2 <= k1) continue;
      AnchorAction a1, a2;
      a1.kappa = k1;
      a2.kappa = k2;
      const auto r1 = compute_reward(a1, 31.0, 30.0, 1.0, 1.0, dyadic);
      const auto r2 = compute_reward(a2, 31.0, 30.0, 1.0, 1.0, dyadic);
      const double want =
          -dyadic.lambda_kappa * (static_cast<double>(k2 - k1) / 256.0);
      if (r2.total - r1.total != want) {
        return {false, "monotonicity broke between " + std::to_string(k1) + " and " +
                           std::to_string(k2)};
      }
    }
  }
  return {true, "50 random tuples, hinge edges and budget monotonicity all exact"};
}

struct FastRuns {
  TrainResult run_a;  // seed 2026, full length
  TrainResult run_b;  // same seed, repeated
  TrainResult run_2027;
  TrainResult run_2028;
};

FastRuns g_fast_runs;

Outcome c5_constraints(const std::filesystem::path& dir) {
  const auto scenes = fast_scenes();

  std::thread other([&] { g_fast_runs.run_b = run_fast(2026, kFullRunSteps, scenes); });
  g_fast_runs.run_a = run_fast(2026, kFullRunSteps, scenes);
  other.join();

  const auto& trace = g_fast_runs.run_a.bandit.trace;
  if (trace.size() < 5000) {
    return {false, "run produced only " + std::to_string(trace.size()) + " steps"};
  }
  const BudgetSet budgets = fast_config(2026, kFullRunSteps).budget_set();
  for (const TraceRow& row : trace) {
    if (!budgets.index_of(row.kappa).has_value()) {
      return {false, "kappa " + std::to_string(row.kappa) + " outside the budget set"};
    }
    if (row.subset_size != static_cast<std::size_t>(row.kappa) ||
        !row.subset_sorted_unique || row.clamped) {
      return {false, "subset invariant broke at step " + std::to_string(row.step)};
    }
  }

  write_trace(g_fast_runs.run_a.bandit.trace, dir / "run_a.csv");
  write_trace(g_fast_runs.run_b.bandit.trace, dir / "run_b.csv");
  if (file_bytes(dir / "run_a.csv") != file_bytes(dir / "run_b.csv")) {
    return {false, "same-seed traces differ"};
  }
  return {true, std::to_string(trace.size()) +
                    " actions all satisfy kappa in B and |subset| = kappa; "
                    "same-seed traces byte-identical"};
}

Outcome c6_protocol_analog() {
  const double t0 = now_s();
  const RunConfig cfg = learn_config(/*rl_steps=*/1500);
  const auto train_scenes = make_scenes(2026, 4, 8, 4, 64, 0.25, "train");
  const auto held_out = make_scenes(2126, 2, 8, 4, 64, 0.25, "held");

  std::vector<PreparedScene> everything = train_scenes;
  everything.insert(everything.end(), held_out.begin(), held_out.end());
  Environment env = scene_env(cfg, everything);
  PolicyNet net(cfg.policy, cfg.budgets.size(), cfg.trainer.seed);
  Trainer trainer(cfg, net, env);
  trainer.train(train_scenes);

  Environment eval_env = scene_env(cfg, everything);
  const auto records = eval_fast(net, cfg, eval_env, held_out, {8, 16, 32}, 2026);
  const auto rows = compare_same_budget(records);

  std::size_t wins = 0, pairs = 0;
  std::string per_budget;
  bool mean_positive = true;
  for (const auto& c : rows) {
    wins += c.wins;
    pairs += c.pairs;
    mean_positive = mean_positive && c.mean_delta_psnr > 0.0;
    per_budget += " b" + std::to_string(c.budget) + ":" + std::to_string(c.wins) + "/" +
                  std::to_string(c.pairs) + " dP=" + round_str(c.mean_delta_psnr, 1000);
  }
  const double win_rate = static_cast<double>(wins) / static_cast<double>(pairs);
  const double dt = now_s() - t0;
  const bool in_budget = dt <= 900.0;
  if (win_rate < 0.6 || !mean_positive || !in_budget) {
    return {false, "win rate " + format_double(win_rate) + per_budget +
                       (in_budget ? "" : "; exceeded the 15 min budget")};
  }
  return {true, "win rate " + format_double(win_rate) + " (need >= 0.6)," + per_budget};
}

Outcome c7_stabilization() {
  const auto scenes = fast_scenes();
  std::thread other(
      [&] { g_fast_runs.run_2028 = run_fast(2028, kFullRunSteps, scenes); });
  g_fast_runs.run_2027 = run_fast(2027, kFullRunSteps, scenes);
  other.join();

  std::string detail;
  const struct {
    const char* name;
    const std::vector<TraceRow>* trace;
  } runs[] = {{"2026", &g_fast_runs.run_a.bandit.trace},
              {"2027", &g_fast_runs.run_2027.bandit.trace},
              {"2028", &g_fast_runs.run_2028.bandit.trace}};
  for (const auto& run : runs) {
    const auto& tr = *run.trace;
    const std::size_t q = tr.size() / 4;
    const double early = kappa_std(tr, 0, q);
    const double late = kappa_std(tr, tr.size() - q, tr.size());
    detail += std::string(" seed") + run.name + ": " + round_str(early, 100) + " -> " +
              round_str(late, 100);
    if (!(late < early)) {
      return {false, "late kappa std did not shrink:" + detail};
    }
  }
  return {true, "kappa std first vs last quartile:" + detail};
}

Outcome inv_penalty_boundedness() {
  const struct {
    const char* name;
    const std::vector<TraceRow>* trace;
  } runs[] = {{"2026", &g_fast_runs.run_a.bandit.trace},
              {"2027", &g_fast_runs.run_2027.bandit.trace},
              {"2028", &g_fast_runs.run_2028.bandit.trace}};
  std::string detail;
  for (const auto& run : runs) {
    const auto& tr = *run.trace;
    const std::size_t q = tr.size() / 4;
    auto penalties = [](const TraceRow& r) { return r.term_time + r.term_violation; };
    const double early = window_mean(tr, 0, q, penalties);
    const double late = window_mean(tr, tr.size() - q, tr.size(), penalties);
    detail += std::string(" seed") + run.name + ": " + round_str(early, 10000) +
              " -> " + round_str(late, 10000);
    if (!(late >= early)) {
      return {false, "constraint penalties grew:" + detail};
    }
  }
  return {true, "mean time+violation penalties shrink or hold:" + detail};
}

Outcome c8_sft_recovery() {
  RunConfig cfg = learn_config(/*rl_steps=*/0);
  cfg.trainer.stage = TrainStage::kSft;
  const auto train_scenes = make_scenes(2026, 4, 64, 4, 64, 0.25, "train");
  const auto held_out = make_scenes(2126, 2, 4, 4, 64, 0.25, "held");

  std::vector<PreparedScene> everything = train_scenes;
  everything.insert(everything.end(), held_out.begin(), held_out.end());
  Environment env = scene_env(cfg, everything);
  PolicyNet net(cfg.policy, cfg.budgets.size(), cfg.trainer.seed);
  Trainer trainer(cfg, net, env);
  trainer.train(train_scenes);

  const BudgetSet budgets = cfg.budget_set();
  double worst = 1.0, mean = 0.0;
  std::size_t n = 0;
  for (const auto& pf : Trainer::prepare(held_out, cfg.pool)) {
    const auto labels = sft_labels(pf.pool, cfg.reward.teacher_budget, budgets);
    const auto k = static_cast<std::size_t>(labels.effective_teacher_budget);
    const PolicyOutput out = net.evaluate(pf.descriptors);
    std::vector<std::uint32_t> order(pf.pool.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end(), [&](std::uint32_t lhs, std::uint32_t rhs) {
                        if (out.select_logits[lhs] != out.select_logits[rhs]) {
                          return out.select_logits[lhs] > out.select_logits[rhs];
                        }
                        return lhs < rhs;
                      });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) hits += labels.select_labels[order[i]] == 1.0;
    const double overlap = static_cast<double>(hits) / static_cast<double>(k);
    worst = std::min(worst, overlap);
    mean += overlap;
    ++n;
  }
  mean /= static_cast<double>(n);
  if (worst < 0.8) {
    return {false, "held-out overlap mean " + format_double(mean) + ", worst " +
                       format_double(worst)};
  }
  return {true, "teacher overlap mean " + round_str(mean, 1000) + ", worst " +
                    round_str(worst, 1000) + " (need >= 0.8)"};
}

Outcome c9_variant_ordering() {
  const RunConfig cfg = ablate_config(/*rl_steps=*/1000);
  const auto scenes = ablate_scenes();
  const auto rows = ablate_variants(
      cfg, {TrainStage::kSft, TrainStage::kRl, TrainStage::kSftRl}, scenes);
  const VariantRow& sft = rows[0];
  const VariantRow& rl = rows[1];
  const VariantRow& both = rows[2];

  const std::string detail =
      "tail budgets sft=" + format_double(sft.tail_budget) +
      " rl=" + round_str(rl.tail_budget, 10) + " sft+rl=" +
      round_str(both.tail_budget, 10) + "; tail rewards rl=" +
      round_str(rl.tail_reward, 10000) + " sft+rl=" + round_str(both.tail_reward, 10000);
  if (sft.applicable) return {false, "sft-only unexpectedly produced a bandit trace"};
  if (!(both.tail_budget < sft.tail_budget)) {
    return {false, "sft+rl budget did not drop below max(B); " + detail};
  }
  if (!(both.tail_reward >= rl.tail_reward)) {
    return {false, "sft+rl tail reward below rl-only; " + detail};
  }
  return {true, detail};
}

Outcome c10_metrics() {
  Rng rng(2026);
  const RenderView view{{{0, 0, 0}, {1, 1, 1}}, 64, 64};
  double worst_psnr = 0.0, worst_dssim = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    Image a, b;
    if (pair % 3 == 0) {
      a = Image::zeros(64, 64);
      b = Image::zeros(64, 64);
      for (double& p : a.pixels) p = rng.next_double();
      for (double& p : b.pixels) p = rng.next_double();
    } else if (pair % 3 == 1) {
      a = Image::zeros(64, 64);
      for (double& p : a.pixels) p = rng.next_double();
      b = a;
      for (double& p : b.pixels) p = clamp(p + rng.uniform(-0.05, 0.05), 0.0, 1.0);
    } else {
      SceneSpec spec;
      spec.seed = 300 + pair;
      spec.num_frames = 1;
      spec.clusters = 2;
      spec.primitives_per_cluster = 48;
      a = render_frame(generate_scene(spec)[0], view);
      spec.seed += 1;
      b = render_frame(generate_scene(spec)[0], view);
    }
    worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b) - oracles::psnr_direct(a, b)));
    const double want_dssim = (1.0 - oracles::ssim_direct(a, b)) / 2.0;
    worst_dssim = std::max(worst_dssim, std::abs(dssim(a, b) - want_dssim));
  }
  if (worst_psnr > 1e-9 || worst_dssim > 1e-9) {
    return {false, "psnr err " + format_double(worst_psnr) + ", dssim err " +
                       format_double(worst_dssim)};
  }
  return {true, "20 fixture pairs; worst psnr err " + format_double(worst_psnr) +
                    " dB, worst dssim err " + format_double(worst_dssim)};
}

}  // namespace

int main() {
  const auto dir = std::filesystem::temp_directory_path() / "egs_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  std::printf("acceptance suite: artifacts under %s\n", dir.string().c_str());
  report("C1", "fps oracle equivalence", c1_fps_oracle);
  report("C2", "autodiff soundness", c2_autodiff);
  report("C3", "estimator unbiasedness", c3_estimator);
  report("C4", "reward algebra", c4_reward_algebra);
  report("C5", "constraint satisfaction + trace determinism",
         [&] { return c5_constraints(dir); });
  report("C6", "same-budget protocol analog", c6_protocol_analog);
  report("C7", "budget stabilization", c7_stabilization);
  report("INV", "constraint-penalty boundedness", inv_penalty_boundedness);
  report("C8", "sft teacher recovery", c8_sft_recovery);
  report("C9", "training-variant ordering", c9_variant_ordering);
  report("C10", "metrics correctness", c10_metrics);

  if (g_failures > 0) {
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}
