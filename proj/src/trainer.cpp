#include "egs/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "egs/error.hpp"
#include "egs/text.hpp"

namespace egs {

SftLabels sft_labels(const CandidatePool& pool, int teacher_budget,
                     const BudgetSet& budgets) {
  if (pool.candidates.empty()) throw ArgumentError("sft_labels: empty pool");
  const std::size_t k_eff =
      std::min<std::size_t>(static_cast<std::size_t>(teacher_budget), pool.size());

  const std::vector<Vec3> centers = pool.centers();
  const std::vector<std::uint32_t> teacher = fps(centers, k_eff);

  SftLabels out;
  out.select_labels.assign(pool.size(), 0.0);
  for (std::uint32_t pos : teacher) out.select_labels[pos] = 1.0;
  out.effective_teacher_budget = static_cast<int>(k_eff);
  out.budget_label = budgets.nearest_index(out.effective_teacher_budget);
  return out;
}

std::string trace_row_csv(const TraceRow& r) {
  std::ostringstream s;
  s << r.step << ',' << r.frame << ',' << r.kappa << ',' << format_double(r.log_prob)
    << ',' << format_double(r.entropy) << ',' << format_double(r.psnr_rl) << ','
    << format_double(r.psnr_tgt) << ',' << format_double(r.t_rl) << ','
    << format_double(r.t_ref) << ',' << format_double(r.term_budget) << ','
    << format_double(r.term_time) << ',' << format_double(r.term_violation) << ','
    << format_double(r.term_gain) << ',' << format_double(r.reward) << ','
    << format_double(r.ema_baseline);
  return s.str();
}

void write_trace(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open trace for writing: " + path.string());
  out << kTraceHeader << "\n";
  for (const TraceRow& r : rows) out << trace_row_csv(r) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace " + path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw ParseError("trace " + path.string() + ": unexpected header");
  }
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 15) {
      throw ParseError("trace " + path.string() + ":" + std::to_string(line_no) +
                       ": expected 15 columns");
    }
    TraceRow r;
    r.step = parse_u64(cells[0], "step");
    r.frame = static_cast<std::uint32_t>(parse_u64(cells[1], "frame"));
    r.kappa = static_cast<int>(parse_int(cells[2], "kappa"));
    r.log_prob = parse_double(cells[3], "log_prob");
    r.entropy = parse_double(cells[4], "entropy");
    r.psnr_rl = parse_double(cells[5], "psnr_rl");
    r.psnr_tgt = parse_double(cells[6], "psnr_tgt");
    r.t_rl = parse_double(cells[7], "t_rl");
    r.t_ref = parse_double(cells[8], "t_ref");
    r.term_budget = parse_double(cells[9], "term_budget");
    r.term_time = parse_double(cells[10], "term_time");
    r.term_violation = parse_double(cells[11], "term_violation");
    r.term_gain = parse_double(cells[12], "term_gain");
    r.reward = parse_double(cells[13], "reward");
    r.ema_baseline = parse_double(cells[14], "ema_baseline");
    rows.push_back(r);
  }
  return rows;
}

Trainer::Trainer(const RunConfig& cfg, PolicyNet& policy, Environment& env)
    : cfg_(cfg),
      policy_(policy),
      env_(env),
      budgets_(cfg.budgets),
      action_rng_(Rng(cfg.trainer.seed).fork(0xac710)) {}

AdamWConfig Trainer::adamw_config() const {
  AdamWConfig a;
  a.lr = cfg_.trainer.lr;
  a.weight_decay = cfg_.trainer.weight_decay;
  a.beta1 = cfg_.trainer.beta1;
  a.beta2 = cfg_.trainer.beta2;
  a.clip = cfg_.trainer.grad_clip;
  return a;
}

double Trainer::entropy_weight_at(std::uint64_t step) const {
  const double beta = cfg_.trainer.entropy_weight;
  if (!cfg_.trainer.entropy_anneal || cfg_.trainer.rl_steps <= 1) return beta;
  const double t = static_cast<double>(step) /
                   static_cast<double>(cfg_.trainer.rl_steps - 1);
  return beta * (1.0 - 0.9 * std::min(1.0, t));
}

SftLosses Trainer::sft_step(const PreparedFrame& pf, const SftLabels& labels,
                            std::uint64_t dropout_step) {
  Graph g;
  if (cfg_.trainer.train_dropout) {
    g.enable_dropout(cfg_.trainer.seed, dropout_step);
  }
  const PolicyForward fwd = policy_.forward(g, pf.descriptors);

  Tensor y = Tensor::zeros({labels.select_labels.size(), 1});
  Tensor y_inv = Tensor::zeros({labels.select_labels.size(), 1});
  for (std::size_t i = 0; i < labels.select_labels.size(); ++i) {
    y.data[i] = labels.select_labels[i];
    y_inv.data[i] = 1.0 - labels.select_labels[i];
  }
  const Graph::Var yv = g.input(std::move(y));
  const Graph::Var yiv = g.input(std::move(y_inv));
  const Graph::Var ls = g.log_sigmoid(fwd.select_logits);
  const Graph::Var ls_neg = g.log_sigmoid(g.neg(fwd.select_logits));
  const Graph::Var bce =
      g.neg(g.mean_all(g.add(g.mul(yv, ls), g.mul(yiv, ls_neg))));
  const Graph::Var ce =
      g.neg(g.pick(g.log_softmax_rows(fwd.budget_logits), 0, labels.budget_label));
  const Graph::Var loss = g.add(bce, ce);

  g.backward(loss);
  policy_.store().zero_grads();
  g.accumulate_param_grads();
  adamw_step(policy_.store(), adamw_config());

  return {g.scalar(bce), g.scalar(ce)};
}

void Trainer::bandit_step(const PreparedFrame& pf, BanditState& state) {
  const auto t0 = std::chrono::steady_clock::now();

  Graph g;
  if (cfg_.trainer.train_dropout) {
    g.enable_dropout(cfg_.trainer.seed, state.step);
  }
  const PolicyForward fwd = policy_.forward(g, pf.descriptors);
  const PolicyOutput out = PolicyNet::read_output(g, fwd);

  const SampledAction sampled = sample_action(out, pf.pool.size(), budgets_, action_rng_);
  const double psi_rl =
      env_.subset_quality(pf.scene_id, *pf.frame, pf.pool, sampled.action.subset);
  const auto t1 = std::chrono::steady_clock::now();

  const ReferenceQuality refs = env_.references(pf.scene_id, *pf.frame, pf.pool);
  const double psi_tgt = mixed_target(refs.psi_ref, refs.psi_tea, env_.config().eta);
  const double measured = std::chrono::duration<double>(t1 - t0).count();
  const double t_rl = env_.runtime_seconds(sampled.action.kappa, measured);
  const RewardBreakdown rb =
      compute_reward(sampled.action, psi_rl, psi_tgt, t_rl, refs.t_ref, env_.config());

  const double advantage = rb.total - state.ema_baseline;
  const double beta = entropy_weight_at(state.step);
  const Graph::Var lp = action_log_prob_var(g, fwd, sampled.action);
  const Graph::Var ent = action_entropy_var(g, fwd);
  const Graph::Var loss = g.add(g.scale(lp, -advantage), g.scale(ent, -beta));

  g.backward(loss);
  policy_.store().zero_grads();
  g.accumulate_param_grads();
  adamw_step(policy_.store(), adamw_config());

  // EMA refresh happens after the gradient step; the advantage above used the
  // pre-update baseline.
  const double mu = cfg_.trainer.ema_momentum;
  state.ema_baseline = mu * state.ema_baseline + (1.0 - mu) * rb.total;

  TraceRow row;
  row.step = state.step;
  row.frame = pf.frame->index;
  row.kappa = sampled.action.kappa;
  row.log_prob = sampled.log_prob;
  row.entropy = action_entropy(out);
  row.psnr_rl = psi_rl;
  row.psnr_tgt = psi_tgt;
  row.t_rl = t_rl;
  row.t_ref = refs.t_ref;
  row.term_budget = rb.term_budget;
  row.term_time = rb.term_time;
  row.term_violation = rb.term_violation;
  row.term_gain = rb.term_gain;
  row.reward = rb.total;
  row.ema_baseline = state.ema_baseline;
  row.clamped = sampled.action.clamped;
  row.subset_size = sampled.action.subset.size();
  row.subset_sorted_unique = true;
  for (std::size_t i = 1; i < sampled.action.subset.size(); ++i) {
    if (sampled.action.subset[i] <= sampled.action.subset[i - 1]) {
      row.subset_sorted_unique = false;
    }
  }
  state.trace.push_back(row);
  state.step += 1;
}

std::vector<PreparedFrame> Trainer::prepare(const std::vector<PreparedScene>& scenes,
                                            const PoolConfig& pool_cfg) {
  std::vector<PreparedFrame> out;
  for (const PreparedScene& s : scenes) {
    const Bbox bounds = scene_bounds(s.frames);
    for (const Frame& f : s.frames) {
      PreparedFrame pf;
      pf.scene_id = s.scene_id;
      pf.frame = &f;
      pf.pool = make_candidate_pool(f, bounds, pool_cfg);
      if (!pf.pool.candidates.empty()) pf.descriptors = features(pf.pool);
      out.push_back(std::move(pf));
    }
  }
  return out;
}

TrainResult Trainer::train(const std::vector<PreparedScene>& scenes) {
  if (scenes.empty()) throw ArgumentError("train: no scenes given");
  const std::vector<PreparedFrame> frames = prepare(scenes, cfg_.pool);
  if (frames.empty()) throw ArgumentError("train: scenes contain no frames");

  TrainResult result;
  const TrainStage stage = cfg_.trainer.stage;
  Rng shuffle_rng = Rng(cfg_.trainer.seed).fork(0x5afe11);

  if (stage == TrainStage::kSft || stage == TrainStage::kSftRl) {
    std::uint64_t sft_step_no = 0;
    for (int epoch = 0; epoch < cfg_.trainer.sft_epochs; ++epoch) {
      std::vector<std::size_t> order(frames.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      shuffle_rng.shuffle(order);
      for (std::size_t idx : order) {
        const PreparedFrame& pf = frames[idx];
        if (pf.pool.candidates.empty()) {
          result.warnings.push_back("sft: skipping empty pool in scene " + pf.scene_id +
                                    " frame " + std::to_string(pf.frame->index));
          continue;
        }
        const SftLabels labels =
            sft_labels(pf.pool, env_.config().teacher_budget, budgets_);
        const SftLosses losses = sft_step(pf, labels, sft_step_no);
        if (result.sft_steps == 0) result.sft_first_loss = losses.total();
        result.sft_last_loss = losses.total();
        result.sft_steps += 1;
        ++sft_step_no;
      }
    }
  }

  if ((stage == TrainStage::kRl || stage == TrainStage::kSftRl) &&
      cfg_.trainer.rl_steps > 0) {
    const auto min_budget = static_cast<std::size_t>(budgets_.min());
    bool any_feasible = false;
    for (const PreparedFrame& pf : frames) {
      any_feasible = any_feasible || pf.pool.size() >= min_budget;
    }
    if (!any_feasible) {
      throw ArgumentError("train: every pool is infeasible for the minimum budget");
    }

    std::vector<std::size_t> order;
    std::size_t cursor = 0;
    while (result.bandit.step < static_cast<std::uint64_t>(cfg_.trainer.rl_steps)) {
      if (cursor >= order.size()) {  // new epoch, new shuffle
        order.resize(frames.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_rng.shuffle(order);
        cursor = 0;
      }
      const PreparedFrame& pf = frames[order[cursor]];
      ++cursor;
      if (pf.pool.size() < min_budget) {
        result.warnings.push_back("rl: infeasible pool (" + std::to_string(pf.pool.size()) +
                                  " < " + std::to_string(min_budget) + ") in scene " +
                                  pf.scene_id + " frame " +
                                  std::to_string(pf.frame->index) + "; frame skipped");
        continue;
      }
      bandit_step(pf, result.bandit);
    }
  }
  return result;
}

namespace {

double bernoulli_product(const std::vector<double>& sigmas, std::uint32_t mask) {
  double p = 1.0;
  for (std::size_t m = 0; m < sigmas.size(); ++m) {
    p *= (mask >> m) & 1u ? sigmas[m] : 1.0 - sigmas[m];
  }
  return p;
}

}  // namespace

EstimatorCheckReport estimator_check(const EstimatorCheckCase& env, double tol) {
  const std::size_t n_budgets = env.budget_logits.size();
  const std::size_t n_cand = env.select_logits.size();
  if (n_budgets < 1 || n_budgets > 2 || n_cand < 1 || n_cand > 3) {
    throw ArgumentError("estimator_check: instance must have <= 2 budgets, <= 3 candidates");
  }
  const std::uint32_t n_subsets = 1u << n_cand;
  if (env.rewards.size() != n_budgets) {
    throw ArgumentError("estimator_check: reward table needs one row per budget");
  }
  for (const auto& row : env.rewards) {
    if (row.size() != n_subsets) {
      throw ArgumentError("estimator_check: reward row needs one entry per subset mask");
    }
  }

  auto build_params = [&](ParameterStore& store) {
    Tensor& bl = store.create("budget_logits", {1, n_budgets});
    bl.data = env.budget_logits;
    Tensor& sl = store.create("select_logits", {n_cand, 1});
    sl.data = env.select_logits;
  };

  // Plain-value probabilities for the estimator weights.
  std::vector<double> budget_probs(n_budgets);
  {
    double mx = env.budget_logits[0];
    for (double v : env.budget_logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t b = 0; b < n_budgets; ++b) {
      budget_probs[b] = std::exp(env.budget_logits[b] - mx);
      sum += budget_probs[b];
    }
    for (double& p : budget_probs) p /= sum;
  }
  std::vector<double> sigmas(n_cand);
  for (std::size_t m = 0; m < n_cand; ++m) {
    const double x = env.select_logits[m];
    sigmas[m] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }

  // Route 1: exact gradient of E[rho] by differentiating through the
  // probabilities themselves.
  ParameterStore exact_store;
  build_params(exact_store);
  {
    Graph g;
    const Graph::Var bl = g.param(exact_store, "budget_logits");
    const Graph::Var sl = g.param(exact_store, "select_logits");
    const Graph::Var p = g.softmax_rows(bl);
    const Graph::Var sig = g.sigmoid(sl);
    const Graph::Var sig_inv = g.add_scalar(g.neg(sig), 1.0);
    Graph::Var total = g.input(Tensor::scalar(0.0));
    for (std::size_t b = 0; b < n_budgets; ++b) {
      for (std::uint32_t mask = 0; mask < n_subsets; ++mask) {
        Graph::Var prob = g.pick(p, 0, b);
        for (std::size_t m = 0; m < n_cand; ++m) {
          prob = g.mul(prob, g.pick((mask >> m) & 1u ? sig : sig_inv,
                                    m, 0));
        }
        total = g.add(total, g.scale(prob, env.rewards[b][mask]));
      }
    }
    g.backward(total);
    exact_store.zero_grads();
    g.accumulate_param_grads();
  }

  // Route 2: enumerated expectation of the score-function estimate
  // rho(a) * grad log pi(a), with pi(a) entering only as a constant weight.
  ParameterStore est_store;
  build_params(est_store);
  {
    Graph g;
    const Graph::Var bl = g.param(est_store, "budget_logits");
    const Graph::Var sl = g.param(est_store, "select_logits");
    const Graph::Var lp = g.log_softmax_rows(bl);
    const Graph::Var lsig = g.log_sigmoid(sl);
    const Graph::Var lsig_neg = g.log_sigmoid(g.neg(sl));
    Graph::Var total = g.input(Tensor::scalar(0.0));
    for (std::size_t b = 0; b < n_budgets; ++b) {
      for (std::uint32_t mask = 0; mask < n_subsets; ++mask) {
        Graph::Var log_pi = g.pick(lp, 0, b);
        for (std::size_t m = 0; m < n_cand; ++m) {
          log_pi = g.add(log_pi,
                         g.pick((mask >> m) & 1u ? lsig : lsig_neg, m, 0));
        }
        const double weight =
            budget_probs[b] * bernoulli_product(sigmas, mask) * env.rewards[b][mask];
        total = g.add(total, g.scale(log_pi, weight));
      }
    }
    g.backward(total);
    est_store.zero_grads();
    g.accumulate_param_grads();
  }

  EstimatorCheckReport report;
  report.action_count = n_budgets * n_subsets;
  for (const char* name : {"budget_logits", "select_logits"}) {
    const Tensor& ge = exact_store.grad(name);
    const Tensor& gs = est_store.grad(name);
    for (std::size_t i = 0; i < ge.data.size(); ++i) {
      const double denom = std::max({std::abs(ge.data[i]), std::abs(gs.data[i]), 1e-9});
      report.max_rel_error =
          std::max(report.max_rel_error, std::abs(ge.data[i] - gs.data[i]) / denom);
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace egs
