#include "egs/policy.hpp"

#include <algorithm>
#include <cmath>

#include "egs/error.hpp"

namespace egs {

BudgetSet::BudgetSet(std::vector<int> budgets) : budgets_(std::move(budgets)) {
  if (budgets_.empty()) throw ValidationError("budget set: must not be empty");
  int prev = 0;
  for (int b : budgets_) {
    if (b < 1) throw ValidationError("budget set: budgets must be >= 1");
    if (b <= prev) throw ValidationError("budget set: budgets must be strictly increasing");
    prev = b;
  }
}

BudgetSet BudgetSet::deployment() {
  return BudgetSet({256, 512, 1024, 2048, 3072, 4096, 6144, 8192});
}

BudgetSet BudgetSet::toy() { return BudgetSet({8, 16, 32, 64, 96, 128, 192, 256}); }

std::optional<std::size_t> BudgetSet::index_of(int budget) const {
  for (std::size_t i = 0; i < budgets_.size(); ++i) {
    if (budgets_[i] == budget) return i;
  }
  return std::nullopt;
}

std::size_t BudgetSet::nearest_index(int budget) const {
  std::size_t best = 0;
  long best_d = std::abs(static_cast<long>(budgets_[0]) - budget);
  for (std::size_t i = 1; i < budgets_.size(); ++i) {
    const long d = std::abs(static_cast<long>(budgets_[i]) - budget);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

PolicyNet::PolicyNet(PolicyConfig cfg, std::size_t budget_count, std::uint64_t init_seed)
    : cfg_(cfg), budget_count_(budget_count) {
  if (cfg_.embed_dim % cfg_.heads != 0) {
    throw ValidationError("policy config: embed_dim must be divisible by heads");
  }
  if (budget_count_ == 0) throw ValidationError("policy config: empty budget set");
  init_params(init_seed);
}

void PolicyNet::init_params(std::uint64_t seed) {
  Rng rng(seed);
  auto make = [&](const std::string& name, std::size_t rows, std::size_t cols,
                  bool is_weight) {
    Tensor& t = store_.create(name, {rows, cols});
    if (is_weight) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
      for (double& v : t.data) v = rng.uniform(-bound, bound);
    }
  };
  auto ones = [&](const std::string& name, std::size_t cols) {
    Tensor& t = store_.create(name, {1, cols});
    for (double& v : t.data) v = 1.0;
  };

  const auto d = static_cast<std::size_t>(cfg_.embed_dim);
  const auto in = static_cast<std::size_t>(cfg_.input_dim);
  const auto ff = static_cast<std::size_t>(cfg_.ff_dim);

  make("mlp.w0", in, d, true);
  make("mlp.b0", 1, d, false);
  make("mlp.w1", d, d, true);
  make("mlp.b1", 1, d, false);
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "enc" + std::to_string(l) + ".";
    ones(p + "ln1.g", d);
    make(p + "ln1.b", 1, d, false);
    make(p + "wq", d, d, true);
    make(p + "bq", 1, d, false);
    make(p + "wk", d, d, true);
    make(p + "bk", 1, d, false);
    make(p + "wv", d, d, true);
    make(p + "bv", 1, d, false);
    make(p + "wo", d, d, true);
    make(p + "bo", 1, d, false);
    ones(p + "ln2.g", d);
    make(p + "ln2.b", 1, d, false);
    make(p + "ff.w0", d, ff, true);
    make(p + "ff.b0", 1, ff, false);
    make(p + "ff.w1", ff, d, true);
    make(p + "ff.b1", 1, d, false);
  }
  ones("final_ln.g", d);
  make("final_ln.b", 1, d, false);
  make("select.w", d, 1, true);
  make("select.b", 1, 1, false);
  make("budget.w", d, budget_count_, true);
  make("budget.b", 1, budget_count_, false);
}

PolicyForward PolicyNet::forward(Graph& g,
                                 const std::vector<FeatureDescriptor>& descriptors) {
  if (descriptors.empty()) throw ArgumentError("policy forward: empty descriptor set");
  const std::size_t m = descriptors.size();
  const auto d = static_cast<std::size_t>(cfg_.embed_dim);
  const std::size_t dh = d / static_cast<std::size_t>(cfg_.heads);

  Tensor x = Tensor::matrix(m, FeatureDescriptor::kDim);
  for (std::size_t i = 0; i < m; ++i) {
    const FeatureDescriptor& f = descriptors[i];
    double* row = x.data.data() + i * FeatureDescriptor::kDim;
    row[0] = f.coords_norm.x;
    row[1] = f.coords_norm.y;
    row[2] = f.coords_norm.z;
    row[3] = f.opacity;
    row[4] = f.log_mean_scale;
    row[5] = f.dist_norm;
  }

  auto affine = [&](Graph::Var v, const std::string& w, const std::string& b) {
    return g.add_rowvec(g.matmul(v, g.param(store_, w)), g.param(store_, b));
  };

  Graph::Var h = g.input(std::move(x));
  h = g.relu(affine(h, "mlp.w0", "mlp.b0"));
  h = affine(h, "mlp.w1", "mlp.b1");

  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "enc" + std::to_string(l) + ".";
    Graph::Var normed =
        g.layer_norm_rows(h, g.param(store_, p + "ln1.g"), g.param(store_, p + "ln1.b"));
    Graph::Var q = affine(normed, p + "wq", p + "bq");
    Graph::Var k = affine(normed, p + "wk", p + "bk");
    Graph::Var v = affine(normed, p + "wv", p + "bv");
    std::vector<Graph::Var> heads;
    heads.reserve(cfg_.heads);
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      const std::size_t c0 = static_cast<std::size_t>(hd) * dh;
      Graph::Var qh = g.slice_cols(q, c0, c0 + dh);
      Graph::Var kh = g.slice_cols(k, c0, c0 + dh);
      Graph::Var vh = g.slice_cols(v, c0, c0 + dh);
      Graph::Var attn = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), inv_sqrt_dh));
      attn = g.dropout(attn, cfg_.dropout);
      heads.push_back(g.matmul(attn, vh));
    }
    Graph::Var mha = affine(g.concat_cols(heads), p + "wo", p + "bo");
    h = g.add(h, mha);

    Graph::Var normed2 =
        g.layer_norm_rows(h, g.param(store_, p + "ln2.g"), g.param(store_, p + "ln2.b"));
    Graph::Var ff = g.relu(affine(normed2, p + "ff.w0", p + "ff.b0"));
    ff = g.dropout(ff, cfg_.dropout);
    ff = affine(ff, p + "ff.w1", p + "ff.b1");
    h = g.add(h, ff);
  }

  Graph::Var trunk =
      g.layer_norm_rows(h, g.param(store_, "final_ln.g"), g.param(store_, "final_ln.b"));
  PolicyForward out;
  out.pool_size = m;
  out.select_logits = affine(trunk, "select.w", "select.b");          // M x 1
  out.budget_logits = affine(g.mean_rows(trunk), "budget.w", "budget.b");  // 1 x |B|
  return out;
}

PolicyOutput PolicyNet::read_output(const Graph& g, const PolicyForward& fwd) {
  PolicyOutput out;
  out.select_logits = g.value(fwd.select_logits).data;
  out.budget_logits = g.value(fwd.budget_logits).data;
  return out;
}

PolicyOutput PolicyNet::evaluate(const std::vector<FeatureDescriptor>& descriptors) {
  Graph g;
  const PolicyForward fwd = forward(g, descriptors);
  return read_output(g, fwd);
}

namespace {

std::vector<double> stable_log_softmax(const std::vector<double>& logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

double log_sigmoid_stable(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// Indices of the k largest values, ties to the lowest index, output sorted.
std::vector<std::uint32_t> top_k_indices(const std::vector<double>& values,
                                         std::size_t k) {
  std::vector<std::uint32_t> idx(values.size());
  for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SampledAction sample_action(const PolicyOutput& out, std::size_t pool_size,
                            const BudgetSet& budgets, Rng& rng) {
  if (out.select_logits.size() != pool_size) {
    throw ArgumentError("sample_action: select logits do not match the pool size");
  }
  if (pool_size < static_cast<std::size_t>(budgets.min())) {
    throw InfeasiblePoolError("sample_action: pool of " + std::to_string(pool_size) +
                              " cannot satisfy the minimum budget " +
                              std::to_string(budgets.min()));
  }

  const std::vector<double> log_probs = stable_log_softmax(out.budget_logits);
  const double u = rng.next_double();
  std::size_t b = log_probs.size() - 1;
  double cum = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    cum += std::exp(log_probs[i]);
    if (u < cum) {
      b = i;
      break;
    }
  }

  const int kappa = budgets[b];
  const auto k_eff = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(kappa), pool_size));

  std::vector<double> keys(pool_size);
  for (std::size_t m = 0; m < pool_size; ++m) {
    keys[m] = out.select_logits[m] + rng.gumbel();
  }

  SampledAction s;
  s.action.budget_index = b;
  s.action.kappa = static_cast<int>(k_eff);
  s.action.clamped = k_eff < static_cast<std::size_t>(kappa);
  s.action.subset = top_k_indices(keys, k_eff);
  s.log_prob = log_probs[b];
  for (std::uint32_t m : s.action.subset) {
    s.log_prob += log_sigmoid_stable(out.select_logits[m]);
  }
  return s;
}

AnchorAction infer_action(const PolicyOutput& out, std::size_t pool_size,
                          const BudgetSet& budgets, std::optional<int> forced_budget) {
  if (out.select_logits.size() != pool_size) {
    throw ArgumentError("infer_action: select logits do not match the pool size");
  }
  if (pool_size < static_cast<std::size_t>(budgets.min())) {
    throw InfeasiblePoolError("infer_action: pool of " + std::to_string(pool_size) +
                              " cannot satisfy the minimum budget " +
                              std::to_string(budgets.min()));
  }

  std::size_t b;
  if (forced_budget) {
    const auto idx = budgets.index_of(*forced_budget);
    if (!idx) {
      throw ArgumentError("infer_action: forced budget " +
                          std::to_string(*forced_budget) + " is not in the budget set");
    }
    b = *idx;
  } else {
    b = 0;
    for (std::size_t i = 1; i < out.budget_logits.size(); ++i) {
      if (out.budget_logits[i] > out.budget_logits[b]) b = i;
    }
  }

  const int kappa = budgets[b];
  const auto k_eff = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(kappa), pool_size));

  AnchorAction a;
  a.budget_index = b;
  a.kappa = static_cast<int>(k_eff);
  a.clamped = k_eff < static_cast<std::size_t>(kappa);
  a.subset = top_k_indices(out.select_logits, k_eff);
  return a;
}

double action_entropy(const PolicyOutput& out) {
  const std::vector<double> lp = stable_log_softmax(out.budget_logits);
  double h_budget = 0.0;
  for (double l : lp) h_budget -= std::exp(l) * l;

  double h_select = 0.0;
  for (double x : out.select_logits) {
    const double ls = log_sigmoid_stable(x);
    const double ls_neg = log_sigmoid_stable(-x);
    const double s = std::exp(ls);
    h_select -= s * ls + (1.0 - s) * ls_neg;
  }
  h_select /= static_cast<double>(out.select_logits.size());
  return h_budget + h_select;
}

Graph::Var action_log_prob_var(Graph& g, const PolicyForward& fwd,
                               const AnchorAction& action) {
  Graph::Var budget_term =
      g.pick(g.log_softmax_rows(fwd.budget_logits), 0, action.budget_index);
  Graph::Var subset_term =
      g.sum_rows_at(g.log_sigmoid(fwd.select_logits), action.subset);
  return g.add(budget_term, subset_term);
}

Graph::Var action_entropy_var(Graph& g, const PolicyForward& fwd) {
  Graph::Var p = g.softmax_rows(fwd.budget_logits);
  Graph::Var lp = g.log_softmax_rows(fwd.budget_logits);
  Graph::Var h_budget = g.neg(g.sum_all(g.mul(p, lp)));

  Graph::Var s = g.sigmoid(fwd.select_logits);
  Graph::Var ls = g.log_sigmoid(fwd.select_logits);
  Graph::Var ls_neg = g.log_sigmoid(g.neg(fwd.select_logits));
  Graph::Var one_minus_s = g.add_scalar(g.neg(s), 1.0);
  Graph::Var h_select =
      g.neg(g.mean_all(g.add(g.mul(s, ls), g.mul(one_minus_s, ls_neg))));
  return g.add(h_budget, h_select);
}

}  // namespace egs
