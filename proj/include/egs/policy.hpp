#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "egs/graph.hpp"
#include "egs/optimizer.hpp"
#include "egs/rng.hpp"
#include "egs/sampling.hpp"

namespace egs {

// Discrete anchor budgets, strictly increasing. The deployment set spans
// 256-8192; the desk-scale default divides it by 32.
class BudgetSet {
 public:
  explicit BudgetSet(std::vector<int> budgets);

  static BudgetSet deployment();  // {256, 512, ..., 8192}
  static BudgetSet toy();         // {8, 16, ..., 256}

  const std::vector<int>& values() const { return budgets_; }
  std::size_t size() const { return budgets_.size(); }
  int operator[](std::size_t i) const { return budgets_[i]; }
  int min() const { return budgets_.front(); }
  int max() const { return budgets_.back(); }
  std::optional<std::size_t> index_of(int budget) const;
  // Entry nearest to `budget`; ties resolve to the lower entry.
  std::size_t nearest_index(int budget) const;

 private:
  std::vector<int> budgets_;
};

struct PolicyConfig {
  int input_dim{FeatureDescriptor::kDim};
  int embed_dim{128};
  int heads{4};
  int layers{2};
  int ff_dim{256};
  double dropout{0.1};
};

// Plain logits as evaluated by a forward pass.
struct PolicyOutput {
  std::vector<double> budget_logits;  // one per budget
  std::vector<double> select_logits;  // one per pool candidate
};

struct AnchorAction {
  std::size_t budget_index{0};  // into the BudgetSet
  int kappa{0};                 // effective subset size after any clamp
  std::vector<std::uint32_t> subset;  // pool positions, sorted ascending
  bool clamped{false};          // true when kappa was cut to the pool size
};

// Live handles into a forward graph, for building differentiable losses.
struct PolicyForward {
  Graph::Var select_logits{0};  // M x 1
  Graph::Var budget_logits{0};  // 1 x |B|
  std::size_t pool_size{0};
};

// Point-wise MLP into a 2-layer pre-norm self-attention encoder with a
// per-token selection head and a mean-pooled budget head. Tokens carry no
// positional signal, so the stack is permutation-equivariant.
class PolicyNet {
 public:
  PolicyNet(PolicyConfig cfg, std::size_t budget_count, std::uint64_t init_seed);

  // Builds the forward graph on `g`. Training-mode dropout must have been
  // enabled on the graph by the caller; otherwise dropout is the identity.
  PolicyForward forward(Graph& g, const std::vector<FeatureDescriptor>& descriptors);

  // Convenience: fresh graph, no dropout, plain logit values.
  PolicyOutput evaluate(const std::vector<FeatureDescriptor>& descriptors);

  static PolicyOutput read_output(const Graph& g, const PolicyForward& fwd);

  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  const PolicyConfig& config() const { return cfg_; }
  std::size_t budget_count() const { return budget_count_; }

 private:
  void init_params(std::uint64_t seed);

  PolicyConfig cfg_;
  std::size_t budget_count_;
  ParameterStore store_;
};

struct SampledAction {
  AnchorAction action;
  double log_prob{0.0};
};

// Budget from the categorical over budget logits; subset by Gumbel-top-k over
// selection logits. log_prob follows the factorization
//   log softmax(budget)[b] + sum_{m in subset} log sigmoid(select[m]).
// Note the sampler (exact top-k law) and this density (independent-Bernoulli
// sum over the chosen members) are intentionally different objects: the sum is
// the surrogate the policy-gradient estimator differentiates, a standard
// REINFORCE approximation for subset actions.
// A budget larger than the pool is clamped and flagged, never an error.
SampledAction sample_action(const PolicyOutput& out, std::size_t pool_size,
                            const BudgetSet& budgets, Rng& rng);

// Deterministic deployment rule: argmax budget (or the forced one) and the
// top-k selection logits, all ties to the lowest index.
AnchorAction infer_action(const PolicyOutput& out, std::size_t pool_size,
                          const BudgetSet& budgets, std::optional<int> forced_budget);

// Budget categorical entropy plus mean per-candidate Bernoulli entropy (nats).
double action_entropy(const PolicyOutput& out);

// Graph-side mirrors of log_prob / entropy for the training losses.
Graph::Var action_log_prob_var(Graph& g, const PolicyForward& fwd,
                               const AnchorAction& action);
Graph::Var action_entropy_var(Graph& g, const PolicyForward& fwd);

}  // namespace egs
