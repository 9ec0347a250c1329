#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "egs/tensor.hpp"

namespace egs {

// Named parameters with gradient buffers and AdamW moments. Iteration order is
// insertion order and is part of the checkpoint/init contract.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
  };

  Tensor& create(const std::string& name, std::vector<std::size_t> shape);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);

  void zero_grads();
  std::span<Entry> entries() { return entries_; }
  std::span<const Entry> entries() const { return entries_; }

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }
  void bump_step() { ++step_; }

  std::size_t total_params() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_{0};

  friend void adamw_step(ParameterStore&, const struct AdamWConfig&);
};

struct AdamWConfig {
  double lr{1e-4};
  double weight_decay{0.01};
  double beta1{0.9};
  double beta2{0.95};
  double clip{1.0};   // global gradient-norm ceiling; <= 0 disables clipping
  double eps{1e-8};
};

// Clips the global gradient norm first, then applies one decoupled-weight-decay
// Adam update and advances the step counter.
void adamw_step(ParameterStore& store, const AdamWConfig& cfg);

// Euclidean norm over every gradient entry in the store.
double global_grad_norm(const ParameterStore& store);

}  // namespace egs
