#include "egs/optimizer.hpp"

#include <cmath>

#include "egs/error.hpp"

namespace egs {

Tensor& ParameterStore::create(const std::string& name, std::vector<std::size_t> shape) {
  if (has(name)) throw ArgumentError("parameter already exists: " + name);
  Entry e;
  e.name = name;
  e.value = Tensor::zeros(shape);
  e.grad = Tensor::zeros(shape);
  e.m = Tensor::zeros(shape);
  e.v = Tensor::zeros(std::move(shape));
  entries_.push_back(std::move(e));
  index_[name] = entries_.size() - 1;
  return entries_.back().value;
}

Tensor& ParameterStore::value(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ArgumentError("unknown parameter: " + name);
  return entries_[it->second].value;
}

const Tensor& ParameterStore::value(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ArgumentError("unknown parameter: " + name);
  return entries_[it->second].value;
}

Tensor& ParameterStore::grad(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ArgumentError("unknown parameter: " + name);
  return entries_[it->second].grad;
}

void ParameterStore::zero_grads() {
  for (Entry& e : entries_) {
    for (double& v : e.grad.data) v = 0.0;
  }
}

std::size_t ParameterStore::total_params() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.value.numel();
  return n;
}

double global_grad_norm(const ParameterStore& store) {
  double sq = 0.0;
  for (const auto& e : store.entries()) {
    for (double g : e.grad.data) sq += g * g;
  }
  return std::sqrt(sq);
}

void adamw_step(ParameterStore& store, const AdamWConfig& cfg) {
  if (cfg.clip > 0.0) {
    const double norm = global_grad_norm(store);
    if (norm > cfg.clip) {
      const double factor = cfg.clip / norm;
      for (auto& e : store.entries_) {
        for (double& g : e.grad.data) g *= factor;
      }
    }
  }

  store.step_ += 1;
  const auto t = static_cast<double>(store.step_);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& e : store.entries_) {
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      const double g = e.grad.data[i];
      e.m.data[i] = cfg.beta1 * e.m.data[i] + (1.0 - cfg.beta1) * g;
      e.v.data[i] = cfg.beta2 * e.v.data[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = e.m.data[i] / bc1;
      const double v_hat = e.v.data[i] / bc2;
      e.value.data[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) +
                                   cfg.weight_decay * e.value.data[i]);
    }
  }
}

}  // namespace egs
