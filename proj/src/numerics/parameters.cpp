#include "hoie/numerics/parameters.hpp"

#include <cmath>
#include <random>

#include "hoie/numerics/rng.hpp"

namespace hoie::num {

Parameter& ParameterStore::create(const std::string& name, Shape shape, ParamGroup group, Init init, double scale) {
  if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->group = group;
  p->index = params_.size();
  p->value = Tensor(shape);
  p->grad = Tensor(shape);

  Rng rng(derive_seed(seed_, name));
  switch (init) {
    case Init::zeros:
      break;
    case Init::glorot: {
      // fan_in/fan_out from the last two axes (or the single axis of a vector)
      double fan_in = shape.size() >= 2 ? static_cast<double>(shape[shape.size() - 2]) : 1.0;
      double fan_out = shape.empty() ? 1.0 : static_cast<double>(shape.back());
      double limit = scale * std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double& v : p->value.data()) v = dist(rng);
      break;
    }
    case Init::normal: {
      std::normal_distribution<double> dist(0.0, scale);
      for (double& v : p->value.data()) v = dist(rng);
      break;
    }
  }
  by_name_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw std::out_of_range("unknown parameter: " + std::string(name));
}

const Parameter& ParameterStore::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw std::out_of_range("unknown parameter: " + std::string(name));
}

Parameter* ParameterStore::find(std::string_view name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParameterStore::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_)
    for (double& g : p->grad.data()) g = 0.0;
}

void ParameterStore::accumulate(const ParamGradients& grads) {
  for (const auto& [param, g] : grads) {
    auto dst = param->grad.data();
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace hoie::num
