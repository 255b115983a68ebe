#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hoie/numerics/tensor.hpp"

namespace hoie::num {

// Encoder parameters get their own learning rate and decay.
enum class ParamGroup { encoder, other };

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  ParamGroup group = ParamGroup::other;
  std::size_t index = 0;
  // Bumped whenever `value` is modified; graphs refuse to backprop across a bump.
  std::uint64_t version = 0;
};

using ParamGradients = std::vector<std::pair<Parameter*, Tensor>>;

enum class Init { zeros, glorot, normal };

class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  // Initialization draws from a stream keyed by (store seed, name), so adding
  // a parameter never perturbs the initial values of the others.
  Parameter& create(const std::string& name, Shape shape, ParamGroup group, Init init = Init::glorot,
                    double scale = 1.0);

  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;
  std::uint64_t seed() const noexcept { return seed_; }

  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

  void zero_grad();
  void accumulate(const ParamGradients& grads);

 private:
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

}  // namespace hoie::num
