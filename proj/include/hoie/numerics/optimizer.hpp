#pragma once

#include <vector>

#include "hoie/numerics/parameters.hpp"

namespace hoie::num {

struct GroupRates {
  double lr = 1e-3;
  double weight_decay = 1e-3;
};

struct AdamWConfig {
  GroupRates encoder{1e-5, 1e-5};
  GroupRates other{1e-3, 1e-3};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;  // global gradient norm; <= 0 disables
};

// Linear warm-up to 1 over `warmup` steps, then linear decay to 0 at `total`.
double warmup_linear(std::size_t step, std::size_t warmup, std::size_t total);

// Adaptive moments with decoupled weight decay and global-norm clipping.
class AdamW {
 public:
  AdamW(ParameterStore& store, AdamWConfig config);

  // Applies one update from the accumulated Parameter::grad slots, scaled by
  // `lr_scale`, then zeroes them. Returns the gradient norm before clipping.
  double step(double lr_scale = 1.0);

  std::size_t steps() const noexcept { return t_; }
  // Norm of the gradient the last step actually consumed (after clipping).
  double applied_norm() const noexcept { return applied_norm_; }
  const AdamWConfig& config() const noexcept { return config_; }

 private:
  ParameterStore& store_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
  double applied_norm_ = 0.0;
};

double grad_norm(const ParameterStore& store);

}  // namespace hoie::num
