#include "hoie/numerics/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace hoie::num {

double warmup_linear(std::size_t step, std::size_t warmup, std::size_t total) {
  if (step < warmup) return static_cast<double>(step + 1) / static_cast<double>(warmup + 1);
  if (total <= warmup) return 1.0;
  const double rest = static_cast<double>(total - warmup);
  return std::max(0.0, 1.0 - static_cast<double>(step - warmup) / rest);
}

double grad_norm(const ParameterStore& store) {
  double s = 0.0;
  for (const auto& p : store)
    for (double g : p->grad.data()) s += g * g;
  return std::sqrt(s);
}

AdamW::AdamW(ParameterStore& store, AdamWConfig config) : store_(store), config_(config) {
  if (config_.encoder.lr < 0 || config_.other.lr < 0) throw std::invalid_argument("learning rates must be >= 0");
}

double AdamW::step(double lr_scale) {
  while (m_.size() < store_.size()) {
    const std::size_t n = store_[m_.size()].value.size();
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
  const double norm = grad_norm(store_);
  if (!std::isfinite(norm)) throw std::runtime_error("non-finite gradient norm");
  const double clip_scale = config_.clip > 0.0 && norm > config_.clip ? config_.clip / norm : 1.0;
  applied_norm_ = norm * clip_scale;
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < store_.size(); ++k) {
    Parameter& p = store_[k];
    const GroupRates& r = p.group == ParamGroup::encoder ? config_.encoder : config_.other;
    const double lr = r.lr * lr_scale;
    auto w = p.value.data();
    auto g = p.grad.data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] * clip_scale;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
      w[i] -= lr * (update + r.weight_decay * w[i]);
      g[i] = 0.0;
    }
    ++p.version;
  }
  return norm;
}

}  // namespace hoie::num
