#include "hstl/optim.hpp"

#include <algorithm>
#include <cmath>

#include "hstl/errors.hpp"

namespace hstl {

Optimizer::Optimizer(const OptimSpec& spec, const std::vector<ParamRef>& params)
    : spec_(spec), params_(params), lr_(spec.lr) {
  if (spec_.type != "adam" && spec_.type != "sgd")
    throw ConfigError("optimizer: unknown preset '" + spec_.type + "'");
  m_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i)
    m_[i].assign(params_[i].count, 0.0);
  if (spec_.type == "adam") {
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      v_[i].assign(params_[i].count, 0.0);
  }
}

void Optimizer::step() {
  ++iter_;
  for (long ms : spec_.milestones)
    if (iter_ == ms) lr_ *= spec_.gamma;

  if (spec_.type == "adam") {
    const double bc1 = 1.0 - std::pow(spec_.adam_beta1, static_cast<double>(iter_));
    const double bc2 = 1.0 - std::pow(spec_.adam_beta2, static_cast<double>(iter_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      ParamRef& p = params_[i];
      for (std::size_t j = 0; j < p.count; ++j) {
        const double g = p.grad[j] + spec_.weight_decay * p.value[j];
        m_[i][j] = spec_.adam_beta1 * m_[i][j] + (1.0 - spec_.adam_beta1) * g;
        v_[i][j] = spec_.adam_beta2 * v_[i][j] + (1.0 - spec_.adam_beta2) * g * g;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p.value[j] -= lr_ * mhat / (std::sqrt(vhat) + spec_.adam_eps);
      }
    }
  } else {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      ParamRef& p = params_[i];
      for (std::size_t j = 0; j < p.count; ++j) {
        const double g = p.grad[j] + spec_.weight_decay * p.value[j];
        m_[i][j] = spec_.sgd_momentum * m_[i][j] + g;
        p.value[j] -= lr_ * m_[i][j];
      }
    }
  }
}

}  // namespace hstl
