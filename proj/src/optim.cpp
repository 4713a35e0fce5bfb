#include "ftmixer/optim.hpp"

#include "ftmixer/errors.hpp"

#include <cmath>

namespace ftmixer {

AdamState::AdamState(std::span<const DiffArray> params, AdamOptions options) : options_(options) {
  if (!(options.learning_rate > 0.0)) throw ConfigError("adam: learning rate must be positive");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void adam_step(std::span<DiffArray> params, AdamState& state) {
  if (params.size() != state.m_.size()) {
    throw ContractError("adam_step: state tracks " + std::to_string(state.m_.size()) +
                        " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != state.m_[i].size()) {
      throw DimensionError("adam_step: parameter " + std::to_string(i) + " has shape " +
                           shape_string(params[i].shape()) + " but moments hold " +
                           std::to_string(state.m_[i].size()) + " values");
    }
    for (double g : params[i].grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in parameter " + std::to_string(i));
      }
    }
  }

  const auto& o = state.options_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = params[i].grad();
    if (g.empty()) continue;
    auto w = params[i].values_mut();
    auto& m = state.m_[i];
    auto& v = state.v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      w[j] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

double clip_grad_norm(std::span<DiffArray> params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& p : params) {
      for (double& g : p.grad_mut()) g *= s;
    }
  }
  return norm;
}

void zero_grads(std::span<DiffArray> params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace ftmixer
