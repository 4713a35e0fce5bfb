#pragma once

#include "ftmixer/diffarray.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ftmixer {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers for one fixed list of parameters.
class AdamState {
 public:
  AdamState(std::span<const DiffArray> params, AdamOptions options = {});

  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  std::uint64_t step_count() const { return step_; }

  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  friend void adam_step(std::span<DiffArray> params, AdamState& state);

  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// One bias-corrected Adam update from each parameter's accumulated grad.
/// Parameters without a grad buffer are treated as having zero gradient.
/// Throws NumericError before touching anything if a gradient is not finite.
void adam_step(std::span<DiffArray> params, AdamState& state);

/// Rescales all grads so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<DiffArray> params, double max_norm);

void zero_grads(std::span<DiffArray> params);

}  // namespace ftmixer
