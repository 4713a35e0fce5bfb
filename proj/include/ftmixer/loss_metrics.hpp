#pragma once

#include "ftmixer/diffarray.hpp"

#include <cstddef>
#include <string>

namespace ftmixer {

struct LossBreakdown {
  double time_loss = 0.0;  // MSE
  double freq_loss = 0.0;  // MAE between DCT spectra
  double total = 0.0;      // time_loss + freq_loss
};

/// Which terms enter the total. A disabled term is reported as 0.
struct LossTerms {
  bool time = true;
  bool freq = true;
};

struct DualDomainLoss {
  DiffArray total;  // scalar, differentiable
  LossBreakdown breakdown;
};

/// MSE over all entries plus MAE between DCT(target) and DCT(prediction),
/// the DCT taken along the last (horizon) axis of each series.
DualDomainLoss dual_domain_loss(const DiffArray& target, const DiffArray& prediction, LossTerms terms = {});

double mse(const DiffArray& target, const DiffArray& prediction);
double mae(const DiffArray& target, const DiffArray& prediction);

/// Running sums for metrics over many batches.
class MetricAccumulator {
 public:
  void add(const DiffArray& target, const DiffArray& prediction);
  double mse() const;
  double mae() const;
  std::size_t count() const { return count_; }

 private:
  double sq_ = 0.0;
  double abs_ = 0.0;
  std::size_t count_ = 0;
};

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  std::size_t horizon = 0;
  std::string dataset;
  std::string split;
  std::size_t samples = 0;
};

/// {"mse", "mae", "horizon", "dataset"} plus split, sample count and the
/// unit convention the numbers are reported in.
std::string metrics_json(const Metrics& m, int indent = 2);

}  // namespace ftmixer
