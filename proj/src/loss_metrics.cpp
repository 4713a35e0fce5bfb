#include "ftmixer/loss_metrics.hpp"

#include "ftmixer/errors.hpp"
#include "ftmixer/spectral.hpp"

#include "json.hpp"

#include <cmath>

namespace ftmixer {

namespace {

void require_same_shape(const DiffArray& a, const DiffArray& b, const char* op) {
  if (!a.defined() || !b.defined() || a.shape() != b.shape()) {
    throw ContractError(std::string(op) + ": target " + shape_string(a.shape()) + " and prediction " +
                        shape_string(b.shape()) + " differ in shape");
  }
}

}  // namespace

DualDomainLoss dual_domain_loss(const DiffArray& target, const DiffArray& prediction, LossTerms terms) {
  require_same_shape(target, prediction, "dual_domain_loss");
  if (!terms.time && !terms.freq) throw ConfigError("dual_domain_loss: both loss terms disabled");

  DualDomainLoss out;
  DiffArray time_term;
  DiffArray freq_term;
  if (terms.time) {
    time_term = mean(square(sub(prediction, target)));
    out.breakdown.time_loss = time_term.item();
  }
  if (terms.freq) {
    freq_term = mean(abs(sub(dct_last(prediction), dct_last(target))));
    out.breakdown.freq_loss = freq_term.item();
  }
  if (terms.time && terms.freq) {
    out.total = add(time_term, freq_term);
  } else {
    out.total = terms.time ? time_term : freq_term;
  }
  out.breakdown.total = out.breakdown.time_loss + out.breakdown.freq_loss;
  return out;
}

double mse(const DiffArray& target, const DiffArray& prediction) {
  require_same_shape(target, prediction, "mse");
  MetricAccumulator acc;
  acc.add(target, prediction);
  return acc.mse();
}

double mae(const DiffArray& target, const DiffArray& prediction) {
  require_same_shape(target, prediction, "mae");
  MetricAccumulator acc;
  acc.add(target, prediction);
  return acc.mae();
}

void MetricAccumulator::add(const DiffArray& target, const DiffArray& prediction) {
  require_same_shape(target, prediction, "metrics");
  auto t = target.values();
  auto p = prediction.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = p[i] - t[i];
    sq_ += d * d;
    abs_ += std::abs(d);
  }
  count_ += t.size();
}

double MetricAccumulator::mse() const { return count_ ? sq_ / static_cast<double>(count_) : 0.0; }
double MetricAccumulator::mae() const { return count_ ? abs_ / static_cast<double>(count_) : 0.0; }

std::string metrics_json(const Metrics& m, int indent) {
  nlohmann::ordered_json j;
  j["mse"] = m.mse;
  j["mae"] = m.mae;
  j["horizon"] = m.horizon;
  j["dataset"] = m.dataset;
  j["split"] = m.split;
  j["samples"] = m.samples;
  j["units"] = "standardized (train-split mean/std per channel)";
  return j.dump(indent);
}

}  // namespace ftmixer
