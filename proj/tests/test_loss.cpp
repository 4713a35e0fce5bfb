#include "doctest.h"

#include "ftmixer/loss_metrics.hpp"
#include "ftmixer/spectral.hpp"
#include "support/oracles.hpp"

#include "json.hpp"

#include <random>

using namespace ftmixer;

TEST_CASE("perfect prediction") {
  std::mt19937_64 rng(1);
  auto y = oracle::random_array(rng, {3, 8}, false);
  auto l = dual_domain_loss(y, y).breakdown;
  CHECK(l.time_loss == 0.0);
  CHECK(l.freq_loss == 0.0);
  CHECK(l.total == 0.0);
}

TEST_CASE("single-element closed form") {
  auto l = dual_domain_loss(DiffArray({1, 1}, {2}), DiffArray({1, 1}, {0})).breakdown;
  CHECK(l.time_loss == 4.0);
  CHECK(l.freq_loss == 2.0);
  CHECK(l.total == 6.0);
}

TEST_CASE("brute-force recomputation") {
  std::mt19937_64 rng(2);
  auto y = oracle::random_array(rng, {3, 8}, false);
  auto yh = oracle::random_array(rng, {3, 8}, false);
  double sq = 0.0, ab = 0.0;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    std::vector<double> a(y.values().begin() + ch * 8, y.values().begin() + (ch + 1) * 8);
    std::vector<double> b(yh.values().begin() + ch * 8, yh.values().begin() + (ch + 1) * 8);
    auto ca = oracle::dct_direct(a);
    auto cb = oracle::dct_direct(b);
    for (std::size_t t = 0; t < 8; ++t) {
      sq += (a[t] - b[t]) * (a[t] - b[t]);
      ab += std::abs(ca[t] - cb[t]);
    }
  }
  auto l = dual_domain_loss(y, yh).breakdown;
  CHECK(std::abs(l.time_loss - sq / 24.0) < 1e-12);
  CHECK(std::abs(l.freq_loss - ab / 24.0) < 1e-12);
  CHECK(std::abs(l.total - (sq + ab) / 24.0) < 1e-12);
  CHECK(l.total == l.time_loss + l.freq_loss);
}

TEST_CASE("total is exactly the sum and terms can be switched off") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto y = oracle::random_array(rng, {2, 3, 7}, false, -3, 3);
    auto yh = oracle::random_array(rng, {2, 3, 7}, false, -3, 3);
    auto l = dual_domain_loss(y, yh);
    CHECK(l.breakdown.total == l.breakdown.time_loss + l.breakdown.freq_loss);
    CHECK(l.total.item() == l.breakdown.total);
    CHECK(l.breakdown.time_loss >= 0.0);
    CHECK(l.breakdown.freq_loss >= 0.0);
    auto t = dual_domain_loss(y, yh, {.time = true, .freq = false}).breakdown;
    CHECK(t.freq_loss == 0.0);
    CHECK(t.total == l.breakdown.time_loss);
    auto f = dual_domain_loss(y, yh, {.time = false, .freq = true}).breakdown;
    CHECK(f.time_loss == 0.0);
    CHECK(f.total == l.breakdown.freq_loss);
  }
}

TEST_CASE("metrics") {
  DiffArray y({2}, {1, -1});
  DiffArray z({2}, {0, 0});
  CHECK(mse(y, z) == 1.0);
  CHECK(mae(y, z) == 1.0);
  CHECK(mse(y, y) == 0.0);
  CHECK(mae(y, y) == 0.0);
  CHECK_THROWS_AS(mse(y, DiffArray::zeros({3})), ContractError);
  CHECK_THROWS_AS(dual_domain_loss(y, DiffArray::zeros({3})), ContractError);

  MetricAccumulator acc;
  acc.add(DiffArray({2}, {1, 2}), DiffArray({2}, {0, 0}));
  acc.add(DiffArray({1}, {3}), DiffArray({1}, {0}));
  CHECK(acc.count() == 3);
  CHECK(acc.mse() == doctest::Approx(14.0 / 3.0));
  CHECK(acc.mae() == doctest::Approx(2.0));
}

TEST_CASE("loss gradient away from kinks") {
  std::mt19937_64 rng(4);
  auto y = oracle::random_array(rng, {2, 3, 8}, false);
  auto yh = oracle::random_array(rng, {2, 3, 8});
  auto probe = [&] {
    auto d = dct_last(y) - dct_last(yh);
    return std::vector<double>(d.values().begin(), d.values().end());
  };
  auto g = oracle::check_gradients({yh}, [&] { return dual_domain_loss(y, yh).total; }, 1e-5, probe);
  CHECK(g.max_rel_err < 1e-4);
  CHECK(g.checked > 0);
}

TEST_CASE("metrics JSON") {
  Metrics m{0.25, 0.5, 96, "ETTh1", "test", 10};
  auto j = nlohmann::json::parse(metrics_json(m));
  CHECK(j["mse"] == 0.25);
  CHECK(j["mae"] == 0.5);
  CHECK(j["horizon"] == 96);
  CHECK(j["dataset"] == "ETTh1");
  CHECK(j.contains("units"));
}
