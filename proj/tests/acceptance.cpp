// Acceptance checks that need no external data. One PASS/FAIL line per
// criterion; exit status is the number of failures.

#include "ftmixer/data.hpp"
#include "ftmixer/loss_metrics.hpp"
#include "ftmixer/model.hpp"
#include "ftmixer/spectral.hpp"
#include "ftmixer/train.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

using namespace ftmixer;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

void round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> len(1, 512);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto x = to_eigen(oracle::random_vector(rng, static_cast<std::size_t>(len(rng)), -10, 10));
    worst = std::max(worst, (idct(dct(x)) - x).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  report(1, worst < 1e-9 && t < 10.0, "spectral round trip, 1000 vectors, L in 1..512",
         "max err " + fmt(worst) + ", " + fmt(t) + " s");
}

void symmetric_extension_oracle() {
  std::mt19937_64 rng(102);
  double worst_dev = 0.0;
  double lo = 1e300, hi = -1e300;
  for (std::size_t l = 1; l <= 64; ++l) {
    auto x = oracle::random_vector(rng, l);
    auto c = dct(to_eigen(x)).coefficients;
    auto d = to_eigen(oracle::dft_symmetric_extension(x));
    const double s = c.dot(d) / d.squaredNorm();
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    worst_dev = std::max(worst_dev, (c - s * d).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff());
  }
  report(2, worst_dev < 1e-9 && hi - lo < 1e-9, "DCT proportional to symmetric-extension DFT, L in 1..64",
         "rel dev " + fmt(worst_dev) + ", constant " + fmt(lo) + ".." + fmt(hi));
}

void gradient_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(103);
  double worst = 0.0;
  std::string worst_name = "-";
  std::size_t cases = 0;
  auto run = [&](const std::string& name, std::vector<DiffArray> leaves, const std::function<DiffArray()>& f,
                 const std::function<std::vector<double>()>& probe = {}) {
    auto g = oracle::check_gradients(std::move(leaves), f, 1e-5, probe);
    ++cases;
    if (g.max_rel_err > worst || g.checked == 0) {
      worst = g.checked == 0 ? 1.0 : g.max_rel_err;
      worst_name = name;
    }
  };
  auto vals = [](const DiffArray& a) { return std::vector<double>(a.values().begin(), a.values().end()); };

  auto a = oracle::random_array(rng, {3, 4});
  auto b = oracle::random_array(rng, {3, 4});
  auto v = oracle::random_array(rng, {4});
  auto w34 = oracle::random_array(rng, {3, 4}, false);
  run("add", {a, v}, [&] { return sum((a + v) * w34); });
  run("sub", {a, b}, [&] { return sum((a - b) * w34); });
  run("mul", {a, b}, [&] { return sum(a * b); });
  run("scale", {a}, [&] { return sum(scale(a, -1.7) * w34); });
  run("add_scalar", {a}, [&] { return sum(square(add_scalar(a, 0.3))); });
  run("square", {a}, [&] { return mean(square(a)); });
  run("abs", {a}, [&] { return sum(abs(a) * w34); }, [&] { return vals(a); });
  run("gelu", {a}, [&] { return sum(gelu(a) * w34); });
  run("matmul", {a, b}, [&] { return sum(square(matmul(a, transpose_last2(b)))); });
  auto map = std::make_shared<RowMatrix>(RowMatrix::Random(5, 4));
  run("linear_map_last", {a}, [&] { return sum(square(linear_map_last(a, map))); });
  run("reshape", {a}, [&] { return sum(square(reshape(a, {2, 6})) * reshape(w34, {2, 6})); });
  const DiffArray parts[] = {a, b};
  run("concat", {a, b}, [&] { return sum(square(concat(parts, 0))); });
  auto x = oracle::random_array(rng, {2, 4, 10});
  auto k = oracle::random_array(rng, {4, 2, 3});
  auto kb = oracle::random_array(rng, {4});
  run("conv1d", {x, k, kb}, [&] { return sum(square(conv1d(x, k, kb, {Padding::Same, 2}))); });
  run("dct_last", {x}, [&] { return sum(square(dct_last(x))); });
  run("idct_last", {x}, [&] { return sum(square(idct_last(x))); });

  ModelConfig c;
  c.lookback = 16;
  c.horizon = 8;
  c.channels = 3;
  c.fcc_embed_dim = 6;
  c.patch_scales = {4, 8};
  c.patch_embed_dim = 5;
  auto p = FtMixerParams::initialize(c);
  auto in = oracle::random_array(rng, {2, 3, 16});
  auto yhat = oracle::random_array(rng, {2, 3, 8});
  auto wr = oracle::random_array(rng, {2, 3, 16}, false);
  run("revin_normalize", {in}, [&] { return sum(revin_normalize(in, 1e-5).first * wr); });
  run("revin_denormalize", {in, yhat}, [&] {
    return sum(square(revin_denormalize(yhat, revin_normalize(in, 1e-5).second)));
  });
  auto wf = oracle::random_array(rng, {2, 3, 6}, false);
  run("fcc_forward", {in, p.fcc_embed_weight, p.fcc_embed_bias, p.fcc_conv_weight, p.fcc_conv_bias},
      [&] { return sum(fcc_forward(in, p, c) * wf); });
  auto flat = reshape(in.detach(), {6, 16});
  flat.set_requires_grad(true);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& sp = p.wfc[s];
    run("wfc_forward/" + std::to_string(s), {flat, sp.conv_weight, sp.conv_bias, sp.embed_weight, sp.embed_bias},
        [&] { return sum(square(wfc_forward(flat, p, c, s))); });
  }
  auto z = oracle::random_array(rng, {6, c.total_patches(), 5});
  run("ds_conv",
      {z, p.ds_depthwise_weight, p.ds_depthwise_bias, p.ds_pointwise_weight, p.ds_pointwise_bias, p.ds_proj_weight,
       p.ds_proj_bias},
      [&] { return sum(square(ds_conv(z, p, c))); });

  auto target = oracle::random_array(rng, {2, 3, 8}, false);
  DiffArray last;
  auto leaves = p.list();
  leaves.push_back(in);
  run(
      "ftmixer_forward + dual_domain_loss", leaves,
      [&] {
        last = ftmixer_forward(in, p, c);
        return dual_domain_loss(target, last).total;
      },
      [&] { return vals(dct_last(target) - dct_last(last)); });

  const double t = seconds_since(t0);
  report(3, worst < 1e-4 && t < 60.0, "central-difference gradient suite, " + std::to_string(cases) + " cases",
         "max rel err " + fmt(worst) + " at " + worst_name + ", " + fmt(t) + " s");
}

void synthetic_convergence() {
  const auto t0 = Clock::now();
  ModelConfig m;
  m.lookback = 96;
  m.horizon = 24;
  m.channels = 1;
  m.patch_scales = default_patch_scales(96);
  TrainConfig t;
  t.epochs = 50;
  auto ds = prepare_dataset(make_sinusoid_dataset(2000, 24.0, 1.0), m.lookback + m.horizon);
  auto res = train(m, t, ds);
  const double secs = seconds_since(t0);
  report(4, res.report.test.mse < 0.01 && res.report.epochs.size() <= 50 && secs < 120.0,
         "sinusoid (period 24, 2000 steps), L=96, horizon 24",
         "test MSE " + fmt(res.report.test.mse) + " after " + std::to_string(res.report.epochs.size()) + " epochs, " +
             fmt(secs) + " s");
}

void exactness() {
  std::mt19937_64 rng(104);
  // RevIN round trip.
  auto x = oracle::random_array(rng, {8, 7, 96}, false, -30, 60);
  auto [y, st] = revin_normalize(x, 1e-5);
  auto back = revin_denormalize(y, st);
  double revin_err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) revin_err = std::max(revin_err, std::abs(back.values()[i] - x.values()[i]));

  // Standardize round trip.
  SeriesDataset raw;
  raw.name = "exact";
  raw.values = RowMatrix::Random(4, 1000) * 250.0;
  raw.values.array() += 17.0;
  for (int c = 0; c < 4; ++c) raw.channel_names.push_back("c" + std::to_string(c));
  for (int i = 0; i < 1000; ++i) raw.timestamps.push_back(std::to_string(i));
  raw = chronological_split(raw, default_split_ratios(raw.name), 40);
  const double std_err = (destandardize(standardize(raw).values, *raw.norm_stats) - raw.values).cwiseAbs().maxCoeff();

  // Loss breakdown sums exactly.
  bool sum_exact = true;
  for (int i = 0; i < 200; ++i) {
    auto a = oracle::random_array(rng, {4, 3, 24}, false, -5, 5);
    auto b = oracle::random_array(rng, {4, 3, 24}, false, -5, 5);
    const auto l = dual_domain_loss(a, b).breakdown;
    sum_exact = sum_exact && l.total == l.time_loss + l.freq_loss;
  }

  // Checkpoint save/load/evaluate.
  ModelConfig m;
  m.lookback = 48;
  m.horizon = 12;
  m.channels = 1;
  m.fcc_embed_dim = 16;
  m.patch_scales = {12, 24};
  m.patch_embed_dim = 8;
  TrainConfig t;
  t.epochs = 2;
  auto ds = prepare_dataset(make_sinusoid_dataset(600, 24.0, 1.0), 60);
  auto res = train(m, t, ds);
  const auto path = std::filesystem::temp_directory_path() / "ftmixer_acceptance.ftmx";
  write_checkpoint(path, make_checkpoint(m, res.params));
  auto [m2, p2] = load_model(read_checkpoint(path));
  std::filesystem::remove(path);
  const auto again = evaluate(m2, p2, ds, Split::Test);
  const bool ckpt_exact = std::memcmp(&again.mse, &res.report.test.mse, sizeof(double)) == 0 &&
                          std::memcmp(&again.mae, &res.report.test.mae, sizeof(double)) == 0;

  // The last, partial batch is evaluated.
  auto [tb, te] = ds.range(Split::Test);
  const std::size_t closed_form = (te - tb) - m.lookback - m.horizon + 1;
  const auto counted = evaluate(m2, p2, ds, Split::Test, {}, 32).samples;
  const bool count_ok = counted == closed_form && closed_form % 32 != 0;

  report(9, revin_err < 1e-10 && std_err < 1e-10 && sum_exact && ckpt_exact && count_ok, "exactness suite",
         "revin " + fmt(revin_err) + ", standardize " + fmt(std_err) + ", total=time+freq " +
             (sum_exact ? "exact" : "inexact") + ", checkpoint " + (ckpt_exact ? "bit-exact" : "differs") +
             ", samples " + std::to_string(counted) + "/" + std::to_string(closed_form));
}

}  // namespace

int main() {
  const std::pair<void (*)(), int> checks[] = {
      {round_trip, 1}, {symmetric_extension_oracle, 2}, {gradient_suite, 3}, {synthetic_convergence, 4},
      {exactness, 9}};
  for (auto [fn, id] : checks) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, "threw", e.what());
    }
  }
  return failures;
}
