#include "doctest.h"

#include "ftmixer/diffarray.hpp"
#include "ftmixer/errors.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace ftmixer;

namespace {

std::vector<double> vals(const DiffArray& a) { return {a.values().begin(), a.values().end()}; }

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

}  // namespace

TEST_CASE("elementwise examples") {
  DiffArray a({2}, {1, 2});
  DiffArray b({2}, {3, 4});
  CHECK(vals(a + b) == std::vector<double>{4, 6});
  CHECK(vals(scale(DiffArray({3}, {1, 2, 3}), 0.0)) == std::vector<double>{0, 0, 0});
  CHECK(vals(a - b) == std::vector<double>{-2, -2});
  CHECK(vals(a * b) == std::vector<double>{3, 8});
}

TEST_CASE("shape mismatch names both shapes") {
  DiffArray a({2}, {1, 2});
  DiffArray b({3}, {1, 2, 3});
  try {
    (void)add(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2]") != std::string::npos);
    CHECK(what.find("[3]") != std::string::npos);
  }
  CHECK_THROWS_AS(DiffArray({2, 2}, {1, 2, 3}), DimensionError);
}

TEST_CASE("broadcast add is commutative and associative") {
  std::mt19937_64 rng(1);
  auto a = oracle::random_array(rng, {4, 3, 5}, false);
  auto b = oracle::random_array(rng, {3, 5}, false);
  auto c = oracle::random_array(rng, {5}, false);
  check_close(vals(a + b), vals(b + a), 1e-12);
  check_close(vals((a + b) + c), vals(a + (b + c)), 1e-12);
  // Broadcast gradient sums over the repeated axes.
  auto bb = oracle::random_array(rng, {3, 5});
  auto aa = oracle::random_array(rng, {4, 3, 5});
  auto g = oracle::check_gradients({aa, bb}, [&] { return sum(square(aa + bb)); });
  CHECK(g.max_rel_err < 1e-6);
}

TEST_CASE("mul backward against central differences") {
  DiffArray x({2}, {0.3, 0.7}, true);
  DiffArray y({2}, {1.1, -2.0}, true);
  backward(sum(x * y));
  check_close({x.grad().begin(), x.grad().end()}, {1.1, -2.0}, 1e-15);
  auto g = oracle::check_gradients({x, y}, [&] { return sum(x * y); });
  CHECK(g.max_rel_err < 1e-6);
}

TEST_CASE("matmul") {
  DiffArray eye({2, 2}, {1, 0, 0, 1});
  DiffArray m({2, 2}, {1, 2, 3, 4});
  CHECK(vals(matmul(eye, m)) == vals(m));
  CHECK(vals(matmul(DiffArray({1, 2}, {1, 0}), DiffArray({2, 1}, {5, 7}))) == std::vector<double>{5});
  CHECK_THROWS_AS(matmul(DiffArray::zeros({2, 3}), DiffArray::zeros({2, 3})), DimensionError);

  std::mt19937_64 rng(2);
  auto a = oracle::random_array(rng, {4, 3});
  auto b = oracle::random_array(rng, {3, 5});
  auto w = oracle::random_array(rng, {4, 5}, false);
  // A fixed random weighting makes the scalar loss linear in each factor.
  auto g = oracle::check_gradients({a, b}, [&] { return sum(matmul(a, b) * w); });
  CHECK(g.max_rel_err < 1e-6);
}

TEST_CASE("conv1d examples") {
  DiffArray x({1, 4}, {1, 2, 3, 4});
  CHECK(vals(conv1d(x, DiffArray({1, 1, 1}, {1}))) == vals(x));
  CHECK(vals(conv1d(x, DiffArray({1, 1, 3}, {0, 1, 0}))) == vals(x));
  // Cross-correlation, not convolution: kernel [1,0,0] reads the left neighbour.
  CHECK(vals(conv1d(x, DiffArray({1, 1, 3}, {1, 0, 0}))) == std::vector<double>{0, 1, 2, 3});
  CHECK(vals(conv1d(x, DiffArray({1, 1, 3}, {1, 1, 1}), std::nullopt, {Padding::Valid, 1})) ==
        std::vector<double>{6, 9});
  // Even kernel: (K - 1) / 2 = 0 zeros on the left, one on the right.
  CHECK(vals(conv1d(x, DiffArray({1, 1, 2}, {1, 1}))) == std::vector<double>{3, 5, 7, 4});
  CHECK_THROWS_AS(conv1d(DiffArray::zeros({4, 8}), DiffArray::zeros({4, 1, 3}), std::nullopt, {Padding::Same, 3}),
                  ConfigError);
}

TEST_CASE("conv1d gradients") {
  std::mt19937_64 rng(3);
  SUBCASE("depthwise 4x16, K=3") {
    auto x = oracle::random_array(rng, {4, 16});
    auto k = oracle::random_array(rng, {4, 1, 3});
    auto w = oracle::random_array(rng, {4, 16}, false);
    auto g = oracle::check_gradients({x, k}, [&] { return sum(conv1d(x, k, std::nullopt, {Padding::Same, 4}) * w); });
    CHECK(g.max_rel_err < 1e-6);
  }
  SUBCASE("batched, grouped, biased, valid padding") {
    auto x = oracle::random_array(rng, {2, 4, 9});
    auto k = oracle::random_array(rng, {6, 2, 4});
    auto bias = oracle::random_array(rng, {6});
    auto w = oracle::random_array(rng, {2, 6, 6}, false);
    auto g = oracle::check_gradients(
        {x, k, bias}, [&] { return sum(conv1d(x, k, bias, {Padding::Valid, 2}) * w); });
    CHECK(g.max_rel_err < 1e-6);
  }
}

TEST_CASE("backward basics") {
  DiffArray x({3}, {1, -2, 3}, true);
  backward(sum(x));
  CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == std::vector<double>{1, 1, 1});
  // Repeated calls without zeroing accumulate.
  backward(sum(x));
  CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == std::vector<double>{2, 2, 2});
  x.zero_grad();
  backward(scale(sum(square(x)), 0.5));
  CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == vals(x));
  CHECK_THROWS_AS(backward(x), ContractError);
}

TEST_CASE("every tracked ancestor gets a grad") {
  std::mt19937_64 rng(4);
  auto a = oracle::random_array(rng, {3});
  auto b = oracle::random_array(rng, {3});
  auto c = a * b;
  auto loss = sum(c + a);
  backward(loss);
  CHECK(a.has_grad());
  CHECK(b.has_grad());
  CHECK(c.has_grad());
}

TEST_CASE("no-grad guard records nothing") {
  DiffArray x({2}, {1, 2}, true);
  DiffArray y;
  {
    NoGradGuard guard;
    y = x * x;
  }
  CHECK_FALSE(y.requires_grad());
  CHECK(grad_enabled());
}

TEST_CASE("nonlinear op gradients") {
  std::mt19937_64 rng(5);
  auto x = oracle::random_array(rng, {3, 7}, true, -2.0, 2.0);
  SUBCASE("square") { CHECK(oracle::check_gradients({x}, [&] { return mean(square(x)); }).max_rel_err < 1e-4); }
  SUBCASE("gelu") { CHECK(oracle::check_gradients({x}, [&] { return sum(gelu(x)); }).max_rel_err < 1e-4); }
  SUBCASE("abs away from zero") {
    auto g = oracle::check_gradients(
        {x}, [&] { return sum(abs(x)); }, 1e-5, [&] { return vals(x); });
    CHECK(g.max_rel_err < 1e-4);
    CHECK(g.checked > 0);
  }
  SUBCASE("abs subgradient at zero") {
    DiffArray z({1}, {0.0}, true);
    backward(sum(abs(z)));
    CHECK(z.grad()[0] == 0.0);
  }
}

TEST_CASE("gelu values") {
  // 0.5 x (1 + erf(x / sqrt 2))
  DiffArray x({3}, {-1.0, 0.0, 1.0});
  auto y = vals(gelu(x));
  CHECK(y[0] == doctest::Approx(-0.15865525393145705).epsilon(1e-14));
  CHECK(y[1] == 0.0);
  CHECK(y[2] == doctest::Approx(0.8413447460685429).epsilon(1e-14));
}

TEST_CASE("layout op gradients") {
  std::mt19937_64 rng(6);
  auto x = oracle::random_array(rng, {2, 3, 4});
  auto y = oracle::random_array(rng, {2, 1, 4});
  auto w = oracle::random_array(rng, {2, 4, 3}, false);
  CHECK(oracle::check_gradients({x}, [&] { return sum(transpose_last2(x) * w); }).max_rel_err < 1e-6);
  auto w2 = oracle::random_array(rng, {6, 4}, false);
  CHECK(oracle::check_gradients({x}, [&] { return sum(reshape(x, {6, 4}) * w2); }).max_rel_err < 1e-6);
  auto w3 = oracle::random_array(rng, {2, 4, 4}, false);
  const DiffArray parts[] = {x, y};
  CHECK(oracle::check_gradients({x, y}, [&] { return sum(concat(parts, 1) * w3); }).max_rel_err < 1e-6);
  CHECK_THROWS_AS(reshape(x, {5, 5}), DimensionError);
}

TEST_CASE("transpose and concat values") {
  DiffArray m({2, 3}, {1, 2, 3, 4, 5, 6});
  auto t = transpose_last2(m);
  CHECK(t.shape() == Shape{3, 2});
  CHECK(vals(t) == std::vector<double>{1, 4, 2, 5, 3, 6});
  const DiffArray parts[] = {m, DiffArray({2, 1}, {7, 8})};
  CHECK(vals(concat(parts, 1)) == std::vector<double>{1, 2, 3, 7, 4, 5, 6, 8});
}

TEST_CASE("linear_map_last") {
  std::mt19937_64 rng(7);
  auto m = std::make_shared<RowMatrix>(RowMatrix::Random(5, 4));
  auto x = oracle::random_array(rng, {3, 4});
  auto y = linear_map_last(x, m);
  CHECK(y.shape() == Shape{3, 5});
  const RowMatrix expect = x.matrix() * m->transpose();
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(y.matrix()(i, j) == doctest::Approx(expect(i, j)).epsilon(1e-14));
  }
  auto w = oracle::random_array(rng, {3, 5}, false);
  CHECK(oracle::check_gradients({x}, [&] { return sum(linear_map_last(x, m) * w); }).max_rel_err < 1e-6);
}

TEST_CASE("graph determinism") {
  auto run = [] {
    std::mt19937_64 rng(11);
    auto x = oracle::random_array(rng, {4, 8});
    auto k = oracle::random_array(rng, {4, 1, 3});
    auto loss = mean(gelu(conv1d(x, k, std::nullopt, {Padding::Same, 4})));
    backward(loss);
    auto out = vals(loss);
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    out.insert(out.end(), k.grad().begin(), k.grad().end());
    return out;
  };
  CHECK(run() == run());
}
