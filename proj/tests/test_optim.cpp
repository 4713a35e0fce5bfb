#include "doctest.h"

#include "ftmixer/checkpoint.hpp"
#include "ftmixer/errors.hpp"
#include "ftmixer/optim.hpp"

#include <cmath>
#include <cstring>
#include <limits>

using namespace ftmixer;

TEST_CASE("adam: zero gradient is a fixed point") {
  std::vector<DiffArray> p{DiffArray({3}, {1, -2, 3}, true)};
  p[0].grad_mut();  // allocate zeroed grad
  AdamState s(p);
  adam_step(p, s);
  CHECK(std::vector<double>(p[0].values().begin(), p[0].values().end()) == std::vector<double>{1, -2, 3});
  CHECK(s.step_count() == 1);
}

TEST_CASE("adam: first step with constant unit gradient moves by lr") {
  std::vector<DiffArray> p{DiffArray::scalar(0.5, true)};
  p[0].grad_mut()[0] = 1.0;
  AdamState s(p, {.learning_rate = 0.1});
  adam_step(p, s);
  // m_hat = 1, v_hat = 1, step = lr / (1 + eps)
  CHECK(p[0].item() == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("adam: quadratic converges") {
  std::vector<DiffArray> p{DiffArray::scalar(0.0, true)};
  AdamState s(p, {.learning_rate = 0.05});
  std::size_t steps = 0;
  for (; steps < 500; ++steps) {
    auto w = p[0];
    backward(square(add_scalar(w, -3.0)));
    adam_step(p, s);
    zero_grads(p);
  }
  CHECK(std::abs(p[0].item() - 3.0) < 1e-3);
  CHECK(s.step_count() == 500);
}

TEST_CASE("adam: non-finite gradient aborts before any update") {
  std::vector<DiffArray> p{DiffArray({2}, {1, 2}, true), DiffArray({1}, {5}, true)};
  p[0].grad_mut()[0] = 0.5;
  p[1].grad_mut()[0] = std::numeric_limits<double>::quiet_NaN();
  AdamState s(p);
  CHECK_THROWS_AS(adam_step(p, s), NumericError);
  CHECK(p[0].values()[0] == 1.0);
  CHECK(s.step_count() == 0);
}

TEST_CASE("adam: moment buffers match parameter shapes") {
  std::vector<DiffArray> p{DiffArray::zeros({2, 3}, true), DiffArray::zeros({4}, true)};
  AdamState s(p);
  REQUIRE(s.first_moment().size() == 2);
  CHECK(s.first_moment()[0].size() == 6);
  CHECK(s.second_moment()[1].size() == 4);
}

TEST_CASE("clip_grad_norm") {
  std::vector<DiffArray> p{DiffArray::zeros({2}, true), DiffArray::zeros({1}, true)};
  p[0].grad_mut()[0] = 3.0;
  p[1].grad_mut()[0] = 4.0;
  CHECK(clip_grad_norm(p, 1.0) == doctest::Approx(5.0));
  CHECK(p[0].grad()[0] == doctest::Approx(0.6));
  CHECK(p[1].grad()[0] == doctest::Approx(0.8));
  // Below the threshold nothing changes.
  CHECK(clip_grad_norm(p, 10.0) == doctest::Approx(1.0));
  CHECK(p[1].grad()[0] == doctest::Approx(0.8));
}

TEST_CASE("checkpoint encode/decode is bit-exact") {
  Checkpoint c;
  c.metadata = "lookback = 8\nhorizon = 4\n";
  c.entries.push_back({"a.weight", {2, 3}, {1.0 / 3.0, -0.0, 1e-308, 4.9e-324, 1e300, -7.25}});
  c.entries.push_back({"b", {1}, {std::numeric_limits<double>::max()}});
  const auto bytes = encode_checkpoint(c);
  CHECK(bytes.substr(0, 8) == "FTMXCKPT");
  const auto back = decode_checkpoint(bytes);
  CHECK(back.metadata == c.metadata);
  REQUIRE(back.entries.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.entries[i].name == c.entries[i].name);
    CHECK(back.entries[i].shape == c.entries[i].shape);
    CHECK(std::memcmp(back.entries[i].values.data(), c.entries[i].values.data(),
                      c.entries[i].values.size() * sizeof(double)) == 0);
  }
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.find("b") != nullptr);
  CHECK(back.find("missing") == nullptr);
}

TEST_CASE("checkpoint rejects corrupt input") {
  Checkpoint c;
  c.entries.push_back({"w", {2}, {1, 2}});
  auto bytes = encode_checkpoint(c);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), ParseError);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), ParseError);
  auto future = bytes;
  future[8] = 9;  // version
  CHECK_THROWS_AS(decode_checkpoint(future), ParseError);
}
