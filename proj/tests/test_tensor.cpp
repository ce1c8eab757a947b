// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "hetgt/ops.hpp"
#include "support/oracles.hpp"

using namespace hetgt;

TEST_CASE("matmul frozen 2x2 by 2x1") {
  Tape<double> tp;
  auto a = Tensor<double>::from(2, 2, {1, 2, 3, 4}, true);
  auto b = Tensor<double>::from(2, 1, {1, 1}, true);
  auto c = matmul(tp, a, b);
  CHECK(c.at(0, 0) == 3.0);
  CHECK(c.at(1, 0) == 7.0);

  auto loss = sum_all(tp, c);
  tp.backward(loss);
  CHECK(a.grad() == std::vector<double>{1, 1, 1, 1});
  CHECK(b.grad() == std::vector<double>{4, 6});
}

TEST_CASE("matmul against scalar-loop oracle") {
  Rng rng = Rng::keyed(7, "mm-oracle");
  Tensor<double> a(4, 5, true), b(5, 3, true);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  Tape<double> tp;
  auto c = matmul(tp, a, b);
  auto ref = oracle::matmul(a.values(), 4, 5, b.values(), 3);
  CHECK(oracle::max_abs_diff(c.values(), ref) < 1e-14);
}

TEST_CASE("matmul identity and zero") {
  Tape<double> tp;
  auto x = Tensor<double>::from(2, 2, {5, -3, 2, 8});
  auto eye = Tensor<double>::from(2, 2, {1, 0, 0, 1});
  CHECK(matmul(tp, x, eye).values() == x.values());
  auto zero = Tensor<double>::zeros(2, 3);
  CHECK(matmul(tp, x, zero).values() == std::vector<double>(6, 0.0));
}

TEST_CASE("matmul shape mismatch") {
  Tape<double> tp;
  Tensor<double> a(2, 3), b(2, 3);
  CHECK_THROWS_AS(matmul(tp, a, b), DimensionError);
}

TEST_CASE("activation values") {
  Tape<double> tp;
  auto x = Tensor<double>::from(1, 5, {-1.0, -2.0, 0.0, 0.5, 3.0});
  auto elu = activation(tp, x, Act::elu);
  CHECK(elu.at(0, 0) == std::expm1(-1.0));
  CHECK(elu.at(0, 3) == 0.5);
  auto leaky = activation(tp, x, Act::leaky_relu, 0.2);
  CHECK(leaky.at(0, 0) == -0.2);
  CHECK(leaky.at(0, 4) == 3.0);
  auto relu = activation(tp, x, Act::relu);
  CHECK(relu.at(0, 1) == 0.0);
  CHECK(relu.at(0, 4) == 3.0);
  auto sig = activation(tp, x, Act::sigmoid);
  CHECK(sig.at(0, 2) == 0.5);
  auto th = activation(tp, x, Act::tanh);
  CHECK(th.at(0, 3) == std::tanh(0.5));
  CHECK(activation(tp, x, Act::identity).values() == x.values());
}

TEST_CASE("elu backward uses stored output") {
  // d/dx elu(x) = elu(x) + 1 for x < 0.
  Tape<double> tp;
  auto x = Tensor<double>::from(1, 1, {-1.0}, true);
  auto y = activation(tp, x, Act::elu);
  tp.backward(sum_all(tp, y));
  CHECK(x.grad()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("add, add_row, scales, slices frozen") {
  Tape<double> tp;
  auto a = Tensor<double>::from(2, 2, {1, 2, 3, 4});
  auto b = Tensor<double>::from(2, 2, {10, 20, 30, 40});
  CHECK(add(tp, a, b).values() == std::vector<double>{11, 22, 33, 44});

  auto r = Tensor<double>::from(1, 2, {100, 200});
  CHECK(add_row(tp, a, r).values() == std::vector<double>{101, 202, 103, 204});

  CHECK(scale_const(tp, a, 2.0).values() == std::vector<double>{2, 4, 6, 8});
  auto s = Tensor<double>::from(1, 1, {3.0});
  CHECK(scale_scalar(tp, a, s).values() == std::vector<double>{3, 6, 9, 12});

  CHECK(slice_rows(tp, a, 1, 2).values() == std::vector<double>{3, 4});
  CHECK_THROWS_AS(slice_rows(tp, a, 1, 3), RangeError);

  std::vector<Tensor<double>> parts{a, b};
  CHECK(concat_rows(tp, parts).values() ==
        std::vector<double>{1, 2, 3, 4, 10, 20, 30, 40});

  CHECK(diag_scale(tp, a, std::vector<double>{2.0, 0.0}).values() ==
        std::vector<double>{2, 4, 0, 0});

  CHECK(gather_rows(tp, a, {1, 0, 1}).values() ==
        std::vector<double>{3, 4, 1, 2, 3, 4});
  CHECK_THROWS_AS(gather_rows(tp, a, {2}), RangeError);
}

TEST_CASE("sum_all and mean_all") {
  Tape<double> tp;
  auto x = Tensor<double>::from(2, 2, {1, 2, 3, 4});
  CHECK(sum_all(tp, x).at(0, 0) == 10.0);
  CHECK(mean_all(tp, x).at(0, 0) == 2.5);
  Tensor<double> empty(0, 3);
  CHECK_THROWS_AS(mean_all(tp, empty), ContractError);
}

TEST_CASE("mean_all is permutation invariant bit for bit") {
  // The fold sorts values first, so any relabeling gives identical bits.
  Tape<float> tp;
  auto a = Tensor<float>::from(1, 3, {0.1f, 0.2f, 0.3f});
  auto b = Tensor<float>::from(1, 3, {0.3f, 0.1f, 0.2f});
  CHECK(mean_all(tp, a).at(0, 0) == mean_all(tp, b).at(0, 0));
}

TEST_CASE("gradient accumulates on reuse") {
  Tape<double> tp;
  auto x = Tensor<double>::from(1, 1, {2.0}, true);
  auto y = add(tp, x, x);
  tp.backward(sum_all(tp, y));
  CHECK(x.grad()[0] == 2.0);
}

TEST_CASE("backward contract checks") {
  Tape<double> tp;
  auto x = Tensor<double>::from(2, 2, {1, 2, 3, 4}, true);
  auto y = scale_const(tp, x, 2.0);
  CHECK_THROWS_AS(tp.backward(y), ContractError);  // not 1x1

  Tape<double> tp2;
  auto c = Tensor<double>::from(1, 1, {5.0});  // no gradient anywhere
  auto z = scale_const(tp2, c, 2.0);
  CHECK_THROWS_AS(tp2.backward(z), ContractError);
}

TEST_CASE("backward twice is bit-identical after re-zeroing") {
  Rng rng = Rng::keyed(3, "det");
  Tensor<double> a(3, 3, true), b(3, 3, true);
  for (std::size_t i = 0; i < 9; ++i) {
    a.data()[i] = rng.normal();
    b.data()[i] = rng.normal();
  }
  auto run = [&]() {
    Tape<double> tp;
    auto loss = sum_all(tp, activation(tp, matmul(tp, a, b), Act::tanh));
    a.clear_grad();
    b.clear_grad();
    tp.backward(loss);
    return std::pair{a.grad(), b.grad()};
  };
  auto g1 = run();
  auto g2 = run();
  CHECK(g1.first == g2.first);
  CHECK(g1.second == g2.second);
}

TEST_CASE("recording off keeps values but no graph") {
  Tape<double> tp;
  tp.set_recording(false);
  auto x = Tensor<double>::from(1, 2, {1, 2}, true);
  auto y = scale_const(tp, x, 3.0);
  CHECK(y.values() == std::vector<double>{3, 6});
  CHECK_FALSE(y.requires_grad());
  CHECK(tp.node_count() == 0);
}

TEST_CASE("check_finite names the offending op") {
  Tape<double> tp;
  tp.set_check_finite(true);
  auto x = Tensor<double>::from(1, 1, {1e308}, true);
  try {
    scale_const(tp, x, 10.0);  // overflows to inf
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("scale_const") != std::string::npos);
  }
}

TEST_CASE("dropout semantics") {
  Rng rng = Rng::keyed(5, "drop");
  Tensor<float> x(20, 50, true);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 1.0f;

  Tape<float> tp;
  SUBCASE("p=0 and eval mode return the same handle") {
    CHECK(dropout(tp, x, 0.0, rng, true).id() == x.id());
    CHECK(dropout(tp, x, 0.5, rng, false).id() == x.id());
  }
  SUBCASE("rate out of range") {
    CHECK_THROWS_AS(dropout(tp, x, 1.0, rng, true), ConfigError);
    CHECK_THROWS_AS(dropout(tp, x, -0.1, rng, true), ConfigError);
  }
  SUBCASE("keeps are scaled by 1/(1-p), zero rate matches") {
    auto y = dropout(tp, x, 0.5, rng, true);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.data()[i] == 0.0f) {
        ++zeros;
      } else {
        CHECK(y.data()[i] == 2.0f);
      }
    }
    CHECK(zeros > 300);  // ~500 of 1000
    CHECK(zeros < 700);
  }
  SUBCASE("same stream position, same mask") {
    Rng r1 = Rng::keyed(9, "m");
    Rng r2 = Rng::keyed(9, "m");
    auto y1 = dropout(tp, x, 0.3, r1, true);
    auto y2 = dropout(tp, x, 0.3, r2, true);
    CHECK(y1.values() == y2.values());
  }
}

TEST_CASE("tensor construction errors") {
  CHECK_THROWS_AS(Tensor<double>::from(2, 2, {1.0, 2.0}), DimensionError);
}
