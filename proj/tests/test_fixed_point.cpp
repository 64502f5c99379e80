#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hmasim/fixed_point.hpp"

using namespace hmasim;

TEST_CASE("format geometry") {
  const auto q13 = FixedPointFormat::q3_13();
  CHECK(q13.width() == 16);
  CHECK(q13.step() == std::ldexp(1.0, -13));
  CHECK(q13.min_value() == -4.0);
  CHECK(q13.max_value() == 4.0 - std::ldexp(1.0, -13));
  CHECK(FixedPointFormat::q3_5().width() == 8);
  CHECK(FixedPointFormat::fp32().is_fp32());
  CHECK_THROWS_AS((FixedPointFormat{3, 10}.validate()), std::invalid_argument);
}

TEST_CASE("zero maps to zero in any format") {
  for (const auto fmt : {FixedPointFormat::fp32(), FixedPointFormat::q3_13(),
                         FixedPointFormat::q3_5()}) {
    CHECK(quantize_value(0.0, fmt) == 0.0);
  }
}

TEST_CASE("saturation at both range ends") {
  const auto q13 = FixedPointFormat::q3_13();
  CHECK(quantize_value(100.0, q13) == q13.max_value());
  CHECK(quantize_value(-100.0, q13) == q13.min_value());
  CHECK(quantize_value(4.0, q13) == q13.max_value());  // 4.0 itself is out of range
  const auto q5 = FixedPointFormat::q3_5();
  CHECK(quantize_value(7.99, q5) == q5.max_value());
  CHECK(quantize_value(-8.1, q5) == q5.min_value());
}

TEST_CASE("ties round to even scaled units") {
  const auto q13 = FixedPointFormat::q3_13();
  // 1 + 2^-14 sits exactly between 8192 and 8193 units; even wins.
  CHECK(quantize_value(1.0 + std::ldexp(1.0, -14), q13) == 1.0);
  // 1 + 3*2^-14 sits between 8193 and 8194; even wins again.
  CHECK(quantize_value(1.0 + 3.0 * std::ldexp(1.0, -14), q13) ==
        std::ldexp(8194.0, -13));
  CHECK(round_half_even(0.5) == 0.0);
  CHECK(round_half_even(1.5) == 2.0);
  CHECK(round_half_even(-0.5) == 0.0);
  CHECK(round_half_even(-1.5) == -2.0);
  CHECK(round_half_even(2.25) == 2.0);
}

TEST_CASE("fp32 sentinel passes values through untouched") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = dist(rng);
    CHECK(quantize_value(x, FixedPointFormat::fp32()) == x);
  }
}

TEST_CASE("idempotence and half-step error bound") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (const auto fmt : {FixedPointFormat::q3_13(), FixedPointFormat::q3_5()}) {
    const double half_step = fmt.step() / 2.0;
    for (int i = 0; i < 20000; ++i) {
      const double x = dist(rng);
      const double q = quantize_value(x, fmt);
      CHECK(quantize_value(q, fmt) == q);
      CHECK(q >= fmt.min_value());
      CHECK(q <= fmt.max_value());
      if (x >= fmt.min_value() && x <= fmt.max_value()) {
        CHECK(std::abs(q - x) <= half_step);
      }
    }
  }
}

TEST_CASE("tensor quantization maps every element") {
  const Tensor2D t(2, 2, {0.124, -3.9999, 50.0, 1.0});
  const Tensor2D q = quantize(t, FixedPointFormat::q3_5());
  for (double v : q.data) {
    CHECK(quantize_value(v, FixedPointFormat::q3_5()) == v);
  }
  CHECK(q.data[2] == FixedPointFormat::q3_5().max_value());
  CHECK(q.data[3] == 1.0);
}

TEST_CASE("format names round-trip") {
  CHECK(parse_format("fp32") == FixedPointFormat::fp32());
  CHECK(parse_format("q3_13") == FixedPointFormat::q3_13());
  CHECK(parse_format("q3_5") == FixedPointFormat::q3_5());
  CHECK(to_string(FixedPointFormat::q3_13()) == "q3_13");
  CHECK_THROWS_AS(parse_format("int8"), std::invalid_argument);
  CHECK_THROWS_AS(parse_format("q3_"), std::invalid_argument);
}
