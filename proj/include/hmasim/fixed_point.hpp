#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "hmasim/tensor.hpp"

namespace hmasim {

/// Signed fixed-point format Q(i,f): i integer-and-sign bits plus f fraction
/// bits, representable range [-2^(i-1), 2^(i-1) - 2^-f] with step 2^-f.
/// A total width of 32 is the full-precision pass-through sentinel.
struct FixedPointFormat {
  int integer_bits = 32;  // includes the sign bit
  int fraction_bits = 0;

  static constexpr FixedPointFormat fp32() { return {32, 0}; }
  static constexpr FixedPointFormat q3_13() { return {3, 13}; }
  static constexpr FixedPointFormat q3_5() { return {3, 5}; }

  int width() const { return integer_bits + fraction_bits; }
  bool is_fp32() const { return width() == 32; }
  double value_bytes() const { return width() / 8.0; }
  double step() const { return std::ldexp(1.0, -fraction_bits); }
  double max_value() const { return std::ldexp(1.0, integer_bits - 1) - step(); }
  double min_value() const { return -std::ldexp(1.0, integer_bits - 1); }

  void validate() const {
    if (integer_bits < 1 || fraction_bits < 0) {
      throw std::invalid_argument("FixedPointFormat: need at least a sign bit and f >= 0");
    }
    if (width() != 8 && width() != 16 && width() != 32) {
      throw std::invalid_argument("FixedPointFormat: total width must be 8, 16, or 32");
    }
  }

  friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

/// Round to nearest integer, ties to even.
inline double round_half_even(double v) {
  const double lo = std::floor(v);
  const double frac = v - lo;
  if (frac > 0.5) return lo + 1.0;
  if (frac < 0.5) return lo;
  return std::fmod(lo, 2.0) == 0.0 ? lo : lo + 1.0;
}

/// Quantize one value: scale, round half-to-even, saturate to the format
/// range, rescale. Out-of-range inputs clamp to the nearest representable
/// endpoint instead of wrapping.
inline double quantize_value(double x, FixedPointFormat fmt) {
  if (fmt.is_fp32()) return x;
  const double max_units = std::ldexp(1.0, fmt.width() - 1) - 1.0;
  const double min_units = -std::ldexp(1.0, fmt.width() - 1);
  double units = round_half_even(std::ldexp(x, fmt.fraction_bits));
  units = std::clamp(units, min_units, max_units);
  return std::ldexp(units, -fmt.fraction_bits);
}

inline Tensor2D quantize(const Tensor2D& t, FixedPointFormat fmt) {
  if (fmt.is_fp32()) return t;
  Tensor2D out = t;
  for (auto& v : out.data) v = quantize_value(v, fmt);
  return out;
}

inline std::string to_string(FixedPointFormat fmt) {
  if (fmt.is_fp32()) return "fp32";
  return "q" + std::to_string(fmt.integer_bits) + "_" + std::to_string(fmt.fraction_bits);
}

/// Accepts "fp32" or "q<i>_<f>" (e.g. "q3_13").
inline FixedPointFormat parse_format(const std::string& s) {
  if (s == "fp32") return FixedPointFormat::fp32();
  if (s.size() >= 4 && s.front() == 'q') {
    const auto sep = s.find('_');
    if (sep != std::string::npos && sep > 1 && sep + 1 < s.size()) {
      try {
        FixedPointFormat fmt{std::stoi(s.substr(1, sep - 1)), std::stoi(s.substr(sep + 1))};
        fmt.validate();
        return fmt;
      } catch (const std::invalid_argument&) {
      } catch (const std::out_of_range&) {
      }
    }
  }
  throw std::invalid_argument("unknown fixed-point format '" + s + "' (expected fp32 or q<i>_<f>)");
}

}  // namespace hmasim
