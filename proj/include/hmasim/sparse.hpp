#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmasim/fixed_point.hpp"
#include "hmasim/tensor.hpp"

namespace hmasim {

/// Bitmask-encoded sparse matrix: a presence bit per element plus the packed
/// non-zero values in flat row-major order. Bit k of the mask corresponds to
/// flat element k; within each byte, bit 0 is the lowest-index element.
struct SparseTensor {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> bitmask;  // ceil(rows*cols / 8) bytes
  std::vector<double> values;

  std::size_t bit_count() const { return static_cast<std::size_t>(rows) * cols; }

  bool bit(std::size_t k) const { return (bitmask[k >> 3] >> (k & 7)) & 1u; }

  void set_bit(std::size_t k, bool on) {
    const std::uint8_t mask = static_cast<std::uint8_t>(1u << (k & 7));
    if (on) {
      bitmask[k >> 3] |= mask;
    } else {
      bitmask[k >> 3] &= static_cast<std::uint8_t>(~mask);
    }
  }

  void flip_bit(std::size_t k) { bitmask[k >> 3] ^= static_cast<std::uint8_t>(1u << (k & 7)); }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < bit_count(); ++k) n += bit(k);
    return n;
  }

  friend bool operator==(const SparseTensor&, const SparseTensor&) = default;
};

enum class DeficitPolicy {
  error,     // malformed tensor is a hard failure
  zero_fill  // surplus set bits decode to zero; used by fault studies
};

inline SparseTensor bitmask_encode(const Tensor2D& t) {
  SparseTensor s;
  s.rows = static_cast<std::uint32_t>(t.rows);
  s.cols = static_cast<std::uint32_t>(t.cols);
  s.bitmask.assign((t.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.data[k] != 0.0) {
      s.set_bit(k, true);
      s.values.push_back(t.data[k]);
    }
  }
  return s;
}

inline Tensor2D bitmask_decode(const SparseTensor& s, DeficitPolicy policy = DeficitPolicy::error) {
  const std::size_t n = s.bit_count();
  if (s.bitmask.size() < (n + 7) / 8) {
    throw std::invalid_argument("bitmask_decode: bitmask shorter than rows*cols bits");
  }
  Tensor2D t(s.rows, s.cols);
  std::size_t next = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!s.bit(k)) continue;
    if (next < s.values.size()) {
      t.data[k] = s.values[next++];
    } else if (policy == DeficitPolicy::zero_fill) {
      t.data[k] = 0.0;
    } else {
      throw std::runtime_error("bitmask_decode: set bits exceed stored values");
    }
  }
  return t;
}

// --- binary file format -----------------------------------------------------
//
// Header: rows, cols, value width in bits, each a little-endian uint32.
// Then the bitmask padded to a byte boundary, then the packed values.
// Width 32 stores IEEE-754 binary32; widths 16 and 8 store two's-complement
// integers in Q(3,13) / Q(3,5) units, little-endian.

inline FixedPointFormat format_for_width(std::uint32_t width_bits) {
  switch (width_bits) {
    case 32: return FixedPointFormat::fp32();
    case 16: return FixedPointFormat::q3_13();
    case 8: return FixedPointFormat::q3_5();
    default:
      throw std::invalid_argument("sparse file: unsupported value width " +
                                  std::to_string(width_bits));
  }
}

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::int64_t to_units(double v, FixedPointFormat fmt) {
  const double scaled = round_half_even(std::ldexp(v, fmt.fraction_bits));
  if (quantize_value(v, fmt) != v) {
    throw std::invalid_argument("sparse file: value " + std::to_string(v) +
                                " is not representable at width " + std::to_string(fmt.width()) +
                                "; quantize first");
  }
  return static_cast<std::int64_t>(scaled);
}

}  // namespace detail

inline std::string serialize_sparse(const SparseTensor& s,
                                    FixedPointFormat fmt = FixedPointFormat::fp32()) {
  fmt.validate();
  std::string out;
  detail::put_u32le(out, s.rows);
  detail::put_u32le(out, s.cols);
  detail::put_u32le(out, static_cast<std::uint32_t>(fmt.width()));
  out.append(reinterpret_cast<const char*>(s.bitmask.data()), s.bitmask.size());
  for (double v : s.values) {
    if (fmt.is_fp32()) {
      const float f = static_cast<float>(v);
      std::uint32_t bits = 0;
      std::memcpy(&bits, &f, 4);
      detail::put_u32le(out, bits);
    } else {
      const std::int64_t units = detail::to_units(v, fmt);
      const auto u = static_cast<std::uint64_t>(units);
      for (int b = 0; b < fmt.width(); b += 8) {
        out.push_back(static_cast<char>((u >> b) & 0xff));
      }
    }
  }
  return out;
}

inline std::pair<SparseTensor, FixedPointFormat> deserialize_sparse(const std::string& bytes) {
  if (bytes.size() < 12) throw std::runtime_error("sparse file: truncated header");
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  SparseTensor s;
  s.rows = detail::get_u32le(p);
  s.cols = detail::get_u32le(p + 4);
  const std::uint32_t width = detail::get_u32le(p + 8);
  const FixedPointFormat fmt = format_for_width(width);
  const std::size_t mask_bytes = (s.bit_count() + 7) / 8;
  const std::size_t value_bytes = width / 8;
  std::size_t off = 12;
  if (bytes.size() < off + mask_bytes) throw std::runtime_error("sparse file: truncated bitmask");
  s.bitmask.assign(p + off, p + off + mask_bytes);
  off += mask_bytes;
  const std::size_t remaining = bytes.size() - off;
  if (remaining % value_bytes != 0) {
    throw std::runtime_error("sparse file: value section is not a whole number of values");
  }
  const std::size_t count = remaining / value_bytes;
  s.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* vp = p + off + i * value_bytes;
    if (fmt.is_fp32()) {
      const std::uint32_t bits = detail::get_u32le(vp);
      float f = 0;
      std::memcpy(&f, &bits, 4);
      s.values.push_back(static_cast<double>(f));
    } else {
      std::uint64_t u = 0;
      for (std::size_t b = 0; b < value_bytes; ++b) {
        u |= static_cast<std::uint64_t>(vp[b]) << (8 * b);
      }
      // sign-extend from the stored width
      const int shift = 64 - fmt.width();
      const auto units = static_cast<std::int64_t>(u << shift) >> shift;
      s.values.push_back(std::ldexp(static_cast<double>(units), -fmt.fraction_bits));
    }
  }
  return {std::move(s), fmt};
}

inline void write_sparse_file(const std::filesystem::path& path, const SparseTensor& s,
                              FixedPointFormat fmt = FixedPointFormat::fp32()) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  const std::string bytes = serialize_sparse(s, fmt);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

inline std::pair<SparseTensor, FixedPointFormat> read_sparse_file(
    const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_sparse(bytes);
}

// --- fault injection ---------------------------------------------------------

enum class FaultTarget { bitmask, values };

struct FaultInjection {
  SparseTensor corrupted;
  std::size_t corruption = 0;  // flat positions whose zero-fill decode changed
};

namespace detail {

inline double flip_value_bit(double v, int bit, FixedPointFormat fmt) {
  if (fmt.is_fp32()) {
    float f = static_cast<float>(v);
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, 4);
    bits ^= (1u << bit);
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
  }
  std::uint64_t u = static_cast<std::uint64_t>(to_units(v, fmt)) &
                    ((fmt.width() == 64 ? ~0ull : (1ull << fmt.width()) - 1));
  u ^= (1ull << bit);
  const int shift = 64 - fmt.width();
  const auto units = static_cast<std::int64_t>(u << shift) >> shift;
  return std::ldexp(static_cast<double>(units), -fmt.fraction_bits);
}

}  // namespace detail

/// Flip exactly one bit of either the bitmask or the packed value array and
/// report how many decoded positions change under the zero-fill policy. The
/// format defines the bit layout of a stored value.
inline FaultInjection inject_fault(const SparseTensor& s, FaultTarget target,
                                   std::size_t bit_position,
                                   FixedPointFormat fmt = FixedPointFormat::fp32()) {
  FaultInjection result;
  result.corrupted = s;
  if (target == FaultTarget::bitmask) {
    if (bit_position >= s.bit_count()) {
      throw std::out_of_range("inject_fault: bitmask position out of range");
    }
    result.corrupted.flip_bit(bit_position);
  } else {
    const std::size_t total_bits = s.values.size() * static_cast<std::size_t>(fmt.width());
    if (bit_position >= total_bits) {
      throw std::out_of_range("inject_fault: value position out of range");
    }
    const std::size_t idx = bit_position / fmt.width();
    const int bit = static_cast<int>(bit_position % fmt.width());
    result.corrupted.values[idx] = detail::flip_value_bit(s.values[idx], bit, fmt);
  }

  const Tensor2D before = bitmask_decode(s, DeficitPolicy::zero_fill);
  const Tensor2D after = bitmask_decode(result.corrupted, DeficitPolicy::zero_fill);
  for (std::size_t k = 0; k < before.size(); ++k) {
    const bool differs = !(before.data[k] == after.data[k]);  // NaN counts as changed
    result.corruption += differs ? 1 : 0;
  }
  return result;
}

}  // namespace hmasim
