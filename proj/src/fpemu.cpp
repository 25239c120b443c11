#include "mpmg/fpemu.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "mpmg/error.hpp"

namespace mpmg {

Precision::Precision(int significand_bits)
    : bits_(significand_bits), unit_roundoff_(std::ldexp(1.0, -significand_bits)) {
  if (significand_bits < 2 || significand_bits > kCarrierBits) {
    throw Error("significand bits must lie in [2, 53], got " + std::to_string(significand_bits));
  }
}

Precision Precision::from_name(std::string_view name) {
  if (name == "fp64") return Precision(53);
  if (name == "fp32") return Precision(24);
  if (name == "fp16") return Precision(11);
  if (name == "bf16") return Precision(8);
  int bits = 0;
  const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), bits);
  if (ec != std::errc{} || ptr != name.data() + name.size()) {
    throw Error("unknown precision '" + std::string(name) + "'");
  }
  return Precision(bits);
}

double round_to(double x, Precision p, RoundingMode mode) {
  if (!std::isfinite(x)) throw Error("non-finite operand");
  if (p.is_carrier() || x == 0.0) return x;

  // Drop the low (53 - p) significand bits of the binary64 pattern. A carry
  // out of the significand bumps the exponent, which is the correct result.
  // Subnormal carriers are not modelled.
  const int drop = kCarrierBits - p.bits();
  const std::uint64_t mask = (std::uint64_t{1} << drop) - 1;
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  if (mode == RoundingMode::nearest_even) {
    const std::uint64_t half = std::uint64_t{1} << (drop - 1);
    const std::uint64_t lsb = (bits >> drop) & 1U;
    bits += half - 1 + lsb;
  }
  bits &= ~mask;
  return std::bit_cast<double>(bits);
}

Vector round_to(std::span<const double> x, Precision p, RoundingMode mode) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = round_to(x[i], p, mode);
  return out;
}

void round_in_place(std::span<double> x, Precision p) {
  for (double& v : x) v = round_to(v, p);
}

namespace {

// Rounds the exact value s + e to p bits, where s = fl53(s + e) and e is the
// carrier rounding error. Only ties (nearest) and grid hits (toward zero) can
// differ from rounding s alone.
double round_exact(double s, double e, Precision p, RoundingMode mode) {
  if (!std::isfinite(s)) throw Error("non-finite operand");
  if (p.is_carrier() || e == 0.0 || s == 0.0) return round_to(s, p, mode);
  const int drop = kCarrierBits - p.bits();
  const std::uint64_t step = std::uint64_t{1} << drop;
  const std::uint64_t mask = step - 1;
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(s);
  const std::uint64_t low = bits & mask;
  const bool outward = std::signbit(e) == std::signbit(s);
  if (mode == RoundingMode::nearest_even) {
    if (low != (step >> 1)) return round_to(s, p, mode);
    return std::bit_cast<double>((bits & ~mask) + (outward ? step : 0));
  }
  if (low != 0 || outward) return round_to(s, p, mode);
  return std::bit_cast<double>(bits - step);
}

}  // namespace

double fl(double x, double y, Op op, Precision p) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw Error("non-finite operand");
  switch (op) {
    case Op::sub:
      y = -y;
      [[fallthrough]];
    case Op::add: {
      const double s = x + y;
      if (!std::isfinite(s)) throw Error("non-finite operand");
      const double bv = s - x;
      const double e = (x - (s - bv)) + (y - bv);
      return round_exact(s, e, p, RoundingMode::nearest_even);
    }
    case Op::mul: {
      const double s = x * y;
      if (!std::isfinite(s)) throw Error("non-finite operand");
      return round_exact(s, std::fma(x, y, -s), p, RoundingMode::nearest_even);
    }
    case Op::div: {
      if (y == 0.0) throw Error("division by zero");
      const double q = x / y;
      if (!std::isfinite(q)) throw Error("non-finite operand");
      const double rem = std::fma(-q, y, x);
      return round_exact(q, rem == 0.0 ? 0.0 : std::copysign(1.0, rem) * std::copysign(1.0, y) *
                                                  std::numeric_limits<double>::min(),
                         p, RoundingMode::nearest_even);
    }
  }
  return 0.0;
}

double dot(std::span<const double> x, std::span<const double> y, Precision p) {
  if (x.size() != y.size()) {
    throw Error("dot: length mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double term = fl_mul(x[i], y[i], p);
    s = i == 0 ? term : fl_add(s, term, p);
  }
  return s;
}

double norm2(std::span<const double> x, Precision p) {
  return round_to(std::sqrt(dot(x, x, p)), p);
}

}  // namespace mpmg
