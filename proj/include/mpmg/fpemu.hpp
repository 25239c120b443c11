#pragma once

// Emulated p-bit floating point on top of IEEE binary64.
//
// Every value lives in a double. An operation in p-bit precision is the exact
// carrier result rounded to p significand bits (round to nearest, ties to
// even). The exponent range is that of the carrier and is never clamped.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mpmg {

using Vector = std::vector<double>;

inline constexpr int kCarrierBits = 53;

class Precision {
 public:
  constexpr Precision() = default;
  /// Throws mpmg::Error unless 2 <= bits <= 53.
  explicit Precision(int significand_bits);

  static constexpr Precision carrier() { return Precision{}; }
  /// Accepts "fp64", "fp32", "fp16", "bf16" or a decimal bit count.
  static Precision from_name(std::string_view name);

  constexpr int bits() const { return bits_; }
  /// 2^-bits, exact.
  constexpr double unit_roundoff() const { return unit_roundoff_; }
  constexpr bool is_carrier() const { return bits_ == kCarrierBits; }

  friend constexpr bool operator==(Precision a, Precision b) { return a.bits_ == b.bits_; }

 private:
  int bits_ = kCarrierBits;
  double unit_roundoff_ = 0x1p-53;
};

/// Unit roundoffs of the high / work / low ("ε̄, ε, ε̇") environments.
struct PrecisionTriple {
  Precision high;
  Precision work;
  Precision low;

  /// high.bits >= work.bits >= low.bits
  bool ordered() const { return high.bits() >= work.bits() && work.bits() >= low.bits(); }
};

enum class RoundingMode { nearest_even, toward_zero };

/// Rounds a finite x to p significand bits. Throws on non-finite input.
double round_to(double x, Precision p, RoundingMode mode = RoundingMode::nearest_even);

/// Entrywise rounding.
Vector round_to(std::span<const double> x, Precision p,
                RoundingMode mode = RoundingMode::nearest_even);
void round_in_place(std::span<double> x, Precision p);

enum class Op { add, sub, mul, div };

/// fl(x op y) in precision p.
double fl(double x, double y, Op op, Precision p);

inline double fl_add(double x, double y, Precision p) { return fl(x, y, Op::add, p); }
inline double fl_sub(double x, double y, Precision p) { return fl(x, y, Op::sub, p); }
inline double fl_mul(double x, double y, Precision p) { return fl(x, y, Op::mul, p); }

/// Left-to-right recursive summation of fl(x_i * y_i), each op rounded to p.
double dot(std::span<const double> x, std::span<const double> y, Precision p);

/// Euclidean norm evaluated in precision p (dot, then rounded sqrt).
double norm2(std::span<const double> x, Precision p);

}  // namespace mpmg
