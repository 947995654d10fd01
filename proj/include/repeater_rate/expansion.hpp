#pragma once

// Fixed-length floating-point expansions built on error-free transforms.
//
// A value is held as an unevaluated sum of up to K doubles. Every
// operation first forms the exact result as a nonoverlapping expansion
// (Shewchuk's grow/compress), then keeps the K largest components, so an
// Expansion<K> carries roughly 53*K significant bits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace repeater_rate {

__extension__ using uint128 = unsigned __int128;

namespace eft {

struct SumErr {
  double sum;
  double err;
};

inline SumErr two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// |a| >= |b| or a == 0
inline SumErr fast_two_sum(double a, double b) noexcept {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline SumErr two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

/// Fixed-capacity component list; an exact product of two K-expansions
/// needs at most 2K^2 components.
template <std::size_t Cap>
struct Components {
  std::array<double, Cap> v{};
  std::size_t size = 0;

  double operator[](std::size_t i) const noexcept { return v[i]; }
  bool empty() const noexcept { return size == 0; }

  /// Adds b exactly, keeping the list nonoverlapping in increasing magnitude.
  void grow(double b) noexcept {
    double acc = b;
    std::size_t out = 0;
    for (std::size_t i = 0; i < size; ++i) {
      const auto [s, err] = two_sum(acc, v[i]);
      acc = s;
      if (err != 0.0) v[out++] = err;
    }
    size = out;
    if (acc != 0.0 || size == 0) v[size++] = acc;
  }

  /// Shewchuk's compress: same value, fewer and better-separated components.
  Components compress() const noexcept {
    Components h;
    if (size == 0) {
      h.v[0] = 0.0;
      h.size = 1;
      return h;
    }
    std::array<double, Cap> g{};
    std::size_t bottom = size - 1;
    double big = v[size - 1];
    for (std::size_t i = size - 1; i-- > 0;) {
      const auto [s, small] = fast_two_sum(big, v[i]);
      if (small != 0.0) {
        g[bottom--] = s;
        big = small;
      } else {
        big = s;
      }
    }
    for (std::size_t i = bottom + 1; i < size; ++i) {
      const auto [s, small] = fast_two_sum(g[i], big);
      big = s;
      if (small != 0.0) h.v[h.size++] = small;
    }
    h.v[h.size++] = big;
    return h;
  }
};

}  // namespace eft

template <int K>
class Expansion {
  static_assert(K >= 1);

 public:
  Expansion() = default;
  Expansion(double x) { c_[0] = x; }  // NOLINT: implicit by intent, mirrors double

  static Expansion from_u128(uint128 v) {
    // Four exact 32-bit chunks; each chunk times its power of two is a double.
    Buffer acc;
    for (int shift = 0; shift < 128; shift += 32) {
      const auto chunk = static_cast<std::uint32_t>(v >> shift);
      if (chunk != 0) acc.grow(std::ldexp(static_cast<double>(chunk), shift));
    }
    return from_exact(acc);
  }

  /// Leading component; the rounded value of the expansion.
  double hi() const noexcept { return c_[0]; }

  double to_double() const noexcept {
    double s = 0.0;
    for (int i = K - 1; i >= 0; --i) s += c_[i];
    return s;
  }

  friend Expansion operator+(const Expansion& a, const Expansion& b) {
    Buffer acc;
    for (int i = K - 1; i >= 0; --i) {
      if (a.c_[i] != 0.0) acc.grow(a.c_[i]);
      if (b.c_[i] != 0.0) acc.grow(b.c_[i]);
    }
    return from_exact(acc);
  }

  friend Expansion operator-(const Expansion& a) {
    Expansion r;
    for (int i = 0; i < K; ++i) r.c_[i] = -a.c_[i];
    return r;
  }

  friend Expansion operator-(const Expansion& a, const Expansion& b) { return a + (-b); }

  friend Expansion operator*(const Expansion& a, const Expansion& b) {
    Buffer acc;
    for (int i = K - 1; i >= 0; --i) {
      for (int j = K - 1; j >= 0; --j) {
        if (a.c_[i] == 0.0 || b.c_[j] == 0.0) continue;
        const auto [p, err] = eft::two_prod(a.c_[i], b.c_[j]);
        if (err != 0.0) acc.grow(err);
        acc.grow(p);
      }
    }
    return from_exact(acc);
  }

  /// Newton iteration x <- x + x(1 - a x); each pass doubles the correct bits.
  Expansion reciprocal() const {
    Expansion x(1.0 / c_[0]);
    const Expansion one(1.0);
    for (int bits = 53; bits < 53 * K + 53; bits *= 2) x = x + x * (one - *this * x);
    return x;
  }

  friend Expansion operator/(const Expansion& a, const Expansion& b) { return a * b.reciprocal(); }

  Expansion& operator+=(const Expansion& b) { return *this = *this + b; }
  Expansion& operator*=(const Expansion& b) { return *this = *this * b; }

  /// Repeated squaring; relative error grows like log2(e) * 2^(-53K).
  friend Expansion pow(Expansion base, std::uint64_t e) {
    Expansion r(1.0);
    while (e != 0) {
      if (e & 1U) r *= base;
      e >>= 1U;
      if (e != 0) base *= base;
    }
    return r;
  }

 private:
  using Buffer = eft::Components<2 * K * K + 2>;

  static Expansion from_exact(const Buffer& exact) {
    const Buffer h = exact.compress();
    Expansion r;
    // h is in increasing magnitude; keep the K largest, leading first.
    const int take = std::min<int>(K, static_cast<int>(h.size));
    for (int i = 0; i < take; ++i) r.c_[i] = h[h.size - 1 - i];
    return r;
  }

  std::array<double, K> c_{};
};

using DoubleDouble = Expansion<2>;
using QuadDouble = Expansion<4>;

}  // namespace repeater_rate
