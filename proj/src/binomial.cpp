#include "binomial.hpp"

namespace repeater_rate::detail {

namespace {

using Row = std::array<std::uint64_t, kPascalMaxN + 1>;

constexpr std::array<Row, kPascalMaxN + 1> make_triangle() {
  std::array<Row, kPascalMaxN + 1> t{};
  for (int n = 0; n <= kPascalMaxN; ++n) {
    t[n][0] = 1;
    for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k < n ? t[n - 1][k] : 0);
  }
  return t;
}

constexpr auto kTriangle = make_triangle();

}  // namespace

std::uint64_t pascal(int n, int k) {
  if (n < 0 || n > kPascalMaxN || k < 0 || k > n) return 0;
  return kTriangle[n][k];
}

}  // namespace repeater_rate::detail
