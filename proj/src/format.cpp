#include "repeater_rate/format.hpp"

#include <cstdio>
#include <cstring>

namespace repeater_rate {

std::string format_real(double x) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf, static_cast<std::size_t>(len));
  // keep integral values visibly real: 3 -> 3.0
  if (s.find_first_of(".eni") == std::string::npos) s += ".0";
  return s;
}

}  // namespace repeater_rate
