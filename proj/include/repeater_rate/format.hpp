#pragma once

#include <string>

namespace repeater_rate {

/// 17 significant digits ("%.17g"), integral values with a trailing ".0".
/// Parses back to the same double.
std::string format_real(double x);

}  // namespace repeater_rate
