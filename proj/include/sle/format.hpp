#pragma once

#include <string>

namespace sle {

/// "%.17g" formatting that ignores the global locale.
std::string format_real(double x);

}  // namespace sle
