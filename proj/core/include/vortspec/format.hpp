#pragma once

#include <string>

namespace vortspec {

// 17 significant digits, locale independent.
std::string format_real(double value);

}  // namespace vortspec
