#pragma once

#include <limits>

#include "tropnet/errors.hpp"

namespace tropnet {

inline constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace tropnet
