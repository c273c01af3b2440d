#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace newton_imbed {

/// 50-digit binary float for diagnostics whose answer sits far below double
/// rounding (difference quotients of f, truncated weak-derivative identities).
using Extended = boost::multiprecision::cpp_bin_float_50;

}  // namespace newton_imbed
