#pragma once

#include <string_view>

namespace seldsynth {

inline constexpr std::string_view kToolVersion = "0.1.0";

}
