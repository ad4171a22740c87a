#pragma once

#include <string_view>

namespace echelon {

inline constexpr std::string_view kToolName = "echelon";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace echelon
