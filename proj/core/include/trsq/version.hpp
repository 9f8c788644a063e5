#pragma once

#include <string_view>

namespace trsq {

inline constexpr std::string_view kVersion = "0.1.0";

// Tag recorded in artifacts so a reader knows which arithmetic produced
// certified quantities.
inline constexpr std::string_view kExactBackend = "gmp-rational";

}  // namespace trsq
