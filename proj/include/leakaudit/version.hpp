#pragma once

namespace leakaudit {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace leakaudit
