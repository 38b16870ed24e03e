#pragma once

namespace pbec {
inline constexpr const char* version = "0.1.0";
} // namespace pbec
