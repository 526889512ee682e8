#pragma once

namespace avgraph {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace avgraph
