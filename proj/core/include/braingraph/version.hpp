#pragma once

namespace braingraph {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace braingraph
