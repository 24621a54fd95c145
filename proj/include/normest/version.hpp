#pragma once

namespace normest {
inline constexpr const char* kVersion = "0.1.0";
}
