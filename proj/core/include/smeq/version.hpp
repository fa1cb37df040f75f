#pragma once

namespace smeq {
inline constexpr const char* kVersion = "0.1.0";
}
