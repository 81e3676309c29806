#pragma once

namespace thermores {

inline constexpr const char* version = "0.1.0";

}
