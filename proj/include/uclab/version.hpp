#pragma once

namespace uclab {

inline constexpr const char* kToolVersion = "0.1.0";

}
