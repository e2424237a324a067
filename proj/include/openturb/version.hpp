#pragma once

namespace openturb {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace openturb
