#pragma once

namespace ipwcdf {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace ipwcdf
