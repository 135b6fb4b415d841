#pragma once

namespace netpred {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netpred
