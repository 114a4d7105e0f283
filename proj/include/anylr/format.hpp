#pragma once

#include <string>

namespace anylr {

// Full-precision scientific notation (17 significant digits); round-trips
// any double through text exactly.
std::string fmt_full(double x);

// Compact human-readable form for labels and manifests.
std::string fmt_g(double x);

}  // namespace anylr
