#pragma once

#include <string>

namespace rnc {

// Shortest round-trip decimal form; deterministic across runs.
std::string format_number(double x);

}  // namespace rnc
