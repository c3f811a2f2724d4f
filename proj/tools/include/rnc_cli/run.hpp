#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rnc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitUnreadable = 66;

// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "RNC_OUTPUT_DIR";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace rnc::cli
