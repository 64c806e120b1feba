#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace troquad {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalid = 2,
  kExitDivergent = 3,
  kExitRejection = 4,
  kExitMemory = 5,
};

/// Runs the command line front end. `args` excludes the program name.
/// JSON goes to `out`, human-readable text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a(const std::string& bytes);

/// Parses sizes such as "1048576", "512K", "64M" or "8G".
std::uint64_t parse_bytes(const std::string& text);

}  // namespace troquad
