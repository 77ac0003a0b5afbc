#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rmnc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitVerifyFailed = 3;

/// Command-line front end; `args` excludes the program name.
///
/// Subcommands: density, simulate, evolve, verify. Values resolve as
/// defaults < JSON file given by --config < flags; RMNC_SEED replaces the seed
/// unless --seed is given.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Tool version: project version plus `git describe` at configure time.
[[nodiscard]] std::string version_string();

}  // namespace rmnc
