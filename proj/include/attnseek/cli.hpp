#pragma once

#include <ostream>
#include <span>
#include <string>

namespace attnseek {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `attnseek` tool; args excludes the program name.
//
//   attnseek score  --bundles DIR [--corpus FILE] [--method NAME] [--out DIR]
//   attnseek eval   --bundles DIR --corpus FILE [--method NAME] [--top-k 5,10,15] [--ablate]
//   attnseek ablate --bundles DIR --corpus FILE [--top-k 5,10,15]
//   attnseek report --bundles DIR [--corpus FILE] [--out DIR]
//
// Returns 0 on success, 1 when some documents failed, 2 on usage errors.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace attnseek
