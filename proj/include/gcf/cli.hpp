// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <string>
#include <vector>

namespace gcf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitViolation = 3;

/// Environment variable naming a remote logit service; used when
/// --original is omitted or given as "remote".
inline constexpr const char* kRemoteEnv = "GCF_REMOTE";

/// Runs the command line `args` (args[0] is the program name). Logs go to
/// standard error; data goes to files only.
int run(const std::vector<std::string>& args);

}  // namespace gcf::cli
