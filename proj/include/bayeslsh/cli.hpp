// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bayeslsh {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;

// Runs the `bayeslsh` command line. `args` excludes the program name. Normal
// output goes to `out` unless redirected with --output; diagnostics and the
// effective seed go to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bayeslsh
