// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include <iostream>
#include <string>
#include <vector>

#include "bayeslsh/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  const std::vector<std::string> args(argv + 1, argv + argc);
  return bayeslsh::run_cli(args, std::cout, std::cerr);
}
