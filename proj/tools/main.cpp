// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include <string>
#include <vector>

#include "gcf/cli.hpp"

int main(int argc, char** argv) {
  return gcf::cli::run(std::vector<std::string>(argv, argv + argc));
}
