// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "mobgen/harness.hpp"

int main(int argc, char** argv) {
  return mobgen::run_cli(argc, argv, std::cout, std::cerr);
}
