// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates tests/golden. Only rerun on a deliberate format change.
#include <iostream>

#include "golden_fixture.hpp"

int main() {
  using namespace mobgen;
  const auto dir = testing::golden_dir();
  std::filesystem::create_directories(dir);
  write_array(dir / "array.mbrt", testing::golden_array());
  write_cloud(dir / "cloud.mbpc", testing::golden_cloud());
  write_demo(testing::golden_demo(), dir / "demo");
  std::cout << "wrote " << dir << "\n";
  return 0;
}
