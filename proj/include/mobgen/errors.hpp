// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mobgen {

/// Malformed or inconsistent description/config file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes disagree with the model.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& what, long expected, long got)
      : std::invalid_argument(what + ": expected " + std::to_string(expected) +
                              ", got " + std::to_string(got)) {}
};

}  // namespace mobgen
