// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mobgen {

/// Base of every binary/manifest decoding failure.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadMagic : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Header dimensions disagree with the bytes that follow.
class PayloadMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class ManifestError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace mobgen
