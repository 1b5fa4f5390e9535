// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spatialsens {

enum class Errc {
  MissingFile,
  SizeMismatch,
  RangeViolation,
  MalformedManifest,
  WrongParamCount,
  ParamOutOfRange,
  InvalidBaseN,
  IndexOutOfBounds,
  VarianceZero,
  LayoutMismatch,
  NotSaltelliLayout,
  TooFewSamples,
  InvalidK,
  DegenerateData,
  EmptyCluster,
  LengthMismatch,
  OddDimension,
  Disconnected,
  UnsupportedDims,
  SeriesTooShort,
  DimsMismatch,
  GridMismatch,
  AllAxesFiltered,
  NegativeValue,
  EmptySelection,
  BadParamIndex,
  AllEmpty,
  InvalidArgument,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (CLI, HTTP layer, tests) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spatialsens
