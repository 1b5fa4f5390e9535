// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/error.hpp"

namespace spatialsens {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::RangeViolation: return "RangeViolation";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::WrongParamCount: return "WrongParamCount";
    case Errc::ParamOutOfRange: return "ParamOutOfRange";
    case Errc::InvalidBaseN: return "InvalidBaseN";
    case Errc::IndexOutOfBounds: return "IndexOutOfBounds";
    case Errc::VarianceZero: return "VarianceZero";
    case Errc::LayoutMismatch: return "LayoutMismatch";
    case Errc::NotSaltelliLayout: return "NotSaltelliLayout";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::InvalidK: return "InvalidK";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::EmptyCluster: return "EmptyCluster";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::OddDimension: return "OddDimension";
    case Errc::Disconnected: return "Disconnected";
    case Errc::UnsupportedDims: return "UnsupportedDims";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::DimsMismatch: return "DimsMismatch";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::AllAxesFiltered: return "AllAxesFiltered";
    case Errc::NegativeValue: return "NegativeValue";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::BadParamIndex: return "BadParamIndex";
    case Errc::AllEmpty: return "AllEmpty";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spatialsens
