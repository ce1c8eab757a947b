// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hetgt {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix shape mismatch.
struct DimensionError : Error { using Error::Error; };

/// Bad configuration value: unknown model kind, dropout outside [0,1), ...
struct ConfigError : Error { using Error::Error; };

/// Dataset file missing, malformed, or inconsistent with its manifest.
struct DataError : Error { using Error::Error; };

/// API contract violation: non-scalar loss, empty mask, too-small sample.
struct ContractError : Error { using Error::Error; };

/// Index outside a graph, tensor, or node-type range.
struct RangeError : Error { using Error::Error; };

/// NaN or Inf produced where a finite value is required.
struct NumericError : Error { using Error::Error; };

/// Malformed graph structure: duplicate edge, empty segment, dangling id.
struct StructureError : Error { using Error::Error; };

}  // namespace hetgt
