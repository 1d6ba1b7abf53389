#pragma once

#include <stdexcept>
#include <string>

namespace tropnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct StructureError : Error { using Error::Error; };
struct UnboundedError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct UnitError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct SchemaError : ConfigError { using ConfigError::ConfigError; };

}  // namespace tropnet
