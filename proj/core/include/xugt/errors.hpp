#pragma once

#include <stdexcept>
#include <string>

namespace xugt {

// Base class for all library failures.  Subclasses map onto distinct process
// exit codes in the command line tool, so every throw site picks the most
// specific class that applies.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A tensor shape, dimension, or layer contract was violated at run time.
class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// A model or tool configuration is structurally invalid.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A file could not be read, written, or decoded.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace xugt
