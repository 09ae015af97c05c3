#pragma once

#include <stdexcept>
#include <string>

namespace ncag {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceFailure : public Error { using Error::Error; };
class NonPositiveSpectrum : public Error { using Error::Error; };
class DimMismatch : public Error { using Error::Error; };
class GenerationFailure : public Error { using Error::Error; };
class InvalidR : public Error { using Error::Error; };
class ScanBracketFailure : public Error { using Error::Error; };
class RankError : public Error { using Error::Error; };
class PartitionMismatch : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

inline void require_same_dim(long a, long b, const char* where) {
  if (a != b) {
    throw DimMismatch(std::string(where) + ": dimension " + std::to_string(a) +
                      " vs " + std::to_string(b));
  }
}

}  // namespace ncag
