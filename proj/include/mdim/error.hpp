// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mdim {

enum class ErrorCode {
  invalid_argument = 1,
  config = 2,
  numeric = 3,
  io = 4,
  resource = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when successive quadrature refinements disagree beyond tolerance.
/// Carries the last two estimates so callers can judge how far off they are.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double coarse, double fine)
      : Error(ErrorCode::numeric, what), coarse_(coarse), fine_(fine) {}

  double coarse_estimate() const noexcept { return coarse_; }
  double fine_estimate() const noexcept { return fine_; }

 private:
  double coarse_;
  double fine_;
};

/// Raised by grid searches that fail to settle; reports the bracketing values.
class SearchError : public Error {
 public:
  SearchError(const std::string& what, double low, double high)
      : Error(ErrorCode::numeric, what), low_(low), high_(high) {}

  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

 private:
  double low_;
  double high_;
};

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorCode::invalid_argument, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

}  // namespace mdim
