#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gridsced {

/// Base class for all domain errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (case files, cross references).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a usable result.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline bool nearly_equal(double a, double b, double abs_tol, double rel_tol = 0.0) {
  return std::abs(a - b) <= abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace gridsced
