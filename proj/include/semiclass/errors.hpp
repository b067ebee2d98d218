#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace semiclass {

// Base of every error raised by the library; carries a printable message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Matrix is not in SL(2,Z) or not hyperbolic where hyperbolicity is required.
class InvalidMap : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidObservable : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class QuantizationConditionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class AliasingError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class GeometryError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Exhaustive search would exceed the configured budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what + " (residual " + format(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  double residual_;
};

class DegenerateConstruction : public Error {
 public:
  using Error::Error;
};

class UnderResolved : public Error {
 public:
  using Error::Error;
};

// Billiard trajectory hits the boundary tangentially; reflection is
// ill-conditioned there. bounce_index is the collision that failed (0-based)
// or npos when raised outside a flow.
class GrazingError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  GrazingError(const std::string& what, double cos_incidence, std::size_t bounce_index = npos)
      : Error(what), cos_incidence_(cos_incidence), bounce_index_(bounce_index) {}
  double cos_incidence() const noexcept { return cos_incidence_; }
  std::size_t bounce_index() const noexcept { return bounce_index_; }

 private:
  double cos_incidence_;
  std::size_t bounce_index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace semiclass
