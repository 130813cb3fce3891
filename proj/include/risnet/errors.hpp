#pragma once

#include <stdexcept>
#include <string>

namespace risnet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};

struct PoleError : Error {
  using Error::Error;
};

// s_a / s_b are reported when known; NaN otherwise
struct OutsideRocError : Error {
  double s_a, s_b;
  OutsideRocError(const std::string& what, double sa, double sb)
      : Error(what), s_a(sa), s_b(sb) {}
};

struct QuadratureFailure : Error {
  double best_estimate;
  double error_estimate;
  QuadratureFailure(const std::string& what, double best, double err)
      : Error(what), best_estimate(best), error_estimate(err) {}
};

struct DivergenceError : Error {
  using Error::Error;
};

struct SingularityError : Error {
  using Error::Error;
};

} // namespace risnet
