#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace oslab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Which evaluation path produced a special-function value.  Exposed so that
// overlap tests and the table-dump tool can report per-point provenance.
enum class EvalMethod { series, asymptotic, quadrature, ode_march };

inline const char* to_string(EvalMethod m) {
  switch (m) {
    case EvalMethod::series: return "series";
    case EvalMethod::asymptotic: return "asymptotic";
    case EvalMethod::quadrature: return "quadrature";
    case EvalMethod::ode_march: return "ode-march";
  }
  return "?";
}

// A value together with the method that produced it.
struct TaggedValue {
  Complex value;
  EvalMethod method;
};

// Argument outside the supported domain (sector guards, overflow guards,
// profile preconditions).  Callers that scan parameter ranges catch this and
// skip the point; the CLI maps it to a config/usage error.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// An iteration failed to reach its tolerance within its cap.  Carries the
// last achieved residual so callers can report how close it got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace oslab
