#ifndef MIXFILT_SPECIAL_FUNCTIONS_HPP
#define MIXFILT_SPECIAL_FUNCTIONS_HPP

#include <stdexcept>
#include <string>

namespace mixfilt {

// log_gamma / digamma / trigamma use the same scheme: shift the argument
// upward by the recurrence until it reaches the asymptotic regime (x >= 10),
// then evaluate the Stirling-type series there.  All three throw
// std::domain_error for x <= 0 or non-finite x.

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// Psi(x) = d/dx ln Gamma(x) for x > 0.
double digamma(double x);

// Psi'(x) for x > 0.
double trigamma(double x);

struct SolverSettings {
  int max_iterations = 100;
  double tolerance = 1e-12;  // on |res1| + |res2|
  double damping = 1.0;      // in (0,1]; global scale on the Newton step

  void validate() const;
};

// Thrown when the Newton iteration stops before the residual target is met.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct DigammaSolution {
  double a = 0;
  double b = 0;
  int iterations = 0;
  double residual = 0;
};

// Solves  Psi(A) - Psi(A+B) = r1,  Psi(B) - Psi(A+B) = r2  for A, B > 0.
//
// (r1, r2) must lie in the attainable range: both negative and
// exp(r1) + exp(r2) < 1 (the values are expectations of ln(beta) and
// ln(1-beta) under some distribution on (0,1)).  Infeasible targets raise
// std::domain_error.  Newton steps are scaled by settings.damping and then
// halved until both coordinates stay strictly positive; running out of
// iterations raises SolverError carrying the final residual.
DigammaSolution solve_digamma_system(double r1, double r2,
                                     double initial_a, double initial_b,
                                     const SolverSettings& settings = {});

}  // namespace mixfilt

#endif
