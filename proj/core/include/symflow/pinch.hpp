#pragma once

// Scalar pinching arithmetic: the Jacobian bound *Omega, conversions between
// *Omega defects and singular-value bounds, the curvature forcing term, the
// logarithmic comparison inequality, and the closed-form comparison ODE.

#include <Eigen/Dense>
#include <cstdint>

#include "symflow/errors.hpp"
#include "symflow/sympl.hpp"

namespace symflow::pinch {

// Bundle of the constants appearing in the long-time argument.
// K1, K2 are existence-only constants; the defaults are for demonstrations.
struct PinchingParams {
  int n = 0;
  double Lambda0 = 0.0;  // ignored when lambda0_infinite
  bool lambda0_infinite = false;
  double Lambda1 = 0.0;
  double delta = 0.0;
  double eps = 0.0;  // in (0, 2^-n)
  double c = 0.0;    // log-comparison constant
  double K1 = 4.0;
  double K2 = 8.0;
  double C0 = 0.0;  // initial min *Omega, in (0, 2^-n]
};

// Derives eps from Lambda1 and c from Lambda0, validating all invariants
// (Lambda1 < Lambda0 when finite, ranges of eps and C0).
PinchingParams derive_params(int n, double Lambda0, double Lambda1,
                             double delta, double C0, double K1 = 4.0,
                             double K2 = 8.0);

// *Omega = 1 / prod over pairs (lambda + 1/lambda); in (0, 2^-n], with
// equality exactly at lambda = 1.
double star_omega(const sympl::SingularSpectrum& spectrum);

// eps = 2^-n - (sqrt(Lambda) + 1/sqrt(Lambda))^-n. Lambda-pinched spectra
// satisfy star_omega >= 2^-n - eps. Requires Lambda > 1.
double eps_from_lambda(int n, double Lambda);

// Inverse direction: any spectrum with star_omega >= 2^-n - eps is
// Lambda'-pinched for Lambda' = (r + sqrt(r^2-1))^2, r = 2^-n/(2^-n - eps).
// Requires 0 < eps < 2^-n.
double lambda_from_eps(int n, double eps);

// Initial pinching threshold Lambda1 < Lambda0 that guarantees
// Lambda0-pinching is preserved. The n = 1 case needs no pinching and is
// rejected; lambda1_formula exposes the bare closed form without the guard.
double lambda1_from_lambda0(int n, double Lambda0);
double lambda1_formula(int n, double Lambda0);

// sum over pairs of (1 - lambda^2)^2 / (1 + lambda^2)^2, in [0, n).
double curvature_sum(const sympl::SingularSpectrum& spectrum);

// Verifies (x-4)/x >= c (ln(x)/2 - ln 2) with c = 8/(sqrt(L0)+1/sqrt(L0))^2
// on a grid over [4, (sqrt(L0)+1/sqrt(L0))^2].
struct LogComparisonResult {
  double c = 0.0;
  bool inequality_holds = false;
  double worst_margin = 0.0;
};
LogComparisonResult log_comparison(double Lambda0, int grid_steps = 10001);

// Closed-form solution of y' = -(delta C0 - eps K1) y^2 + K2 y with
// y(0) = y0 > 0. Rejects delta C0 - eps K1 <= 0. The solution tends to
// K2 / (delta C0 - eps K1).
double comparison_ode(double K1, double K2, double delta, double C0,
                      double eps, double y0, double t);

// Random spectrum inside the Lambda box: log parameters uniform in
// [-ln(Lambda)/2, ln(Lambda)/2], reciprocal pairs by construction.
sympl::SingularSpectrum random_pinched_spectrum(int n, double Lambda,
                                                std::uint64_t seed);

}  // namespace symflow::pinch
