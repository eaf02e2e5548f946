#include "symflow/pinch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace symflow::pinch {

namespace {

double pow2neg(int n) { return std::ldexp(1.0, -n); }

// s(Lambda) = sqrt(Lambda) + 1/sqrt(Lambda), the pair sum at the box edge.
double edge_sum(double Lambda) {
  const double r = std::sqrt(Lambda);
  return r + 1.0 / r;
}

}  // namespace

PinchingParams derive_params(int n, double Lambda0, double Lambda1,
                             double delta, double C0, double K1, double K2) {
  if (n < 1) throw std::invalid_argument("derive_params: n must be positive");
  if (!(Lambda0 > 1.0)) throw std::invalid_argument("derive_params: Lambda0 must exceed 1");
  if (!(Lambda1 > 1.0) || !(Lambda1 < Lambda0))
    throw std::invalid_argument("derive_params: need 1 < Lambda1 < Lambda0");
  if (!(delta > 0.0)) throw std::invalid_argument("derive_params: delta must be positive");
  if (!(K1 > 0.0) || !(K2 > 0.0))
    throw std::invalid_argument("derive_params: K1, K2 must be positive");
  const double cap = pow2neg(n);
  if (!(C0 > 0.0) || !(C0 <= cap))
    throw std::invalid_argument("derive_params: C0 must lie in (0, 2^-n]");

  PinchingParams p;
  p.n = n;
  p.Lambda0 = Lambda0;
  p.lambda0_infinite = std::isinf(Lambda0);
  p.Lambda1 = Lambda1;
  p.delta = delta;
  // Lambda1-pinched initial data guarantees star_omega >= 2^-n - eps; when
  // Lambda1 comes from lambda1_from_lambda0 this equals
  // 2^-n (1 - 2/(sqrt(Lambda0) + 1/sqrt(Lambda0))).
  p.eps = eps_from_lambda(n, Lambda1);
  // degenerates to 0 for infinite Lambda0 (the n = 1 case, where the
  // comparison argument is not needed)
  p.c = 8.0 / (edge_sum(Lambda0) * edge_sum(Lambda0));
  p.K1 = K1;
  p.K2 = K2;
  p.C0 = C0;
  return p;
}

double star_omega(const sympl::SingularSpectrum& spectrum) {
  double prod = 1.0;
  for (int k = 0; k < spectrum.n; ++k)
    prod *= spectrum.lambda[2 * k] + spectrum.lambda[2 * k + 1];
  return 1.0 / prod;
}

double eps_from_lambda(int n, double Lambda) {
  if (n < 1) throw std::invalid_argument("eps_from_lambda: n must be positive");
  if (!(Lambda > 1.0)) throw std::invalid_argument("eps_from_lambda: Lambda must exceed 1");
  return pow2neg(n) - std::pow(edge_sum(Lambda), -n);
}

double lambda_from_eps(int n, double eps) {
  if (n < 1) throw std::invalid_argument("lambda_from_eps: n must be positive");
  if (!(eps > 0.0) || !(eps < pow2neg(n)))
    throw std::invalid_argument("lambda_from_eps: eps must lie in (0, 2^-n)");
  const double r = pow2neg(n) / (pow2neg(n) - eps);
  const double root = r + std::sqrt(r * r - 1.0);
  return root * root;
}

double lambda1_formula(int n, double Lambda0) {
  if (n < 1) throw std::invalid_argument("lambda1_formula: n must be positive");
  if (!(Lambda0 > 1.0)) throw std::invalid_argument("lambda1_formula: Lambda0 must exceed 1");
  const double s = std::pow(0.5 * edge_sum(Lambda0), 1.0 / n);
  const double root = s + std::sqrt(s * s - 1.0);
  return root * root;
}

double lambda1_from_lambda0(int n, double Lambda0) {
  if (n == 1)
    throw std::invalid_argument(
        "lambda1_from_lambda0: no pinching threshold is needed for surfaces (n = 1)");
  return lambda1_formula(n, Lambda0);
}

double curvature_sum(const sympl::SingularSpectrum& spectrum) {
  double sum = 0.0;
  for (int k = 0; k < spectrum.n; ++k) {
    const double l2 = spectrum.lambda[2 * k] * spectrum.lambda[2 * k];
    const double r = (1.0 - l2) / (1.0 + l2);
    sum += r * r;
  }
  return sum;
}

LogComparisonResult log_comparison(double Lambda0, int grid_steps) {
  if (!(Lambda0 > 1.0)) throw std::invalid_argument("log_comparison: Lambda0 must exceed 1");
  if (grid_steps < 2) throw std::invalid_argument("log_comparison: need at least 2 grid points");
  LogComparisonResult out;
  const double s = edge_sum(Lambda0);
  out.c = 8.0 / (s * s);
  const double xmax = s * s;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_steps; ++i) {
    const double x =
        4.0 + (xmax - 4.0) * static_cast<double>(i) / static_cast<double>(grid_steps - 1);
    const double lhs = (x - 4.0) / x;
    const double rhs = out.c * (0.5 * std::log(x) - std::log(2.0));
    worst = std::min(worst, lhs - rhs);
  }
  out.worst_margin = worst;
  out.inequality_holds = worst >= -1e-12;
  return out;
}

double comparison_ode(double K1, double K2, double delta, double C0,
                      double eps, double y0, double t) {
  if (!(K1 > 0.0) || !(K2 > 0.0) || !(delta > 0.0) || !(C0 > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("comparison_ode: coefficients must be positive");
  if (!(y0 > 0.0)) throw std::invalid_argument("comparison_ode: y0 must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("comparison_ode: t must be nonnegative");
  const double a = delta * C0 - eps * K1;
  if (!(a > 0.0))
    throw std::invalid_argument(
        "comparison_ode: effective quadratic coefficient delta*C0 - eps*K1 must be positive");
  const double yinf = K2 / a;
  if (y0 == yinf) return y0;  // constant solution
  // y(t) = yinf * K / (K - e^{-K2 t}), K = a y0 / (a y0 - K2); the e^{-K2 t}
  // form avoids overflow for large t. K > 1 above the equilibrium, K < 0
  // below it, so the denominator never vanishes for t >= 0.
  const double K = a * y0 / (a * y0 - K2);
  return yinf * K / (K - std::exp(-K2 * t));
}

sympl::SingularSpectrum random_pinched_spectrum(int n, double Lambda,
                                                std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_pinched_spectrum: n must be positive");
  if (!(Lambda >= 1.0))
    throw std::invalid_argument("random_pinched_spectrum: Lambda must be >= 1");
  const double L = 0.5 * std::log(Lambda);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-L, L);
  std::vector<double> tick(n);
  for (int k = 0; k < n; ++k) tick[k] = (L > 0.0) ? uni(rng) : 0.0;
  // sort by |t| descending so the canonical pair ordering holds
  std::sort(tick.begin(), tick.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  Eigen::VectorXd lam(2 * n);
  for (int k = 0; k < n; ++k) {
    const double l = std::exp(std::abs(tick[k]));
    lam[2 * k] = l;
    lam[2 * k + 1] = 1.0 / l;
  }
  return sympl::SingularSpectrum(std::move(lam));
}

}  // namespace symflow::pinch
