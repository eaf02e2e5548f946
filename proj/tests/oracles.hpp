#pragma once

// Independent oracles shared by the unit and acceptance suites. Everything
// here is deliberately naive -- raw loops over all ordered index placements,
// classical RK4 -- so that agreement with the library implementations is a
// meaningful cross-check rather than the same code evaluated twice.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

inline int partner(int i) { return (i % 2 == 0) ? i + 1 : i - 1; }

// Dense d x d x d tensor with all ordered placements stored explicitly.
class DenseTensor {
 public:
  explicit DenseTensor(int d) : d_(d), v_(static_cast<std::size_t>(d) * d * d, 0.0) {}
  double& at(int i, int j, int k) { return v_[(static_cast<std::size_t>(i) * d_ + j) * d_ + k]; }
  double at(int i, int j, int k) const { return v_[(static_cast<std::size_t>(i) * d_ + j) * d_ + k]; }
  int dim() const { return d_; }

 private:
  int d_;
  std::vector<double> v_;
};

// Fill all six placements of each canonical triple i <= j <= k from the
// canonical coordinate vector (same ordering the library uses).
inline DenseTensor dense_from_canonical(int d, const Eigen::VectorXd& v) {
  DenseTensor h(d);
  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  int a = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int k = j; k < d; ++k) {
        const int idx[3] = {i, j, k};
        for (const auto& p : perms)
          h.at(idx[p[0]], idx[p[1]], idx[p[2]]) = v[a];
        ++a;
      }
  return h;
}

inline double brute_norm_sq(const DenseTensor& h) {
  const int d = h.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) s += h.at(i, j, k) * h.at(i, j, k);
  return s;
}

inline double brute_pair_term(const DenseTensor& h) {
  const int d = h.dim();
  double s = 0.0;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; i += 2) {
      const int ip = i + 1;
      s += h.at(i, i, k) * h.at(ip, ip, k) - h.at(i, ip, k) * h.at(i, ip, k);
    }
  return s;
}

// Evolution-equation expression: ordered-index sums with the signed
// lambda_i lambda_j cross terms over all i < j with j not the partner of i.
inline double brute_evolution(const Eigen::VectorXd& lam, const DenseTensor& h) {
  const int d = h.dim();
  double s3 = 0.0;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        if (j == partner(i)) continue;
        const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        s3 += sign * lam[i] * lam[j] *
              (h.at(partner(i), i, k) * h.at(partner(j), j, k) -
               h.at(partner(i), j, k) * h.at(partner(j), i, k));
      }
  return brute_norm_sq(h) - 2.0 * brute_pair_term(h) - 2.0 * s3;
}

// Grouped quadratic-form expression: the same value organized by pairs,
// with the (lambda_i - lambda_i')(lambda_j - lambda_j') and product-sum
// coefficients written out.
inline double brute_quadform(const Eigen::VectorXd& lam, const DenseTensor& h) {
  const int d = h.dim();
  double s4 = 0.0, s5 = 0.0;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; i += 2)
      for (int j = i + 2; j < d; j += 2) {
        const int ip = i + 1, jp = j + 1;
        s4 += (lam[i] - lam[ip]) * (lam[j] - lam[jp]) * h.at(ip, i, k) * h.at(jp, j, k);
        s5 += -(lam[i] * lam[j] + lam[ip] * lam[jp]) * h.at(ip, j, k) * h.at(jp, i, k) +
              (lam[ip] * lam[j] + lam[i] * lam[jp]) * h.at(i, j, k) * h.at(jp, ip, k);
      }
  return brute_norm_sq(h) - 2.0 * brute_pair_term(h) - 2.0 * s4 - 2.0 * s5;
}

// Complete-square correction distinguishing Qtilde from Q.
inline double brute_qtilde_extra(const Eigen::VectorXd& lam, const DenseTensor& h) {
  const int d = h.dim();
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    double inner = 0.0;
    for (int i = 0; i < d; i += 2) inner += (lam[i] - lam[i + 1]) * h.at(i, i + 1, k);
    s += inner * inner;
  }
  return s;
}

// Reciprocally paired spectrum from log parameters drawn uniformly in
// [-spread, spread], independent of the library's generators.
inline Eigen::VectorXd random_paired_lambda(int n, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-spread, spread);
  Eigen::VectorXd lam(2 * n);
  for (int k = 0; k < n; ++k) {
    const double t = uni(rng);
    lam[2 * k] = std::exp(t);
    lam[2 * k + 1] = std::exp(-t);
  }
  return lam;
}

inline Eigen::VectorXd random_coords(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(m);
  for (int a = 0; a < m; ++a) v[a] = gauss(rng);
  return v;
}

// Classical fixed-step RK4 for y' = f(t, y), y(0) = y0, integrated to t1.
inline double rk4(const std::function<double(double, double)>& f, double y0,
                  double t1, int steps) {
  double y = y0, t = 0.0;
  const double dt = t1 / steps;
  for (int s = 0; s < steps; ++s) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
    const double k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
    const double k4 = f(t + dt, y + dt * k3);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
  }
  return y;
}

// Five-point central difference, O(step^4).
inline double fd_derivative(const std::function<double(double)>& f, double t,
                            double step) {
  return (-f(t + 2 * step) + 8 * f(t + step) - 8 * f(t - step) + f(t - 2 * step)) /
         (12.0 * step);
}

}  // namespace oracles
