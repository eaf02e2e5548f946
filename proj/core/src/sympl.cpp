#include "symflow/sympl.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace symflow::sympl {

SymplecticMap::SymplecticMap(Eigen::MatrixXd entries) : L(std::move(entries)) {
  if (L.rows() != L.cols())
    throw std::invalid_argument("SymplecticMap: matrix must be square");
  if (L.rows() == 0 || L.rows() % 2 != 0)
    throw std::invalid_argument("SymplecticMap: dimension must be even and positive");
  n = static_cast<int>(L.rows()) / 2;
}

SingularSpectrum::SingularSpectrum(Eigen::VectorXd values, double pair_tol)
    : lambda(std::move(values)) {
  if (lambda.size() == 0 || lambda.size() % 2 != 0)
    throw std::invalid_argument("SingularSpectrum: need an even number of values");
  n = static_cast<int>(lambda.size()) / 2;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double a = lambda[2 * k], b = lambda[2 * k + 1];
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("SingularSpectrum: values must be positive");
    if (std::abs(a * b - 1.0) > pair_tol)
      throw std::invalid_argument("SingularSpectrum: pair product differs from 1");
    if (a < 1.0 - pair_tol)
      throw std::invalid_argument("SingularSpectrum: first entry of a pair must be >= 1");
    if (a > prev + pair_tol)
      throw std::invalid_argument("SingularSpectrum: pairs must be sorted descending");
    prev = a;
  }
}

Eigen::MatrixXd standard_J(int n) {
  if (n < 1) throw std::invalid_argument("standard_J: n must be positive");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    J(2 * k, 2 * k + 1) = -1.0;
    J(2 * k + 1, 2 * k) = 1.0;
  }
  return J;
}

bool is_symplectic(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols() || M.rows() == 0 || M.rows() % 2 != 0)
    throw std::invalid_argument("is_symplectic: matrix must be square with even dimension");
  const Eigen::MatrixXd J = standard_J(static_cast<int>(M.rows()) / 2);
  return (M.transpose() * J * M - J).cwiseAbs().maxCoeff() <= tol;
}

namespace {

void require_symplectic(const SymplecticMap& L, double tol, const char* who) {
  if (!is_symplectic(L.L, tol))
    throw std::invalid_argument(std::string(who) + ": input is not symplectic within tolerance");
}

// Symmetric eigendecomposition of L^T L with a conditioning guard.
struct GramEigen {
  Eigen::VectorXd mu;  // ascending
  Eigen::MatrixXd V;
};

GramEigen gram_eigen(const Eigen::MatrixXd& L, const char* who) {
  Eigen::MatrixXd S = L.transpose() * L;
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw numerical_error(std::string(who) + ": eigendecomposition failed");
  const double mumax = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() < 1e-14 * mumax)
    throw numerical_error(std::string(who) + ": L^T L is numerically singular");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

Eigen::MatrixXd polar_isometry(const SymplecticMap& L, double tol) {
  require_symplectic(L, tol, "polar_isometry");
  GramEigen ge = gram_eigen(L.L, "polar_isometry");
  Eigen::VectorXd invsqrt(ge.mu.size());
  for (int i = 0; i < ge.mu.size(); ++i)
    invsqrt[i] = 1.0 / std::sqrt(std::max(ge.mu[i], 1e-300));
  return L.L * (ge.V * invsqrt.asDiagonal() * ge.V.transpose());
}

SingularSpectrum paired_singular_values(const SymplecticMap& L, double tol) {
  require_symplectic(L, tol, "paired_singular_values");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L.L);
  const Eigen::VectorXd s = svd.singularValues();  // descending
  const int d = 2 * L.n;
  Eigen::VectorXd lam(d);
  for (int k = 0; k < L.n; ++k) {
    const double hi = s[k], lo = s[d - 1 - k];
    if (std::abs(hi * lo - 1.0) > 1e-8)
      throw numerical_error("paired_singular_values: reciprocal pairing failure");
    // geometric symmetrization makes the pair product exactly 1
    const double l = std::sqrt(hi / lo);
    lam[2 * k] = l;
    lam[2 * k + 1] = 1.0 / l;
  }
  return SingularSpectrum(std::move(lam));
}

namespace {

// Clusters of log singular values with relative tolerance; input ascending mu.
struct Cluster {
  double logsigma;          // representative log(sigma), mean over members
  std::vector<int> members; // eigenvector column indices
};

std::vector<Cluster> cluster_spectrum(const Eigen::VectorXd& mu, double reltol) {
  std::vector<Cluster> out;
  for (int i = 0; i < mu.size(); ++i) {
    const double ls = 0.5 * std::log(mu[i]);
    if (!out.empty() && std::abs(ls - out.back().logsigma) <= reltol) {
      Cluster& c = out.back();
      c.logsigma = (c.logsigma * static_cast<double>(c.members.size()) + ls) /
                   static_cast<double>(c.members.size() + 1);
      c.members.push_back(i);
    } else {
      out.push_back({ls, {i}});
    }
  }
  return out;
}

}  // namespace

AdaptedBasis adapted_basis(const SymplecticMap& L, double tol) {
  require_symplectic(L, tol, "adapted_basis");
  const int d = 2 * L.n;
  const Eigen::MatrixXd J = standard_J(L.n);
  GramEigen ge = gram_eigen(L.L, "adapted_basis");

  const double cluster_tol = 1e-8;
  std::vector<Cluster> clusters = cluster_spectrum(ge.mu, cluster_tol);

  // Pair clusters reciprocally: V(alpha) with alpha > 1 against V(1/alpha).
  const int nc = static_cast<int>(clusters.size());
  std::vector<int> partner(nc, -1);
  int one_cluster = -1;
  for (int a = 0; a < nc; ++a) {
    if (std::abs(clusters[a].logsigma) <= cluster_tol) {
      one_cluster = a;
      partner[a] = a;
      continue;
    }
    if (partner[a] >= 0) continue;
    for (int b = a + 1; b < nc; ++b) {
      if (partner[b] >= 0) continue;
      if (std::abs(clusters[a].logsigma + clusters[b].logsigma) <= 10 * cluster_tol) {
        partner[a] = b;
        partner[b] = a;
        break;
      }
    }
    if (partner[a] < 0)
      throw numerical_error("adapted_basis: no reciprocal partner for a singular subspace");
  }
  for (int a = 0; a < nc; ++a)
    if (a != one_cluster && partner[a] == a)
      throw numerical_error("adapted_basis: cluster pairing failed");

  Eigen::MatrixXd A(d, d);
  Eigen::VectorXd lam(d);
  int col = 0;

  // Expanding clusters (alpha > 1) in descending alpha; the eigenvalues of
  // ge are ascending, so walk clusters from the top.
  for (int a = nc - 1; a >= 0; --a) {
    if (clusters[a].logsigma <= cluster_tol) continue;
    const Cluster& c = clusters[a];
    if (static_cast<size_t>(partner[a]) >= clusters.size() ||
        clusters[partner[a]].members.size() != c.members.size())
      throw numerical_error("adapted_basis: reciprocal subspaces have mismatched dimensions");
    // members ascending in mu; within the cluster emit descending sigma
    for (auto it = c.members.rbegin(); it != c.members.rend(); ++it) {
      const Eigen::VectorXd u = ge.V.col(*it);
      const double sigma = std::sqrt(ge.mu[*it]);
      A.col(col) = u;
      A.col(col + 1) = J * u;
      lam[col] = sigma;
      lam[col + 1] = 1.0 / sigma;
      col += 2;
    }
  }

  // V(1): greedy (u, Ju) pairs through projector deflation.
  if (one_cluster >= 0) {
    const Cluster& c = clusters[one_cluster];
    if (c.members.size() % 2 != 0)
      throw numerical_error("adapted_basis: odd-dimensional fixed singular subspace");
    Eigen::MatrixXd W(d, c.members.size());
    for (size_t m = 0; m < c.members.size(); ++m) W.col(m) = ge.V.col(c.members[m]);
    Eigen::MatrixXd R = W * W.transpose();
    for (size_t pair = 0; pair < c.members.size() / 2; ++pair) {
      int best = 0;
      double bestn = -1.0;
      for (int j = 0; j < d; ++j) {
        const double nn = R.col(j).norm();
        if (nn > bestn + 1e-15) {
          bestn = nn;
          best = j;
        }
      }
      if (bestn < 1e-8)
        throw numerical_error("adapted_basis: projector deflation collapsed");
      const Eigen::VectorXd u = R.col(best).normalized();
      Eigen::VectorXd v = R * (J * u);
      const double vn = v.norm();
      if (vn < 1e-8)
        throw numerical_error("adapted_basis: fixed subspace is not J-invariant");
      v /= vn;
      A.col(col) = u;
      A.col(col + 1) = v;
      lam[col] = 1.0;
      lam[col + 1] = 1.0;
      col += 2;
      R -= u * u.transpose() + v * v.transpose();
    }
  }

  if (col != d) throw numerical_error("adapted_basis: basis construction incomplete");

  AdaptedBasis out;
  out.A = std::move(A);
  out.A_tilde = polar_isometry(L, tol) * out.A;
  out.spectrum = SingularSpectrum(std::move(lam));
  return out;
}

SymplecticMap random_symplectic(int n, std::uint64_t seed, double spread) {
  if (n < 1) throw std::invalid_argument("random_symplectic: n must be positive");
  if (!(spread > 0.0)) throw std::invalid_argument("random_symplectic: spread must be positive");
  const int d = 2 * n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-spread, spread);
  Eigen::MatrixXd S(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S(i, j) = uni(rng);
  S = 0.5 * (S + S.transpose()).eval();
  const Eigen::MatrixXd H = standard_J(n) * S;  // Hamiltonian: exp is symplectic
  return SymplecticMap(H.exp());
}

}  // namespace symflow::sympl
