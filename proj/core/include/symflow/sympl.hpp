#pragma once

// Linear symplectic algebra: reciprocally paired singular values, the polar
// isometry, and adapted orthonormal bases in which J takes its standard
// 2x2 block form. Everything is dense and small (2n x 2n, n <= a few).

#include <Eigen/Dense>
#include <cstdint>

#include "symflow/errors.hpp"

namespace symflow::sympl {

// A linear map of R^{2n} expected to satisfy L^T J L = J.
// Construction only checks the shape; symplecticity is validated by the
// operations that require it (with an explicit tolerance).
struct SymplecticMap {
  int n = 0;
  Eigen::MatrixXd L;

  explicit SymplecticMap(Eigen::MatrixXd entries);
};

// Singular values arranged in canonical reciprocal pairs:
// lambda = (l_1, 1/l_1, l_2, 1/l_2, ...) with l_k >= 1 and l_k nonincreasing.
struct SingularSpectrum {
  int n = 0;
  Eigen::VectorXd lambda;

  SingularSpectrum() = default;
  // Validates pairing, ordering and positivity; pair products must equal 1
  // within pair_tol.
  explicit SingularSpectrum(Eigen::VectorXd values, double pair_tol = 1e-8);
};

// Orthonormal source basis A (columns a_s) diagonalizing L^T L, its image
// basis A_tilde = E A under the polar isometry, and the matching spectrum.
// In this basis J a_s = (-1)^{s+1} a_{s'} with s' the pair partner of s,
// i.e. A^T J A is block diagonal with blocks [[0,-1],[1,0]].
struct AdaptedBasis {
  Eigen::MatrixXd A;
  Eigen::MatrixXd A_tilde;
  SingularSpectrum spectrum;
};

// Pair partner (0-based): 0<->1, 2<->3, ...
inline int pair_partner(int i) { return (i % 2 == 0) ? i + 1 : i - 1; }

// The standard complex structure: block diagonal [[0,-1],[1,0]].
Eigen::MatrixXd standard_J(int n);

// max-norm test of M^T J M = J. Throws std::invalid_argument for matrices
// that are not square with even dimension.
bool is_symplectic(const Eigen::MatrixXd& M, double tol = 1e-10);

// E = L (L^T L)^{-1/2} through a symmetric eigendecomposition of L^T L.
// E is orthogonal and commutes with J. Rejects non-symplectic input and
// ill-conditioned L (smallest eigenvalue of L^T L below 1e-14 times the
// largest).
Eigen::MatrixXd polar_isometry(const SymplecticMap& L, double tol = 1e-10);

// Singular values of L in canonical reciprocal pairs. Each pair is
// symmetrized to make the reciprocity exact; the multiset agrees with the
// plain SVD of L within tolerance.
SingularSpectrum paired_singular_values(const SymplecticMap& L,
                                        double tol = 1e-10);

// Adapted basis built the way the existence proof does: eigenvector bases of
// the singular subspaces V(alpha) with alpha > 1, images under J appended for
// V(1/alpha), and V(1) filled with (u, Ju) pairs chosen greedily. Eigenvalue
// clusters are grouped with relative tolerance 1e-8.
AdaptedBasis adapted_basis(const SymplecticMap& L, double tol = 1e-10);

// exp(J S) for a random symmetric S with entries uniform in
// [-spread, spread], drawn from a seeded generator. Symplectic by
// construction up to rounding.
SymplecticMap random_symplectic(int n, std::uint64_t seed,
                                double spread = 0.5);

}  // namespace symflow::sympl
