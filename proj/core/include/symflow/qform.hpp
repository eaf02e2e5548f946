#pragma once

// The quadratic form Q(lambda, h) that drives the maximum-principle argument,
// assembled as a symmetric matrix over canonical tensor coordinates, plus its
// eigenvalue analysis: block decomposition at lambda = 1, the box minimum
// delta_Lambda, and the pinching threshold computed by bisection.

#include <Eigen/Dense>

#include "symflow/errors.hpp"
#include "symflow/tensor.hpp"

namespace symflow::qform {

// Symmetric m x m matrix over canonical coordinates (m = (2n)(2n+1)(2n+2)/6).
// Convention: v^T M v, with v the canonical coordinates of a symmetric
// tensor, equals the ordered-index sums defining Q; the matrix absorbs the
// placement multiplicities 1/3/6.
struct QFormMatrix {
  int n = 0;
  Eigen::MatrixXd M;
};

// v^T M v for the canonical coordinates of h.
double eval(const QFormMatrix& Q, const SymTensor3& h);

// lambda must hold 2n entries in canonical reciprocal pairs
// (consecutive products 1 within 1e-8). Both assembly routes produce the
// same matrix to rounding; they follow the two equivalent published
// expressions and are kept separate as mutual checks.
QFormMatrix assemble_Q(int n, const Eigen::VectorXd& lambda);
QFormMatrix assemble_Q_evolution(int n, const Eigen::VectorXd& lambda);

// Q plus the complete-square correction sum_k [sum_{i in pairs}
// (lambda_i - lambda_i') h_{i i' k}]^2.
QFormMatrix assemble_Qtilde(int n, const Eigen::VectorXd& lambda);

// At lambda = 1 the form splits into blocks supported on disjoint coordinate
// groups: Q1 (single-pair triples), Q2 (two pairs), Q3 (three pairs).
// Q1 + Q2 + Q3 reconstructs assemble_Q at lambda = 1 exactly.
struct BlockDecomposition {
  QFormMatrix Q1, Q2, Q3;
};
BlockDecomposition block_decomposition_at_one(int n);

// Gram matrix of the tensor norm |h|^2 = sum over canonical triples of
// h_{ijk}^2: the identity in canonical coordinates.
QFormMatrix norm_matrix(int n);

// Gram matrix of the ordered-index sum sum_{i,j,k} h_{ijk}^2:
// diag(multiplicity).
QFormMatrix ordered_sum_matrix(int n);

// Smallest generalized eigenvalue of Q v = mu N v. N must be positive
// definite (rejected otherwise with numerical_error).
double min_eig_ratio(const QFormMatrix& Q, const QFormMatrix& N);

// Smallest eigenvalue of the submatrix on the support (rows holding a
// nonzero entry); used for the individual blocks at lambda = 1, which are
// supported on disjoint coordinate groups. Empty support is rejected.
double min_eig_on_support(const QFormMatrix& Q);

// Minimum over the box {1/sqrt(Lambda) <= lambda_i <= sqrt(Lambda),
// lambda_{2k-1} lambda_{2k} = 1} of the smallest eigenvalue of Q relative to
// the ordered-sum norm. Exhaustive grid over the log parameters
// t_i in [-ln(Lambda)/2, ln(Lambda)/2] (grid_steps points per axis) followed
// by coordinate-descent refinement. The result is an upper estimate of the
// true minimum; the minimizing lambda is returned with it.
struct DeltaBoxResult {
  double delta = 0.0;
  Eigen::VectorXd lambda;  // argmin, 2n entries
};
DeltaBoxResult delta_box(int n, double Lambda, int grid_steps = 33);

// Largest reciprocal bound L such that Q stays nonnegative while all
// lambda_i lie in [1/L, L], found by bisection over [1, cap] on the sign of
// the box minimum. When the minimum is still positive at the cap,
// exceeds_cap is set and lambda0 is meaningless. minimizing_lambda is the
// degenerate direction observed at the infeasible end of the final bracket
// (at the cap when it never turns).
struct Lambda0Result {
  int n = 0;
  bool exceeds_cap = false;
  double lambda0 = 0.0;
  double tol = 0.0;
  int grid_steps = 0;
  Eigen::VectorXd minimizing_lambda;
};
Lambda0Result lambda0(int n, double tol = 1e-4, double cap = 16.0,
                      int grid_steps = 33);

}  // namespace symflow::qform
