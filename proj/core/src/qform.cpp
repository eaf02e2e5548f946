#include "symflow/qform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "symflow/sympl.hpp"

namespace symflow::qform {

namespace {

using sympl::pair_partner;

void validate_lambda(int n, const Eigen::VectorXd& lambda, const char* who) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": n must be positive");
  if (lambda.size() != 2 * n)
    throw std::invalid_argument(std::string(who) + ": lambda must hold 2n entries");
  for (int k = 0; k < n; ++k) {
    const double a = lambda[2 * k], b = lambda[2 * k + 1];
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument(std::string(who) + ": lambda entries must be positive");
    if (std::abs(a * b - 1.0) > 1e-8)
      throw std::invalid_argument(std::string(who) + ": lambda pairs must be reciprocal");
  }
}

// Accumulates coeff * h_{t1} h_{t2} into a symmetric matrix over canonical
// coordinates.
struct QBuilder {
  const TripleIndex& ti;
  Eigen::MatrixXd M;

  explicit QBuilder(int d)
      : ti(triple_index(d)), M(Eigen::MatrixXd::Zero(ti.count(), ti.count())) {}

  void add(int i1, int j1, int k1, int i2, int j2, int k2, double coeff) {
    const int a = ti.index(i1, j1, k1);
    const int b = ti.index(i2, j2, k2);
    if (a == b) {
      M(a, a) += coeff;
    } else {
      M(a, b) += 0.5 * coeff;
      M(b, a) += 0.5 * coeff;
    }
  }

  // The ordered-index square sum: diag(multiplicity) in canonical coordinates.
  void add_square_sum() {
    for (int a = 0; a < ti.count(); ++a)
      M(a, a) += TripleIndex::multiplicity(ti.triple(a));
  }

  // -2 sum_k sum_pairs (h_iik h_i'i'k - h_ii'k^2), common to both routes.
  void add_pair_terms(int d) {
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; i += 2) {
        const int ip = pair_partner(i);
        add(i, i, k, ip, ip, k, -2.0);
        add(i, ip, k, i, ip, k, 2.0);
      }
  }
};

}  // namespace

double eval(const QFormMatrix& Q, const SymTensor3& h) {
  if (Q.n != h.n) throw std::invalid_argument("eval: dimension mismatch");
  return h.c.dot(Q.M * h.c);
}

QFormMatrix assemble_Q_evolution(int n, const Eigen::VectorXd& lambda) {
  validate_lambda(n, lambda, "assemble_Q_evolution");
  const int d = 2 * n;
  QBuilder b(d);
  b.add_square_sum();
  b.add_pair_terms(d);
  // cross terms over i < j skipping partners, signed by parity
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        if (j == pair_partner(i)) continue;
        const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        const double c = -2.0 * sign * lambda[i] * lambda[j];
        b.add(pair_partner(i), i, k, pair_partner(j), j, k, c);
        b.add(pair_partner(i), j, k, pair_partner(j), i, k, -c);
      }
  return {n, std::move(b.M)};
}

QFormMatrix assemble_Q(int n, const Eigen::VectorXd& lambda) {
  validate_lambda(n, lambda, "assemble_Q");
  const int d = 2 * n;
  QBuilder b(d);
  b.add_square_sum();
  b.add_pair_terms(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; i += 2)
      for (int j = i + 2; j < d; j += 2) {
        const int ip = pair_partner(i), jp = pair_partner(j);
        b.add(ip, i, k, jp, j, k,
              -2.0 * (lambda[i] - lambda[ip]) * (lambda[j] - lambda[jp]));
        b.add(ip, j, k, jp, i, k,
              2.0 * (lambda[i] * lambda[j] + lambda[ip] * lambda[jp]));
        b.add(i, j, k, jp, ip, k,
              -2.0 * (lambda[ip] * lambda[j] + lambda[i] * lambda[jp]));
      }
  return {n, std::move(b.M)};
}

QFormMatrix assemble_Qtilde(int n, const Eigen::VectorXd& lambda) {
  QFormMatrix Q = assemble_Q(n, lambda);
  const int d = 2 * n;
  QBuilder b(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; i += 2)
      for (int j = 0; j < d; j += 2)
        b.add(i, pair_partner(i), k, j, pair_partner(j), k,
              (lambda[i] - lambda[pair_partner(i)]) *
                  (lambda[j] - lambda[pair_partner(j)]));
  Q.M += b.M;
  return Q;
}

BlockDecomposition block_decomposition_at_one(int n) {
  if (n < 1) throw std::invalid_argument("block_decomposition_at_one: n must be positive");
  const int d = 2 * n;
  QBuilder b1(d), b2(d), b3(d);

  // Single-pair coordinates: two 2x2 blocks [[1,-1],[-1,5]] per pair.
  for (int i = 0; i < d; i += 2) {
    const int ip = i + 1;
    b1.add(i, i, i, i, i, i, 1.0);
    b1.add(ip, ip, ip, ip, ip, ip, 1.0);
    b1.add(i, ip, ip, i, ip, ip, 5.0);
    b1.add(ip, i, i, ip, i, i, 5.0);
    b1.add(i, i, i, ip, ip, i, -2.0);
    b1.add(i, i, ip, ip, ip, ip, -2.0);
  }

  // Two-pair coordinates.
  for (int i = 0; i < d; i += 2)
    for (int j = i + 2; j < d; j += 2) {
      const int ip = i + 1, jp = j + 1;
      const int sq3[][3] = {{i, j, j},   {i, jp, jp}, {ip, j, j},  {ip, jp, jp},
                            {j, i, i},   {jp, i, i},  {j, ip, ip}, {jp, ip, ip}};
      for (auto& t : sq3) b2.add(t[0], t[1], t[2], t[0], t[1], t[2], 3.0);
      const int sq8[][3] = {{i, ip, j}, {i, ip, jp}, {i, j, jp}, {ip, j, jp}};
      for (auto& t : sq8) b2.add(t[0], t[1], t[2], t[0], t[1], t[2], 8.0);
      b2.add(i, i, j, ip, ip, j, -2.0);
      b2.add(i, i, jp, ip, ip, jp, -2.0);
      b2.add(j, j, i, jp, jp, i, -2.0);
      b2.add(j, j, ip, jp, jp, ip, -2.0);
      const int ks[] = {i, ip, j, jp};
      for (int k : ks) {
        b2.add(ip, j, k, jp, i, k, 4.0);
        b2.add(i, j, k, jp, ip, k, -4.0);
      }
    }

  // Three-pair coordinates.
  for (int i = 0; i < d; i += 2)
    for (int j = i + 2; j < d; j += 2)
      for (int k = j + 2; k < d; k += 2) {
        const int ip = i + 1, jp = j + 1, kp = k + 1;
        const int sq6[][3] = {{i, j, k},  {i, j, kp},  {i, jp, k},  {i, jp, kp},
                              {ip, j, k}, {ip, j, kp}, {ip, jp, k}, {ip, jp, kp}};
        for (auto& t : sq6) b3.add(t[0], t[1], t[2], t[0], t[1], t[2], 6.0);
        const int slots[] = {i, ip};
        for (int s : slots) {
          b3.add(jp, k, s, kp, j, s, 4.0);
          b3.add(j, k, s, kp, jp, s, -4.0);
        }
        const int slots2[] = {j, jp};
        for (int s : slots2) {
          b3.add(ip, k, s, kp, i, s, 4.0);
          b3.add(i, k, s, kp, ip, s, -4.0);
        }
        const int slots3[] = {k, kp};
        for (int s : slots3) {
          b3.add(ip, j, s, jp, i, s, 4.0);
          b3.add(i, j, s, jp, ip, s, -4.0);
        }
      }

  return {{n, std::move(b1.M)}, {n, std::move(b2.M)}, {n, std::move(b3.M)}};
}

QFormMatrix norm_matrix(int n) {
  if (n < 1) throw std::invalid_argument("norm_matrix: n must be positive");
  const int m = triple_index(2 * n).count();
  return {n, Eigen::MatrixXd::Identity(m, m)};
}

QFormMatrix ordered_sum_matrix(int n) {
  if (n < 1) throw std::invalid_argument("ordered_sum_matrix: n must be positive");
  QBuilder b(2 * n);
  b.add_square_sum();
  return {n, std::move(b.M)};
}

double min_eig_ratio(const QFormMatrix& Q, const QFormMatrix& N) {
  if (Q.n != N.n || Q.M.rows() != N.M.rows())
    throw std::invalid_argument("min_eig_ratio: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> nd(N.M);
  if (nd.info() != Eigen::Success || nd.eigenvalues().minCoeff() <= 0.0)
    throw numerical_error("min_eig_ratio: norm matrix is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Q.M, N.M);
  if (ges.info() != Eigen::Success)
    throw numerical_error("min_eig_ratio: generalized eigensolver failed");
  return ges.eigenvalues().minCoeff();
}

double min_eig_on_support(const QFormMatrix& Q) {
  std::vector<int> support;
  for (Eigen::Index i = 0; i < Q.M.rows(); ++i)
    if (Q.M.row(i).cwiseAbs().maxCoeff() > 0.0)
      support.push_back(static_cast<int>(i));
  if (support.empty())
    throw std::invalid_argument("min_eig_on_support: zero matrix");
  Eigen::MatrixXd sub(support.size(), support.size());
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = 0; b < support.size(); ++b)
      sub(a, b) = Q.M(support[a], support[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numerical_error("min_eig_on_support: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

namespace {

// Smallest eigenvalue of Q(lambda(t)) relative to the ordered-sum norm,
// through the diagonal congruence D^-1/2 Q D^-1/2.
double delta_at(int n, const Eigen::VectorXd& tvec,
                const Eigen::VectorXd& dinvsqrt) {
  const int d = 2 * n;
  Eigen::VectorXd lam(d);
  for (int k = 0; k < n; ++k) {
    lam[2 * k] = std::exp(tvec[k]);
    lam[2 * k + 1] = std::exp(-tvec[k]);
  }
  QFormMatrix Q = assemble_Q(n, lam);
  Eigen::MatrixXd B =
      dinvsqrt.asDiagonal() * Q.M * dinvsqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXd lambda_of_t(int n, const Eigen::VectorXd& tvec) {
  Eigen::VectorXd lam(2 * n);
  for (int k = 0; k < n; ++k) {
    lam[2 * k] = std::exp(tvec[k]);
    lam[2 * k + 1] = std::exp(-tvec[k]);
  }
  return lam;
}

}  // namespace

DeltaBoxResult delta_box(int n, double Lambda, int grid_steps) {
  if (n < 1) throw std::invalid_argument("delta_box: n must be positive");
  if (!(Lambda >= 1.0)) throw std::invalid_argument("delta_box: Lambda must be >= 1");
  if (grid_steps < 2) throw std::invalid_argument("delta_box: need at least 2 grid steps");

  const Eigen::VectorXd dm = ordered_sum_matrix(n).M.diagonal();
  const Eigen::VectorXd dinvsqrt = dm.cwiseSqrt().cwiseInverse();
  const double L = 0.5 * std::log(Lambda);

  if (L <= 0.0) {
    Eigen::VectorXd t0 = Eigen::VectorXd::Zero(n);
    return {delta_at(n, t0, dinvsqrt), lambda_of_t(n, t0)};
  }

  long total = 1;
  for (int k = 0; k < n; ++k) total *= grid_steps;

  const auto decode = [&](long idx) {
    Eigen::VectorXd t(n);
    for (int k = 0; k < n; ++k) {
      const long q = idx % grid_steps;
      idx /= grid_steps;
      t[k] = -L + 2.0 * L * static_cast<double>(q) /
                      static_cast<double>(grid_steps - 1);
    }
    return t;
  };

  // Grid sweep, parallel over chunks with a deterministic reduction.
  struct Best {
    double val = std::numeric_limits<double>::infinity();
    long idx = -1;
  };
  const unsigned nthreads =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>((total + 511) / 512)));
  std::vector<Best> partial(nthreads);
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < nthreads; ++w) {
    workers.emplace_back([&, w] {
      Best b;
      for (long idx = w; idx < total; idx += nthreads) {
        const double v = delta_at(n, decode(idx), dinvsqrt);
        if (v < b.val || (v == b.val && idx < b.idx)) b = {v, idx};
      }
      partial[w] = b;
    });
  }
  for (auto& th : workers) th.join();
  Best best;
  for (const Best& b : partial)
    if (b.val < best.val || (b.val == best.val && b.idx < best.idx)) best = b;

  // Coordinate-descent refinement with golden-section line searches.
  Eigen::VectorXd t = decode(best.idx);
  double fbest = best.val;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int k = 0; k < n; ++k) {
      double a = -L, b = L;
      Eigen::VectorXd tt = t;
      const auto f = [&](double x) {
        tt[k] = x;
        return delta_at(n, tt, dinvsqrt);
      };
      double c = b - gr * (b - a), dpt = a + gr * (b - a);
      double fc = f(c), fd = f(dpt);
      for (int it = 0; it < 40; ++it) {
        if (fc < fd) {
          b = dpt;
          dpt = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = f(c);
        } else {
          a = c;
          c = dpt;
          fc = fd;
          dpt = a + gr * (b - a);
          fd = f(dpt);
        }
      }
      const double x = 0.5 * (a + b);
      const double fx = f(x);
      if (fx < fbest) {
        fbest = fx;
        t[k] = x;
      }
    }
  }

  return {fbest, lambda_of_t(n, t)};
}

Lambda0Result lambda0(int n, double tol, double cap, int grid_steps) {
  if (n < 1) throw std::invalid_argument("lambda0: n must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("lambda0: tol must be positive");
  if (!(cap > 1.0)) throw std::invalid_argument("lambda0: cap must exceed 1");

  Lambda0Result out;
  out.n = n;
  out.tol = tol;
  out.grid_steps = grid_steps;

  // Bisection variable is the reciprocal bound B (all lambda_i in [1/B, B]),
  // i.e. the box parameter Lambda = B^2 of delta_box.
  DeltaBoxResult at_cap = delta_box(n, cap * cap, grid_steps);
  if (at_cap.delta > 0.0) {
    out.exceeds_cap = true;
    out.lambda0 = cap;
    out.minimizing_lambda = at_cap.lambda;
    return out;
  }

  double lo = 1.0, hi = cap;
  Eigen::VectorXd witness = at_cap.lambda;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    DeltaBoxResult db = delta_box(n, mid * mid, grid_steps);
    if (db.delta > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      witness = db.lambda;
    }
  }
  out.lambda0 = 0.5 * (lo + hi);
  out.minimizing_lambda = witness;
  return out;
}

}  // namespace symflow::qform
