#include "symflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

namespace symflow::flow {

namespace {

constexpr double kPi = std::numbers::pi;

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 join(const Vec3& a, const Vec3& b) {
  Vec6 v;
  v << a, b;
  return v;
}

void validate_state(const FlowState& s) {
  const int N = s.N();
  if (N < 2 || s.Theta.size() != N + 1 || s.g.size() != N + 1)
    throw std::invalid_argument("flow state: profile sizes must match the grid");
  if (!s.theta.allFinite() || !s.Theta.allFinite() || !s.g.allFinite() ||
      !std::isfinite(s.t))
    throw std::invalid_argument("flow state: non-finite entries");
}

// Theta strictly increasing with the poles pinned is the graph condition.
void require_graph(const FlowState& s) {
  const int N = s.N();
  if (std::abs(s.Theta[0]) > 1e-12 || std::abs(s.Theta[N] - kPi) > 1e-12)
    throw flow_failure("graph condition lost: poles not fixed", s.t);
  for (int i = 0; i < N; ++i)
    if (!(s.Theta[i + 1] > s.Theta[i]))
      throw flow_failure("graph condition lost: Theta not strictly increasing", s.t);
}

// Central differences with ghost reflection Theta(-x) = -Theta(x),
// g(-x) = g(x) at 0 and Theta(pi+x) = 2 pi - Theta(pi-x), g(pi+x) = g(pi-x)
// at pi. All N+1 rows are valid, poles included.
struct Derivs {
  Eigen::VectorXd dT, d2T, dg, d2g;
};

Derivs derivatives(const FlowState& s) {
  const int N = s.N();
  const double h = s.theta[1] - s.theta[0];
  Eigen::VectorXd Te(N + 3), ge(N + 3);
  Te[0] = -s.Theta[1];
  ge[0] = s.g[1];
  Te.segment(1, N + 1) = s.Theta;
  ge.segment(1, N + 1) = s.g;
  Te[N + 2] = 2.0 * kPi - s.Theta[N - 1];
  ge[N + 2] = s.g[N - 1];

  Derivs d;
  d.dT.resize(N + 1);
  d.d2T.resize(N + 1);
  d.dg.resize(N + 1);
  d.d2g.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    d.dT[i] = (Te[i + 2] - Te[i]) / (2.0 * h);
    d.d2T[i] = (Te[i + 2] - 2.0 * Te[i + 1] + Te[i]) / (h * h);
    d.dg[i] = (ge[i + 2] - ge[i]) / (2.0 * h);
    d.d2g[i] = (ge[i + 2] - 2.0 * ge[i + 1] + ge[i]) / (h * h);
  }
  return d;
}

// Mean curvature H = Lap_Sigma F + U at the interior nodes (phi = 0 slice);
// pole samples are fixed by equivariance and get H = 0. The Laplacian is
// written out analytically in theta, with the phi-dependence eliminated by
// the symmetry.
void mean_curvature(const FlowState& s, std::vector<Vec3>& Hp,
                    std::vector<Vec3>& Hq) {
  const int N = s.N();
  const Derivs d = derivatives(s);
  Hp.assign(N + 1, Vec3::Zero());
  Hq.assign(N + 1, Vec3::Zero());
  for (int i = 1; i < N; ++i) {
    const double t = s.theta[i], T = s.Theta[i], gg = s.g[i];
    const double Tp = d.dT[i], Tpp = d.d2T[i], gp = d.dg[i], gpp = d.d2g[i];
    const double st = std::sin(t), ct = std::cos(t);
    const double sT = std::sin(T), cT = std::cos(T);
    const double cg = std::cos(gg), sg = std::sin(gg);

    const double g11 = 1.0 + Tp * Tp + gp * gp * sT * sT;
    const double g12 = gp * sT * sT;
    const double g22 = st * st + sT * sT;
    const double G = g11 * g22 - g12 * g12;
    const double iG11 = g22 / G, iG12 = -g12 / G, iG22 = g11 / G;

    const double g11p = 2.0 * Tp * Tpp + 2.0 * gp * gpp * sT * sT +
                        2.0 * gp * gp * sT * cT * Tp;
    const double g12p = gpp * sT * sT + 2.0 * gp * sT * cT * Tp;
    const double g22p = 2.0 * st * ct + 2.0 * sT * cT * Tp;
    const double Gp = g11p * g22 + g11 * g22p - 2.0 * g12 * g12p;
    // b^a = (1/sqrtG) d/dtheta (sqrtG g^{a1})
    const double b1 = (g22p - g22 * Gp / (2.0 * G)) / G;
    const double b2 = (-g12p + g12 * Gp / (2.0 * G)) / G;

    const Vec3 p(st, 0.0, ct), pth(ct, 0.0, -st), pph(0.0, st, 0.0);
    const Vec3 q(sT * cg, sT * sg, cT);
    const Vec3 qT(cT * cg, cT * sg, -sT);
    const Vec3 qf(-sT * sg, sT * cg, 0.0);
    const Vec3 qTf(-cT * sg, cT * cg, 0.0);
    const Vec3 qff(-sT * cg, -sT * sg, 0.0);

    const Vec3 p_thth = -p;
    const Vec3 p_thph(0.0, ct, 0.0);
    const Vec3 p_phph(-st, 0.0, 0.0);
    const Vec3 q_thth =
        Tpp * qT + gpp * qf - Tp * Tp * q + 2.0 * Tp * gp * qTf + gp * gp * qff;
    const Vec3 q_thph = Tp * qTf + gp * qff;
    const Vec3 q_phph = qff;
    const Vec3 q_th = Tp * qT + gp * qf;

    const Vec3 lapP = iG11 * p_thth + 2.0 * iG12 * p_thph + iG22 * p_phph +
                      b1 * pth + b2 * pph;
    const Vec3 lapQ = iG11 * q_thth + 2.0 * iG12 * q_thph + iG22 * q_phph +
                      b1 * q_th + b2 * qf;

    // compensation for the unit-sphere factors: U = (A1 p, A2 q)
    const double A1 = iG11 + iG22 * st * st;
    const double A2 = iG11 * (Tp * Tp + gp * gp * sT * sT) +
                      2.0 * iG12 * gp * sT * sT + iG22 * sT * sT;
    Hp[i] = lapP + A1 * p;
    Hq[i] = lapQ + A2 * q;
  }
}

// Everything geometry() exposes plus the adapted-frame second fundamental
// form and the metric pieces the evolution-identity check needs. Interior
// rows only unless noted; pole rows of the public fields are filled by
// finish_poles.
struct FullGeometry {
  Eigen::VectorXd lam, so, sqrtG, det, sff2, Hnorm;
  Eigen::VectorXd iG11, b1;                  // scalar-Laplacian coefficients
  Eigen::MatrixXd h;                         // (N+1) x 8, index 4i+2j+k
};

FullGeometry full_geometry(const FlowState& s) {
  validate_state(s);
  require_graph(s);
  const int N = s.N();
  const Derivs d = derivatives(s);

  FullGeometry fg;
  fg.lam.setZero(N + 1);
  fg.so.setZero(N + 1);
  fg.sqrtG.setZero(N + 1);
  fg.det.setZero(N + 1);
  fg.sff2.setZero(N + 1);
  fg.Hnorm.setZero(N + 1);
  fg.iG11.setZero(N + 1);
  fg.b1.setZero(N + 1);
  fg.h.setZero(N + 1, 8);

  for (int i = 1; i < N; ++i) {
    const double t = s.theta[i], T = s.Theta[i], gg = s.g[i];
    const double Tp = d.dT[i], Tpp = d.d2T[i], gp = d.dg[i], gpp = d.d2g[i];
    const double st = std::sin(t), ct = std::cos(t);
    const double sT = std::sin(T), cT = std::cos(T);
    const double cg = std::cos(gg), sg = std::sin(gg);

    const double g11 = 1.0 + Tp * Tp + gp * gp * sT * sT;
    const double g12 = gp * sT * sT;
    const double g22 = st * st + sT * sT;
    const double G = g11 * g22 - g12 * g12;
    const double iG11 = g22 / G, iG12 = -g12 / G, iG22 = g11 / G;
    fg.sqrtG[i] = std::sqrt(G);
    fg.iG11[i] = iG11;

    const double g11p = 2.0 * Tp * Tpp + 2.0 * gp * gpp * sT * sT +
                        2.0 * gp * gp * sT * cT * Tp;
    const double g12p = gpp * sT * sT + 2.0 * gp * sT * cT * Tp;
    const double g22p = 2.0 * st * ct + 2.0 * sT * cT * Tp;
    const double Gp = g11p * g22 + g11 * g22p - 2.0 * g12 * g12p;
    fg.b1[i] = (g22p - g22 * Gp / (2.0 * G)) / G;

    // df in orthonormal frames of the two spheres: [[Tp, 0], [gp sT, sT/st]]
    const double M11 = Tp, M21 = gp * sT, M22 = sT / st;
    fg.det[i] = M11 * M22;
    const double a_ = M11 * M11 + M21 * M21;
    const double b_ = M21 * M22;
    const double c_ = M22 * M22;
    const double tr = a_ + c_;
    const double disc =
        std::sqrt(std::max((a_ - c_) * (a_ - c_) + 4.0 * b_ * b_, 0.0));
    const double s2max = 0.5 * (tr + disc);
    const double lam = std::sqrt(s2max);
    fg.lam[i] = lam;
    fg.so[i] = 1.0 / (lam + 1.0 / lam);

    const Vec3 p(st, 0.0, ct), pth(ct, 0.0, -st), pph(0.0, st, 0.0);
    const Vec3 q(sT * cg, sT * sg, cT);
    const Vec3 qT(cT * cg, cT * sg, -sT);
    const Vec3 qf(-sT * sg, sT * cg, 0.0);
    const Vec3 qTf(-cT * sg, cT * cg, 0.0);
    const Vec3 qff(-sT * cg, -sT * sg, 0.0);
    const Vec3 q_th = Tp * qT + gp * qf;
    const Vec6 F_th = join(pth, q_th);
    const Vec6 F_ph = join(pph, qf);

    const Vec3 p_thth = -p;
    const Vec3 p_thph(0.0, ct, 0.0);
    const Vec3 p_phph(-st, 0.0, 0.0);
    const Vec3 q_thth =
        Tpp * qT + gpp * qf - Tp * Tp * q + 2.0 * Tp * gp * qTf + gp * gp * qff;
    const Vec3 q_thph = Tp * qTf + gp * qff;
    const Vec3 q_phph = qff;

    // W_ab = F_ab + (m1_ab p, m2_ab q), m = per-factor first fundamental form
    const double m1_tt = 1.0, m1_tp = 0.0, m1_pp = st * st;
    const double m2_tt = Tp * Tp + gp * gp * sT * sT;
    const double m2_tp = gp * sT * sT;
    const double m2_pp = sT * sT;
    const Vec6 W_tt = join(p_thth + m1_tt * p, q_thth + m2_tt * q);
    const Vec6 W_tp = join(p_thph + m1_tp * p, q_thph + m2_tp * q);
    const Vec6 W_pp = join(p_phph + m1_pp * p, q_phph + m2_pp * q);

    auto project = [&](const Vec6& w) {
      const double c1 = w.dot(F_th), c2 = w.dot(F_ph);
      const double G1 = iG11 * c1 + iG12 * c2;
      const double G2 = iG12 * c1 + iG22 * c2;
      return Vec6(w - G1 * F_th - G2 * F_ph);
    };
    const Vec6 II[2][2] = {{project(W_tt), project(W_tp)},
                           {project(W_tp), project(W_pp)}};
    const double ig[2][2] = {{iG11, iG12}, {iG12, iG22}};

    double sff2 = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int dd = 0; dd < 2; ++dd)
            sff2 += ig[a][c] * ig[b][dd] * II[a][b].dot(II[c][dd]);
    fg.sff2[i] = sff2;
    const Vec6 Hvec = iG11 * II[0][0] + 2.0 * iG12 * II[0][1] + iG22 * II[1][1];
    fg.Hnorm[i] = Hvec.norm();

    // adapted frame: right singular vector for the larger singular value
    double v1x, v1y;
    if (std::abs(b_) > 1e-14) {
      v1x = b_;
      v1y = s2max - a_;
    } else if (a_ >= c_) {
      v1x = 1.0;
      v1y = 0.0;
    } else {
      v1x = 0.0;
      v1y = 1.0;
    }
    const double nrm = std::sqrt(v1x * v1x + v1y * v1y);
    v1x /= nrm;
    v1y /= nrm;
    const double v2x = -v1y, v2y = v1x;

    const Vec3 e_p1 = v1x * pth + (v1y / st) * pph;
    const Vec3 e_p2 = v2x * pth + (v2y / st) * pph;
    const double w1x = M11 * v1x, w1y = M21 * v1x + M22 * v1y;
    const double w2x = M11 * v2x, w2y = M21 * v2x + M22 * v2y;
    const double l1 = std::hypot(w1x, w1y), l2 = std::hypot(w2x, w2y);
    const Vec3 e_q1 = (w1x * qT + (w1y / sT) * qf) / l1;
    const Vec3 e_q2 = (w2x * qT + (w2y / sT) * qf) / l2;
    const double den1 = std::sqrt(1.0 + l1 * l1);
    const double den2 = std::sqrt(1.0 + l2 * l2);
    const Vec6 E[2] = {join(e_p1, l1 * e_q1) / den1,
                       join(e_p2, l2 * e_q2) / den2};
    // J e_k: J acts as p x . on the first factor and -(q x .) scaled on the
    // second, which is normal to the surface (Lemma-level structure at n=1)
    const Vec6 Nrm[2] = {
        join(p.cross(e_p1), -l1 * q.cross(e_q1)) / den1,
        join(p.cross(e_p2), -l2 * q.cross(e_q2)) / den2};

    // coordinates of E_k in the (F_th, F_ph) frame
    double cc[2][2];
    for (int k = 0; k < 2; ++k) {
      const double r1 = E[k].dot(F_th), r2 = E[k].dot(F_ph);
      cc[k][0] = (g22 * r1 - g12 * r2) / G;
      cc[k][1] = (-g12 * r1 + g11 * r2) / G;
    }

    double hraw[2][2][2];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k) {
          hraw[a][b][k] = cc[a][0] * cc[b][0] * II[0][0].dot(Nrm[k]) +
                          (cc[a][0] * cc[b][1] + cc[a][1] * cc[b][0]) *
                              II[0][1].dot(Nrm[k]) +
                          cc[a][1] * cc[b][1] * II[1][1].dot(Nrm[k]);
        }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k)
          fg.h(i, 4 * a + 2 * b + k) =
              (hraw[a][b][k] + hraw[a][k][b] + hraw[b][a][k] + hraw[b][k][a] +
               hraw[k][a][b] + hraw[k][b][a]) /
              6.0;
  }

  // pole rows: the map limit is Theta'(pole) times an isometry, so lambda,
  // *Omega and det have exact expressions; the curvature norms are filled by
  // even-symmetry extrapolation; the area element vanishes.
  const double Tp0 = d.dT[0], TpN = d.dT[N];
  fg.lam[0] = Tp0;
  fg.lam[N] = TpN;
  fg.so[0] = 1.0 / (Tp0 + 1.0 / Tp0);
  fg.so[N] = 1.0 / (TpN + 1.0 / TpN);
  fg.det[0] = Tp0 * Tp0;
  fg.det[N] = TpN * TpN;
  fg.sff2[0] = std::max((4.0 * fg.sff2[1] - fg.sff2[2]) / 3.0, 0.0);
  fg.sff2[N] = std::max((4.0 * fg.sff2[N - 1] - fg.sff2[N - 2]) / 3.0, 0.0);
  fg.Hnorm[0] = std::max((4.0 * fg.Hnorm[1] - fg.Hnorm[2]) / 3.0, 0.0);
  fg.Hnorm[N] = std::max((4.0 * fg.Hnorm[N - 1] - fg.Hnorm[N - 2]) / 3.0, 0.0);
  return fg;
}

// Monotone cubic interpolation (Fritsch-Carlson derivative selection with
// the standard three-point endpoint rule), evaluated as a Hermite cubic.
class Pchip {
 public:
  Pchip(const Eigen::VectorXd& x, const Eigen::VectorXd& y) : x_(x), y_(y) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || y.size() != n)
      throw std::invalid_argument("pchip: need matching abscissae and values");
    for (int i = 0; i + 1 < n; ++i)
      if (!(x[i + 1] > x[i]))
        throw std::invalid_argument("pchip: abscissae must strictly increase");
    m_.resize(n);
    if (n == 2) {
      m_[0] = m_[1] = (y[1] - y[0]) / (x[1] - x[0]);
      return;
    }
    Eigen::VectorXd hk(n - 1), dk(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      hk[i] = x[i + 1] - x[i];
      dk[i] = (y[i + 1] - y[i]) / hk[i];
    }
    for (int i = 1; i + 1 < n; ++i) {
      if (dk[i - 1] * dk[i] > 0.0) {
        const double w1 = 2.0 * hk[i] + hk[i - 1];
        const double w2 = hk[i] + 2.0 * hk[i - 1];
        m_[i] = (w1 + w2) / (w1 / dk[i - 1] + w2 / dk[i]);
      } else {
        m_[i] = 0.0;
      }
    }
    m_[0] = edge(hk[0], hk[1], dk[0], dk[1]);
    m_[n - 1] = edge(hk[n - 2], hk[n - 3], dk[n - 2], dk[n - 3]);
  }

  double operator()(double xq) const {
    const int n = static_cast<int>(x_.size());
    xq = std::clamp(xq, x_[0], x_[n - 1]);
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x_[mid] <= xq ? lo : hi) = mid;
    }
    const double h = x_[lo + 1] - x_[lo];
    const double t = (xq - x_[lo]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * y_[lo] + (t3 - 2.0 * t2 + t) * h * m_[lo] +
           (-2.0 * t3 + 3.0 * t2) * y_[lo + 1] + (t3 - t2) * h * m_[lo + 1];
  }

 private:
  static double edge(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0))
      d = 3.0 * d0;
    return d;
  }

  Eigen::VectorXd x_, y_, m_;
};

double wrap_pi(double x) {
  double r = std::fmod(x + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r - kPi;
}

MonitorReport monitor(const FlowState& s, const SliceGeometry& geo) {
  MonitorReport r;
  r.t = s.t;
  r.min_star_omega = geo.star_omega.minCoeff();
  r.max_sff_norm = geo.sff_norm.maxCoeff();
  r.max_lambda_dev = (geo.lambda.array() - 1.0).abs().maxCoeff();
  r.max_symplectic_residual = geo.symplectic_residual.maxCoeff();
  const int N = s.N();
  const double h = s.theta[1] - s.theta[0];
  double area = 0.5 * (geo.area_element[0] + geo.area_element[N]);
  for (int i = 1; i < N; ++i) area += geo.area_element[i];
  r.total_area = 2.0 * kPi * area * h;
  return r;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a, const char* what) {
  if (!a.is_array() || a.empty())
    throw std::invalid_argument(std::string("checkpoint: ") + what +
                                " must be a nonempty array");
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number())
      throw std::invalid_argument(std::string("checkpoint: ") + what +
                                  " must be numeric");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

}  // namespace

FlowState init_twist(int N, const std::string& profile, double amplitude) {
  if (N < 16) throw std::invalid_argument("init_twist: need N >= 16");
  if (!std::isfinite(amplitude))
    throw std::invalid_argument("init_twist: amplitude must be finite");
  FlowState s;
  s.theta = Eigen::VectorXd::LinSpaced(N + 1, 0.0, kPi);
  s.Theta = s.theta;
  s.g.resize(N + 1);
  if (profile == "constant") {
    s.g.setConstant(amplitude);
  } else if (profile == "smooth_twist") {
    for (int i = 0; i <= N; ++i)
      s.g[i] = amplitude * (1.0 - std::cos(s.theta[i]));
  } else {
    throw std::invalid_argument("init_twist: unknown profile '" + profile + "'");
  }
  s.t = 0.0;
  return s;
}

SliceGeometry geometry(const FlowState& state) {
  const FullGeometry fg = full_geometry(state);
  SliceGeometry geo;
  geo.lambda = fg.lam;
  geo.star_omega = fg.so;
  geo.sff_norm = fg.sff2.array().max(0.0).sqrt();
  geo.mean_curvature_norm = fg.Hnorm;
  geo.area_element = fg.sqrtG;  // pole rows stay 0
  geo.symplectic_residual = (fg.det.array() - 1.0).abs();
  return geo;
}

FlowState step(const FlowState& state, double dt) {
  validate_state(state);
  require_graph(state);
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step: dt must be positive and finite");
  const int N = state.N();

  std::vector<Vec3> Hp, Hq;
  mean_curvature(state, Hp, Hq);

  Eigen::VectorXd tn(N - 1), Tn(N - 1), gn(N - 1);
  for (int i = 1; i < N; ++i) {
    const double t = state.theta[i], T = state.Theta[i], gg = state.g[i];
    const double st = std::sin(t), ct = std::cos(t);
    const double sT = std::sin(T), cT = std::cos(T);
    Vec3 p(st, 0.0, ct);
    Vec3 q(sT * std::cos(gg), sT * std::sin(gg), cT);
    p += dt * Hp[i];
    q += dt * Hq[i];
    p.normalize();
    q.normalize();
    const double th_new = std::acos(std::clamp(p[2], -1.0, 1.0));
    const double phi_new = std::atan2(p[1], p[0]);
    const double Th_new = std::acos(std::clamp(q[2], -1.0, 1.0));
    const double phit_new = std::atan2(q[1], q[0]);
    tn[i - 1] = th_new;
    Tn[i - 1] = Th_new;
    gn[i - 1] = gg + wrap_pi((phit_new - phi_new) - gg);
  }
  if (!tn.allFinite() || !Tn.allFinite() || !gn.allFinite())
    throw flow_failure("step produced non-finite samples", state.t);
  if (!(tn[0] > 0.0) || !(tn[N - 2] < kPi))
    throw flow_failure("theta range lost", state.t);
  for (int i = 0; i + 1 < N - 1; ++i) {
    if (!(tn[i + 1] > tn[i]))
      throw flow_failure("theta monotonicity lost", state.t);
    if (!(Tn[i + 1] > Tn[i]))
      throw flow_failure("Theta monotonicity lost", state.t);
  }

  // regrid: anchor the poles, even-quadratic extrapolation for g
  Eigen::VectorXd xT(N + 1), yT(N + 1), yg(N + 1);
  xT[0] = 0.0;
  xT[N] = kPi;
  yT[0] = 0.0;
  yT[N] = kPi;
  xT.segment(1, N - 1) = tn;
  yT.segment(1, N - 1) = Tn;
  yg.segment(1, N - 1) = gn;
  yg[0] = (gn[0] * xT[2] * xT[2] - gn[1] * xT[1] * xT[1]) /
          (xT[2] * xT[2] - xT[1] * xT[1]);
  const double dl = kPi - tn[N - 2], d2 = kPi - tn[N - 3];
  yg[N] = (gn[N - 2] * d2 * d2 - gn[N - 3] * dl * dl) / (d2 * d2 - dl * dl);

  const Pchip interpT(xT, yT);
  const Pchip interpG(xT, yg);
  FlowState out;
  out.theta = state.theta;
  out.Theta.resize(N + 1);
  out.g.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    out.Theta[i] = interpT(state.theta[i]);
    out.g[i] = interpG(state.theta[i]);
  }
  out.Theta[0] = 0.0;
  out.Theta[N] = kPi;
  out.t = state.t + dt;
  return out;
}

double evolution_residual(const FlowState& prev, const FlowState& mid,
                          const FlowState& next) {
  validate_state(prev);
  validate_state(mid);
  validate_state(next);
  const int N = mid.N();
  if (prev.N() != N || next.N() != N ||
      (prev.theta - mid.theta).cwiseAbs().maxCoeff() > 1e-12 ||
      (next.theta - mid.theta).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("evolution_residual: states must share one grid");
  const double dt1 = mid.t - prev.t, dt2 = next.t - mid.t;
  if (!(dt1 > 0.0) || !(dt2 > 0.0) ||
      std::abs(dt2 - dt1) > 1e-9 * std::max(dt1, dt2))
    throw std::invalid_argument(
        "evolution_residual: states must be equally spaced in time");
  const double dt = dt1;
  const double hh = mid.theta[1] - mid.theta[0];

  const FullGeometry g0 = full_geometry(mid);
  const FullGeometry gm = full_geometry(prev);
  const FullGeometry gp = full_geometry(next);

  std::vector<Vec3> Hp, Hq;
  mean_curvature(mid, Hp, Hq);

  double worst = 0.0;
  for (int i = 1; i < N; ++i) {
    const double t = mid.theta[i];
    const Vec3 pth(std::cos(t), 0.0, -std::sin(t));
    const double thdot = Hp[i].dot(pth);

    const double dso = (g0.so[i + 1] - g0.so[i - 1]) / (2.0 * hh);
    const double d2so =
        (g0.so[i + 1] - 2.0 * g0.so[i] + g0.so[i - 1]) / (hh * hh);
    const double Dt = (gp.so[i] - gm.so[i]) / (2.0 * dt) + thdot * dso;
    const double lap = g0.iG11[i] * d2so + g0.b1[i] * dso;

    const double h111 = g0.h(i, 0), h112 = g0.h(i, 1);
    const double h122 = g0.h(i, 3), h222 = g0.h(i, 7);
    const double Q = h111 * h111 + h222 * h222 + 5.0 * h112 * h112 +
                     5.0 * h122 * h122 - 2.0 * h111 * h122 - 2.0 * h112 * h222;
    const double lam = g0.lam[i];
    const double l2 = lam * lam;
    const double B = (1.0 - l2) * (1.0 - l2) / ((1.0 + l2) * (1.0 + l2));

    worst = std::max(worst, std::abs(Dt - lap - g0.so[i] * (Q + B)));
  }
  return worst;
}

double gaussian_density(const FlowState& state,
                        const Eigen::Matrix<double, 6, 1>& center, double t0,
                        int phi_steps) {
  validate_state(state);
  if (!(state.t < t0))
    throw std::invalid_argument("gaussian_density: requires t < t0");
  if (phi_steps < 8)
    throw std::invalid_argument("gaussian_density: need at least 8 phi steps");
  const SliceGeometry geo = geometry(state);
  const int N = state.N();
  const double h = state.theta[1] - state.theta[0];
  const double tau = t0 - state.t;
  const double dphi = 2.0 * kPi / phi_steps;

  double total = 0.0;
  for (int i = 0; i <= N; ++i) {
    if (geo.area_element[i] == 0.0) continue;
    const double sth = std::sin(state.theta[i]), cth = std::cos(state.theta[i]);
    const double sTh = std::sin(state.Theta[i]), cTh = std::cos(state.Theta[i]);
    double ring = 0.0;
    for (int k = 0; k < phi_steps; ++k) {
      const double phi = dphi * k;
      Vec6 y;
      y << sth * std::cos(phi), sth * std::sin(phi), cth,
          sTh * std::cos(phi + state.g[i]), sTh * std::sin(phi + state.g[i]),
          cTh;
      const double d2 = (y - center).squaredNorm();
      ring += std::exp(-d2 / (4.0 * tau));
    }
    total += ring / (4.0 * kPi * tau) * dphi * geo.area_element[i] * h;
  }
  return total;
}

RunResult run(const FlowConfig& config) {
  if (config.N < 16) throw std::invalid_argument("run: need N >= 16");
  if (!(config.cfl > 0.0) || !(config.cfl <= 0.5))
    throw std::invalid_argument("run: cfl must lie in (0, 0.5]");
  if (!(config.T_final >= 0.0) || !std::isfinite(config.T_final))
    throw std::invalid_argument("run: T_final must be nonnegative");
  if (!(config.report_every > 0.0))
    throw std::invalid_argument("run: report_every must be positive");
  if (config.checkpoint_every < 0.0)
    throw std::invalid_argument("run: checkpoint_every must be nonnegative");

  namespace fs = std::filesystem;
  const bool writing = !config.out_dir.empty();
  if (writing) fs::create_directories(config.out_dir);
  auto out_path = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };

  FlowState state = init_twist(config.N, config.profile, config.amplitude);
  const double h = kPi / config.N;
  const double dt_base = config.cfl * h * h;

  RunResult result;
  result.reports.push_back(monitor(state, geometry(state)));
  double next_report = config.report_every;
  double next_ckpt = config.checkpoint_every > 0.0
                         ? config.checkpoint_every
                         : std::numeric_limits<double>::infinity();
  int ckpt_index = 0;

  auto flush_monitors = [&] {
    if (!writing) return;
    std::ofstream f(out_path("monitors.csv"), std::ios::binary);
    if (!f) throw numerical_error("run: cannot write " + out_path("monitors.csv"));
    f << monitor_csv(result.reports);
  };

  try {
    while (state.t < config.T_final - 1e-12) {
      const double dt = std::min(dt_base, config.T_final - state.t);
      state = step(state, dt);
      if (state.t >= next_report - 1e-12) {
        result.reports.push_back(monitor(state, geometry(state)));
        next_report += config.report_every;
      }
      if (writing && state.t >= next_ckpt - 1e-12) {
        char name[40];
        std::snprintf(name, sizeof name, "checkpoint_%06d.json", ++ckpt_index);
        save_checkpoint(state, out_path(name));
        next_ckpt += config.checkpoint_every;
      }
    }
  } catch (...) {
    // keep whatever monitors were gathered; the last good checkpoint is
    // already on disk
    try {
      flush_monitors();
    } catch (...) {
    }
    throw;
  }

  if (result.reports.back().t < state.t - 1e-12)
    result.reports.push_back(monitor(state, geometry(state)));
  result.terminal = state;
  if (writing) {
    save_checkpoint(state, out_path("checkpoint_final.json"));
    flush_monitors();
  }
  return result;
}

void save_checkpoint(const FlowState& state, const std::string& path) {
  validate_state(state);
  nlohmann::json j;
  j["format_version"] = 1;
  j["t"] = state.t;
  j["theta_grid"] = vector_to_json(state.theta);
  j["Theta"] = vector_to_json(state.Theta);
  j["g"] = vector_to_json(state.g);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("save_checkpoint: cannot write " + path);
  f << j.dump(2) << '\n';
}

FlowState load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("load_checkpoint: " + path + ": " + e.what());
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != 1)
    throw std::invalid_argument("load_checkpoint: unsupported format version in " +
                                path);
  FlowState s;
  if (!j.contains("t") || !j["t"].is_number())
    throw std::invalid_argument("load_checkpoint: missing time in " + path);
  s.t = j["t"].get<double>();
  s.theta = vector_from_json(j.value("theta_grid", nlohmann::json()), "theta_grid");
  s.Theta = vector_from_json(j.value("Theta", nlohmann::json()), "Theta");
  s.g = vector_from_json(j.value("g", nlohmann::json()), "g");
  if (s.Theta.size() != s.theta.size() || s.g.size() != s.theta.size())
    throw std::invalid_argument("load_checkpoint: inconsistent sizes in " + path);
  validate_state(s);
  return s;
}

FlowConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("load_config: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("load_config: " + path + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("load_config: expected an object");
  FlowConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "N")
        c.N = value.get<int>();
      else if (key == "cfl")
        c.cfl = value.get<double>();
      else if (key == "T_final")
        c.T_final = value.get<double>();
      else if (key == "profile")
        c.profile = value.get<std::string>();
      else if (key == "amplitude")
        c.amplitude = value.get<double>();
      else if (key == "report_every")
        c.report_every = value.get<double>();
      else if (key == "checkpoint_every")
        c.checkpoint_every = value.get<double>();
      else if (key == "out_dir")
        c.out_dir = value.get<std::string>();
      else
        throw std::invalid_argument("load_config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("load_config: bad value for '" + key + "'");
    }
  }
  return c;
}

std::string monitor_csv(const std::vector<MonitorReport>& reports) {
  std::string out =
      "t,min_star_omega,max_sff_norm,max_lambda_dev,total_area,"
      "max_symplectic_residual\n";
  for (const auto& r : reports) {
    out += format_double(r.t);
    out += ',';
    out += format_double(r.min_star_omega);
    out += ',';
    out += format_double(r.max_sff_norm);
    out += ',';
    out += format_double(r.max_lambda_dev);
    out += ',';
    out += format_double(r.total_area);
    out += ',';
    out += format_double(r.max_symplectic_residual);
    out += '\n';
  }
  return out;
}

}  // namespace symflow::flow
