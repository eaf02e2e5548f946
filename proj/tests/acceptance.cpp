// Acceptance gate: one pass/fail line per stated criterion, exit code equal
// to the number of failures. Tolerances and time budgets are printed with
// each line so a log is self-contained.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <symflow/flow.hpp>
#include <symflow/pinch.hpp>
#include <symflow/qform.hpp>
#include <symflow/sympl.hpp>

#include "cli_runner.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace qf = symflow::qform;
namespace sp = symflow::sympl;
namespace pn = symflow::pinch;
namespace fl = symflow::flow;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %02d %s: %s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct Timer {
  double t0 = now_seconds();
  double elapsed() const { return now_seconds() - t0; }
};

constexpr double kGolden = 0.7639320225002102;  // 3 - sqrt(5)

void criterion_1() {
  Timer timer;
  const auto res = qf::lambda0(2);
  const double elapsed = timer.elapsed();
  const double closed = 0.4 * std::sqrt(10.0) + 0.2 * std::sqrt(15.0);
  const double diff = std::fabs(res.lambda0 - closed);
  const bool ok = !res.exceeds_cap && diff <= 1e-3 && elapsed < 60.0;
  report(1, "pinching threshold (n = 2)", ok,
         fmt("lambda0 = %.7f vs closed form %.7f, |diff| = %.2e (<= 1e-3), "
             "%.1f s (< 60 s)",
             res.lambda0, closed, diff, elapsed));
}

void criterion_2() {
  const auto res = qf::lambda0(1, 1e-4, 16.0, 33);
  double indep = 0.0;
  const MatrixXd Q1 = qf::assemble_Q(1, VectorXd::Ones(2)).M;
  for (double l : {1.2, 2.0, 5.0, 16.0}) {
    VectorXd lam(2);
    lam << l, 1.0 / l;
    indep = std::max(indep, (qf::assemble_Q(1, lam).M - Q1).cwiseAbs().maxCoeff());
  }
  const bool ok = res.exceeds_cap && indep <= 1e-12;
  report(2, "surface case is unconditionally positive", ok,
         fmt("delta > 0 up to cap 16 (exceeds_cap = %s), lambda dependence "
             "%.2e (<= 1e-12)",
             res.exceeds_cap ? "true" : "false", indep));
}

void criterion_3() {
  bool ok = true;
  std::string detail;
  double worst_ratio = 0.0, worst_block = 0.0, worst_rec = 0.0;
  for (int n : {1, 2, 3}) {
    const auto Q = qf::assemble_Q(n, VectorXd::Ones(2 * n));
    worst_ratio = std::max(
        worst_ratio, std::fabs(qf::min_eig_ratio(Q, qf::norm_matrix(n)) - kGolden));
    const auto bd = qf::block_decomposition_at_one(n);
    worst_block = std::max(worst_block,
                           std::fabs(qf::min_eig_on_support(bd.Q1) - kGolden));
    if (n >= 2)
      worst_block =
          std::max(worst_block, std::fabs(qf::min_eig_on_support(bd.Q2) - 2.0));
    if (n >= 3)
      worst_block =
          std::max(worst_block, std::fabs(qf::min_eig_on_support(bd.Q3) - 4.0));
    worst_rec = std::max(
        worst_rec, (bd.Q1.M + bd.Q2.M + bd.Q3.M - Q.M).cwiseAbs().maxCoeff());
  }
  ok = worst_ratio <= 1e-9 && worst_block <= 1e-9 && worst_rec <= 1e-12;
  report(3, "spectral gap at the diagonal", ok,
         fmt("|min eig - (3 - sqrt 5)| = %.2e (<= 1e-9), block eigenvalues "
             "off by %.2e (<= 1e-9), reconstruction %.2e (<= 1e-12)",
             worst_ratio, worst_block, worst_rec));
}

void criterion_4() {
  double worst = 0.0, worst_routes = 0.0;
  for (int n : {1, 2}) {
    const auto& ti = qf::triple_index(2 * n);
    for (int rep = 0; rep < 100; ++rep) {
      const std::uint64_t seed = 10000 * n + rep;
      const VectorXd lam = oracles::random_paired_lambda(n, seed);
      const VectorXd v = oracles::random_coords(ti.count(), seed + 777);
      qf::SymTensor3 h(n);
      h.c = v;
      const auto dense = oracles::dense_from_canonical(2 * n, v);
      const auto Qe = qf::assemble_Q_evolution(n, lam);
      const auto Qq = qf::assemble_Q(n, lam);
      const double brute_a = oracles::brute_evolution(lam, dense);
      const double brute_q = oracles::brute_quadform(lam, dense);
      const double scale = std::max(1.0, std::fabs(brute_a));
      worst = std::max(worst, std::fabs(qf::eval(Qe, h) - brute_a) / scale);
      worst = std::max(worst, std::fabs(qf::eval(Qq, h) - brute_q) / scale);
      worst_routes = std::max(
          worst_routes, (Qe.M - Qq.M).cwiseAbs().maxCoeff() /
                            std::max(1.0, Qq.M.cwiseAbs().maxCoeff()));
    }
  }
  const bool ok = worst <= 1e-10 && worst_routes <= 1e-12;
  report(4, "matrix agrees with both published expressions", ok,
         fmt("100 random (lambda, h) at n = 1, 2: worst deviation %.2e "
             "(<= 1e-10), route difference %.2e",
             worst, worst_routes));
}

void criterion_5() {
  Timer timer;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const auto L = sp::random_symplectic(n, seed, 0.6);
    const MatrixXd J = sp::standard_J(n);
    const MatrixXd I = MatrixXd::Identity(2 * n, 2 * n);

    const auto basis = sp::adapted_basis(L);
    for (int k = 0; k < n; ++k)
      worst = std::max(worst, std::fabs(basis.spectrum.lambda[2 * k] *
                                            basis.spectrum.lambda[2 * k + 1] -
                                        1.0));
    const MatrixXd E = sp::polar_isometry(L);
    worst = std::max(worst, (E.transpose() * E - I).cwiseAbs().maxCoeff());
    worst = std::max(worst,
                     (basis.A.transpose() * J * basis.A - J).cwiseAbs().maxCoeff());
    worst = std::max(worst,
                     (basis.A.transpose() * basis.A - I).cwiseAbs().maxCoeff());
    worst = std::max(
        worst,
        (L.L * basis.A - basis.A_tilde * basis.spectrum.lambda.asDiagonal()
                             .toDenseMatrix())
            .cwiseAbs()
            .maxCoeff());
  }
  const double elapsed = timer.elapsed();
  const bool ok = worst <= 1e-9 && elapsed < 30.0;
  report(5, "adapted bases for 1000 random symplectic maps", ok,
         fmt("pairing, polar orthogonality, J blocks, orthonormality, "
             "reconstruction: worst %.2e (<= 1e-9), %.1f s (< 30 s)",
             worst, elapsed));
}

void criterion_6() {
  double worst_rt = 0.0;
  for (double Lam : {1.1, 2.0, 4.0, 9.0}) {
    const double back = pn::lambda_from_eps(1, pn::eps_from_lambda(1, Lam));
    worst_rt = std::max(worst_rt, std::fabs(back - Lam) / Lam);
  }

  bool lemmas = true;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const double Lam = (seed % 2 == 0) ? 1.3 + 0.9 * (seed % 4) : 2.0;
    const auto s = pn::random_pinched_spectrum(n, Lam, seed);
    const double so = pn::star_omega(s);
    if (so < std::ldexp(1.0, -n) - pn::eps_from_lambda(n, Lam) - 1e-12)
      lemmas = false;
    const double eps_s = std::ldexp(1.0, -n) - so;
    if (eps_s > 1e-15) {
      const double Lb = pn::lambda_from_eps(n, eps_s);
      if (s.lambda.maxCoeff() > std::sqrt(Lb) * (1.0 + 1e-12)) lemmas = false;
    }
  }

  double worst_margin = 0.0;
  bool log_ok = true;
  for (double L0 : {1.5, 2.0395077025742265, 4.0}) {
    const auto lc = pn::log_comparison(L0, 10001);
    log_ok = log_ok && lc.inequality_holds;
    worst_margin = std::min(worst_margin, lc.worst_margin);
  }
  log_ok = log_ok && worst_margin >= -1e-12;

  const bool ok = worst_rt <= 1e-10 && lemmas && log_ok;
  report(6, "defect/pinching conversions", ok,
         fmt("n = 1 round trip %.2e (<= 1e-10), directional lemmas on 1000 "
             "spectra %s, log margin %.1e (>= -1e-12 on 10^4 points)",
             worst_rt, lemmas ? "hold" : "FAIL", worst_margin));
}

void criterion_7() {
  // closed form satisfies the ODE pointwise
  const double a = 1.4 * 1.0 - 0.1 * 4.0;  // = 1
  auto y = [](double t) { return pn::comparison_ode(4.0, 1.0, 1.4, 1.0, 0.1, 2.0, t); };
  double worst_resid = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double t = 0.2 * k;
    const double lhs = oracles::fd_derivative(y, t, 1e-3);
    const double yt = y(t);
    worst_resid = std::max(worst_resid, std::fabs(lhs - (-a * yt * yt + yt)));
  }

  // agreement with an independent RK4 integrator over [0, 10]
  struct Case {
    double K1, K2, delta, C0, eps, y0;
  };
  double worst_rk = 0.0;
  for (const Case& cs : {Case{4.0, 1.0, 1.4, 1.0, 0.1, 2.0},
                         Case{4.0, 8.0, 1.0, 0.25, 0.01, 1.0}}) {
    const double ca = cs.delta * cs.C0 - cs.eps * cs.K1;
    auto f = [&](double, double yv) { return -ca * yv * yv + cs.K2 * yv; };
    for (double t : {1.0, 5.0, 10.0}) {
      const double ref = oracles::rk4(f, cs.y0, t, 200000);
      const double got =
          pn::comparison_ode(cs.K1, cs.K2, cs.delta, cs.C0, cs.eps, cs.y0, t);
      worst_rk = std::max(worst_rk,
                          std::fabs(got - ref) / std::max(1.0, std::fabs(ref)));
    }
  }
  const bool ok = worst_resid <= 1e-9 && worst_rk <= 1e-8;
  report(7, "comparison ODE closed form", ok,
         fmt("pointwise residual %.2e (< 1e-9), RK4 agreement %.2e (<= 1e-8 "
             "over [0, 10])",
             worst_resid, worst_rk));
}

void criterion_8() {
  const auto rot = fl::init_twist(64, "constant", 0.7);
  const double h = std::numbers::pi / 64, dt = 0.1 * h * h;
  auto cur = rot;
  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    const auto next = fl::step(cur, dt);
    worst = std::max(worst, (next.Theta - rot.Theta).cwiseAbs().maxCoeff());
    worst = std::max(worst, (next.g.array() - 0.7).abs().maxCoeff());
    cur = next;
  }
  report(8, "rotation graphs are stationary", worst <= 1e-12,
         fmt("max profile drift per step %.2e (<= 1e-12)", worst));
}

void criterion_9() {
  Timer timer;
  fl::FlowConfig cfg;
  cfg.N = 200;
  cfg.T_final = 20.0;
  cfg.profile = "smooth_twist";
  cfg.amplitude = 0.3;
  cfg.report_every = 1.0;
  const auto res = fl::run(cfg);
  const double elapsed = timer.elapsed();

  bool mono_so = true, mono_area = true, sff_final = true;
  for (std::size_t i = 1; i < res.reports.size(); ++i) {
    if (res.reports[i].min_star_omega < res.reports[i - 1].min_star_omega - 1e-6)
      mono_so = false;
    if (res.reports[i].total_area > res.reports[i - 1].total_area + 1e-9)
      mono_area = false;
    if (res.reports[i - 1].t >= 10.0 - 1e-9 &&
        res.reports[i].max_sff_norm > res.reports[i - 1].max_sff_norm + 1e-12)
      sff_final = false;
  }
  const double final_dev = res.reports.back().max_lambda_dev;
  const bool ok = mono_so && mono_area && sff_final && final_dev < 0.05 &&
                  elapsed < 600.0;
  report(9, "long twist run relaxes to an isometry graph", ok,
         fmt("min *Omega nondecreasing (1e-6): %s, area nonincreasing: %s, "
             "max |lambda - 1| at T = 20: %.2e (< 0.05), |II| decreasing on "
             "final half: %s, %.0f s (< 600 s)",
             mono_so ? "yes" : "NO", mono_area ? "yes" : "NO", final_dev,
             sff_final ? "yes" : "NO", elapsed));
}

void criterion_10() {
  const double pi = std::numbers::pi;
  const double tstar = 256.0 * 0.1 * (pi / 100) * (pi / 100);
  auto residual_at = [&](int N) {
    auto s = fl::init_twist(N, "smooth_twist", 0.1);
    const double dt = 0.1 * (pi / N) * (pi / N);
    const int nsteps = static_cast<int>(std::lround(tstar / dt));
    for (int k = 0; k < nsteps - 1; ++k) s = fl::step(s, dt);
    const auto mid = fl::step(s, dt);
    const auto next = fl::step(mid, dt);
    return fl::evolution_residual(s, mid, next);
  };
  const double r100 = residual_at(100);
  const double r200 = residual_at(200);
  const double r400 = residual_at(400);
  const double order1 = std::log2(r100 / r200);
  const double order2 = std::log2(r200 / r400);
  const bool ok = order1 >= 1.0 && order2 >= 1.0;
  report(10, "evolution identity converges under refinement", ok,
         fmt("residuals %.2e / %.2e / %.2e at N = 100/200/400, orders %.2f "
             "and %.2f (>= 1)",
             r100, r200, r400, order1, order2));
}

void criterion_11() {
  const char* cmds[] = {
      "lambda0 --dim 1 --cap 4 --grid 9",
      "svd --dim 2 --seed 3",
      "--seed 11 pinch random-spectrum --dim 2 --Lambda 3",
      "qform --lambda 2,0.5",
  };
  bool ok = true;
  for (const char* cmd : cmds) {
    const auto first = cli::run(cmd);
    const auto second = cli::run(cmd);
    if (first.exit_code != 0 || first.out.empty() || first.out != second.out)
      ok = false;
  }
  report(11, "repeated CLI invocations are byte-identical", ok,
         fmt("%zu commands run twice each, outputs %s", std::size(cmds),
             ok ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures;
}
