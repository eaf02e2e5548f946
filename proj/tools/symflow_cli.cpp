// Command-line driver. Every module operation is reachable through a
// subcommand; results are emitted as a single JSON document (or CSV for the
// tabular ones) so tests and plotting scripts can consume them directly.
//
// Exit codes: 0 success, 2 validation error (bad flags or rejected inputs),
// 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symflow/flow.hpp"
#include "symflow/pinch.hpp"
#include "symflow/qform.hpp"
#include "symflow/sympl.hpp"

namespace {

using json = nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_double(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + token + "'");
  }
  while (used < token.size() &&
         std::isspace(static_cast<unsigned char>(token[used])))
    ++used;
  if (used != token.size())
    throw std::invalid_argument("not a number: '" + token + "'");
  return v;
}

Eigen::VectorXd parse_list(const std::string& text) {
  std::vector<double> vals;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) {
    const auto b = token.find_first_not_of(" \t");
    if (b == std::string::npos)
      throw std::invalid_argument("empty entry in list '" + text + "'");
    const auto e = token.find_last_not_of(" \t");
    vals.push_back(parse_double(token.substr(b, e - b + 1)));
  }
  if (vals.empty()) throw std::invalid_argument("empty list");
  Eigen::VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string token;
    while (ls >> token) row.push_back(parse_double(token));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("ragged rows in matrix file " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("empty matrix file " + path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

struct Output {
  std::string command;
  json inputs = json::object();
  json outputs = json::object();
  std::optional<std::string> csv;  // set when a tabular view exists
};

void emit(const Output& o, const std::string& format,
          const std::string& out_path, bool timing, double elapsed) {
  std::string text;
  if (format == "json") {
    json doc;
    doc["schema_version"] = 1;
    doc["command"] = o.command;
    doc["inputs"] = o.inputs;
    doc["outputs"] = o.outputs;
    if (timing) doc["elapsed_seconds"] = elapsed;
    text = doc.dump(2);
    text += '\n';
  } else {
    if (!o.csv)
      throw std::invalid_argument(
          "csv format is only available for tabular results (ode series, "
          "flow run)");
    text = *o.csv;
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write output file " + out_path);
    f << text;
    if (!f) throw std::invalid_argument("failed writing output file " + out_path);
  }
}

json monitor_json(const symflow::flow::MonitorReport& r) {
  json j;
  j["t"] = r.t;
  j["min_star_omega"] = r.min_star_omega;
  j["max_sff_norm"] = r.max_sff_norm;
  j["max_lambda_dev"] = r.max_lambda_dev;
  j["total_area"] = r.total_area;
  j["max_symplectic_residual"] = r.max_symplectic_residual;
  if (r.gaussian_density) j["gaussian_density"] = *r.gaussian_density;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "json";
  bool timing = false;

  CLI::App app{"symplectic pinching and flow toolkit"};
  app.require_subcommand(1);
  app.add_option("--seed", seed, "seed for all randomized inputs")
      ->capture_default_str();
  app.add_option("--out", out_path, "write the result to this file");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_flag("--timing", timing,
               "include elapsed_seconds in the result (breaks byte-identical "
               "reruns)");

  std::function<void(Output&)> runner;

  // ---------------------------------------------------------------- svd
  auto* svd = app.add_subcommand(
      "svd", "reciprocal singular values and adapted basis of a symplectic map");
  svd->fallthrough();
  std::string svd_matrix;
  int svd_dim = 0;
  double svd_spread = 0.5, svd_tol = 1e-10;
  svd->add_option("--matrix", svd_matrix,
                  "text file, one whitespace-separated row per line");
  svd->add_option("--dim", svd_dim,
                  "generate a seeded random symplectic map of R^{2n}");
  svd->add_option("--spread", svd_spread, "generator amplitude")
      ->capture_default_str();
  svd->add_option("--tol", svd_tol, "symplecticity tolerance")
      ->capture_default_str();
  svd->callback([&] {
    runner = [&](Output& o) {
      o.command = "svd";
      Eigen::MatrixXd entries;
      if (!svd_matrix.empty()) {
        entries = read_matrix(svd_matrix);
        o.inputs["matrix_file"] = svd_matrix;
      } else if (svd_dim >= 1) {
        entries = symflow::sympl::random_symplectic(svd_dim, seed, svd_spread).L;
        o.inputs["dim"] = svd_dim;
        o.inputs["spread"] = svd_spread;
        o.inputs["seed"] = seed;
      } else {
        throw std::invalid_argument("svd: provide --matrix or --dim");
      }
      o.inputs["tol"] = svd_tol;
      o.inputs["matrix"] = to_json(entries);

      symflow::sympl::SymplecticMap L(entries);
      const auto basis = symflow::sympl::adapted_basis(L, svd_tol);
      const Eigen::MatrixXd E = symflow::sympl::polar_isometry(L, svd_tol);
      const Eigen::MatrixXd J = symflow::sympl::standard_J(L.n);
      const Eigen::MatrixXd I =
          Eigen::MatrixXd::Identity(2 * L.n, 2 * L.n);

      double pair_err = 0.0;
      for (int k = 0; k < L.n; ++k)
        pair_err = std::max(pair_err,
                            std::abs(basis.spectrum.lambda[2 * k] *
                                         basis.spectrum.lambda[2 * k + 1] -
                                     1.0));
      o.outputs["n"] = L.n;
      o.outputs["lambda"] = to_json(basis.spectrum.lambda);
      o.outputs["is_symplectic"] = symflow::sympl::is_symplectic(L.L, svd_tol);
      o.outputs["symplectic_residual"] =
          (L.L.transpose() * J * L.L - J).cwiseAbs().maxCoeff();
      o.outputs["pair_product_error"] = pair_err;
      o.outputs["polar_orthogonality_error"] =
          (E.transpose() * E - I).cwiseAbs().maxCoeff();
      o.outputs["j_block_error"] =
          (basis.A.transpose() * J * basis.A - J).cwiseAbs().maxCoeff();
      o.outputs["reconstruction_error"] =
          (L.L * basis.A -
           basis.A_tilde * basis.spectrum.lambda.asDiagonal().toDenseMatrix())
              .cwiseAbs()
              .maxCoeff();
      o.outputs["A"] = to_json(basis.A);
      o.outputs["A_tilde"] = to_json(basis.A_tilde);
    };
  });

  // -------------------------------------------------------------- qform
  auto* qf = app.add_subcommand(
      "qform", "assemble the pinching form at a spectrum and analyze it");
  qf->fallthrough();
  std::string qf_lambda;
  int qf_blocks_dim = 0;
  bool qf_with_matrix = false;
  qf->add_option("--lambda", qf_lambda,
                 "comma-separated spectrum in reciprocal pairs");
  qf->add_option("--blocks", qf_blocks_dim,
                 "analyze the lambda = 1 block decomposition for this n");
  qf->add_flag("--with-matrix", qf_with_matrix, "embed the assembled matrix");
  qf->callback([&] {
    runner = [&](Output& o) {
      o.command = "qform";
      if (qf_blocks_dim > 0 && !qf_lambda.empty())
        throw std::invalid_argument("qform: --lambda and --blocks are exclusive");
      namespace q = symflow::qform;
      if (qf_blocks_dim > 0) {
        const int n = qf_blocks_dim;
        o.inputs["blocks"] = n;
        const auto bd = q::block_decomposition_at_one(n);
        const auto Q1 = q::assemble_Q(n, Eigen::VectorXd::Ones(2 * n));
        auto block_json = [](const q::QFormMatrix& b) {
          json j;
          int support = 0;
          for (Eigen::Index i = 0; i < b.M.rows(); ++i)
            if (b.M.row(i).cwiseAbs().maxCoeff() > 0.0) ++support;
          j["support_dim"] = support;
          if (support > 0)
            j["min_eig"] = q::min_eig_on_support(b);
          else
            j["min_eig"] = nullptr;
          return j;
        };
        o.outputs["n"] = n;
        o.outputs["m"] = static_cast<int>(Q1.M.rows());
        o.outputs["Q1"] = block_json(bd.Q1);
        o.outputs["Q2"] = block_json(bd.Q2);
        o.outputs["Q3"] = block_json(bd.Q3);
        o.outputs["reconstruction_error"] =
            (bd.Q1.M + bd.Q2.M + bd.Q3.M - Q1.M).cwiseAbs().maxCoeff();
        o.outputs["min_eig_vs_norm"] = q::min_eig_ratio(Q1, q::norm_matrix(n));
        return;
      }
      if (qf_lambda.empty())
        throw std::invalid_argument("qform: provide --lambda or --blocks");
      const Eigen::VectorXd lam = parse_list(qf_lambda);
      if (lam.size() % 2 != 0)
        throw std::invalid_argument("qform: lambda needs an even entry count");
      const int n = static_cast<int>(lam.size()) / 2;
      o.inputs["lambda"] = to_json(lam);
      const auto Q = q::assemble_Q(n, lam);
      const auto Qe = q::assemble_Q_evolution(n, lam);
      const auto Qt = q::assemble_Qtilde(n, lam);
      o.outputs["n"] = n;
      o.outputs["m"] = static_cast<int>(Q.M.rows());
      o.outputs["assembly_route_difference"] =
          (Q.M - Qe.M).cwiseAbs().maxCoeff();
      o.outputs["min_eig_vs_norm"] = q::min_eig_ratio(Q, q::norm_matrix(n));
      o.outputs["min_eig_vs_ordered_sum"] =
          q::min_eig_ratio(Q, q::ordered_sum_matrix(n));
      o.outputs["qtilde_min_eig_vs_ordered_sum"] =
          q::min_eig_ratio(Qt, q::ordered_sum_matrix(n));
      if (qf_with_matrix) o.outputs["matrix"] = to_json(Q.M);
    };
  });

  // ------------------------------------------------------------ lambda0
  auto* l0 = app.add_subcommand(
      "lambda0", "pinching threshold by bisection on the box minimum");
  l0->fallthrough();
  int l0_dim = 0;
  double l0_tol = 1e-4, l0_cap = 16.0;
  int l0_grid = 33;
  l0->add_option("--dim", l0_dim, "number of reciprocal pairs n")->required();
  l0->add_option("--tol", l0_tol, "bisection tolerance")->capture_default_str();
  l0->add_option("--cap", l0_cap, "search cap on the reciprocal bound")
      ->capture_default_str();
  l0->add_option("--grid", l0_grid, "grid points per log-axis")
      ->capture_default_str();
  l0->callback([&] {
    runner = [&](Output& o) {
      o.command = "lambda0";
      o.inputs["dim"] = l0_dim;
      o.inputs["tol"] = l0_tol;
      o.inputs["cap"] = l0_cap;
      o.inputs["grid"] = l0_grid;
      const auto res = symflow::qform::lambda0(l0_dim, l0_tol, l0_cap, l0_grid);
      o.outputs["n"] = res.n;
      o.outputs["exceeds_cap"] = res.exceeds_cap;
      o.outputs["lambda0"] = res.lambda0;
      o.outputs["tol"] = res.tol;
      o.outputs["grid_steps"] = res.grid_steps;
      o.outputs["minimizing_lambda"] = to_json(res.minimizing_lambda);
    };
  });

  // -------------------------------------------------------------- pinch
  auto* pinch = app.add_subcommand("pinch", "scalar pinching arithmetic");
  pinch->require_subcommand(1);
  pinch->fallthrough();

  std::string pn_lambda;
  int pn_dim = 1;
  double pn_Lambda = 0.0, pn_eps = 0.0, pn_Lambda0 = 0.0, pn_Lambda1 = 0.0;
  double pn_delta = 0.0, pn_C0 = 0.0, pn_K1 = 4.0, pn_K2 = 8.0;
  int pn_grid = 10001;

  auto* p_so = pinch->add_subcommand("star-omega", "Jacobian bound of a spectrum");
  p_so->fallthrough();
  p_so->add_option("--lambda", pn_lambda, "comma-separated spectrum")->required();
  p_so->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch star-omega";
      const symflow::sympl::SingularSpectrum s(parse_list(pn_lambda));
      o.inputs["lambda"] = to_json(s.lambda);
      o.outputs["n"] = s.n;
      o.outputs["star_omega"] = symflow::pinch::star_omega(s);
    };
  });

  auto* p_efl = pinch->add_subcommand("eps-from-lambda",
                                      "defect guaranteed by a pinching bound");
  p_efl->fallthrough();
  p_efl->add_option("--dim", pn_dim, "n")->required();
  p_efl->add_option("--Lambda", pn_Lambda, "pinching bound > 1")->required();
  p_efl->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch eps-from-lambda";
      o.inputs["dim"] = pn_dim;
      o.inputs["Lambda"] = pn_Lambda;
      o.outputs["eps"] = symflow::pinch::eps_from_lambda(pn_dim, pn_Lambda);
    };
  });

  auto* p_lfe = pinch->add_subcommand("lambda-from-eps",
                                      "pinching bound forced by a defect");
  p_lfe->fallthrough();
  p_lfe->add_option("--dim", pn_dim, "n")->required();
  p_lfe->add_option("--eps", pn_eps, "defect in (0, 2^-n)")->required();
  p_lfe->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch lambda-from-eps";
      o.inputs["dim"] = pn_dim;
      o.inputs["eps"] = pn_eps;
      o.outputs["Lambda"] = symflow::pinch::lambda_from_eps(pn_dim, pn_eps);
    };
  });

  auto* p_l1 = pinch->add_subcommand("lambda1",
                                     "initial threshold preserving a bound");
  p_l1->fallthrough();
  p_l1->add_option("--dim", pn_dim, "n (>= 2)")->required();
  p_l1->add_option("--Lambda0", pn_Lambda0, "target bound > 1")->required();
  p_l1->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch lambda1";
      o.inputs["dim"] = pn_dim;
      o.inputs["Lambda0"] = pn_Lambda0;
      o.outputs["Lambda1"] =
          symflow::pinch::lambda1_from_lambda0(pn_dim, pn_Lambda0);
    };
  });

  auto* p_cs = pinch->add_subcommand("curvature-sum",
                                     "product-space curvature forcing term");
  p_cs->fallthrough();
  p_cs->add_option("--lambda", pn_lambda, "comma-separated spectrum")->required();
  p_cs->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch curvature-sum";
      const symflow::sympl::SingularSpectrum s(parse_list(pn_lambda));
      o.inputs["lambda"] = to_json(s.lambda);
      o.outputs["n"] = s.n;
      o.outputs["curvature_sum"] = symflow::pinch::curvature_sum(s);
    };
  });

  auto* p_lc = pinch->add_subcommand("log-comparison",
                                     "grid check of the scalar log inequality");
  p_lc->fallthrough();
  p_lc->add_option("--Lambda0", pn_Lambda0, "bound > 1")->required();
  p_lc->add_option("--grid", pn_grid, "grid points")->capture_default_str();
  p_lc->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch log-comparison";
      o.inputs["Lambda0"] = pn_Lambda0;
      o.inputs["grid"] = pn_grid;
      const auto res = symflow::pinch::log_comparison(pn_Lambda0, pn_grid);
      o.outputs["c"] = res.c;
      o.outputs["inequality_holds"] = res.inequality_holds;
      o.outputs["worst_margin"] = res.worst_margin;
    };
  });

  auto* p_pr = pinch->add_subcommand("params",
                                     "derive the full constant bundle");
  p_pr->fallthrough();
  p_pr->add_option("--dim", pn_dim, "n")->required();
  p_pr->add_option("--Lambda0", pn_Lambda0, "target bound (inf allowed)")
      ->required();
  auto* p_pr_l1 =
      p_pr->add_option("--Lambda1", pn_Lambda1,
                       "initial threshold; derived from Lambda0 when omitted");
  p_pr->add_option("--delta", pn_delta, "form lower bound on the box")->required();
  p_pr->add_option("--C0", pn_C0, "initial min star-omega")->required();
  p_pr->add_option("--K1", pn_K1, "evolution constant")->capture_default_str();
  p_pr->add_option("--K2", pn_K2, "evolution constant")->capture_default_str();
  p_pr->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch params";
      const double L1 = p_pr_l1->count()
                            ? pn_Lambda1
                            : symflow::pinch::lambda1_from_lambda0(pn_dim,
                                                                   pn_Lambda0);
      o.inputs["dim"] = pn_dim;
      o.inputs["Lambda0"] = pn_Lambda0;
      o.inputs["Lambda1"] = L1;
      o.inputs["delta"] = pn_delta;
      o.inputs["C0"] = pn_C0;
      o.inputs["K1"] = pn_K1;
      o.inputs["K2"] = pn_K2;
      const auto p = symflow::pinch::derive_params(pn_dim, pn_Lambda0, L1,
                                                   pn_delta, pn_C0, pn_K1,
                                                   pn_K2);
      o.outputs["n"] = p.n;
      if (p.lambda0_infinite)
        o.outputs["Lambda0"] = "infinite";
      else
        o.outputs["Lambda0"] = p.Lambda0;
      o.outputs["lambda0_infinite"] = p.lambda0_infinite;
      o.outputs["Lambda1"] = p.Lambda1;
      o.outputs["delta"] = p.delta;
      o.outputs["eps"] = p.eps;
      o.outputs["c"] = p.c;
      o.outputs["K1"] = p.K1;
      o.outputs["K2"] = p.K2;
      o.outputs["C0"] = p.C0;
    };
  });

  auto* p_rs = pinch->add_subcommand("random-spectrum",
                                     "seeded spectrum inside a pinching box");
  p_rs->fallthrough();
  p_rs->add_option("--dim", pn_dim, "n")->required();
  p_rs->add_option("--Lambda", pn_Lambda, "box bound >= 1")->required();
  p_rs->callback([&] {
    runner = [&](Output& o) {
      o.command = "pinch random-spectrum";
      o.inputs["dim"] = pn_dim;
      o.inputs["Lambda"] = pn_Lambda;
      o.inputs["seed"] = seed;
      const auto s =
          symflow::pinch::random_pinched_spectrum(pn_dim, pn_Lambda, seed);
      o.outputs["lambda"] = to_json(s.lambda);
      o.outputs["star_omega"] = symflow::pinch::star_omega(s);
    };
  });

  // ---------------------------------------------------------------- ode
  auto* ode = app.add_subcommand(
      "ode", "closed-form comparison ODE evaluation or series");
  ode->fallthrough();
  double ode_K1 = 4.0, ode_K2 = 8.0, ode_delta = 0.0, ode_C0 = 0.0;
  double ode_eps = 0.0, ode_y0 = 0.0, ode_t = 0.0, ode_tmax = 10.0;
  int ode_steps = 101;
  ode->add_option("--K1", ode_K1, "")->capture_default_str();
  ode->add_option("--K2", ode_K2, "")->capture_default_str();
  ode->add_option("--delta", ode_delta, "")->required();
  ode->add_option("--C0", ode_C0, "")->required();
  ode->add_option("--eps", ode_eps, "")->required();
  ode->add_option("--y0", ode_y0, "initial value")->required();
  auto* ode_t_opt = ode->add_option("--t", ode_t, "single evaluation time");
  ode->add_option("--t-max", ode_tmax, "series horizon")->capture_default_str();
  ode->add_option("--steps", ode_steps, "series sample count")
      ->capture_default_str();
  ode->callback([&] {
    runner = [&](Output& o) {
      o.command = "ode";
      o.inputs["K1"] = ode_K1;
      o.inputs["K2"] = ode_K2;
      o.inputs["delta"] = ode_delta;
      o.inputs["C0"] = ode_C0;
      o.inputs["eps"] = ode_eps;
      o.inputs["y0"] = ode_y0;
      const double a = ode_delta * ode_C0 - ode_eps * ode_K1;
      auto eval = [&](double t) {
        return symflow::pinch::comparison_ode(ode_K1, ode_K2, ode_delta,
                                              ode_C0, ode_eps, ode_y0, t);
      };
      if (ode_t_opt->count()) {
        o.inputs["t"] = ode_t;
        o.outputs["y"] = eval(ode_t);
        o.outputs["y_infinity"] = ode_K2 / a;
        return;
      }
      if (ode_steps < 2)
        throw std::invalid_argument("ode: need at least 2 series steps");
      if (!(ode_tmax > 0.0))
        throw std::invalid_argument("ode: t-max must be positive");
      o.inputs["t_max"] = ode_tmax;
      o.inputs["steps"] = ode_steps;
      json ts = json::array(), ys = json::array();
      std::string csv = "t,y\n";
      char buf[96];
      for (int i = 0; i < ode_steps; ++i) {
        const double t = ode_tmax * static_cast<double>(i) /
                         static_cast<double>(ode_steps - 1);
        const double y = eval(t);
        ts.push_back(t);
        ys.push_back(y);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, y);
        csv += buf;
      }
      o.outputs["t"] = std::move(ts);
      o.outputs["y"] = std::move(ys);
      o.outputs["y_infinity"] = ode_K2 / a;
      o.csv = std::move(csv);
    };
  });

  // --------------------------------------------------------------- flow
  auto* flow = app.add_subcommand("flow", "equivariant mean curvature flow");
  flow->require_subcommand(1);
  flow->fallthrough();
  auto* frun = flow->add_subcommand("run", "integrate a configured flow");
  frun->fallthrough();
  std::string flow_config;
  frun->add_option("--config", flow_config, "flat JSON configuration file")
      ->required();
  frun->callback([&] {
    runner = [&](Output& o) {
      o.command = "flow run";
      const auto cfg = symflow::flow::load_config(flow_config);
      o.inputs["config_file"] = flow_config;
      o.inputs["N"] = cfg.N;
      o.inputs["cfl"] = cfg.cfl;
      o.inputs["T_final"] = cfg.T_final;
      o.inputs["profile"] = cfg.profile;
      o.inputs["amplitude"] = cfg.amplitude;
      o.inputs["report_every"] = cfg.report_every;
      o.inputs["checkpoint_every"] = cfg.checkpoint_every;
      o.inputs["out_dir"] = cfg.out_dir;
      const auto result = symflow::flow::run(cfg);
      json reports = json::array();
      for (const auto& r : result.reports) reports.push_back(monitor_json(r));
      o.outputs["reports"] = std::move(reports);
      o.outputs["report_count"] = static_cast<int>(result.reports.size());
      o.outputs["terminal_t"] = result.terminal.t;
      o.csv = symflow::flow::monitor_csv(result.reports);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    Output o;
    runner(o);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    emit(o, format, out_path, timing, elapsed);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const symflow::numerical_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
