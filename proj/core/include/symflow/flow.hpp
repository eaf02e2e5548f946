#pragma once

// Mean curvature flow of graphs of equivariant area-preserving maps of the
// round 2-sphere inside S^2 x S^2. The twist-map reduction makes the flow
// one-dimensional: a state is the pair of profiles (Theta(theta), g(theta))
// on a uniform polar grid, representing f(theta, phi) =
// (Theta(theta), phi + g(theta)). Stepping is explicit Euler on the
// 6-dimensional embedding with renormalization to the sphere factors and
// monotone reinterpolation back to the uniform grid.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "symflow/errors.hpp"

namespace symflow::flow {

class flow_failure : public numerical_error {
 public:
  flow_failure(const std::string& what, double t)
      : numerical_error(what), t(t) {}
  double t;  // flow time at which the step failed
};

struct FlowState {
  Eigen::VectorXd theta;  // N+1 uniform samples of [0, pi]
  Eigen::VectorXd Theta;  // first-angle profile, Theta(0)=0, Theta(pi)=pi
  Eigen::VectorXd g;      // twist profile
  double t = 0.0;

  int N() const { return static_cast<int>(theta.size()) - 1; }
};

// Pointwise geometry over the full grid (N+1 entries). Pole rows hold the
// equivariant limits where they are exact (lambda, star_omega,
// symplectic_residual via Theta'(pole); area_element = 0) and even-symmetry
// extrapolations for the curvature norms.
struct SliceGeometry {
  Eigen::VectorXd lambda;               // larger singular value of df, >= 1
  Eigen::VectorXd star_omega;           // 1/(lambda + 1/lambda)
  Eigen::VectorXd sff_norm;             // |II|
  Eigen::VectorXd mean_curvature_norm;  // |H|
  Eigen::VectorXd area_element;         // sqrt(det of induced metric)
  Eigen::VectorXd symplectic_residual;  // |det df - 1|
};

struct MonitorReport {
  double t = 0.0;
  double min_star_omega = 0.0;
  double max_sff_norm = 0.0;
  double max_lambda_dev = 0.0;  // max |lambda - 1|
  double total_area = 0.0;
  double max_symplectic_residual = 0.0;
  std::optional<double> gaussian_density;  // not populated by run()
};

struct FlowConfig {
  int N = 200;
  double cfl = 0.1;  // dt = cfl * dtheta^2
  double T_final = 20.0;
  std::string profile = "smooth_twist";
  double amplitude = 0.3;
  double report_every = 1.0;
  double checkpoint_every = 0.0;  // 0: only the terminal checkpoint
  std::string out_dir;            // empty: no files written
};

// Initial data. Families: "constant" (g == amplitude, a rotation graph) and
// "smooth_twist" (g = amplitude (1 - cos theta), pole-smooth by
// construction). Theta starts as the identity profile. N >= 16.
FlowState init_twist(int N, const std::string& profile, double amplitude);

// Full pointwise geometry; throws flow_failure when the graph condition
// (Theta strictly increasing) is lost.
SliceGeometry geometry(const FlowState& state);

// One explicit Euler step of size dt: move by dt*H in the embedding,
// renormalize to the sphere factors, re-extract the profiles and
// reinterpolate (monotone cubic) onto the uniform grid. Equivariance is
// exact by construction. dt should respect dt <= cfl * dtheta^2.
FlowState step(const FlowState& state, double dt);

// Maximum absolute residual, over interior grid points, of the evolution
// identity d/dt *Omega = Lap *Omega + *Omega (Q + curvature term) evaluated
// from three equally spaced consecutive states. The time derivative is the
// material one: central difference at fixed theta plus the advective
// correction from the tangential motion of grid points.
double evolution_residual(const FlowState& prev, const FlowState& mid,
                          const FlowState& next);

// Backward-heat-kernel density: quadrature over the surface of
// (4 pi (t0-t))^-1 exp(-|y - center|^2 / (4 (t0-t))). Diagnostic only.
// Requires state.t < t0.
double gaussian_density(const FlowState& state,
                        const Eigen::Matrix<double, 6, 1>& center, double t0,
                        int phi_steps = 64);

struct RunResult {
  std::vector<MonitorReport> reports;
  FlowState terminal;
};

// Integrates to T_final, reporting every report_every time units (plus the
// initial and terminal slices). With out_dir set, writes monitors.csv,
// numbered checkpoints every checkpoint_every time units, and a terminal
// checkpoint; on failure the last good checkpoint is still on disk and the
// failure is rethrown.
RunResult run(const FlowConfig& config);

// Checkpoint files carry {format_version, t, theta_grid, Theta, g}.
void save_checkpoint(const FlowState& state, const std::string& path);
FlowState load_checkpoint(const std::string& path);

FlowConfig load_config(const std::string& path);

// CSV serialization of a report series with the fixed header
// t,min_star_omega,max_sff_norm,max_lambda_dev,total_area,max_symplectic_residual
std::string monitor_csv(const std::vector<MonitorReport>& reports);

}  // namespace symflow::flow
