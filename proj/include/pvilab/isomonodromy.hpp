#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "pvilab/parabolic_conn.hpp"
#include "pvilab/rh_numeric.hpp"

namespace pvilab {

struct PviState {
  cplx x, y, t;
  std::array<cplx, 4> lambda{};

  cplx lambda_bar() const;
};

cplx h_vi(const PviState& s);
// (dx/dt, dy/dt) = (dH/dy, -dH/dx)
std::pair<cplx, cplx> pvi_vector_field(const PviState& s);
cplx h_vi_dt(const PviState& s);
// x'' implied by the Hamiltonian flow
cplx pvi_flow_second_derivative(const PviState& s);
// right-hand side of the second-order equation
cplx pvi_rhs(cplx x, cplx xp, cplx t, const std::array<cplx, 4>& lambda);
// |x'' - rhs| / (1 + |x''| + |rhs|)
double pvi_scaled_residual(cplx x, cplx xp, cplx xpp, cplx t, const std::array<cplx, 4>& lambda);

struct PviOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double blowup_threshold = 1e8;
  double clearance = 1e-3;
  int samples_per_segment = 200;
  int laurent_window = 6;
};

struct PviSample {
  cplx t, x, y, h;
  double residual_analytic = 0.0;
  double residual_fd = -1.0;  // negative when the stencil is unavailable
  int segment = 0;
};

struct SingularityEvent {
  cplx t, x, y;
  double order_estimate = 0.0;
  int segment = 0;
};

struct PviTrajectory {
  std::vector<PviSample> samples;
  std::vector<SingularityEvent> events;
  bool completed = true;

  double max_fd_residual() const;
  double max_analytic_residual() const;
};

PviTrajectory integrate_pvi(const PviState& initial, const std::vector<cplx>& t_path, const PviOptions& opts = {});
std::string trajectory_csv(const PviTrajectory& tr);

// ---- isomonodromic continuation ----

struct ContinuationOptions {
  int steps = 50;
  double newton_tol = 1e-11;
  double drift_tol = 1e-6;
  int max_newton = 15;
  int max_bisections = 8;
  double boundary_distance = 1e-3;
  MonodromyOptions monodromy;
  bool pvi_check = true;
  double pvi_tol = 1e-4;
};

struct ContinuationStep {
  cplx t3;
  SurfacePoint point;
  double drift = 0.0;    // max over the local traces and the x, y, z pair traces
  double z_drift = 0.0;
  int newton_iterations = 0;
  std::vector<std::string> events;
};

struct PviCrossCheck {
  bool performed = false;
  int points = 0;
  double max_residual = 0.0;
  bool passed = false;
  std::string note;
};

struct ContinuationResult {
  std::vector<PhiConnection> path;
  std::vector<ContinuationStep> steps;
  TraceData target;
  double max_drift = 0.0;
  PviCrossCheck pvi;
};

ContinuationResult isomonodromic_continue(const PhiConnection& initial, const std::vector<cplx>& t3_path,
                                          const ContinuationOptions& opts = {});

// (z - t1)(t2 - t4) / ((z - t4)(t2 - t1))
cplx moebius_normalize(cplx z, const std::array<cplx, 4>& t);

}  // namespace pvilab
