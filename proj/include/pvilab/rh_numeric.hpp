#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pvilab/char_variety.hpp"
#include "pvilab/parabolic_conn.hpp"

namespace pvilab {

// nabla = d + sum_i A_i dz / (z - t_i); flat sections solve dY/dz = -A(z) Y
struct FuchsianSystem {
  std::array<cplx, 4> poles{};
  std::array<Eigen::Matrix2cd, 4> residues{};

  Eigen::Matrix2cd connection_matrix(cplx z) const;
};

FuchsianSystem to_fuchsian_system(const PhiConnection& conn, double tol = 1e-9);

struct LoopPath {
  cplx basepoint;
  std::vector<cplx> polyline;  // starts and ends at basepoint
  int pole = -1;
};

struct MonodromyOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
  double clearance_factor = 0.05;  // times the minimal pole distance
  double radius_factor = 0.3;      // loop radius, times the minimal pole distance
  int polygon_sides = 24;
  std::optional<cplx> basepoint;
  bool estimate_error = false;
  double accuracy_threshold = 1e-6;  // relation residual beyond this raises AccuracyError
  std::vector<int> poles_needed{0, 1, 2, 3};
};

struct StandardLoops {
  std::array<LoopPath, 4> loops;
  std::array<int, 4> order{};  // product M_{order[3]} ... M_{order[0]} = I
};

StandardLoops standard_loops(const std::array<cplx, 4>& poles, const MonodromyOptions& opts = {});

// transport of the identity along a polyline; X_{gamma delta} = X_delta X_gamma
Eigen::Matrix2cd transport(const FuchsianSystem& sys, const std::vector<cplx>& polyline, const MonodromyOptions& opts,
                           double clearance);

struct MonodromyRep {
  std::array<Eigen::Matrix2cd, 4> matrices{};
  cplx basepoint;
  std::array<int, 4> order{0, 1, 2, 3};
  double error_estimate = 0.0;

  Eigen::Matrix2cd ordered_product() const;
  double relation_residual() const;
};

MonodromyRep monodromy(const FuchsianSystem& sys, const StandardLoops& loops, const MonodromyOptions& opts = {});
MonodromyRep monodromy(const FuchsianSystem& sys, const MonodromyOptions& opts = {});

struct TraceData {
  AParam a;
  cplx x, y, z;
};

TraceData rh_invariants(const MonodromyRep& rep);

enum class RepClass { smooth_locus, reducible, resonant, indeterminate };
std::string to_string(RepClass c);

struct RepClassification {
  RepClass verdict = RepClass::smooth_locus;
  std::string detail;
};

RepClassification classify_rep(const MonodromyRep& rep, const ExponentData& exp, double tol = 1e-8);

}  // namespace pvilab
