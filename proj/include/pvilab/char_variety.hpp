#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pvilab/types.hpp"

namespace pvilab {

// characteristic coefficients: chi_i(s) = s^r + a[i][r-1] s^{r-1} + ... + a[i][0]
struct AParam {
  int n = 0;
  int r = 0;
  std::vector<std::vector<cplx>> a;

  cplx product_a0() const;
  double constraint_residual() const;  // |prod a0 - (-1)^{rn}|
};

// n x r table of local exponents with degree d; membership requires d + sum = 0
struct ExponentTable {
  int r = 2;
  int d = 0;
  std::vector<std::vector<cplx>> lambda;
};

struct SurfaceGroupRep {
  int g = 0;
  int n = 0;
  int r = 2;
  std::vector<Eigen::MatrixXcd> alpha, beta, gamma;

  Eigen::MatrixXcd relation_product() const;
  double relation_residual() const;
};

// coefficients c[0..r-1] of det(sI - m) = s^r + c[r-1] s^{r-1} + ... + c[0]
std::vector<cplx> characteristic_coefficients(const Eigen::MatrixXcd& m);

AParam rh_exponents(const ExponentTable& lambda, double tol = 1e-12);
AParam char_map(const SurfaceGroupRep& rep, double tol = 1e-8);

struct PairTraces {
  cplx x, y, z;
};
// tr(g1 g2), tr(g2 g3), tr(g1 g3) for genus 0 rank 2
PairTraces pair_traces(const SurfaceGroupRep& rep);

SurfaceGroupRep random_rep_with_a(int g, int n, int r, const AParam& target, std::uint64_t seed,
                                  int max_attempts = 200, double tol = 1e-10);

}  // namespace pvilab
