#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pvilab/parabolic_conn.hpp"

namespace pvilab {

using PolyVec = Vec2<Poly<cplx>>;

enum class Verdict { stable, unstable, strictly_semistable, indeterminate };
std::string to_string(Verdict v);

// incidence[i] = dim(l_i ∩ F_{t_i}); rank 1 or 2
Rational parabolic_degree(const std::array<int, 4>& incidence, const Weight& w, const Integer& deg_f, int rank = 1);
Rational parabolic_degree_full(const Weight& w, const Integer& deg_e = -1);

struct LineSubbundle {
  PolyVec generator;  // saturated polynomial generator
  Integer degree;
  std::array<int, 4> incidence{};
};

// saturation of the line spanned by a polynomial vector in O + O(-1)
LineSubbundle saturate(const PolyVec& v, double tol = 1e-9);
std::array<int, 4> incidences(const PhiConnection& conn, const PolyVec& v, double tol = 1e-9);

struct AlphaWitness {
  LineSubbundle sub;
  Rational pardeg;
  std::string description;
};

struct AlphaStabilityResult {
  Verdict verdict = Verdict::stable;
  std::optional<AlphaWitness> witness;
  std::vector<AlphaWitness> invariant_subbundles;
  Rational pardeg_e;
  int d_min = 0;
  bool stable() const { return verdict == Verdict::stable; }
};

// lowest degree of a line subbundle whose parabolic degree can reach pardeg E / 2
int destabilizer_degree_bound(const Weight& w);

AlphaStabilityResult is_alpha_stable(const PhiConnection& conn, const Weight& w, double tol = 1e-9);

struct SubpairData {
  int rank1 = 0;
  Integer deg1 = 0;
  std::array<int, 4> incidence{};  // dim(l_i ∩ F1), each <= rank1
  int rank2 = 0;
  Integer deg2 = 0;
};

Rational mu_phi(const SubpairData& pair, const Weight& w);
SubpairData full_pair();

// rank 0: zero, rank 2: whole bundle, rank 1: line spanned by generator
struct SubObject {
  int rank = 0;
  PolyVec generator{};
};

// verifies phi(F1) ⊆ F2 and nabla(F1) ⊆ F2 ⊗ Ω(D) and returns mu
Rational mu_phi(const PhiConnection& conn, const SubObject& f1, const SubObject& f2, const Weight& w,
                double tol = 1e-9);

struct PhiWitness {
  SubpairData pair;
  Rational mu;
  bool exact = true;  // false when mu is an upper bound over a class
  std::string description;
};

struct PhiStabilityResult {
  Verdict verdict = Verdict::stable;
  std::optional<PhiWitness> witness;
  std::vector<PhiWitness> candidates;
  Rational mu_e;
  bool stable() const { return verdict == Verdict::stable; }
};

PhiStabilityResult is_phi_stable(const PhiConnection& conn, const Weight& w, double tol = 1e-9);

}  // namespace pvilab
