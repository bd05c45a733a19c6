#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pvilab/types.hpp"

namespace pvilab::lattice {

using IntMatrix = std::vector<std::vector<Integer>>;

struct DivisorClass {
  std::vector<Integer> coeffs;

  DivisorClass& operator+=(const DivisorClass& o);
  DivisorClass& operator-=(const DivisorClass& o);
  friend DivisorClass operator+(DivisorClass a, const DivisorClass& b) { return a += b; }
  friend DivisorClass operator-(DivisorClass a, const DivisorClass& b) { return a -= b; }
  friend DivisorClass operator*(const Integer& k, DivisorClass a);
  friend DivisorClass operator-(DivisorClass a);
  friend bool operator==(const DivisorClass& a, const DivisorClass& b) { return a.coeffs == b.coeffs; }
};

class SurfaceLattice {
 public:
  // blow-up of the Hirzebruch surface of the given degree at 2 points over each of 4 fibers;
  // coincident[i] makes the two centers over fiber i infinitely near
  static SurfaceLattice okamoto(const std::array<bool, 4>& coincident);
  static SurfaceLattice hirzebruch(int degree = 2);

  int base_degree() const { return base_degree_; }
  std::size_t rank() const { return labels_.size(); }
  std::size_t num_exceptional() const { return labels_.size() - 2; }
  bool has_blowups() const { return blown_up_; }
  bool coincident(int i) const { return coincident_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  const IntMatrix& gram() const { return gram_; }

  DivisorClass zero() const;
  DivisorClass unit(std::size_t k) const;
  DivisorClass by_label(const std::string& label) const;
  DivisorClass section() const { return unit(0); }
  DivisorClass fiber() const { return unit(1); }
  // stage 0 is E[i,+] (or the first-stage center), stage 1 is E[i,-] (or the second stage)
  DivisorClass exceptional(int i, int stage) const;
  // proper transform of the fiber through the centers over t_i
  DivisorClass fiber_component(int i) const;
  DivisorClass canonical() const;

  Integer intersect(const DivisorClass& a, const DivisorClass& b) const;

 private:
  int base_degree_ = 2;
  bool blown_up_ = false;
  std::array<bool, 4> coincident_{};
  std::vector<std::string> labels_;
  IntMatrix gram_;
};

Integer intersect(const SurfaceLattice& lat, const DivisorClass& a, const DivisorClass& b);

SurfaceLattice build_okamoto_surface(const std::array<bool, 4>& coincidences);

struct Component {
  std::string name;
  DivisorClass cls;
  Integer multiplicity;
};

struct ExtraCurve {
  std::string name;
  DivisorClass cls;
  Integer self_intersection;
  Integer meets_anticanonical;
  bool in_support;
};

struct OpPairConfig {
  SurfaceLattice lattice;
  std::vector<Component> components;
  std::vector<ExtraCurve> extra_curves;

  DivisorClass total() const;
  IntMatrix dual_graph() const;
};

OpPairConfig anti_canonical(const SurfaceLattice& lattice);

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

struct OpPairReport {
  bool ok = true;
  std::vector<Check> checks;
};

OpPairReport verify_op_pair(const OpPairConfig& cfg);

struct DynkinResult {
  std::string label;
  bool classified = false;
  IntMatrix gram;
  std::string note;
};

DynkinResult dynkin_type(const OpPairConfig& cfg);
// classification of a component Gram matrix with multiplicities
DynkinResult classify_fiber(const IntMatrix& gram, const std::vector<Integer>& multiplicities);

// exact integer linear algebra helpers
Integer bareiss_determinant(IntMatrix m);
bool is_negative_semidefinite(const IntMatrix& gram);
std::vector<std::vector<Rational>> radical_basis(const IntMatrix& gram);
IntMatrix restricted_gram(const SurfaceLattice& lat, const std::vector<DivisorClass>& classes);

}  // namespace pvilab::lattice
