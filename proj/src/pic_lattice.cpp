#include "pvilab/pic_lattice.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "pvilab/errors.hpp"

namespace pvilab::lattice {

DivisorClass& DivisorClass::operator+=(const DivisorClass& o) {
  if (o.coeffs.size() != coeffs.size()) throw DimensionError("divisor classes over different bases");
  for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] += o.coeffs[k];
  return *this;
}

DivisorClass& DivisorClass::operator-=(const DivisorClass& o) {
  if (o.coeffs.size() != coeffs.size()) throw DimensionError("divisor classes over different bases");
  for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] -= o.coeffs[k];
  return *this;
}

DivisorClass operator*(const Integer& k, DivisorClass a) {
  for (auto& c : a.coeffs) c *= k;
  return a;
}

DivisorClass operator-(DivisorClass a) {
  for (auto& c : a.coeffs) c = -c;
  return a;
}

SurfaceLattice SurfaceLattice::hirzebruch(int degree) {
  if (degree < 0) throw DomainError("Hirzebruch degree must be nonnegative");
  SurfaceLattice s;
  s.base_degree_ = degree;
  s.labels_ = {"C0", "F"};
  s.gram_ = {{Integer(-degree), Integer(1)}, {Integer(1), Integer(0)}};
  return s;
}

SurfaceLattice SurfaceLattice::okamoto(const std::array<bool, 4>& coincident) {
  SurfaceLattice s = hirzebruch(2);
  s.blown_up_ = true;
  s.coincident_ = coincident;
  for (int i = 0; i < 4; ++i) {
    std::string idx = std::to_string(i + 1);
    if (coincident[i]) {
      s.labels_.push_back("E[" + idx + ",1st]");
      s.labels_.push_back("E[" + idx + ",2nd]");
    } else {
      s.labels_.push_back("E[" + idx + ",+]");
      s.labels_.push_back("E[" + idx + ",-]");
    }
  }
  // total transforms of exceptional curves are orthonormal of square -1, also when infinitely near
  const std::size_t n = s.labels_.size();
  IntMatrix g(n, std::vector<Integer>(n, Integer(0)));
  g[0][0] = -2;
  g[0][1] = g[1][0] = 1;
  for (std::size_t k = 2; k < n; ++k) g[k][k] = -1;
  s.gram_ = std::move(g);
  return s;
}

SurfaceLattice build_okamoto_surface(const std::array<bool, 4>& coincidences) {
  return SurfaceLattice::okamoto(coincidences);
}

DivisorClass SurfaceLattice::zero() const { return DivisorClass{std::vector<Integer>(rank(), Integer(0))}; }

DivisorClass SurfaceLattice::unit(std::size_t k) const {
  if (k >= rank()) throw IndexError("basis index out of range");
  DivisorClass d = zero();
  d.coeffs[k] = 1;
  return d;
}

DivisorClass SurfaceLattice::by_label(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw IndexError("unknown basis label " + label);
  return unit(static_cast<std::size_t>(it - labels_.begin()));
}

DivisorClass SurfaceLattice::exceptional(int i, int stage) const {
  if (!blown_up_) throw IndexError("lattice has no exceptional classes");
  if (i < 0 || i > 3 || stage < 0 || stage > 1) throw IndexError("exceptional index out of range");
  return unit(2 + 2 * static_cast<std::size_t>(i) + static_cast<std::size_t>(stage));
}

DivisorClass SurfaceLattice::fiber_component(int i) const {
  return fiber() - exceptional(i, 0) - exceptional(i, 1);
}

DivisorClass SurfaceLattice::canonical() const {
  DivisorClass k = zero();
  k.coeffs[0] = -2;
  k.coeffs[1] = -(base_degree_ + 2);
  for (std::size_t e = 2; e < rank(); ++e) k.coeffs[e] = 1;
  return k;
}

Integer SurfaceLattice::intersect(const DivisorClass& a, const DivisorClass& b) const {
  if (a.coeffs.size() != rank() || b.coeffs.size() != rank())
    throw DimensionError("class length does not match lattice rank");
  Integer s = 0;
  for (std::size_t i = 0; i < rank(); ++i) {
    if (a.coeffs[i] == 0) continue;
    for (std::size_t j = 0; j < rank(); ++j) s += a.coeffs[i] * gram_[i][j] * b.coeffs[j];
  }
  return s;
}

Integer intersect(const SurfaceLattice& lat, const DivisorClass& a, const DivisorClass& b) {
  return lat.intersect(a, b);
}

DivisorClass OpPairConfig::total() const {
  DivisorClass y = lattice.zero();
  for (const auto& c : components) y += c.multiplicity * c.cls;
  return y;
}

IntMatrix OpPairConfig::dual_graph() const {
  const std::size_t k = components.size();
  IntMatrix g(k, std::vector<Integer>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) g[i][j] = lattice.intersect(components[i].cls, components[j].cls);
  return g;
}

OpPairConfig anti_canonical(const SurfaceLattice& lattice) {
  OpPairConfig cfg{lattice, {}, {}};
  if (!lattice.has_blowups()) {
    cfg.components.push_back({"-K", -lattice.canonical(), Integer(1)});
    return cfg;
  }
  cfg.components.push_back({"D0", lattice.section(), Integer(2)});
  for (int i = 0; i < 4; ++i)
    cfg.components.push_back({"D" + std::to_string(i + 1), lattice.fiber_component(i), Integer(1)});
  const DivisorClass y = cfg.total();
  for (int i = 0; i < 4; ++i) {
    if (!lattice.coincident(i)) continue;
    std::string idx = std::to_string(i + 1);
    DivisorClass c2 = lattice.exceptional(i, 0) - lattice.exceptional(i, 1);
    DivisorClass c1 = lattice.exceptional(i, 1);
    cfg.extra_curves.push_back({"C2[" + idx + "]", c2, lattice.intersect(c2, c2), lattice.intersect(c2, y), false});
    cfg.extra_curves.push_back({"C1[" + idx + "]", c1, lattice.intersect(c1, c1), lattice.intersect(c1, y), false});
  }
  return cfg;
}

OpPairReport verify_op_pair(const OpPairConfig& cfg) {
  OpPairReport rep;
  const auto& lat = cfg.lattice;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
    rep.ok = rep.ok && ok;
  };
  bool mult_ok = !cfg.components.empty();
  for (const auto& c : cfg.components) mult_ok = mult_ok && c.multiplicity >= 1;
  add("multiplicities >= 1", mult_ok, "");
  const DivisorClass y = cfg.total();
  const DivisorClass minus_k = -lat.canonical();
  std::ostringstream os;
  for (std::size_t k = 0; k < y.coeffs.size(); ++k) os << (k ? "," : "") << y.coeffs[k];
  add("sum m_i Y_i = -K", y == minus_k, "Y = (" + os.str() + ")");
  for (const auto& c : cfg.components) {
    Integer v = lat.intersect(y, c.cls);
    add("Y." + c.name + " = 0", v == 0, "value " + v.str());
  }
  return rep;
}

// ---- affine Dynkin classification ----

namespace {

struct Graph {
  std::size_t n;
  std::vector<std::vector<std::size_t>> adj;
};

bool connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<bool> seen(g.n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : g.adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
  }
  return count == g.n;
}

// length of the chain starting at leaf-side neighbour w of branch vertex b
std::size_t arm_length(const Graph& g, std::size_t b, std::size_t w) {
  std::size_t len = 1, prev = b, cur = w;
  while (g.adj[cur].size() == 2) {
    std::size_t nxt = g.adj[cur][0] == prev ? g.adj[cur][1] : g.adj[cur][0];
    prev = cur;
    cur = nxt;
    ++len;
  }
  return g.adj[cur].size() == 1 ? len : 0;
}

std::string shape_label(const IntMatrix& gram) {
  const std::size_t n = gram.size();
  if (n == 1) return gram[0][0] == 0 ? "smooth/I0" : "";
  for (std::size_t i = 0; i < n; ++i)
    if (gram[i][i] != -2) return "";
  if (n == 2) return (gram[0][1] == 2 && gram[1][0] == 2) ? "A1(1)" : "";
  Graph g{n, std::vector<std::vector<std::size_t>>(n)};
  std::size_t edges = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (gram[i][j] != gram[j][i]) return "";
      if (gram[i][j] == 0) continue;
      if (gram[i][j] != 1) return "";
      g.adj[i].push_back(j);
      g.adj[j].push_back(i);
      ++edges;
    }
  if (!connected(g)) return "";
  std::vector<std::size_t> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = g.adj[i].size();
  if (edges == n) {
    bool cycle = std::all_of(deg.begin(), deg.end(), [](std::size_t d) { return d == 2; });
    return cycle ? "A" + std::to_string(n - 1) + "(1)" : "";
  }
  if (edges != n - 1) return "";
  std::vector<std::size_t> branch;
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] > 4) return "";
    if (deg[i] >= 3) branch.push_back(i);
  }
  if (branch.size() == 1 && deg[branch[0]] == 4) {
    return n == 5 ? "D4(1)" : "";
  }
  if (branch.size() == 2 && deg[branch[0]] == 3 && deg[branch[1]] == 3) {
    // each branch vertex carries two leaves
    for (auto b : branch) {
      std::size_t leaves = 0;
      for (auto w : g.adj[b]) leaves += deg[w] == 1 ? 1 : 0;
      if (leaves != 2) return "";
    }
    return "D" + std::to_string(n - 1) + "(1)";
  }
  if (branch.size() == 1 && deg[branch[0]] == 3) {
    std::vector<std::size_t> arms;
    for (auto w : g.adj[branch[0]]) arms.push_back(arm_length(g, branch[0], w));
    std::sort(arms.begin(), arms.end());
    if (arms == std::vector<std::size_t>{2, 2, 2}) return "E6(1)";
    if (arms == std::vector<std::size_t>{1, 3, 3}) return "E7(1)";
    if (arms == std::vector<std::size_t>{1, 2, 5}) return "E8(1)";
  }
  return "";
}

}  // namespace

DynkinResult classify_fiber(const IntMatrix& gram, const std::vector<Integer>& mult) {
  DynkinResult r;
  r.gram = gram;
  if (gram.size() != mult.size()) throw DimensionError("multiplicity count does not match components");
  std::string label = shape_label(gram);
  if (label.empty()) {
    r.label = "unclassified";
    r.note = "component Gram matrix matches no affine Cartan matrix";
    return r;
  }
  // multiplicities must form the primitive null vector of the negated Cartan matrix
  const std::size_t n = gram.size();
  bool in_kernel = true;
  for (std::size_t i = 0; i < n; ++i) {
    Integer s = 0;
    for (std::size_t j = 0; j < n; ++j) s += gram[i][j] * mult[j];
    in_kernel = in_kernel && s == 0;
  }
  Integer g = 0;
  for (const auto& m : mult) g = boost::multiprecision::gcd(g, m);
  if (!in_kernel || g != 1) {
    r.label = "unclassified";
    r.note = "multiplicities are not the primitive null vector of " + label;
    return r;
  }
  r.label = label;
  r.classified = true;
  return r;
}

DynkinResult dynkin_type(const OpPairConfig& cfg) {
  std::vector<Integer> mult;
  for (const auto& c : cfg.components) mult.push_back(c.multiplicity);
  return classify_fiber(cfg.dual_graph(), mult);
}

Integer bareiss_determinant(IntMatrix m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  Integer sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[k], m[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

bool is_negative_semidefinite(const IntMatrix& gram) {
  // -G is positive semidefinite iff every principal minor of -G is nonnegative
  const std::size_t n = gram.size();
  if (n > 20) throw DomainError("principal-minor test limited to 20 classes");
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    IntMatrix sub(idx.size(), std::vector<Integer>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) sub[a][b] = -gram[idx[a]][idx[b]];
    if (bareiss_determinant(sub) < 0) return false;
  }
  return true;
}

std::vector<std::vector<Rational>> radical_basis(const IntMatrix& gram) {
  const std::size_t n = gram.size();
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = Rational(gram[i][j]);
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t p = row;
    while (p < n && m[p][col] == 0) ++p;
    if (p == n) continue;
    std::swap(m[row], m[p]);
    Rational inv = 1 / m[row][col];
    for (auto& v : m[row]) v *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == row || m[i][col] == 0) continue;
      Rational f = m[i][col];
      for (std::size_t j = 0; j < n; ++j) m[i][j] -= f * m[row][j];
    }
    pivots.push_back(col);
    ++row;
  }
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
    std::vector<Rational> v(n, Rational(0));
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

IntMatrix restricted_gram(const SurfaceLattice& lat, const std::vector<DivisorClass>& classes) {
  IntMatrix g(classes.size(), std::vector<Integer>(classes.size()));
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = 0; j < classes.size(); ++j) g[i][j] = lat.intersect(classes[i], classes[j]);
  return g;
}

}  // namespace pvilab::lattice
