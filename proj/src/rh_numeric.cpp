#include "pvilab/rh_numeric.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pvilab/errors.hpp"

namespace pvilab {

namespace odeint = boost::numeric::odeint;

Eigen::Matrix2cd FuchsianSystem::connection_matrix(cplx z) const {
  Eigen::Matrix2cd a = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 4; ++i) a += residues[i] / (z - poles[i]);
  return a;
}

FuchsianSystem to_fuchsian_system(const PhiConnection& conn, double tol) {
  const cplx det_phi = conn.phi1 * conn.phi2;
  const double scale = std::max({1.0, std::abs(conn.phi1), std::abs(conn.phi2), conn.phi3.max_abs()});
  if (std::abs(det_phi) <= 1e-12 * scale * scale)
    throw DomainError("phi is degenerate: boundary object has no Fuchsian system");
  const auto& exp = conn.exponents;
  const PolyMat2<cplx> adj = conn.phi_matrix().adjugate();
  const PolyMat2<cplx> n = conn.numerator();
  FuchsianSystem sys;
  for (int i = 0; i < 4; ++i) {
    sys.poles[i] = exp.t[i];
    Mat2<cplx> a = evaluate(adj, exp.t[i]) * evaluate(n, exp.t[i]);
    const cplx d = det_phi * exp.pi_prime(i);
    sys.residues[i] << a(0, 0) / d, a(0, 1) / d, a(1, 0) / d, a(1, 1) / d;
  }
  const Poly<cplx> pi = exp.pi();
  const PolyMat2<cplx> full = adj * n;
  // the partial-fraction form must reproduce phi^{-1} N / prod(z - t) exactly
  const cplx centre = (exp.t[0] + exp.t[1] + exp.t[2] + exp.t[3]) / 4.0;
  for (cplx probe : {centre + cplx(0.37, 1.3), centre + cplx(-2.1, 0.6), centre + cplx(5.0, -3.0)}) {
    Mat2<cplx> f = evaluate(full, probe);
    Eigen::Matrix2cd lhs;
    const cplx den = det_phi * pi(probe);
    lhs << f(0, 0) / den, f(0, 1) / den, f(1, 0) / den, f(1, 1) / den;
    Eigen::Matrix2cd rhs = sys.connection_matrix(probe);
    if ((lhs - rhs).norm() > tol * std::max(1.0, lhs.norm()))
      throw DomainError("connection has a polynomial part beyond the simple poles");
  }
  for (int i = 0; i < 4; ++i) {
    const cplx lp = exp.lambda_plus(i), lm = exp.lambda_minus(i);
    const auto& a = sys.residues[i];
    const double s = std::max(1.0, a.norm());
    if (std::abs(a.trace() - (lp + lm)) > tol * s || std::abs(a.determinant() - lp * lm) > tol * s * s)
      throw DomainError("residue at pole " + std::to_string(i) + " does not have the prescribed eigenvalues");
  }
  return sys;
}

namespace {

double min_pole_distance(const std::array<cplx, 4>& p) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) d = std::min(d, std::abs(p[i] - p[j]));
  return d;
}

double segment_distance(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  double s = len2 > 0 ? std::real((p - a) * std::conj(ab)) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::abs(p - (a + s * ab));
}

std::string describe(cplx a, cplx b) {
  std::ostringstream os;
  os << "[" << a.real() << (a.imag() < 0 ? "" : "+") << a.imag() << "i -> " << b.real() << (b.imag() < 0 ? "" : "+")
     << b.imag() << "i]";
  return os.str();
}

using State = std::array<double, 8>;

void check_clearance(const std::array<cplx, 4>& poles, const std::vector<cplx>& path, double clearance) {
  for (std::size_t k = 0; k + 1 < path.size(); ++k)
    for (const cplx& p : poles)
      if (segment_distance(p, path[k], path[k + 1]) < clearance)
        throw ClearanceError("path segment passes within the clearance of a pole", describe(path[k], path[k + 1]));
}

}  // namespace

StandardLoops standard_loops(const std::array<cplx, 4>& poles, const MonodromyOptions& opts) {
  const double dmin = min_pole_distance(poles);
  const double r = opts.radius_factor * dmin;
  const cplx centre = (poles[0] + poles[1] + poles[2] + poles[3]) / 4.0;
  double spread = 0.0;
  for (const auto& p : poles) spread = std::max(spread, std::abs(p - centre));
  const cplx b = opts.basepoint ? *opts.basepoint : centre - cplx(0.0, 2.0 * spread + dmin);
  StandardLoops out;
  std::array<double, 4> angle{};
  for (int i = 0; i < 4; ++i) {
    const cplx dir = (b - poles[i]) / std::abs(b - poles[i]);
    const cplx entry = poles[i] + r * dir;
    const double th0 = std::arg(dir);
    LoopPath lp{b, {b, entry}, i};
    for (int k = 1; k <= opts.polygon_sides; ++k) {
      const double th = th0 + 2.0 * std::numbers::pi * k / opts.polygon_sides;
      lp.polyline.push_back(k == opts.polygon_sides ? entry : poles[i] + r * std::exp(cplx(0.0, th)));
    }
    lp.polyline.push_back(b);
    out.loops[i] = std::move(lp);
    angle[i] = std::arg(poles[i] - b);
  }
  std::array<int, 4> ord{0, 1, 2, 3};
  // seen from the basepoint, counterclockwise sweep order
  std::sort(ord.begin(), ord.end(), [&](int a, int c) { return angle[a] > angle[c]; });
  out.order = ord;
  return out;
}

Eigen::Matrix2cd transport(const FuchsianSystem& sys, const std::vector<cplx>& polyline, const MonodromyOptions& opts,
                           double clearance) {
  check_clearance(sys.poles, polyline, clearance);
  State x{1, 0, 0, 0, 0, 0, 1, 0};  // row-major entries (re, im)
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_fehlberg78<State>());
  for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
    const cplx z0 = polyline[k], dz = polyline[k + 1] - polyline[k];
    if (std::abs(dz) == 0.0) continue;
    auto rhs = [&](const State& s, State& ds, double tau) {
      const Eigen::Matrix2cd a = -dz * sys.connection_matrix(z0 + tau * dz);
      cplx m[2][2] = {{cplx(s[0], s[1]), cplx(s[2], s[3])}, {cplx(s[4], s[5]), cplx(s[6], s[7])}};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const cplx v = a(i, 0) * m[0][j] + a(i, 1) * m[1][j];
          ds[4 * i + 2 * j] = v.real();
          ds[4 * i + 2 * j + 1] = v.imag();
        }
    };
    double tau = 0.0, dt = 0.05;
    long steps = 0;
    while (tau < 1.0) {
      if (tau + dt > 1.0) dt = 1.0 - tau;
      if (stepper.try_step(rhs, x, tau, dt) == odeint::fail) {
        if (dt < 1e-13)
          throw ClearanceError("step size underflow", describe(polyline[k], polyline[k + 1]));
      }
      if (++steps > 2000000) throw AccuracyError("step budget exhausted on segment " + describe(polyline[k], polyline[k + 1]), 0.0);
    }
  }
  Eigen::Matrix2cd out;
  out << cplx(x[0], x[1]), cplx(x[2], x[3]), cplx(x[4], x[5]), cplx(x[6], x[7]);
  return out;
}

Eigen::Matrix2cd MonodromyRep::ordered_product() const {
  Eigen::Matrix2cd p = Eigen::Matrix2cd::Identity();
  for (int k = 0; k < 4; ++k) p = p * matrices[order[k]];
  return p;
}

double MonodromyRep::relation_residual() const { return (ordered_product() - Eigen::Matrix2cd::Identity()).norm(); }

MonodromyRep monodromy(const FuchsianSystem& sys, const StandardLoops& loops, const MonodromyOptions& opts) {
  const double clearance = opts.clearance_factor * min_pole_distance(sys.poles);
  MonodromyRep rep;
  rep.basepoint = loops.loops[0].basepoint;
  rep.order = loops.order;
  for (int i = 0; i < 4; ++i) rep.matrices[i] = Eigen::Matrix2cd::Identity();
  for (int i : opts.poles_needed) rep.matrices[i] = transport(sys, loops.loops[i].polyline, opts, clearance);
  if (opts.estimate_error) {
    MonodromyOptions coarse = opts;
    coarse.rel_tol *= 100.0;
    coarse.abs_tol *= 100.0;
    double e = 0.0;
    for (int i : opts.poles_needed)
      e = std::max(e, (transport(sys, loops.loops[i].polyline, coarse, clearance) - rep.matrices[i]).cwiseAbs().maxCoeff());
    rep.error_estimate = e;
  }
  if (opts.poles_needed.size() == 4) {
    const double res = rep.relation_residual();
    if (res > opts.accuracy_threshold) throw AccuracyError("monodromy relation residual too large", res);
  }
  return rep;
}

MonodromyRep monodromy(const FuchsianSystem& sys, const MonodromyOptions& opts) {
  return monodromy(sys, standard_loops(sys.poles, opts), opts);
}

TraceData rh_invariants(const MonodromyRep& rep) {
  TraceData td;
  td.a.n = 4;
  td.a.r = 2;
  for (const auto& m : rep.matrices) td.a.a.push_back({m.determinant(), -m.trace()});
  const auto& m = rep.matrices;
  td.x = (m[0] * m[1]).trace();
  td.y = (m[1] * m[2]).trace();
  td.z = (m[0] * m[2]).trace();
  return td;
}

std::string to_string(RepClass c) {
  switch (c) {
    case RepClass::smooth_locus: return "smooth-locus";
    case RepClass::reducible: return "reducible";
    case RepClass::resonant: return "resonant";
    case RepClass::indeterminate: return "indeterminate";
  }
  return "unknown";
}

RepClassification classify_rep(const MonodromyRep& rep, const ExponentData& exp, double tol) {
  bool borderline = false;
  std::string border_detail;
  for (int i = 0; i < 4; ++i) {
    const double s = std::max(1.0, rep.matrices[i].norm());
    for (int sign : {1, -1}) {
      const cplx e = std::exp(cplx(0.0, -2.0 * std::numbers::pi) * exp.lambda_signed(i, sign));
      const double dev = (rep.matrices[i] - e * Eigen::Matrix2cd::Identity()).norm() / s;
      if (dev <= tol) return {RepClass::resonant, "M" + std::to_string(i + 1) + " is scalar on a local exponent"};
      if (dev <= 10 * tol) {
        borderline = true;
        border_detail = "scalar test at M" + std::to_string(i + 1) + " within 10x tolerance";
      }
    }
  }
  // common eigenvector search
  double best = std::numeric_limits<double>::infinity();
  bool any_candidate = false;
  for (int i = 0; i < 4; ++i) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(rep.matrices[i]);
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2cd v = es.eigenvectors().col(k);
      if (v.norm() == 0.0) continue;
      v /= v.norm();
      any_candidate = true;
      double worst = 0.0;
      for (int j = 0; j < 4; ++j) {
        Eigen::Vector2cd w = rep.matrices[j] * v;
        worst = std::max(worst, std::abs(w(0) * v(1) - w(1) * v(0)) / std::max(1.0, rep.matrices[j].norm()));
      }
      best = std::min(best, worst);
    }
  }
  if (!any_candidate || best <= tol) return {RepClass::reducible, "common invariant line found"};
  if (best <= 10 * tol) return {RepClass::indeterminate, "common eigenvector test within 10x tolerance"};
  if (borderline) return {RepClass::indeterminate, border_detail};
  return {RepClass::smooth_locus, "irreducible and non-resonant"};
}

}  // namespace pvilab
