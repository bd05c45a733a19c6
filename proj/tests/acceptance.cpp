#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "pvilab/errors.hpp"
#include "pvilab/isomonodromy.hpp"
#include "pvilab/pic_lattice.hpp"
#include "pvilab/rh_numeric.hpp"
#include "pvilab/stability.hpp"

using namespace pvilab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

double proj_dist(const Vec2<cplx>& a, const Vec2<cplx>& b) {
  return std::abs(a[0] * b[1] - a[1] * b[0]) /
         (std::hypot(std::abs(a[0]), std::abs(a[1])) * std::hypot(std::abs(b[0]), std::abs(b[1])));
}

void lattice_suite(Outcome& o) {
  using namespace pvilab::lattice;
  const auto lat = build_okamoto_surface({false, false, false, false});
  const auto cfg = anti_canonical(lat);
  const DivisorClass y = cfg.total();
  o.require(y == -lat.canonical(), "-K = 2 D0 + sum Di");
  o.require(cfg.components.size() == 5 && cfg.components[0].multiplicity == 2, "D0 has multiplicity 2");
  for (const auto& c : cfg.components) {
    o.require(lat.intersect(y, c.cls) == 0, "Y." + c.name + " = 0");
    o.require(lat.intersect(c.cls, c.cls) == -2, c.name + "^2 = -2");
  }
  o.require(lat.intersect(y, y) == 0, "Y^2 = 0");
  for (int i = 0; i < 4; ++i)
    for (int s = 0; s < 2; ++s) o.require(lat.intersect(lat.exceptional(i, s), lat.exceptional(i, s)) == -1, "E^2 = -1");
  o.require(verify_op_pair(cfg).ok, "verify_op_pair");
  o.require(dynkin_type(cfg).label == "D4(1)", "dynkin D4(1)");
  for (int i = 0; i < 4; ++i) {
    std::array<bool, 4> co{};
    co[i] = true;
    const auto l2 = build_okamoto_surface(co);
    const auto c2 = anti_canonical(l2);
    o.require(verify_op_pair(c2).ok, "coincident op pair");
    int found = 0;
    for (const auto& e : c2.extra_curves) {
      if (e.name.rfind("C1[", 0) == 0) found += e.self_intersection == -1;
      if (e.name.rfind("C2[", 0) == 0) found += e.self_intersection == -2;
    }
    o.require(found == 2, "C1^2 = -1 and C2^2 = -2");
  }
  o.detail << "D4(1), 5 components, exact";
}

void dimension_suite(Outcome& o) {
  o.require(moduli_dimension(2, 4, 0) == 2, "(2,4,0) = 2");
  o.require(moduli_dimension(2, 4, 0) == 2 * 4 - 6, "2n - 6");
  o.require(moduli_dimension(2, 5, 0) == 4, "(2,5,0) = 4");
  o.detail << "2 and 4";
}

void rh_suite(Outcome& o) {
  std::mt19937_64 rng(1001);
  double worst_tr = 0, worst_rel = 0, worst_det = 0;
  for (int k = 0; k < 20; ++k) {
    const auto e = testing::random_generic_exponents(rng);
    o.require(is_special(e) == SpecialKind::generic, "generic lambda");
    const auto rep = monodromy(to_fuchsian_system(from_surface_point(testing::random_chart_point(rng), e)));
    for (int i = 0; i < 4; ++i) {
      worst_tr = std::max(worst_tr, std::abs(rep.matrices[i].trace() - 2.0 * std::cos(2.0 * std::numbers::pi * e.lambda[i])));
      const cplx det = std::exp(cplx(0, -2.0 * std::numbers::pi) * (e.lambda_plus(i) + e.lambda_minus(i)));
      worst_det = std::max(worst_det, std::abs(rep.matrices[i].determinant() - det));
    }
    worst_rel = std::max(worst_rel, rep.relation_residual());
  }
  o.require(worst_tr <= 1e-6, "trace");
  o.require(worst_rel <= 1e-8, "product relation");
  o.require(worst_det <= 1e-8, "determinant");
  o.detail << "max trace err " << worst_tr << ", relation " << worst_rel << ", det " << worst_det;
}

void round_trip_suite(Outcome& o) {
  std::mt19937_64 rng(1002);
  double worst_q = 0, worst_i = 0;
  for (int k = 0; k < 100; ++k) {
    const auto e = testing::random_generic_exponents(rng);
    const auto s = testing::random_chart_point(rng);
    const auto b = p_map(from_surface_point(s, e));
    worst_q = std::max(worst_q, std::abs(b.q - s.q));
    worst_i = std::max(worst_i, std::abs(b.iota[0] / b.iota[1] - s.iota[0] / s.iota[1]));
  }
  o.require(worst_q <= 1e-10 && worst_i <= 1e-10, "round trip");
  o.detail << "max |dq| " << worst_q << ", max |d iota| " << worst_i;
}

void stability_suite(Outcome& o) {
  std::mt19937_64 rng(1003);
  const Weight w = Weight::standard();
  for (int k = 0; k < 5; ++k) {
    auto c = from_surface_point(testing::random_chart_point(rng), testing::random_generic_exponents(rng));
    c.omega3 = Poly<cplx>{};
    const auto r = is_alpha_stable(c, w);
    o.require(r.verdict == Verdict::unstable && r.witness && r.witness->description == "O+0", "omega3 = 0 witness O+0");
    o.require(r.witness && r.witness->pardeg > r.pardeg_e / 2, "witness slope exceeds pardeg E / 2");
  }
  int stable = 0, agree = 0;
  std::array<Rational, 8> ap = w.alpha_prime;
  const Weight w_big = Weight::make(ap, 1, 1, 10000);
  for (int k = 0; k < 50; ++k) {
    const auto c = from_surface_point(testing::random_chart_point(rng), testing::random_generic_exponents(rng));
    const auto a = is_alpha_stable(c, w);
    stable += a.stable();
    agree += a.verdict == is_phi_stable(c, w).verdict && is_alpha_stable(c, w_big).verdict == is_phi_stable(c, w_big).verdict;
  }
  o.require(stable == 50, "50 chart connections alpha-stable");
  o.require(agree == 50, "alpha and phi verdicts agree");
  o.detail << stable << "/50 stable, " << agree << "/50 agree (gamma 1e3 and 1e4)";
}

void collision_suite(Outcome& o) {
  std::mt19937_64 rng(1004);
  std::normal_distribution<double> nd;
  int cases = 0;
  for (int k = 0; k < 16; ++k) {
    const auto e = testing::random_generic_exponents(rng);
    const int i = k % 4, sign = (k / 4) % 2 ? -1 : 1;
    const Vec2<cplx> pa{1.0, cplx(nd(rng), nd(rng))}, pb{1.0, cplx(nd(rng), nd(rng))};
    const auto ca = exceptional_fiber_member(e, i, sign, pa), cb = exceptional_fiber_member(e, i, sign, pb);
    const auto b = special_point(e, i, sign), qa = p_map(ca), qb = p_map(cb);
    o.require(std::abs(qa.q - qb.q) < 1e-12 && proj_dist(qa.iota, qb.iota) < 1e-12, "equal p images");
    o.require(std::abs(qa.q - b.q) < 1e-12 && proj_dist(qa.iota, b.iota) < 1e-12, "image is the special point");
    o.require(proj_dist(fiber_invariant(ca, i), fiber_invariant(cb, i)) > 1e-6, "distinct gauge invariants");
    bool redirected = false;
    try {
      from_surface_point(b, e);
    } catch (const ExceptionalPointError&) {
      redirected = true;
    }
    o.require(redirected, "chart construction refuses the special point");
    ++cases;
  }
  o.detail << cases << " collisions over special points";
}

void pvi_suite(Outcome& o) {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_grad = 0;
  for (int k = 0; k < 100; ++k) {
    PviState s{cplx(1.5 * u(rng), 1.5 * u(rng)), cplx(u(rng), u(rng)), cplx(0.5 + u(rng) * 0.3, 0.6 + u(rng) * 0.3),
               {cplx(0.3 * u(rng), 0.05 * u(rng)), cplx(0.3 * u(rng), 0.05 * u(rng)), cplx(0.3 * u(rng), 0.05 * u(rng)),
                cplx(0.3 * u(rng), 0.05 * u(rng))}};
    if (std::min({std::abs(s.x), std::abs(s.x - 1.0), std::abs(s.x - s.t)}) < 0.2) continue;
    const double h = 1e-5;
    auto at = [&](double dx, double dy) {
      PviState p = s;
      p.x += dx;
      p.y += dy;
      return h_vi(p);
    };
    const cplx hx = (-at(2 * h, 0) + 8.0 * at(h, 0) - 8.0 * at(-h, 0) + at(-2 * h, 0)) / (12 * h);
    const cplx hy = (-at(0, 2 * h) + 8.0 * at(0, h) - 8.0 * at(0, -h) + at(0, -2 * h)) / (12 * h);
    const auto [dx, dy] = pvi_vector_field(s);
    worst_grad = std::max({worst_grad, std::abs(hy - dx) / (1 + std::abs(dx)), std::abs(-hx - dy) / (1 + std::abs(dy))});
  }
  o.require(worst_grad <= 1e-7, "gradient");
  double worst_res = 0;
  const std::array<std::array<cplx, 4>, 3> lams{{{0.11, 0.12, 0.13, 0.15}, {cplx(0.2, 0.05), 0.31, -0.17, 0.4}, {0.05, -0.2, 0.27, 0.33}}};
  int trajectories = 0;
  for (const auto& l : lams) {
    PviOptions opts;
    opts.samples_per_segment = 400;
    const PviState s{cplx(0.3, 0.1), cplx(0.2, -0.3), cplx(0.5, 0.5), l};
    const auto tr = integrate_pvi(s, {s.t, cplx(0.6, 1.2), cplx(1.6, 1.0)}, opts);
    if (!tr.completed) continue;
    worst_res = std::max({worst_res, tr.max_analytic_residual(), tr.max_fd_residual()});
    ++trajectories;
  }
  o.require(trajectories == 3, "pole-free trajectories");
  o.require(worst_res <= 1e-6, "second-order residual");
  o.detail << "max gradient err " << worst_grad << ", max residual " << worst_res << " over " << trajectories << " trajectories";
}

void isomonodromy_suite(Outcome& o) {
  double worst = 0, worst_pvi = 0;
  int pvi_pass = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(2000 + seed);
    const auto e = testing::random_generic_exponents(rng);
    const auto c = from_surface_point(testing::random_chart_point(rng), e);
    ContinuationOptions opts;
    opts.steps = 50;
    const cplx t3 = e.t[2];
    const auto r = isomonodromic_continue(c, {t3, t3 + cplx(0.1, 0.3)}, opts);
    o.require(r.steps.size() >= 51, "50 steps");
    worst = std::max(worst, r.max_drift);
    worst_pvi = std::max(worst_pvi, r.pvi.max_residual);
    pvi_pass += r.pvi.passed;
    if (seed == 1) {
      const auto z = isomonodromic_continue(c, {t3});
      o.require(z.path.size() == 1 && z.path[0].omega2 == c.omega2 && z.path[0].omega4 == c.omega4, "zero-length identity");
    }
  }
  o.require(worst <= 1e-6, "trace drift");
  o.detail << "max drift " << worst << "; pvi cross-check (non-blocking) " << pvi_pass << "/5 within 1e-4, max residual "
           << worst_pvi;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
    double budget;
  };
  const std::vector<Criterion> all{{1, "lattice suite", lattice_suite, 1.0},
                                   {2, "dimension", dimension_suite, 1.0},
                                   {3, "Riemann-Hilbert trace contract", rh_suite, 30.0},
                                   {4, "round trip", round_trip_suite, 5.0},
                                   {5, "stability oracles", stability_suite, 60.0},
                                   {6, "exceptional-fiber collision", collision_suite, 60.0},
                                   {7, "PVI equivalence", pvi_suite, 10.0},
                                   {8, "isomonodromy", isomonodromy_suite, 120.0}};
  int failures = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget) o.require(false, "runtime budget");
    std::printf("criterion %d [%s]: %s (%.3f s of %.0f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs, c.budget,
                o.detail.str().c_str());
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
