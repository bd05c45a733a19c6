#include "pvilab/isomonodromy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pvilab/errors.hpp"

namespace pvilab {

namespace odeint = boost::numeric::odeint;

cplx PviState::lambda_bar() const {
  const cplx a = lambda[0] + lambda[1] + lambda[2] - 0.5;
  const cplx b = lambda[3] - 0.5;
  return a * a - b * b;
}

namespace {

void check_time(cplx t) {
  if (t == cplx(0.0) || t == cplx(1.0)) throw DomainError("t must avoid 0 and 1");
}

struct Parts {
  cplx p, px, pt, b, bx, bt, d, dprime;
};

Parts parts(const PviState& s) {
  const cplx x = s.x, t = s.t;
  const auto& l = s.lambda;
  Parts r;
  r.p = x * (x - 1.0) * (x - t);
  r.px = 3.0 * x * x - 2.0 * (1.0 + t) * x + t;
  r.pt = -x * (x - 1.0);
  r.b = 2.0 * l[0] * (x - 1.0) * (x - t) + 2.0 * l[1] * x * (x - t) + (2.0 * l[2] - 1.0) * x * (x - 1.0);
  r.bx = 2.0 * l[0] * (2.0 * x - 1.0 - t) + 2.0 * l[1] * (2.0 * x - t) + (2.0 * l[2] - 1.0) * (2.0 * x - 1.0);
  r.bt = -2.0 * l[0] * (x - 1.0) - 2.0 * l[1] * x;
  r.d = t * (t - 1.0);
  r.dprime = 2.0 * t - 1.0;
  return r;
}

}  // namespace

cplx h_vi(const PviState& s) {
  check_time(s.t);
  const Parts q = parts(s);
  return (q.p * s.y * s.y - q.b * s.y + s.lambda_bar() * (s.x - s.t)) / q.d;
}

std::pair<cplx, cplx> pvi_vector_field(const PviState& s) {
  check_time(s.t);
  const Parts q = parts(s);
  const cplx hy = (2.0 * q.p * s.y - q.b) / q.d;
  const cplx hx = (q.px * s.y * s.y - q.bx * s.y + s.lambda_bar()) / q.d;
  return {hy, -hx};
}

cplx h_vi_dt(const PviState& s) {
  check_time(s.t);
  const Parts q = parts(s);
  return (q.pt * s.y * s.y - q.bt * s.y - s.lambda_bar()) / q.d - h_vi(s) * q.dprime / q.d;
}

cplx pvi_flow_second_derivative(const PviState& s) {
  check_time(s.t);
  const Parts q = parts(s);
  const cplx hy = (2.0 * q.p * s.y - q.b) / q.d;
  const cplx hx = (q.px * s.y * s.y - q.bx * s.y + s.lambda_bar()) / q.d;
  const cplx hyy = 2.0 * q.p / q.d;
  const cplx hyx = (2.0 * q.px * s.y - q.bx) / q.d;
  const cplx hyt = (2.0 * q.pt * s.y - q.bt) / q.d - hy * q.dprime / q.d;
  return hyt + hyx * hy - hyy * hx;
}

cplx pvi_rhs(cplx x, cplx xp, cplx t, const std::array<cplx, 4>& l) {
  const cplx first = 0.5 * (1.0 / x + 1.0 / (x - 1.0) + 1.0 / (x - t)) * xp * xp;
  const cplx second = (1.0 / t + 1.0 / (t - 1.0) + 1.0 / (x - t)) * xp;
  const cplx l4 = l[3] - 0.5;
  const cplx bracket = 2.0 * l4 * l4 - 2.0 * l[0] * l[0] * t / (x * x) + 2.0 * l[1] * l[1] * (t - 1.0) / ((x - 1.0) * (x - 1.0)) +
                       (0.5 - 2.0 * l[2] * l[2]) * t * (t - 1.0) / ((x - t) * (x - t));
  return first - second + x * (x - 1.0) * (x - t) / (t * t * (t - 1.0) * (t - 1.0)) * bracket;
}

double pvi_scaled_residual(cplx x, cplx xp, cplx xpp, cplx t, const std::array<cplx, 4>& l) {
  const cplx r = pvi_rhs(x, xp, t, l);
  return std::abs(xpp - r) / (1.0 + std::abs(xpp) + std::abs(r));
}

double PviTrajectory::max_fd_residual() const {
  double m = 0.0;
  for (const auto& s : samples)
    if (s.residual_fd >= 0.0) m = std::max(m, s.residual_fd);
  return m;
}

double PviTrajectory::max_analytic_residual() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.residual_analytic);
  return m;
}

namespace {

using PState = std::array<double, 4>;

double dist_to_segment(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  double s = len2 > 0 ? std::real((p - a) * std::conj(ab)) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::abs(p - (a + s * ab));
}

// least-squares slope of g against t over a window
cplx slope(const std::vector<cplx>& ts, const std::vector<cplx>& gs) {
  const std::size_t n = ts.size();
  cplx mt = 0, mg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mt += ts[k];
    mg += gs[k];
  }
  mt /= static_cast<double>(n);
  mg /= static_cast<double>(n);
  cplx num = 0;
  double den = 0;
  for (std::size_t k = 0; k < n; ++k) {
    num += std::conj(ts[k] - mt) * (gs[k] - mg);
    den += std::norm(ts[k] - mt);
  }
  return den > 0 ? num / den : cplx(0.0);
}

}  // namespace

PviTrajectory integrate_pvi(const PviState& initial, const std::vector<cplx>& t_path, const PviOptions& opts) {
  if (t_path.size() < 2) throw DomainError("time path needs at least two waypoints");
  if (std::abs(t_path.front() - initial.t) > 1e-14 * (1.0 + std::abs(initial.t)))
    throw DomainError("time path must start at the initial time");
  for (std::size_t k = 0; k + 1 < t_path.size(); ++k)
    for (cplx sing : {cplx(0.0), cplx(1.0)})
      if (dist_to_segment(sing, t_path[k], t_path[k + 1]) < opts.clearance)
        throw DomainError("time path passes within the clearance of 0 or 1");

  PviTrajectory tr;
  PState st{initial.x.real(), initial.x.imag(), initial.y.real(), initial.y.imag()};
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_fehlberg78<PState>());
  const int m = std::max(opts.samples_per_segment, 4);

  auto make_sample = [&](cplx t, const PState& s, int seg) {
    PviState ps{cplx(s[0], s[1]), cplx(s[2], s[3]), t, initial.lambda};
    auto [xp, yp] = pvi_vector_field(ps);
    (void)yp;
    const cplx xpp = pvi_flow_second_derivative(ps);
    return PviSample{t, ps.x, ps.y, h_vi(ps), pvi_scaled_residual(ps.x, xp, xpp, t, initial.lambda), -1.0, seg};
  };

  tr.samples.push_back(make_sample(t_path.front(), st, 0));
  for (std::size_t seg = 0; seg + 1 < t_path.size() && tr.completed; ++seg) {
    const cplx t0 = t_path[seg], dt_seg = t_path[seg + 1] - t_path[seg];
    if (std::abs(dt_seg) == 0.0) continue;
    auto rhs = [&](const PState& s, PState& ds, double tau) {
      PviState ps{cplx(s[0], s[1]), cplx(s[2], s[3]), t0 + tau * dt_seg, initial.lambda};
      auto [fx, fy] = pvi_vector_field(ps);
      fx *= dt_seg;
      fy *= dt_seg;
      ds = {fx.real(), fx.imag(), fy.real(), fy.imag()};
    };
    const std::size_t seg_start = tr.samples.size() - 1;
    double tau = 0.0, h = 1.0 / m;
    std::vector<cplx> recent_t, recent_gx, recent_gy;
    for (int k = 1; k <= m && tr.completed; ++k) {
      const double target = static_cast<double>(k) / m;
      while (tau < target) {
        if (tau + h > target) h = target - tau;
        const double before = tau;
        if (stepper.try_step(rhs, st, tau, h) == odeint::fail) {
          if (h < 1e-14) throw AccuracyError("step size underflow without blow-up signature", h);
          continue;
        }
        (void)before;
        const cplx x(st[0], st[1]), y(st[2], st[3]);
        const cplx t = t0 + tau * dt_seg;
        PviState ps{x, y, t, initial.lambda};
        const auto [xp, yp] = pvi_vector_field(ps);
        recent_t.push_back(t);
        recent_gx.push_back(x / xp);
        recent_gy.push_back(y / yp);
        if (recent_t.size() > static_cast<std::size_t>(opts.laurent_window)) {
          recent_t.erase(recent_t.begin());
          recent_gx.erase(recent_gx.begin());
          recent_gy.erase(recent_gy.begin());
        }
        if (std::abs(x) > opts.blowup_threshold || std::abs(y) > opts.blowup_threshold) {
          // u ~ c (t - t0)^(-k) gives u / u' = -(t - t0) / k
          const cplx sl = slope(recent_t, std::abs(x) >= std::abs(y) ? recent_gx : recent_gy);
          tr.events.push_back({t, x, y, std::abs(sl) > 0 ? std::real(-1.0 / sl) : 0.0, static_cast<int>(seg)});
          tr.completed = false;
          break;
        }
      }
      if (tr.completed) tr.samples.push_back(make_sample(t0 + target * dt_seg, st, static_cast<int>(seg)));
    }
    // five-point stencil on the uniform grid of this segment
    const std::size_t seg_end = tr.samples.size();
    const double hs = 1.0 / m;
    for (std::size_t k = seg_start + 2; k + 2 < seg_end; ++k) {
      const auto& s = tr.samples;
      const cplx xs = (-s[k + 2].x + 8.0 * s[k + 1].x - 8.0 * s[k - 1].x + s[k - 2].x) / (12.0 * hs);
      const cplx xss =
          (-s[k + 2].x + 16.0 * s[k + 1].x - 30.0 * s[k].x + 16.0 * s[k - 1].x - s[k - 2].x) / (12.0 * hs * hs);
      tr.samples[k].residual_fd =
          pvi_scaled_residual(s[k].x, xs / dt_seg, xss / (dt_seg * dt_seg), s[k].t, initial.lambda);
    }
  }
  return tr;
}

std::string trajectory_csv(const PviTrajectory& tr) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# pvi-trajectory-v1\n";
  os << "t_re,t_im,x_re,x_im,y_re,y_im,h_re,h_im,residual_analytic,residual_fd,segment\n";
  for (const auto& s : tr.samples)
    os << s.t.real() << ',' << s.t.imag() << ',' << s.x.real() << ',' << s.x.imag() << ',' << s.y.real() << ','
       << s.y.imag() << ',' << s.h.real() << ',' << s.h.imag() << ',' << s.residual_analytic << ',' << s.residual_fd
       << ',' << s.segment << '\n';
  return os.str();
}

// ---- continuation ----

cplx moebius_normalize(cplx z, const std::array<cplx, 4>& t) {
  return (z - t[0]) * (t[1] - t[3]) / ((z - t[3]) * (t[1] - t[0]));
}

namespace {

double orient(cplx a, cplx b, cplx c) { return std::imag(std::conj(b - a) * (c - a)); }

bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool in_triangle(cplx p, cplx a, cplx b, cplx c) {
  const double o1 = orient(a, b, p), o2 = orient(b, c, p), o3 = orient(c, a, p);
  return (o1 > 0 && o2 > 0 && o3 > 0) || (o1 < 0 && o2 < 0 && o3 < 0);
}

struct Realizer {
  ExponentData base;
  MonodromyOptions mono;
  std::array<int, 4> order{};

  ExponentData at(cplx t3) const {
    ExponentData e = base;
    e.t[2] = t3;
    return e;
  }
  PhiConnection conn(const Eigen::Vector2cd& u, cplx t3) const {
    return from_surface_point(SurfacePoint{u(0), {u(1), 1.0}}, at(t3));
  }
  MonodromyRep rep(const Eigen::Vector2cd& u, cplx t3, bool full) const {
    FuchsianSystem sys = to_fuchsian_system(conn(u, t3));
    MonodromyOptions o = mono;
    if (!full) o.poles_needed = {0, 1, 2};
    StandardLoops loops = standard_loops(sys.poles, o);
    if (loops.order != order) throw DomainError("pole ordering seen from the basepoint changed along the path");
    return monodromy(sys, loops, o);
  }
};

Eigen::Vector2cd pair_residual(const MonodromyRep& r, const TraceData& target) {
  const auto& m = r.matrices;
  return Eigen::Vector2cd((m[0] * m[1]).trace() - target.x, (m[1] * m[2]).trace() - target.y);
}

}  // namespace

ContinuationResult isomonodromic_continue(const PhiConnection& initial, const std::vector<cplx>& t3_path,
                                          const ContinuationOptions& opts) {
  if (t3_path.empty()) throw DomainError("empty t3 path");
  const ExponentData& e0 = initial.exponents;
  if (std::abs(t3_path.front() - e0.t[2]) > 1e-12 * (1.0 + std::abs(e0.t[2])))
    throw DomainError("t3 path must start at the current t3");
  ContinuationResult res;
  res.path.push_back(initial);

  double length = 0.0;
  for (std::size_t k = 0; k + 1 < t3_path.size(); ++k) length += std::abs(t3_path[k + 1] - t3_path[k]);

  Realizer rz{e0, opts.monodromy, {}};
  SurfacePoint s0 = p_map(initial);
  ContinuationStep first{e0.t[2], s0, 0.0, 0.0, 0, {}};

  if (length == 0.0) {
    res.steps.push_back(first);
    res.pvi.note = "zero-length path";
    return res;
  }
  if (!initial.phi_invertible()) throw PreconditionError("continuation starts from a connection with invertible phi");

  // basepoint and loop order frozen at the start
  FuchsianSystem sys0 = to_fuchsian_system(initial);
  StandardLoops loops0 = standard_loops(sys0.poles, opts.monodromy);
  rz.mono.basepoint = loops0.loops[0].basepoint;
  rz.order = loops0.order;
  const cplx b = *rz.mono.basepoint;
  for (std::size_t k = 0; k + 1 < t3_path.size(); ++k)
    for (int j : {0, 1, 3}) {
      if (segments_cross(t3_path[k], t3_path[k + 1], b, e0.t[j]) || in_triangle(e0.t[j], b, t3_path[k], t3_path[k + 1]))
        throw DomainError("t3 path crosses the basepoint ray of pole " + std::to_string(j + 1));
      if (dist_to_segment(e0.t[j], t3_path[k], t3_path[k + 1]) < 1e-3)
        throw DomainError("t3 path collides with pole " + std::to_string(j + 1));
    }

  MonodromyOptions full_opts = rz.mono;
  full_opts.poles_needed = {0, 1, 2, 3};
  const MonodromyRep rep0 = monodromy(sys0, loops0, full_opts);
  res.target = rh_invariants(rep0);
  res.steps.push_back(first);

  // evenly spaced stations along the polyline
  std::vector<cplx> stations{t3_path.front()};
  for (std::size_t k = 0; k + 1 < t3_path.size(); ++k) {
    const double seg = std::abs(t3_path[k + 1] - t3_path[k]);
    if (seg == 0.0) continue;
    const int n = std::max(1, static_cast<int>(std::lround(opts.steps * seg / length)));
    for (int j = 1; j <= n; ++j) stations.push_back(t3_path[k] + (t3_path[k + 1] - t3_path[k]) * (static_cast<double>(j) / n));
  }

  Eigen::Vector2cd u(s0.q, s0.iota[0] / s0.iota[1]);
  Eigen::Vector2cd u_prev = u;
  cplx t_cur = stations.front(), t_prev = t_cur;
  bool have_prev = false;

  auto newton = [&](Eigen::Vector2cd guess, cplx t3, int& iters) -> std::optional<Eigen::Vector2cd> {
    for (iters = 0; iters < opts.max_newton; ++iters) {
      Eigen::Vector2cd f;
      try {
        f = pair_residual(rz.rep(guess, t3, false), res.target);
      } catch (const Error&) {
        return std::nullopt;
      }
      if (f.norm() <= opts.newton_tol) return guess;
      Eigen::Matrix2cd jac;
      try {
        for (int c = 0; c < 2; ++c) {
          Eigen::Vector2cd up = guess;
          const double hstep = 1e-7 * std::max(1.0, std::abs(guess(c)));
          up(c) += hstep;
          jac.col(c) = (pair_residual(rz.rep(up, t3, false), res.target) - f) / hstep;
        }
      } catch (const Error&) {
        return std::nullopt;
      }
      Eigen::Vector2cd delta = jac.partialPivLu().solve(-f);
      if (!delta.allFinite()) return std::nullopt;
      double damp = 1.0;
      bool accepted = false;
      for (int k = 0; k < 6; ++k, damp *= 0.5) {
        Eigen::Vector2cd trial = guess + damp * delta;
        try {
          if (pair_residual(rz.rep(trial, t3, false), res.target).norm() < f.norm()) {
            guess = trial;
            accepted = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      if (!accepted) return std::nullopt;
    }
    return std::nullopt;
  };

  for (std::size_t k = 1; k < stations.size(); ++k) {
    const cplx goal = stations[k];
    int bisections = 0;
    while (t_cur != goal) {
      cplx t_next = t_cur + (goal - t_cur) / std::pow(2.0, bisections);
      Eigen::Vector2cd guess = u;
      if (have_prev && t_cur != t_prev) guess = u + (u - u_prev) * ((t_next - t_cur) / (t_cur - t_prev));
      int iters = 0;
      auto sol = newton(guess, t_next, iters);
      double drift = 0.0, zdrift = 0.0;
      MonodromyRep rep;
      if (sol) {
        try {
          rep = rz.rep(*sol, t_next, true);
          TraceData td = rh_invariants(rep);
          for (int i = 0; i < 4; ++i) drift = std::max(drift, std::abs(td.a.a[i][1] - res.target.a.a[i][1]));
          zdrift = std::abs(td.z - res.target.z);
          drift = std::max({drift, std::abs(td.x - res.target.x), std::abs(td.y - res.target.y), zdrift});
        } catch (const Error&) {
          sol.reset();
        }
      }
      if (!sol || drift > opts.drift_tol) {
        if (++bisections > opts.max_bisections)
          throw AccuracyError("continuation stalled at t3 = " + std::to_string(t_cur.real()) + "+" +
                                  std::to_string(t_cur.imag()) + "i",
                              drift);
        continue;
      }
      u_prev = u;
      t_prev = t_cur;
      u = *sol;
      t_cur = t_next;
      have_prev = true;
      bisections = std::max(0, bisections - 1);

      ContinuationStep step;
      step.t3 = t_cur;
      step.point = SurfacePoint{u(0), {u(1), 1.0}};
      step.drift = drift;
      step.z_drift = zdrift;
      step.newton_iterations = iters;
      const ExponentData ecur = rz.at(t_cur);
      for (int j = 0; j < 4; ++j) {
        if (std::abs(u(0) - ecur.t[j]) < opts.boundary_distance) {
          bool near_special = false;
          for (int sign : {1, -1}) {
            auto bp = special_point(ecur, j, sign);
            if (std::abs(bp.iota[0] - u(1)) < opts.boundary_distance * (1.0 + std::abs(u(1)))) near_special = true;
          }
          step.events.push_back(std::string(near_special ? "near special point over t" : "near fibre component D") +
                                std::to_string(j + 1));
        }
      }
      if (std::abs(u(1)) > 1.0 / opts.boundary_distance) step.events.push_back("near section D0");
      res.steps.push_back(step);
      res.path.push_back(rz.conn(u, t_cur));
      res.max_drift = std::max(res.max_drift, drift);
    }
  }

  if (opts.pvi_check) {
    // second-order equation in x = m(q) against tau = m(t3) on runs of equally spaced steps
    const auto& st = res.steps;
    const double eps = 1e-9;
    for (std::size_t k = 2; k + 2 < st.size(); ++k) {
      const cplx h = st[k + 1].t3 - st[k].t3;
      bool uniform = std::abs(h) > 0;
      for (int d = -2; d < 2 && uniform; ++d)
        uniform = std::abs((st[k + d + 1].t3 - st[k + d].t3) - h) <= eps * std::abs(h);
      if (!uniform) continue;
      std::array<cplx, 4> tt = e0.t;
      auto xval = [&](std::size_t i) {
        tt[2] = st[i].t3;
        return moebius_normalize(st[i].point.q, tt);
      };
      const cplx x0 = xval(k), xm1 = xval(k - 1), xm2 = xval(k - 2), xp1 = xval(k + 1), xp2 = xval(k + 2);
      const cplx xs = (-xp2 + 8.0 * xp1 - 8.0 * xm1 + xm2) / (12.0 * h);
      const cplx xss = (-xp2 + 16.0 * xp1 - 30.0 * x0 + 16.0 * xm1 - xm2) / (12.0 * h * h);
      // tau(t3) with t1, t2, t4 fixed
      const cplx c = (e0.t[1] - e0.t[3]) / (e0.t[1] - e0.t[0]);
      const cplx w = st[k].t3 - e0.t[3];
      const cplx tau = c * (st[k].t3 - e0.t[0]) / w;
      const cplx dtau = c * (e0.t[0] - e0.t[3]) / (w * w);
      const cplx d2tau = -2.0 * c * (e0.t[0] - e0.t[3]) / (w * w * w);
      const cplx xt = xs / dtau;
      const cplx xtt = (xss - xt * d2tau) / (dtau * dtau);
      std::array<cplx, 4> lam = e0.lambda;
      const double r = pvi_scaled_residual(x0, xt, xtt, tau, lam);
      res.pvi.max_residual = std::max(res.pvi.max_residual, r);
      ++res.pvi.points;
    }
    res.pvi.performed = res.pvi.points > 0;
    res.pvi.passed = res.pvi.performed && res.pvi.max_residual <= opts.pvi_tol;
    res.pvi.note = res.pvi.performed ? "x = image of q, tau = image of t3 under (t1, t2, t4) -> (0, 1, inf)"
                                     : "fewer than five equally spaced steps";
  }
  return res;
}

}  // namespace pvilab
