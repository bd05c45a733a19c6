#include "pvilab/char_variety.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "pvilab/errors.hpp"

namespace pvilab {

cplx AParam::product_a0() const {
  cplx p = 1.0;
  for (const auto& row : a) p *= row.at(0);
  return p;
}

double AParam::constraint_residual() const {
  const double sign = ((r * n) % 2 == 0) ? 1.0 : -1.0;
  return std::abs(product_a0() - sign);
}

Eigen::MatrixXcd SurfaceGroupRep::relation_product() const {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(r, r);
  for (int i = 0; i < g; ++i) p = p * alpha[i] * beta[i] * alpha[i].inverse() * beta[i].inverse();
  for (int i = 0; i < n; ++i) p = p * gamma[i];
  return p;
}

double SurfaceGroupRep::relation_residual() const {
  return (relation_product() - Eigen::MatrixXcd::Identity(r, r)).norm();
}

std::vector<cplx> characteristic_coefficients(const Eigen::MatrixXcd& m) {
  // Faddeev-LeVerrier
  const int r = static_cast<int>(m.rows());
  std::vector<cplx> c(r + 1, 0.0);
  c[r] = 1.0;
  Eigen::MatrixXcd mk = Eigen::MatrixXcd::Zero(r, r);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(r, r);
  for (int k = 1; k <= r; ++k) {
    mk = m * mk + c[r - k + 1] * id;
    c[r - k] = -(m * mk).trace() / static_cast<double>(k);
  }
  c.pop_back();
  return c;
}

AParam rh_exponents(const ExponentTable& t, double tol) {
  cplx sum = static_cast<double>(t.d);
  for (const auto& row : t.lambda) {
    if (static_cast<int>(row.size()) != t.r) throw DimensionError("exponent row length differs from rank");
    for (const auto& v : row) sum += v;
  }
  if (std::abs(sum) > tol)
    throw DomainError("exponents violate d + sum(lambda) = 0; residual " + std::to_string(std::abs(sum)));
  AParam out{static_cast<int>(t.lambda.size()), t.r, {}};
  for (const auto& row : t.lambda) {
    std::vector<cplx> poly{1.0};
    for (const auto& lam : row) {
      const cplx root = std::exp(cplx(0.0, -2.0 * std::numbers::pi) * lam);
      std::vector<cplx> next(poly.size() + 1, 0.0);
      for (std::size_t k = 0; k < poly.size(); ++k) {
        next[k + 1] += poly[k];
        next[k] -= root * poly[k];
      }
      poly = std::move(next);
    }
    poly.pop_back();
    out.a.push_back(std::move(poly));
  }
  return out;
}

AParam char_map(const SurfaceGroupRep& rep, double tol) {
  const double res = rep.relation_residual();
  if (res > tol) throw DomainError("relation violated; residual " + std::to_string(res));
  AParam out{rep.n, rep.r, {}};
  for (const auto& gm : rep.gamma) out.a.push_back(characteristic_coefficients(gm));
  return out;
}

PairTraces pair_traces(const SurfaceGroupRep& rep) {
  if (rep.g != 0 || rep.n < 3 || rep.r != 2) throw DomainError("pair traces need genus 0, n >= 3, rank 2");
  const auto& gm = rep.gamma;
  return {(gm[0] * gm[1]).trace(), (gm[1] * gm[2]).trace(), (gm[0] * gm[2]).trace()};
}

namespace {

Eigen::Matrix2cd companion(const std::vector<cplx>& a) {
  Eigen::Matrix2cd c;
  c << 0.0, -a[0], 1.0, -a[1];
  return c;
}

Eigen::Matrix2cd random_invertible(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (;;) {
    Eigen::Matrix2cd m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    if (std::abs(m.determinant()) > 0.2) return m;
  }
}

Eigen::Matrix2cd conj(const Eigen::Matrix2cd& p, const Eigen::Matrix2cd& c) { return p * c * p.inverse(); }

Eigen::Matrix2cd unipotent(cplx s) {
  Eigen::Matrix2cd u;
  u << 1.0, s, 0.0, 1.0;
  return u;
}

}  // namespace

SurfaceGroupRep random_rep_with_a(int g, int n, int r, const AParam& target, std::uint64_t seed, int max_attempts,
                                  double tol) {
  if (r != 2) throw DomainError("random_rep_with_a is implemented for rank 2");
  if (n < 2 || g < 0) throw DomainError("random_rep_with_a needs n >= 2 and g >= 0");
  if (target.n != n || target.r != r) throw DimensionError("target shape does not match (n, r)");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    SurfaceGroupRep rep{g, n, r, {}, {}, {}};
    Eigen::Matrix2cd w = Eigen::Matrix2cd::Identity();
    for (int i = 0; i < g; ++i) {
      Eigen::Matrix2cd a = random_invertible(rng), b = random_invertible(rng);
      rep.alpha.push_back(a);
      rep.beta.push_back(b);
      w = w * a * b * a.inverse() * b.inverse();
    }
    for (int i = 0; i + 2 < n; ++i) {
      const auto& ai = target.a[i];
      const cplx disc = ai[1] * ai[1] - 4.0 * ai[0];
      Eigen::Matrix2cd gi;
      if (std::abs(disc) < 1e-14 && coin(rng)) {
        gi = Eigen::Matrix2cd::Identity() * (-ai[1] / 2.0);
      } else {
        gi = conj(random_invertible(rng), companion(ai));
      }
      rep.gamma.push_back(gi);
      w = w * gi;
    }
    // gamma_{n-1} = P U(s) C U(s)^{-1} P^{-1}; gamma_n = (w gamma_{n-1})^{-1}
    const Eigen::Matrix2cd p = random_invertible(rng);
    const Eigen::Matrix2cd c = companion(target.a[n - 2]);
    auto trace_inv_last = [&](cplx s) {
      Eigen::Matrix2cd gm = conj(p * unipotent(s), c);
      return (w * gm).trace();
    };
    // det(gamma_n) is fixed, so tr(gamma_n) = tr(w gamma_{n-1}) det(gamma_n) is quadratic in s
    const cplx det_last = 1.0 / (w.determinant() * target.a[n - 2][0]);
    const cplx want = -target.a[n - 1][1] / det_last;
    const cplx f0 = trace_inv_last(0.0) - want, fp = trace_inv_last(1.0) - want, fm = trace_inv_last(-1.0) - want;
    const cplx qa = (fp + fm) / 2.0 - f0, qb = (fp - fm) / 2.0, qc = f0;
    cplx s;
    const double sc = std::max({std::abs(qa), std::abs(qb), std::abs(qc), 1.0});
    if (std::abs(qa) > 1e-10 * sc) {
      const cplx root = std::sqrt(qb * qb - 4.0 * qa * qc);
      const cplx s1 = (-qb + root) / (2.0 * qa), s2 = (-qb - root) / (2.0 * qa);
      s = coin(rng) ? s1 : s2;
    } else if (std::abs(qb) > 1e-10 * sc) {
      s = -qc / qb;
    } else {
      continue;
    }
    const Eigen::Matrix2cd gl = conj(p * unipotent(s), c);
    rep.gamma.push_back(gl);
    Eigen::Matrix2cd gn = (w * gl).inverse();
    rep.gamma.push_back(gn);
    // reject when the solved generator misses its target
    std::vector<cplx> got = characteristic_coefficients(gn);
    double miss = std::abs(got[0] - target.a[n - 1][0]) + std::abs(got[1] - target.a[n - 1][1]);
    double scale = 1.0 + std::abs(target.a[n - 1][0]) + std::abs(target.a[n - 1][1]);
    if (miss > tol * scale * 1e2 || !std::isfinite(miss)) continue;
    if (rep.relation_residual() > 1e-12 * (1.0 + gn.norm() * gl.norm())) continue;
    return rep;
  }
  throw SamplingError("rejection budget exhausted; the target may lie on the singular locus");
}

}  // namespace pvilab
