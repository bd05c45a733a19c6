#pragma once

#include <random>

#include "pvilab/parabolic_conn.hpp"

namespace testing {

using pvilab::cplx;

inline pvilab::ExponentData random_generic_exponents(std::mt19937_64& rng,
                                                     std::array<cplx, 4> t = {0.0, 1.0, 2.0, 3.0}) {
  std::uniform_real_distribution<double> re(0.05, 0.45), im(-0.1, 0.1);
  for (;;) {
    std::array<cplx, 4> l;
    for (auto& v : l) v = cplx(re(rng), im(rng));
    auto e = pvilab::ExponentData::make(t, l);
    if (pvilab::is_special(e) == pvilab::SpecialKind::generic) return e;
  }
}

inline pvilab::SurfacePoint random_chart_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> re(-0.5, 3.5), im(0.3, 1.5), w(-1.0, 1.0);
  const cplx q(re(rng), im(rng));
  return {q, {cplx(w(rng), w(rng)), 1.0}};
}

}  // namespace testing
