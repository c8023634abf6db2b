#pragma once

#include <cmath>
#include <span>

#include "scdm/scdm.hpp"

namespace scdm::fixtures {

inline ConstellationScheme single_point(cplx z1) {
  ConstellationScheme s;
  s.name = "single";
  s.order = 1;
  s.points = {z1};
  s.bit_map = {""};
  s.avg_power = std::norm(z1);
  return s;
}

struct ZeroScore {
  void score(std::span<const cplx>, double, std::span<cplx> out) const {
    for (cplx& v : out) v = 0.0;
  }
};

// s(z) = -2 z / sigma^2: score of CN(0, 1) data diffused to variance 1 + sigma^2
// is -2z/(1+sigma^2); this is the large-sigma form used by the closed-form checks.
struct LinearScore {
  void score(std::span<const cplx> z, double sigma, std::span<cplx> out) const {
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = -2.0 * z[k] / (sigma * sigma);
  }
};

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace scdm::fixtures
