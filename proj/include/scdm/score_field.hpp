#pragma once

#include <concepts>
#include <span>
#include <utility>

#include "scdm/constellation.hpp"

namespace scdm {

// Anything that evaluates the per-symbol score grad_z log p_sigma(z) (gradient
// with respect to (re, im)) over a whole sequence.
template <class F>
concept ScoreField = requires(const F& f, std::span<const cplx> z, double sigma, std::span<cplx> out) {
  f.score(z, sigma, out);
};

// Adapts a callable cplx(cplx z, double sigma) into a ScoreField.
template <class Fn>
struct PointwiseScore {
  Fn fn;
  void score(std::span<const cplx> z, double sigma, std::span<cplx> out) const {
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = fn(z[k], sigma);
  }
};

template <class Fn>
PointwiseScore<Fn> pointwise_score(Fn fn) {
  return PointwiseScore<Fn>{std::move(fn)};
}

}  // namespace scdm
