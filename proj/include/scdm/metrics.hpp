#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "scdm/constellation.hpp"

namespace scdm {

// (1/n) sum |a_k - b_k|^2
inline double mse(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mse: length mismatch");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] - b[k]);
  return acc / static_cast<double>(a.size());
}

// Fraction of mismatched symbol indices.
inline double ser(std::span<const int> sent, std::span<const int> recovered) {
  if (sent.size() != recovered.size()) throw std::invalid_argument("ser: length mismatch");
  if (sent.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t k = 0; k < sent.size(); ++k) errors += sent[k] != recovered[k];
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

// Gaussian tail probability Q(x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace scdm
