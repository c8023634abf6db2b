#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdm/csv.hpp"

namespace scdm {

using cplx = std::complex<double>;

// A length-n sequence of complex channel symbols. std::complex<double> is
// layout-compatible with double[2], so the 2n-real view is free (see as_reals).
using SymbolSequence = std::vector<cplx>;

inline std::span<const double> as_reals(std::span<const cplx> z) {
  return {reinterpret_cast<const double*>(z.data()), 2 * z.size()};
}
inline std::span<double> as_reals(std::span<cplx> z) {
  return {reinterpret_cast<double*>(z.data()), 2 * z.size()};
}

// Squared Euclidean norm over the 2n-real view.
inline double squared_norm(std::span<const cplx> z) {
  double acc = 0.0;
  for (const cplx& v : z) acc += std::norm(v);
  return acc;
}

// Modulation alphabet with unit average symbol energy.
struct ConstellationScheme {
  std::string name;
  int order = 0;                      // M
  std::vector<cplx> points;           // z_1..z_M
  std::vector<std::string> bit_map;   // Gray-coded label of each point
  std::vector<double> axis_levels;    // per-axis amplitude levels, ascending (square QAM)
  double avg_power = 1.0;

  int bits_per_symbol() const {
    int b = 0;
    while ((1 << b) < order) ++b;
    return b;
  }
  // Number of amplitude levels per I/Q axis (sqrt(M) for square QAM).
  int levels_per_axis() const { return static_cast<int>(axis_levels.size()); }
  bool is_square_qam() const { return order >= 4; }
};

namespace detail {

inline std::string to_bits(unsigned value, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int b = 0; b < width; ++b)
    if (value & (1u << (width - 1 - b))) s[static_cast<std::size_t>(b)] = '1';
  return s;
}

inline unsigned gray(unsigned v) { return v ^ (v >> 1); }

}  // namespace detail

inline ConstellationScheme build_bpsk() {
  ConstellationScheme s;
  s.name = "bpsk";
  s.order = 2;
  s.points = {cplx{1.0, 0.0}, cplx{-1.0, 0.0}};
  s.bit_map = {"0", "1"};
  s.axis_levels = {-1.0, 1.0};
  return s;
}

// Square M-QAM, M in {4, 16, 64}. Point index m = i_re * k + i_im with
// i_re, i_im the ascending amplitude indices on a k = sqrt(M) grid; each axis
// carries an independent Gray label, real-axis bits first.
inline ConstellationScheme build_square_qam(int order) {
  if (order != 4 && order != 16 && order != 64)
    throw std::invalid_argument("square QAM order must be 4, 16 or 64, got " +
                                std::to_string(order));
  const int k = order == 4 ? 2 : (order == 16 ? 4 : 8);
  const int axis_bits = order == 4 ? 1 : (order == 16 ? 2 : 3);

  // mean of (2j - (k-1))^2 over j is (k^2 - 1)/3 per axis
  const double scale = 1.0 / std::sqrt(2.0 * (k * k - 1) / 3.0);

  ConstellationScheme s;
  s.name = std::to_string(order) + "qam";
  s.order = order;
  for (int j = 0; j < k; ++j) s.axis_levels.push_back((2 * j - (k - 1)) * scale);
  for (int ir = 0; ir < k; ++ir) {
    for (int ii = 0; ii < k; ++ii) {
      s.points.emplace_back(s.axis_levels[static_cast<std::size_t>(ir)],
                            s.axis_levels[static_cast<std::size_t>(ii)]);
      s.bit_map.push_back(detail::to_bits(detail::gray(static_cast<unsigned>(ir)), axis_bits) +
                          detail::to_bits(detail::gray(static_cast<unsigned>(ii)), axis_bits));
    }
  }
  return s;
}

// BPSK for M = 2, square QAM otherwise.
inline ConstellationScheme build_scheme(int order) {
  return order == 2 ? build_bpsk() : build_square_qam(order);
}

inline SymbolSequence modulate(std::span<const int> indices, const ConstellationScheme& scheme) {
  SymbolSequence out;
  out.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= scheme.order)
      throw std::out_of_range("symbol index " + std::to_string(idx) + " outside [0, " +
                              std::to_string(scheme.order) + ")");
    out.push_back(scheme.points[static_cast<std::size_t>(idx)]);
  }
  return out;
}

// Nearest constellation point per symbol; ties go to the lowest index.
inline std::vector<int> demodulate_hard(std::span<const cplx> seq, const ConstellationScheme& scheme) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (const cplx& v : seq) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < scheme.order; ++m) {
      const double d = std::norm(v - scheme.points[static_cast<std::size_t>(m)]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    out.push_back(best);
  }
  return out;
}

// CSV: index,re,im,bits
inline void write_constellation_csv(std::ostream& os, const ConstellationScheme& scheme) {
  os << "index,re,im,bits\n";
  for (int m = 0; m < scheme.order; ++m) {
    const auto& p = scheme.points[static_cast<std::size_t>(m)];
    os << m << ',' << fmt_real(p.real()) << ',' << fmt_real(p.imag()) << ','
       << scheme.bit_map[static_cast<std::size_t>(m)] << '\n';
  }
}

}  // namespace scdm
