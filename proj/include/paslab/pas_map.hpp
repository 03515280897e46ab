#ifndef PASLAB_PAS_MAP_HPP
#define PASLAB_PAS_MAP_HPP

#include <array>
#include <fstream>
#include <vector>

#include "paslab/constellation.hpp"
#include "paslab/dm.hpp"

namespace paslab {

enum class MapKind { Serial, Parallel };

inline std::string to_string(MapKind m) { return m == MapKind::Serial ? "serial" : "parallel"; }

// Dual-polarization symbols of one channel; component order is
// (xI, xQ, yI, yQ) = (x.real, x.imag, y.real, y.imag).
struct FourDSymbolFrame {
  std::vector<cdouble> x, y;

  std::size_t size() const { return x.size(); }
};

namespace detail {

// component values of 4D symbol u as mutable references
inline std::array<double*, 4> components(FourDSymbolFrame& f, std::size_t u) {
  return {&reinterpret_cast<double(&)[2]>(f.x[u])[0], &reinterpret_cast<double(&)[2]>(f.x[u])[1],
          &reinterpret_cast<double(&)[2]>(f.y[u])[0], &reinterpret_cast<double(&)[2]>(f.y[u])[1]};
}

inline std::array<double, 4> components(const FourDSymbolFrame& f, std::size_t u) {
  return {f.x[u].real(), f.x[u].imag(), f.y[u].real(), f.y[u].imag()};
}

}  // namespace detail

// Signs pair with amplitudes before mapping: signs[j*N + i] belongs to
// amplitude i of DM j, so both maps arrange the same 4N signed amplitudes.

// Serial map: DM j's N signed amplitudes fill all four components of 4D
// symbols [jN/4, (j+1)N/4).
inline FourDSymbolFrame map_serial(const std::array<AmplitudeBlock, 4>& blocks,
                                   const std::vector<int>& signs,
                                   const QamConstellation& constellation) {
  const std::size_t n = blocks[0].amplitudes.size();
  for (const auto& b : blocks)
    if (b.amplitudes.size() != n) throw ShapeError("serial map: blocks must have equal length");
  if (n % 4 != 0) throw ShapeError("serial map: N must be divisible by 4");
  if (signs.size() != 4 * n) throw ShapeError("serial map: need 4N signs");

  FourDSymbolFrame f;
  f.x.resize(n);
  f.y.resize(n);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t t = 0; t < n / 4; ++t) {
      const std::size_t u = j * (n / 4) + t;
      auto comp = detail::components(f, u);
      for (std::size_t c = 0; c < 4; ++c) {
        const std::size_t i = 4 * t + c;
        const int amp = blocks[j].amplitudes[i];
        const int idx = constellation.alphabet().index_of(amp);
        if (idx < 0) throw ShapeError("serial map: amplitude not in alphabet");
        const bool positive = signs[j * n + i] == 0;
        *comp[c] = constellation.level_value(constellation.dim_index(idx, positive));
      }
    }
  }
  return f;
}

// Parallel map: DM c's N signed amplitudes fill component c of all N 4D symbols.
inline FourDSymbolFrame map_parallel(const std::array<AmplitudeBlock, 4>& blocks,
                                     const std::vector<int>& signs,
                                     const QamConstellation& constellation) {
  const std::size_t n = blocks[0].amplitudes.size();
  for (const auto& b : blocks)
    if (b.amplitudes.size() != n) throw ShapeError("parallel map: blocks must have equal length");
  if (signs.size() != 4 * n) throw ShapeError("parallel map: need 4N signs");

  FourDSymbolFrame f;
  f.x.resize(n);
  f.y.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    auto comp = detail::components(f, u);
    for (std::size_t c = 0; c < 4; ++c) {
      const int amp = blocks[c].amplitudes[u];
      const int idx = constellation.alphabet().index_of(amp);
      if (idx < 0) throw ShapeError("parallel map: amplitude not in alphabet");
      const bool positive = signs[c * n + u] == 0;
      *comp[c] = constellation.level_value(constellation.dim_index(idx, positive));
    }
  }
  return f;
}

inline FourDSymbolFrame map_amplitudes(MapKind kind, const std::array<AmplitudeBlock, 4>& blocks,
                                       const std::vector<int>& signs,
                                       const QamConstellation& constellation) {
  return kind == MapKind::Serial ? map_serial(blocks, signs, constellation)
                                 : map_parallel(blocks, signs, constellation);
}

// Exact inverse of either map on a clean frame.
inline void unmap_frame(MapKind kind, const FourDSymbolFrame& f,
                        const QamConstellation& constellation,
                        std::array<AmplitudeBlock, 4>& blocks, std::vector<int>& signs) {
  const std::size_t n = f.size();
  signs.assign(4 * n, 0);
  std::array<std::vector<int>, 4> amps;
  for (auto& a : amps) a.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    const auto comp = detail::components(f, u);
    for (std::size_t c = 0; c < 4; ++c) {
      const int idx = constellation.nearest_dim_index(comp[c]);
      const int a = constellation.amp_count();
      const int amp_idx = idx < a ? a - 1 - idx : idx - a;
      const int sign = idx < a ? 1 : 0;
      const int level = constellation.alphabet().levels[amp_idx];
      if (kind == MapKind::Parallel) {
        amps[c][u] = level;
        signs[c * n + u] = sign;
      } else {
        const std::size_t j = u / (n / 4);
        const std::size_t i = 4 * (u % (n / 4)) + c;
        amps[j][i] = level;
        signs[j * n + i] = sign;
      }
    }
  }
  for (std::size_t j = 0; j < 4; ++j) blocks[j] = AmplitudeBlock::from_levels(std::move(amps[j]));
}

// transmitted reflected-binary labels per dimension, for bit-metric rates
inline std::vector<unsigned> frame_dim_labels(const FourDSymbolFrame& f,
                                              const QamConstellation& constellation) {
  std::vector<unsigned> labels;
  labels.reserve(4 * f.size());
  for (std::size_t u = 0; u < f.size(); ++u)
    for (double v : detail::components(f, u))
      labels.push_back(QamConstellation::gray_label(constellation.nearest_dim_index(v)));
  return labels;
}

// CSV dump, one row per 4D symbol: index,xI,xQ,yI,yQ
inline void dump_frame_csv(const FourDSymbolFrame& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path);
  out << "symbol,xI,xQ,yI,yQ\n";
  out.precision(17);
  for (std::size_t u = 0; u < f.size(); ++u) {
    const auto c = detail::components(f, u);
    out << u << ',' << c[0] << ',' << c[1] << ',' << c[2] << ',' << c[3] << '\n';
  }
}

}  // namespace paslab

#endif
