#ifndef PASLAB_WDM_HPP
#define PASLAB_WDM_HPP

#include <vector>

#include "paslab/link.hpp"
#include "paslab/waveform.hpp"

namespace paslab {

namespace detail {

// Channel offsets are snapped to the FFT bin grid (error < fs/nfft) so that
// shifts, filtering and split-step propagation stay cyclically consistent.
inline double snapped_offset_hz(double f_hz, double sample_rate_hz, std::size_t nfft) {
  const double df = sample_rate_hz / static_cast<double>(nfft);
  return std::round(f_hz / df) * df;
}

inline void shift_pol(std::vector<cdouble>& v, double f_hz, double sample_rate_hz) {
  const double step = 2.0 * kPi * f_hz / sample_rate_hz;
  // incremental rotation avoids nfft sin/cos calls; renormalize periodically
  cdouble rot(1.0, 0.0);
  const cdouble inc = std::polar(1.0, step);
  for (std::size_t n = 0; n < v.size(); ++n) {
    v[n] *= rot;
    rot *= inc;
    if ((n & 0x3ff) == 0x3ff) rot /= std::abs(rot);
  }
}

}  // namespace detail

// Sum of frequency-shifted per-channel waveforms on the common grid.
inline WaveformGrid wdm_mux(const std::vector<WaveformGrid>& channels, const WdmGrid& grid) {
  grid.validate();
  if (channels.size() != static_cast<std::size_t>(grid.channels))
    throw ConfigError("mux: channel count mismatch");
  WaveformGrid out;
  out.sample_rate_hz = channels.front().sample_rate_hz;
  out.x.assign(channels.front().size(), cdouble(0.0, 0.0));
  out.y.assign(channels.front().size(), cdouble(0.0, 0.0));
  for (int ch = 0; ch < grid.channels; ++ch) {
    const auto& w = channels[ch];
    if (w.size() != out.size() || w.sample_rate_hz != out.sample_rate_hz)
      throw ConfigError("mux: channels must share the sample grid");
    const double f =
        detail::snapped_offset_hz(grid.center_frequency_hz(ch), out.sample_rate_hz, out.size());
    std::vector<cdouble> sx = w.x, sy = w.y;
    detail::shift_pol(sx, f, out.sample_rate_hz);
    detail::shift_pol(sy, f, out.sample_rate_hz);
    for (std::size_t n = 0; n < out.size(); ++n) {
      out.x[n] += sx[n];
      out.y[n] += sy[n];
    }
  }
  return out;
}

// Downshift of one channel to baseband; band selection is performed by the
// matched RRC that follows (neighbor bands have zero overlap with it).
inline WaveformGrid wdm_demux(const WaveformGrid& w, const WdmGrid& grid, int channel) {
  grid.validate();
  if (channel < 0 || channel >= grid.channels) throw ConfigError("demux: bad channel index");
  WaveformGrid out = w;
  const double f =
      detail::snapped_offset_hz(grid.center_frequency_hz(channel), w.sample_rate_hz, w.size());
  detail::shift_pol(out.x, -f, w.sample_rate_hz);
  detail::shift_pol(out.y, -f, w.sample_rate_hz);
  return out;
}

}  // namespace paslab

#endif
