#ifndef PASLAB_RRC_HPP
#define PASLAB_RRC_HPP

#include <cmath>
#include <vector>

#include "paslab/waveform.hpp"

namespace paslab {

// Root-raised-cosine magnitude response sampled on the nfft grid. The squared
// response folds to exactly 1 across symbol-rate aliases (Nyquist), so the
// cyclic TX/RX cascade is ISI-free to machine precision.
inline std::vector<double> rrc_response(std::size_t nfft, double sample_rate_hz,
                                        double symbol_rate_hz, double rolloff) {
  std::vector<double> h(nfft, 0.0);
  const double df = sample_rate_hz / static_cast<double>(nfft);
  const double f1 = (1.0 - rolloff) * symbol_rate_hz / 2.0;
  const double f2 = (1.0 + rolloff) * symbol_rate_hz / 2.0;
  for (std::size_t k = 0; k < nfft; ++k) {
    const double f = std::abs(
        (k < nfft / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(nfft)) * df);
    if (f <= f1)
      h[k] = 1.0;
    else if (f < f2 && rolloff > 0.0)
      h[k] = std::cos(kPi * (f - f1) / (2.0 * (f2 - f1)));
  }
  return h;
}

namespace detail {

struct RrcGains {
  double tx, rx;
};

inline RrcGains rrc_gains(const std::vector<double>& h, int oversampling) {
  double sh = 0.0;
  for (double v : h) sh += v * v;
  const double nfft = static_cast<double>(h.size());
  const double tx = std::sqrt(oversampling * nfft / sh);  // unit average waveform power
  return {tx, oversampling / tx};                         // cascade symbol gain = 1
}

}  // namespace detail

// Shapes one polarization's symbols into oversampled baseband samples
// (cyclic frequency-domain filtering; unit average power for unit symbols).
inline std::vector<cdouble> rrc_shape_pol(const std::vector<cdouble>& symbols, double rolloff,
                                          int oversampling, double symbol_rate_hz) {
  const std::size_t nfft = symbols.size() * oversampling;
  std::vector<cdouble> u(nfft, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < symbols.size(); ++k) u[k * oversampling] = symbols[k];
  dsp::fft_forward(u);
  const auto h = rrc_response(nfft, oversampling * symbol_rate_hz, symbol_rate_hz, rolloff);
  const double g = detail::rrc_gains(h, oversampling).tx;
  for (std::size_t k = 0; k < nfft; ++k) u[k] *= h[k] * g;
  dsp::fft_inverse(u);
  return u;
}

inline WaveformGrid rrc_shape(const std::vector<cdouble>& x, const std::vector<cdouble>& y,
                              double rolloff, int oversampling, double symbol_rate_hz) {
  if (x.size() != y.size()) throw ShapeError("rrc: polarizations must have equal length");
  if (oversampling < 2.0 * (1.0 + rolloff))
    throw ConfigError("rrc: oversampling must be >= 2(1+rolloff)");
  WaveformGrid w;
  w.sample_rate_hz = oversampling * symbol_rate_hz;
  w.x = rrc_shape_pol(x, rolloff, oversampling, symbol_rate_hz);
  w.y = rrc_shape_pol(y, rolloff, oversampling, symbol_rate_hz);
  return w;
}

inline std::vector<cdouble> matched_filter_pol(const std::vector<cdouble>& samples,
                                               double rolloff, int oversampling,
                                               double symbol_rate_hz) {
  const std::size_t nfft = samples.size();
  std::vector<cdouble> u = samples;
  dsp::fft_forward(u);
  const auto h = rrc_response(nfft, oversampling * symbol_rate_hz, symbol_rate_hz, rolloff);
  const double g = detail::rrc_gains(h, oversampling).rx;
  for (std::size_t k = 0; k < nfft; ++k) u[k] *= h[k] * g;
  dsp::fft_inverse(u);
  std::vector<cdouble> out(nfft / oversampling);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = u[k * oversampling];
  return out;
}

// matched RRC + symbol-time sampling, both polarizations
inline void matched_filter_and_sample(const WaveformGrid& w, double rolloff, int oversampling,
                                      double symbol_rate_hz, std::vector<cdouble>& x,
                                      std::vector<cdouble>& y) {
  x = matched_filter_pol(w.x, rolloff, oversampling, symbol_rate_hz);
  y = matched_filter_pol(w.y, rolloff, oversampling, symbol_rate_hz);
}

}  // namespace paslab

#endif
