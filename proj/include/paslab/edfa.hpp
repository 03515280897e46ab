#ifndef PASLAB_EDFA_HPP
#define PASLAB_EDFA_HPP

#include <cmath>
#include <vector>

#include "paslab/rng.hpp"
#include "paslab/waveform.hpp"

namespace paslab {

// Flat-gain EDFA: amplitude scaling plus circular-Gaussian ASE per
// polarization with PSD n_sp h nu (G-1), n_sp from the noise figure.
inline void edfa(WaveformGrid& w, double gain_db, double noise_figure_db, RngStream& rng) {
  if (gain_db < 0.0) throw ConfigError("edfa: gain must be >= 0 dB");
  const double g = db_to_linear(gain_db);
  const double amp = std::sqrt(g);
  double sigma2 = 0.0;
  if (g > 1.0) {
    const double n_sp = db_to_linear(noise_figure_db) * g / (2.0 * (g - 1.0));
    sigma2 = n_sp * kPlanck * kCarrierFreqHz * (g - 1.0) * w.sample_rate_hz;
  }
  for (auto& v : w.x) v = v * amp + (sigma2 > 0.0 ? rng.next_circular_gaussian(sigma2) : cdouble(0.0));
  for (auto& v : w.y) v = v * amp + (sigma2 > 0.0 ? rng.next_circular_gaussian(sigma2) : cdouble(0.0));
}

inline double edfa_ase_variance(double gain_db, double noise_figure_db, double bandwidth_hz) {
  const double g = db_to_linear(gain_db);
  if (g <= 1.0) return 0.0;
  const double n_sp = db_to_linear(noise_figure_db) * g / (2.0 * (g - 1.0));
  return n_sp * kPlanck * kCarrierFreqHz * (g - 1.0) * bandwidth_hz;
}

// Wiener laser phase noise, phi[0] = 0, increment variance 2 pi dnu dt; the
// same laser rotates both polarizations.
inline void apply_laser_phase_noise(std::vector<cdouble>& x, std::vector<cdouble>& y,
                                    double linewidth_hz, double dt_s, RngStream& rng) {
  if (linewidth_hz < 0.0) throw ConfigError("laser: linewidth must be >= 0");
  if (linewidth_hz == 0.0) return;
  const double sigma = std::sqrt(2.0 * kPi * linewidth_hz * dt_s);
  double phi = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const cdouble r = std::polar(1.0, phi);
    x[n] *= r;
    y[n] *= r;
    phi += sigma * rng.next_gaussian();
  }
}

inline void apply_laser_phase_noise(WaveformGrid& w, double linewidth_hz, RngStream& rng) {
  apply_laser_phase_noise(w.x, w.y, linewidth_hz, 1.0 / w.sample_rate_hz, rng);
}

}  // namespace paslab

#endif
