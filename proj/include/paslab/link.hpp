#ifndef PASLAB_LINK_HPP
#define PASLAB_LINK_HPP

#include <cmath>
#include <string>
#include <vector>

#include "paslab/common.hpp"

namespace paslab {

struct FiberSpan {
  double length_km = 0.0;
  double attenuation_db_km = 0.0;
  double dispersion_ps_nm_km = 0.0;  // D; ignored when beta2 is set directly
  double beta2_ps2_km = std::nan("");
  double gamma_w_km = 0.0;        // 1/W/km
  double launch_offset_db = 0.0;  // launch power offset relative to the SMF launch
  double step_km = 1.0;           // SSFM step for this span

  void validate() const {
    if (length_km <= 0.0) throw ConfigError("span: length must be positive");
    if (attenuation_db_km < 0.0) throw ConfigError("span: attenuation must be >= 0");
    if (step_km <= 0.0) throw ConfigError("span: step must be positive");
  }

  double beta2_s2_per_km() const {
    if (!std::isnan(beta2_ps2_km)) return beta2_ps2_km * 1e-24;
    const double lambda = kSpeedOfLight / kCarrierFreqHz;  // m
    // D [ps/nm/km] -> beta2 [s^2/km]: beta2 = -D lambda^2 / (2 pi c)
    const double d_si = dispersion_ps_nm_km * 1e-3;  // s/m/km
    return -d_si * lambda * lambda / (2.0 * kPi * kSpeedOfLight);
  }

  double alpha_np_per_km() const { return db_per_km_to_neper(attenuation_db_km); }
  double loss_db() const { return attenuation_db_km * length_km; }
  double effective_length_km() const {
    const double a = alpha_np_per_km();
    return a == 0.0 ? length_km : (1.0 - std::exp(-a * length_km)) / a;
  }
};

struct LinkSpec {
  std::vector<FiberSpan> spans;
  double edfa_nf_db = 5.0;
  std::string amplifier_placement = "post-span";  // EDFA after every span
  bool dispersion_managed = false;

  void validate() const {
    if (spans.empty()) throw ConfigError("link: needs at least one span");
    for (const auto& s : spans) s.validate();
  }

  // EDFA gain after span i restores the launch offset of span i+1 (0 dB after
  // the last span), so gains compensate losses exactly over the link.
  double edfa_gain_db(std::size_t i) const {
    const double next_offset = i + 1 < spans.size() ? spans[i + 1].launch_offset_db : 0.0;
    return spans[i].loss_db() + next_offset - spans[i].launch_offset_db;
  }

  double total_beta2_s2() const {  // over the whole link, s^2
    double b = 0.0;
    for (const auto& s : spans) b += s.beta2_s2_per_km() * s.length_km;
    return b;
  }

  bool identical_spans() const {
    for (const auto& s : spans) {
      const auto& r = spans.front();
      if (s.length_km != r.length_km || s.attenuation_db_km != r.attenuation_db_km ||
          s.beta2_s2_per_km() != r.beta2_s2_per_km() || s.gamma_w_km != r.gamma_w_km ||
          s.launch_offset_db != r.launch_offset_db)
        return false;
    }
    return true;
  }

  // Accumulated ASE power spectral density per polarization at the link end
  // [W/Hz]; each amplifier's ASE is referred through the downstream net gain.
  double ase_psd_per_pol() const {
    const double nf_lin = db_to_linear(edfa_nf_db);
    double psd = 0.0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const double g = db_to_linear(edfa_gain_db(i));
      if (g <= 1.0) continue;
      const double n_sp = nf_lin * g / (2.0 * (g - 1.0));
      const double s_ase = n_sp * kPlanck * kCarrierFreqHz * (g - 1.0);
      const double next_offset = i + 1 < spans.size() ? spans[i + 1].launch_offset_db : 0.0;
      psd += s_ase * db_to_linear(-next_offset);
    }
    return psd;
  }
};

struct WdmGrid {
  int channels = 1;
  double spacing_ghz = 0.0;
  double baud_gbd = 0.0;
  double rolloff = 0.1;
  int oversampling = 8;  // samples per symbol on the shared grid

  void validate() const {
    if (channels < 1) throw ConfigError("grid: needs at least one channel");
    if (baud_gbd <= 0.0) throw ConfigError("grid: baud rate must be positive");
    if (rolloff < 0.0 || rolloff > 1.0) throw ConfigError("grid: rolloff must be in [0,1]");
    if (channels > 1 && spacing_ghz < (1.0 + rolloff) * baud_gbd)
      throw ConfigError("grid: spacing must be >= (1+rolloff) x baud");
    if (oversampling < 2.0 * (1.0 + rolloff))
      throw ConfigError("grid: oversampling must be >= 2(1+rolloff)");
    // aggregate band must fit the simulated rate
    const double edge_ghz = max_center_offset_ghz() + (1.0 + rolloff) * baud_gbd / 2.0;
    if (2.0 * edge_ghz >= oversampling * baud_gbd)
      throw ConfigError("grid: aggregate bandwidth exceeds the sample rate (aliasing)");
  }

  double sample_rate_hz() const { return oversampling * baud_gbd * 1e9; }
  double symbol_time_s() const { return 1e-9 / baud_gbd; }

  // center frequencies symmetric about 0
  double center_frequency_hz(int ch) const {
    return (ch - 0.5 * (channels - 1)) * spacing_ghz * 1e9;
  }
  double max_center_offset_ghz() const { return 0.5 * (channels - 1) * spacing_ghz; }
};

struct LaserSpec {
  double tx_linewidth_hz = 0.0;
  double rx_linewidth_hz = 0.0;

  void validate() const {
    if (tx_linewidth_hz < 0.0 || rx_linewidth_hz < 0.0)
      throw ConfigError("laser: linewidth must be >= 0");
  }
};

}  // namespace paslab

#endif
