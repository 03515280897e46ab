#ifndef PASLAB_SSFM_HPP
#define PASLAB_SSFM_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "paslab/edfa.hpp"
#include "paslab/link.hpp"
#include "paslab/waveform.hpp"

namespace paslab {

struct StepRule {
  double nl_phase_warn_rad = 0.05;  // per-step nonlinear phase cap before warning
};

struct PropagationResult {
  double max_step_nl_phase_rad = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void apply_linear(std::vector<cdouble>& x, std::vector<cdouble>& y,
                         const std::vector<cdouble>& h) {
  dsp::fft_forward(x);
  dsp::fft_forward(y);
  for (std::size_t k = 0; k < h.size(); ++k) {
    x[k] *= h[k];
    y[k] *= h[k];
  }
  dsp::fft_inverse(x);
  dsp::fft_inverse(y);
}

// frequency response of dispersion + loss over dz (km units)
inline std::vector<cdouble> span_linear_response(const std::vector<double>& omega,
                                                 double alpha_np_km, double beta2_s2_km,
                                                 double dz_km, double center_omega = 0.0) {
  std::vector<cdouble> h(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double w = omega[k] + center_omega;
    const double phase = 0.5 * beta2_s2_km * w * w * dz_km;
    h[k] = std::polar(std::exp(-0.5 * alpha_np_km * dz_km), phase);
  }
  return h;
}

// Symmetrized split-step over one fiber span with merged interior half-steps:
// H(dz/2) [N H(dz)]^(n-1) N H(dz/2). The nonlinear weight 2 sinh(a dz/2)/a on
// the mid-step power telescopes to the exact effective length per span.
inline double propagate_span(std::vector<cdouble>& x, std::vector<cdouble>& y,
                             const FiberSpan& span, const std::vector<double>& omega,
                             double sign, double center_omega) {
  const int nsteps = std::max(1, static_cast<int>(std::ceil(span.length_km / span.step_km)));
  const double dz = span.length_km / nsteps;
  const double alpha = sign * span.alpha_np_per_km();
  const double beta2 = sign * span.beta2_s2_per_km();
  const double gamma = sign * span.gamma_w_km * (8.0 / 9.0);  // Manakov
  const double w_nl =
      std::abs(alpha) < 1e-12 ? dz : 2.0 * std::sinh(alpha * dz / 2.0) / alpha;

  const auto h_half = span_linear_response(omega, alpha, beta2, dz / 2.0, center_omega);
  const auto h_full = span_linear_response(omega, alpha, beta2, dz, center_omega);

  double max_phi = 0.0;
  apply_linear(x, y, h_half);
  for (int s = 0; s < nsteps; ++s) {
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double p = std::norm(x[n]) + std::norm(y[n]);
      const double phi = gamma * w_nl * p;
      max_phi = std::max(max_phi, std::abs(phi));
      const cdouble r = std::polar(1.0, phi);
      x[n] *= r;
      y[n] *= r;
    }
    apply_linear(x, y, s + 1 == nsteps ? h_half : h_full);
  }
  return max_phi;
}

}  // namespace detail

// Forward propagation through the whole link: split-step Manakov per span,
// EDFA (gain restores the next span's launch offset) + ASE after each span.
inline PropagationResult ssfm_propagate(WaveformGrid& w, const LinkSpec& link,
                                        const StepRule& rule, RngStream& ase_rng) {
  link.validate();
  PropagationResult result;
  const auto omega = dsp::omega_axis(w.size(), w.sample_rate_hz);
  for (std::size_t i = 0; i < link.spans.size(); ++i) {
    const double phi =
        detail::propagate_span(w.x, w.y, link.spans[i], omega, +1.0, 0.0);
    result.max_step_nl_phase_rad = std::max(result.max_step_nl_phase_rad, phi);
    edfa(w, link.edfa_gain_db(i), link.edfa_nf_db, ase_rng);
  }
  if (result.max_step_nl_phase_rad > rule.nl_phase_warn_rad)
    result.warnings.push_back("ssfm: per-step nonlinear phase " +
                              std::to_string(result.max_step_nl_phase_rad) + " rad exceeds " +
                              std::to_string(rule.nl_phase_warn_rad));
  return result;
}

// Exact inverse of the accumulated linear transfer (dispersion only; loss is
// already compensated by the amplifiers). center_frequency_hz places a demuxed
// channel at its absolute position so the group delay is compensated too.
inline void edc(WaveformGrid& w, const LinkSpec& link, double center_frequency_hz = 0.0) {
  const auto omega = dsp::omega_axis(w.size(), w.sample_rate_hz);
  const double b2l = link.total_beta2_s2();  // s^2
  const double wc = 2.0 * kPi * center_frequency_hz;
  std::vector<cdouble> h(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double wa = omega[k] + wc;
    h[k] = std::polar(1.0, -0.5 * b2l * wa * wa);
  }
  detail::apply_linear(w.x, w.y, h);
}

// Ideal per-channel digital back propagation: spans reversed with negated
// parameters, amplifier gains undone ahead of each span. Inter-channel
// contributions are absent from the demuxed input by construction.
inline PropagationResult dbp_single_channel(WaveformGrid& w, const LinkSpec& link,
                                            const StepRule& rule,
                                            double center_frequency_hz = 0.0) {
  link.validate();
  PropagationResult result;
  const auto omega = dsp::omega_axis(w.size(), w.sample_rate_hz);
  const double wc = 2.0 * kPi * center_frequency_hz;
  for (std::size_t ri = link.spans.size(); ri-- > 0;) {
    w.scale(std::pow(10.0, -link.edfa_gain_db(ri) / 20.0));
    const double phi = detail::propagate_span(w.x, w.y, link.spans[ri], omega, -1.0, wc);
    result.max_step_nl_phase_rad = std::max(result.max_step_nl_phase_rad, phi);
  }
  if (result.max_step_nl_phase_rad > rule.nl_phase_warn_rad)
    result.warnings.push_back("dbp: per-step nonlinear phase exceeds the cap");
  return result;
}

}  // namespace paslab

#endif
