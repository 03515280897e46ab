#ifndef PASLAB_NPN_HPP
#define PASLAB_NPN_HPP

#include <cmath>
#include <vector>

#include "paslab/kernel.hpp"

namespace paslab {

struct NpnSpec {
  int channel_of_interest = 0;
  int channels = 1;
  int n_c = 0;        // kernel half memory (edge exclusion)
  int n_cpr = 0;      // CPR half window
  double es_n0 = 1.0; // linear
  double e_cpr = 0.008;
  std::vector<double> phibar;  // phibar[l]: rotation induced by channel l on the COI

  void validate() const {
    if (channels < 1 || channel_of_interest < 0 || channel_of_interest >= channels)
      throw ConfigError("npn: bad channel indices");
    if (es_n0 <= 0.0) throw ConfigError("npn: Es/N0 must be positive");
    if (e_cpr <= 0.0 || e_cpr > 1.0) throw ConfigError("npn: e_cpr must be in (0, 1]");
    if (static_cast<int>(phibar.size()) != channels)
      throw ConfigError("npn: need one phibar per channel");
    if (n_cpr < 0 || n_c < 0) throw ConfigError("npn: windows must be >= 0");
  }
};

struct PhaseSeries {
  std::vector<double> theta;      // nonlinear phase rotation per symbol
  std::vector<double> theta_hat;  // its CPR moving-average estimate
};

// Nonlinear phase rotation of the channel of interest:
//   theta[k] = sum_l phibar_l sum_{|m| <= Nc} C_{l-i}[m] (|x_l[k+m]|^2 + |y_l[k+m]|^2),
// evaluated on transmitted symbols normalized to unit average power per
// polarization (absolute power lives in phibar). Edge sums are truncated to
// available samples; the first/last Nc symbols are excluded downstream.
inline std::vector<double> npn_phase_rotation(
    const std::vector<std::vector<double>>& channel_intensity,  // per channel, |x|^2+|y|^2
    const KernelCoefficients& table, const NpnSpec& spec) {
  spec.validate();
  if (channel_intensity.size() != static_cast<std::size_t>(spec.channels))
    throw ShapeError("npn: intensity rows must match the channel count");
  const std::size_t len = channel_intensity.front().size();
  for (const auto& row : channel_intensity)
    if (row.size() != len) throw ShapeError("npn: channel sequences must have equal length");

  std::vector<double> theta(len, 0.0);
  const int n_c = table.n_c;
  for (int l = 0; l < spec.channels; ++l) {
    const auto& c = table.row(l - spec.channel_of_interest);
    const auto& intensity = channel_intensity[l];
    const double phibar = spec.phibar[l];
    for (std::size_t k = 0; k < len; ++k) {
      double acc = 0.0;
      const int m_lo = -std::min<int>(n_c, static_cast<int>(k));
      const int m_hi = std::min<int>(n_c, static_cast<int>(len - 1 - k));
      for (int m = m_lo; m <= m_hi; ++m) acc += c.at(m) * intensity[k + m];
      theta[k] += phibar * acc;
    }
  }
  return theta;
}

// CPR estimate: centered moving average with half window n_cpr, shrinking to
// the available samples at the edges.
inline std::vector<double> moving_average_estimate(const std::vector<double>& theta, int n_cpr) {
  const std::size_t len = theta.size();
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t k = 0; k < len; ++k) prefix[k + 1] = prefix[k] + theta[k];
  std::vector<double> hat(len);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t lo = k >= static_cast<std::size_t>(n_cpr) ? k - n_cpr : 0;
    const std::size_t hi = std::min(len - 1, k + static_cast<std::size_t>(n_cpr));
    // a width-one window must reproduce theta exactly (prefix rounding would not)
    hat[k] = hi == lo ? theta[k]
                      : (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return hat;
}

inline PhaseSeries npn_phase_series(const std::vector<std::vector<double>>& channel_intensity,
                                    const KernelCoefficients& table, const NpnSpec& spec) {
  PhaseSeries s;
  s.theta = npn_phase_rotation(channel_intensity, table, spec);
  s.theta_hat = moving_average_estimate(s.theta, spec.n_cpr);
  return s;
}

struct NpnMetric {
  double total = 0.0;          // sigma_theta^2
  double residual_var = 0.0;   // Var(theta - theta_hat) over interior samples
  double cpr_noise_var = 0.0;  // sigma_xi^2
};

inline double npn_cpr_noise_variance(const NpnSpec& spec) {
  // Cramer-Rao bound over the window, divided by the CPR efficiency
  return (1.0 / (2.0 * spec.es_n0)) / (2.0 * spec.n_cpr + 1.0) / spec.e_cpr;
}

// sigma_theta^2 = Var(theta - theta_hat) + sigma_xi^2, variance over the
// interior samples (first/last Nc excluded).
inline NpnMetric npn_metric(const PhaseSeries& series, const NpnSpec& spec) {
  spec.validate();
  const std::size_t len = series.theta.size();
  if (series.theta_hat.size() != len) throw ShapeError("npn: series lengths differ");
  const std::size_t lo = spec.n_c;
  const std::size_t hi = len - spec.n_c;
  if (lo >= hi) throw ShapeError("npn: no interior samples after edge exclusion");

  double mean = 0.0;
  for (std::size_t k = lo; k < hi; ++k) mean += series.theta[k] - series.theta_hat[k];
  mean /= static_cast<double>(hi - lo);
  double var = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double d = series.theta[k] - series.theta_hat[k] - mean;
    var += d * d;
  }
  var /= static_cast<double>(hi - lo);

  NpnMetric m;
  m.residual_var = var;
  m.cpr_noise_var = npn_cpr_noise_variance(spec);
  m.total = m.residual_var + m.cpr_noise_var;
  return m;
}

}  // namespace paslab

#endif
