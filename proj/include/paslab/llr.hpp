#ifndef PASLAB_LLR_HPP
#define PASLAB_LLR_HPP

#include <cmath>
#include <vector>

#include "paslab/constellation.hpp"

namespace paslab {

inline constexpr double kLlrClip = 50.0;

// Bitwise log-likelihood ratios for one polarization under a circular Gaussian
// channel law with prior-weighted symbol probabilities.
//
// Convention: LLR = ln P(b=0|y) - ln P(b=1|y), clipped to +-kLlrClip, so the
// bit-metric rate term is log2(1 + exp(-(1-2b) LLR)). Output layout per symbol:
// bits of the I dimension (LSB first), then bits of the Q dimension.
inline std::vector<double> demap_bit_metrics(const std::vector<cdouble>& received,
                                             double noise_variance,
                                             const QamConstellation& constellation,
                                             const std::vector<double>& amp_priors) {
  if (noise_variance <= 0.0) throw ConfigError("demapper: noise variance must be positive");
  const int bits = constellation.bits_per_dim();
  const auto priors = constellation.dim_priors(amp_priors);
  const auto& values = constellation.dim_values();
  const double inv2s = 1.0 / noise_variance;  // per-dimension variance = total/2

  std::vector<double> llrs(received.size() * 2 * bits);
  std::vector<double> metric(values.size());
  std::size_t out = 0;
  for (const cdouble& y : received) {
    for (int dim = 0; dim < 2; ++dim) {
      const double v = dim == 0 ? y.real() : y.imag();
      double best = -1e300;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = v - values[i];
        metric[i] = std::log(priors[i]) - d * d * inv2s;
        best = std::max(best, metric[i]);
      }
      for (int b = 0; b < bits; ++b) {
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
          const double w = std::exp(metric[i] - best);
          if ((QamConstellation::gray_label(static_cast<int>(i)) >> b) & 1u)
            s1 += w;
          else
            s0 += w;
        }
        double llr;
        if (s0 == 0.0)
          llr = -kLlrClip;
        else if (s1 == 0.0)
          llr = kLlrClip;
        else
          llr = std::log(s0) - std::log(s1);
        llrs[out++] = std::clamp(llr, -kLlrClip, kLlrClip);
      }
    }
  }
  return llrs;
}

}  // namespace paslab

#endif
