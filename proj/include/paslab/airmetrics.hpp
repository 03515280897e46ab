#ifndef PASLAB_AIRMETRICS_HPP
#define PASLAB_AIRMETRICS_HPP

#include <cmath>
#include <vector>

#include "paslab/common.hpp"
#include "paslab/llr.hpp"

namespace paslab {

struct AirEstimate {
  double air = 0.0;        // bits/symbol/pol
  double halfwidth = 0.0;  // 95% Monte-Carlo confidence half-width
  std::size_t symbols = 0;
};

// Achievable rate under bit-metric decoding:
//   AIR = H(symbol prior per pol) - sum_bits E[ log2(1 + e^{-(1-2b) LLR}) ].
// `llrs` and `tx_bits` are aligned (layout from demap_bit_metrics); bits_per_symbol
// is the number of bit levels per polarization symbol (2 dims x bits_per_dim).
inline AirEstimate air_bmd(const std::vector<double>& llrs, const std::vector<int>& tx_bits,
                           double prior_entropy_bits, int bits_per_symbol) {
  if (llrs.size() != tx_bits.size()) throw ShapeError("air: llr/bit length mismatch");
  if (llrs.empty() || bits_per_symbol <= 0) throw ShapeError("air: empty input");
  const std::size_t nsym = llrs.size() / bits_per_symbol;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t s = 0; s < nsym; ++s) {
    double loss = 0.0;
    for (int b = 0; b < bits_per_symbol; ++b) {
      const std::size_t i = s * bits_per_symbol + b;
      const double u = -(1.0 - 2.0 * tx_bits[i]) * llrs[i];
      loss += std::log1p(std::exp(std::min(u, 700.0))) / 0.6931471805599453;
    }
    const double air_s = prior_entropy_bits - loss;
    sum += air_s;
    sumsq += air_s * air_s;
  }
  AirEstimate est;
  est.symbols = nsym;
  est.air = sum / nsym;
  const double var = std::max(0.0, sumsq / nsym - est.air * est.air);
  est.halfwidth = 1.96 * std::sqrt(var / nsym);
  return est;
}

// SNR = E|t|^2 / E|r - h t|^2 with h the least-squares complex scalar fit.
inline double effective_snr_db(const std::vector<cdouble>& received,
                               const std::vector<cdouble>& transmitted) {
  if (received.size() != transmitted.size() || received.empty())
    throw ShapeError("snr: sequences must be aligned and non-empty");
  cdouble num = 0.0;
  double den = 0.0, sig = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) {
    num += received[i] * std::conj(transmitted[i]);
    den += std::norm(transmitted[i]);
    sig += std::norm(transmitted[i]);
  }
  if (den == 0.0) throw NumericError("snr: zero-energy reference");
  const cdouble h = num / den;
  double err = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i)
    err += std::norm(received[i] - h * transmitted[i]);
  err /= received.size();
  sig /= received.size();
  if (err <= 0.0) return 100.0;
  return std::min(100.0, linear_to_db(sig / err));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 3)
    throw ShapeError("pearson: need equal lengths >= 3");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) throw NumericError("pearson: zero variance");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace paslab

#endif
