#ifndef PASLAB_MB_HPP
#define PASLAB_MB_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <vector>

#include "paslab/common.hpp"
#include "paslab/rng.hpp"

namespace paslab {

using BigInt = boost::multiprecision::cpp_int;

// Maxwell-Boltzmann family over a set of amplitude levels: p_a ∝ exp(-λ a²).
// λ = 0 is uniform, λ → ∞ concentrates on the lowest level; negative λ is
// allowed so any mean energy up to the top level is reachable.
inline std::vector<double> mb_distribution(const std::vector<int>& levels, double lambda) {
  std::vector<double> p(levels.size());
  // subtract the min exponent before exponentiating to avoid overflow
  double emin = 1e300;
  for (std::size_t i = 0; i < levels.size(); ++i)
    emin = std::min(emin, lambda * levels[i] * levels[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    p[i] = std::exp(-(lambda * levels[i] * levels[i] - emin));
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

inline double distribution_mean_energy(const std::vector<int>& levels,
                                       const std::vector<double>& p) {
  double e = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) e += p[i] * levels[i] * levels[i];
  return e;
}

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

// MB distribution with the given mean energy (bisection on λ; mean energy is
// strictly decreasing in λ).
inline std::vector<double> mb_fit_mean_energy(const std::vector<int>& levels,
                                              double target_energy) {
  const double e_min = static_cast<double>(levels.front()) * levels.front();
  const double e_max = static_cast<double>(levels.back()) * levels.back();
  if (target_energy <= e_min) return mb_distribution(levels, 1e3);
  if (target_energy >= e_max) return mb_distribution(levels, -1e3);
  double lo = -1.0, hi = 1.0;
  auto mean_at = [&](double l) {
    return distribution_mean_energy(levels, mb_distribution(levels, l));
  };
  while (mean_at(lo) < target_energy) lo *= 2.0;
  while (mean_at(hi) > target_energy) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) > target_energy)
      lo = mid;
    else
      hi = mid;
  }
  return mb_distribution(levels, 0.5 * (lo + hi));
}

// MB distribution with the given entropy (bisection; entropy is maximal at
// λ = 0 and decreasing in |λ|; the λ ≥ 0 branch is used).
inline std::vector<double> mb_fit_entropy(const std::vector<int>& levels, double target_bits) {
  const double h_max = std::log2(static_cast<double>(levels.size()));
  if (target_bits >= h_max) return mb_distribution(levels, 0.0);
  if (target_bits <= 0.0) return mb_distribution(levels, 1e3);
  double lo = 0.0, hi = 1.0;
  auto h_at = [&](double l) { return entropy_bits(mb_distribution(levels, l)); };
  while (h_at(hi) > target_bits) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h_at(mid) > target_bits)
      lo = mid;
    else
      hi = mid;
  }
  return mb_distribution(levels, 0.5 * (lo + hi));
}

// Largest-remainder rounding of N·p to integer counts summing to N.
inline std::vector<int> quantize_composition(const std::vector<double>& p, int n) {
  std::vector<int> counts(p.size());
  std::vector<double> rem(p.size());
  int assigned = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double ideal = p[i] * n;
    counts[i] = static_cast<int>(std::floor(ideal));
    rem[i] = ideal - counts[i];
    assigned += counts[i];
  }
  int leftover = n - assigned;
  while (leftover > 0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (rem[i] > rem[best]) best = i;
    counts[best] += 1;
    rem[best] = -1.0;
    --leftover;
  }
  return counts;
}

inline BigInt multinomial(const std::vector<int>& counts) {
  int n = 0;
  for (int c : counts) n += c;
  BigInt result = 1;
  int denom_progress = 0;
  // incremental binomial products keep every intermediate value integral
  for (int c : counts) {
    for (int j = 1; j <= c; ++j) {
      ++denom_progress;
      result = result * denom_progress / j;
    }
  }
  return result;
}

inline int floor_log2(const BigInt& v) {
  if (v <= 0) throw NumericError("floor_log2 of non-positive value");
  return static_cast<int>(boost::multiprecision::msb(v));
}

// Smallest-mean-energy MB target whose largest-remainder composition admits at
// least 2^k permutations. Entropy scan upward, then bisection refinement.
inline std::vector<int> ccdm_composition_for_rate(const std::vector<int>& levels, int n, int k) {
  const double h_max = std::log2(static_cast<double>(levels.size()));
  auto bits_of = [&](double h) {
    const auto comp = quantize_composition(mb_fit_entropy(levels, h), n);
    return floor_log2(multinomial(comp) > 0 ? multinomial(comp) : 1);
  };
  if (k == 0) return quantize_composition(mb_fit_entropy(levels, 0.0), n);
  double lo = 0.0, hi = h_max;
  if (bits_of(hi) < k)
    throw CapacityError("no composition of length " + std::to_string(n) + " admits 2^" +
                        std::to_string(k) + " permutations");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bits_of(mid) >= k)
      hi = mid;
    else
      lo = mid;
  }
  return quantize_composition(mb_fit_entropy(levels, hi), n);
}

// i.i.d. MB amplitude source (reference for N → ∞ comparisons).
inline std::vector<int> sample_iid_levels(const std::vector<int>& levels,
                                          const std::vector<double>& p, std::size_t count,
                                          RngStream& rng) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  std::vector<int> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.next_double();
    std::size_t j = 0;
    while (u >= cdf[j]) ++j;
    out[i] = levels[j];
  }
  return out;
}

}  // namespace paslab

#endif
