#ifndef PASLAB_CPR_HPP
#define PASLAB_CPR_HPP

#include <cmath>
#include <vector>

#include "paslab/constellation.hpp"

namespace paslab {

enum class CprKind { None, Mpr, Bps };

inline std::string to_string(CprKind k) {
  switch (k) {
    case CprKind::None: return "none";
    case CprKind::Mpr: return "MPR";
    case CprKind::Bps: return "BPS";
  }
  return "?";
}

struct CprSpec {
  CprKind kind = CprKind::Mpr;
  int n_cpr = 0;          // half window, symbols
  int test_phases = 64;   // B, spread over a pi/2 interval
  double range = kPi / 2; // QAM rotational symmetry

  void validate() const {
    if (n_cpr < 0) throw ConfigError("cpr: half window must be >= 0");
    if (kind == CprKind::Bps && test_phases < 2) throw ConfigError("cpr: BPS needs B >= 2");
  }
};

struct CprResult {
  std::vector<double> phase;      // estimated carrier phase per symbol
  std::vector<cdouble> corrected; // received * exp(-j phase)
};

// Data-aided mean phase rotation: one global phase for the whole sequence.
inline CprResult mpr(const std::vector<cdouble>& received,
                     const std::vector<cdouble>& transmitted) {
  if (received.size() != transmitted.size() || received.empty())
    throw ShapeError("mpr: sequences must be aligned and non-empty");
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < received.size(); ++k)
    acc += received[k] * std::conj(transmitted[k]);
  if (std::abs(acc) == 0.0) throw NumericError("mpr: zero-energy input, phase undefined");
  const double phi = std::arg(acc);
  CprResult r;
  r.phase.assign(received.size(), phi);
  r.corrected.resize(received.size());
  const cdouble rot = std::polar(1.0, -phi);
  for (std::size_t k = 0; k < received.size(); ++k) r.corrected[k] = received[k] * rot;
  return r;
}

// Blind phase search: per-symbol test phase minimizing the windowed squared
// distance to the QAM decisions; window shrinks symmetrically at the edges,
// the selected track is unwrapped by nearest-multiple-of-pi/2 continuation.
inline CprResult bps(const std::vector<cdouble>& received, const QamConstellation& constellation,
                     const CprSpec& spec) {
  spec.validate();
  const std::size_t len = received.size();
  if (len == 0) throw ShapeError("bps: empty input");
  const int b_count = spec.test_phases;
  const double step = spec.range / b_count;

  // prefix sums of per-symbol decision distances for each test phase
  std::vector<std::vector<double>> prefix(b_count, std::vector<double>(len + 1, 0.0));
  for (int b = 0; b < b_count; ++b) {
    const cdouble rot = std::polar(1.0, -spec.range / 2.0 + (b + 0.5) * step);
    auto& p = prefix[b];
    for (std::size_t k = 0; k < len; ++k)
      p[k + 1] = p[k] + constellation.decision_distance_sq(received[k] * rot);
  }

  CprResult r;
  r.phase.resize(len);
  r.corrected.resize(len);
  double prev_rot = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t w =
        std::min<std::size_t>(spec.n_cpr, std::min(k, len - 1 - k));
    const std::size_t lo = k - w, hi = k + w;
    int best = 0;
    double best_cost = prefix[0][hi + 1] - prefix[0][lo];
    for (int b = 1; b < b_count; ++b) {
      const double cost = prefix[b][hi + 1] - prefix[b][lo];
      if (cost < best_cost) {
        best_cost = cost;
        best = b;
      }
    }
    double rot = -spec.range / 2.0 + (best + 0.5) * step;
    if (k > 0) rot += spec.range * std::round((prev_rot - rot) / spec.range);
    prev_rot = rot;
    r.phase[k] = -rot;
    r.corrected[k] = received[k] * std::polar(1.0, rot);
  }
  return r;
}

// Supervised cycle-slip compensation: per block, the pi/2 multiple closest to
// the reference is applied, removing the BPS rotational ambiguity.
inline std::vector<cdouble> cycle_slip_fix(const std::vector<cdouble>& corrected,
                                           const std::vector<cdouble>& transmitted,
                                           std::size_t block = 64) {
  if (corrected.size() != transmitted.size())
    throw ShapeError("cycle slip fix: sequences must be aligned");
  std::vector<cdouble> out(corrected.size());
  for (std::size_t start = 0; start < corrected.size(); start += block) {
    const std::size_t end = std::min(start + block, corrected.size());
    cdouble acc = 0.0;
    for (std::size_t k = start; k < end; ++k) acc += corrected[k] * std::conj(transmitted[k]);
    // quadrant rotation maximizing Re(e^{j rho} acc)
    int best = 0;
    double best_re = -1e300;
    for (int q = 0; q < 4; ++q) {
      const double re = (std::polar(1.0, q * kPi / 2.0) * acc).real();
      if (re > best_re) {
        best_re = re;
        best = q;
      }
    }
    const cdouble rot = std::polar(1.0, best * kPi / 2.0);
    for (std::size_t k = start; k < end; ++k) out[k] = corrected[k] * rot;
  }
  return out;
}

}  // namespace paslab

#endif
