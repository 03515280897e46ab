#ifndef PASLAB_WAVEFORM_HPP
#define PASLAB_WAVEFORM_HPP

#include <unsupported/Eigen/FFT>

#include <cstring>
#include <fstream>
#include <vector>

#include "paslab/common.hpp"

namespace paslab {

// Dual-polarization complex baseband samples; |sample|^2 is instantaneous
// power in watts once a launch scale has been applied.
struct WaveformGrid {
  std::vector<cdouble> x, y;
  double sample_rate_hz = 0.0;
  double reference_power_w = 1.0;  // per-pol mean power the scaling targeted

  std::size_t size() const { return x.size(); }

  void scale(double factor) {
    for (auto& v : x) v *= factor;
    for (auto& v : y) v *= factor;
  }

  double mean_power() const {  // both pols, W
    double p = 0.0;
    for (const auto& v : x) p += std::norm(v);
    for (const auto& v : y) p += std::norm(v);
    return p / static_cast<double>(size());
  }
};

namespace dsp {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

inline void fft_forward(std::vector<cdouble>& v) {
  std::vector<cdouble> out(v.size());
  fft_engine().fwd(out, v);
  v.swap(out);
}

inline void fft_inverse(std::vector<cdouble>& v) {
  std::vector<cdouble> out(v.size());
  fft_engine().inv(out, v);
  v.swap(out);
}

// angular frequency of each FFT bin (bin k maps to k < n/2 ? k : k - n)
inline std::vector<double> omega_axis(std::size_t n, double sample_rate_hz) {
  std::vector<double> w(n);
  const double df = sample_rate_hz / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * df;
    w[k] = 2.0 * kPi * f;
  }
  return w;
}

}  // namespace dsp

// Binary dump: magic, sample rate, length, then x then y (re, im doubles).
inline void dump_waveform(const WaveformGrid& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path);
  const char magic[8] = {'P', 'A', 'S', 'W', 'A', 'V', 'E', '1'};
  out.write(magic, 8);
  const std::uint64_t n = w.size();
  out.write(reinterpret_cast<const char*>(&w.sample_rate_hz), sizeof(double));
  out.write(reinterpret_cast<const char*>(&w.reference_power_w), sizeof(double));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(w.x.data()), n * sizeof(cdouble));
  out.write(reinterpret_cast<const char*>(w.y.data()), n * sizeof(cdouble));
}

inline WaveformGrid load_waveform(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "PASWAVE1", 8) != 0) throw ConfigError("bad waveform header");
  WaveformGrid w;
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&w.sample_rate_hz), sizeof(double));
  in.read(reinterpret_cast<char*>(&w.reference_power_w), sizeof(double));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  w.x.resize(n);
  w.y.resize(n);
  in.read(reinterpret_cast<char*>(w.x.data()), n * sizeof(cdouble));
  in.read(reinterpret_cast<char*>(w.y.data()), n * sizeof(cdouble));
  if (!in) throw ConfigError("truncated waveform file");
  return w;
}

}  // namespace paslab

#endif
