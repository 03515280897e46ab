#ifndef PASLAB_COMMON_HPP
#define PASLAB_COMMON_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace paslab {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
inline constexpr double kCarrierFreqHz = 1.9341e14;    // 1550 nm

// Error taxonomy: one subclass per failure family named in the module contracts.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error("config: " + m) {}
};
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& m) : std::runtime_error("capacity: " + m) {}
};
struct DecodeError : std::runtime_error {
  explicit DecodeError(const std::string& m) : std::runtime_error("decode: " + m) {}
};
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& m) : std::runtime_error("shape: " + m) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& m) : std::runtime_error("numeric: " + m) {}
};
struct UnsupportedLinkError : std::runtime_error {
  explicit UnsupportedLinkError(const std::string& m)
      : std::runtime_error("unsupported link: " + m) {}
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

// dB/km -> nepers/km on optical power
inline double db_per_km_to_neper(double a) { return a * std::log(10.0) / 10.0; }

}  // namespace paslab

#endif
