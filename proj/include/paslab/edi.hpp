#ifndef PASLAB_EDI_HPP
#define PASLAB_EDI_HPP

#include <cmath>
#include <vector>

#include "paslab/common.hpp"

namespace paslab {

namespace detail {

inline double var_over_mean(const std::vector<double>& g, std::size_t lo, std::size_t hi) {
  if (lo >= hi) throw ShapeError("edi: empty interior");
  const double n = static_cast<double>(hi - lo);
  double mean = 0.0;
  for (std::size_t k = lo; k < hi; ++k) mean += g[k];
  mean /= n;
  if (mean == 0.0) throw NumericError("edi: zero mean energy");
  double var = 0.0;
  for (std::size_t k = lo; k < hi; ++k) var += (g[k] - mean) * (g[k] - mean);
  var /= n;
  return var / mean;
}

}  // namespace detail

// Exponentially-weighted energy dispersion index:
//   EEDI = Var(G)/E(G), G[k] = sum_m lambda^{|m|} |x[k+m]|^2,
// the sum truncated where lambda^{|m|} drops below 1e-6.
inline double eedi(const std::vector<cdouble>& symbols, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("eedi: lambda must be in [0, 1]");
  const std::size_t len = symbols.size();
  std::vector<double> p(len);
  for (std::size_t k = 0; k < len; ++k) p[k] = std::norm(symbols[k]);

  int reach = 0;
  if (lambda > 0.0 && lambda < 1.0)
    reach = static_cast<int>(std::ceil(std::log(1e-6) / std::log(lambda)));
  else if (lambda == 1.0)
    throw ConfigError("eedi: lambda = 1 diverges; use edi with a finite window");
  if (reach >= static_cast<int>(len)) throw ShapeError("edi: empty interior");

  std::vector<double> w(reach + 1, 1.0);
  for (int m = 1; m <= reach; ++m) w[m] = w[m - 1] * lambda;

  std::vector<double> g(len, 0.0);
  for (std::size_t k = reach; k + reach < len; ++k) {
    double acc = p[k];
    for (int m = 1; m <= reach; ++m) acc += w[m] * (p[k - m] + p[k + m]);
    g[k] = acc;
  }
  return detail::var_over_mean(g, reach, len - reach);
}

// Energy dispersion index: sliding sum of W symbol energies (lambda = 1,
// finite window), Var/Mean over complete windows.
inline double edi(const std::vector<cdouble>& symbols, int window) {
  if (window < 1) throw ConfigError("edi: window must be >= 1");
  const std::size_t len = symbols.size();
  if (static_cast<std::size_t>(window) > len) throw ShapeError("edi: empty interior");
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t k = 0; k < len; ++k) prefix[k + 1] = prefix[k] + std::norm(symbols[k]);
  std::vector<double> g(len - window + 1);
  for (std::size_t k = 0; k + window <= len; ++k) g[k] = prefix[k + window] - prefix[k];
  return detail::var_over_mean(g, 0, g.size());
}

}  // namespace paslab

#endif
