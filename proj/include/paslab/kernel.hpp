#ifndef PASLAB_KERNEL_HPP
#define PASLAB_KERNEL_HPP

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "paslab/link.hpp"
#include "paslab/rng.hpp"

namespace paslab {

// Identical-spans link parameters in SI units for the interaction kernel.
struct KernelLink {
  int n_spans = 1;
  double span_m = 0.0;
  double alpha_per_m = 0.0;   // power attenuation, nepers/m
  double beta2_s2_m = 0.0;    // s^2/m

  static KernelLink from(const LinkSpec& link) {
    link.validate();
    if (!link.identical_spans())
      throw UnsupportedLinkError(
          "interaction kernel requires identical spans; dispersion-managed links are not "
          "supported");
    const auto& s = link.spans.front();
    KernelLink k;
    k.n_spans = static_cast<int>(link.spans.size());
    k.span_m = s.length_km * 1e3;
    k.alpha_per_m = s.alpha_np_per_km() * 1e-3;
    k.beta2_s2_m = s.beta2_s2_per_km() * 1e-3;
    return k;
  }

  std::uint64_t hash() const {
    std::ostringstream s;
    s.precision(17);
    s << n_spans << '|' << span_m << '|' << alpha_per_m << '|' << beta2_s2_m;
    return stream_key(0, s.str());
  }
};

// Nonlinear interaction efficiency of frequency pair (mu, nu) over a
// dispersion-unmanaged chain of identical spans with lumped amplification:
//   K = [e^{(-a+jX)Ls}-1]/(-a+jX) x [e^{jX Ns Ls}-1]/[e^{jX Ls}-1] x a/(Ns(1-e^{-aLs}))
// with X = 4 pi^2 beta2 nu (nu - mu). Removable singularities are evaluated
// by their limits; K -> 1 when beta2 = 0 or nu(nu-mu) = 0.
inline cdouble interaction_kernel(double mu_hz, double nu_hz, const KernelLink& link) {
  const double a = link.alpha_per_m;
  const double ls = link.span_m;
  const int ns = link.n_spans;
  const double x = 4.0 * kPi * kPi * link.beta2_s2_m * nu_hz * (nu_hz - mu_hz);

  // span factor: integral of e^{(-a+jX)z} over one span
  const cdouble d1(-a, x);
  cdouble f1;
  if (std::abs(d1) * ls < 1e-9)
    f1 = ls * (1.0 + d1 * ls / 2.0);
  else
    f1 = (std::exp(d1 * ls) - 1.0) / d1;

  // phased-array factor: e^{j theta (Ns-1)/2} sin(Ns theta/2)/sin(theta/2)
  const double theta = x * ls;
  const double sh = std::sin(theta / 2.0);
  double ratio;
  if (std::abs(sh) < 1e-9)
    ratio = ns * std::cos(ns * theta / 2.0) / std::cos(theta / 2.0);
  else
    ratio = std::sin(ns * theta / 2.0) / sh;
  const cdouble f2 = std::polar(1.0, theta * (ns - 1) / 2.0) * ratio;

  const double leff = a == 0.0 ? ls : (1.0 - std::exp(-a * ls)) / a;
  const double f3 = 1.0 / (ns * leff);

  return f1 * f2 * f3;
}

// Average nonlinear phase rotation induced by channel l over channel i:
// (3/2 - delta_il/2) gamma Ns P_l Leff.
inline double nominal_phase_rotation(int i, int l, const LinkSpec& link, double power_l_w) {
  link.validate();
  const double factor = i == l ? 1.0 : 1.5;
  double phi = 0.0;  // gamma int P dz accumulated span by span
  for (const auto& span : link.spans)
    phi += span.gamma_w_km * power_l_w * db_to_linear(span.launch_offset_db) *
           span.effective_length_km();
  return factor * phi;
}

namespace detail {

// Adaptive Gauss-Kronrod 7-15 on [a, b].
struct Gk15 {
  // Kronrod nodes (positive half) and weights; Gauss-7 weights interleaved
  static constexpr double xk[8] = {0.0,
                                   0.2077849550078985,
                                   0.4058451513773972,
                                   0.5860872354676911,
                                   0.7415311855993945,
                                   0.8648644233597691,
                                   0.9491079123427585,
                                   0.9914553711208126};
  static constexpr double wk[8] = {0.2094821410847278, 0.2044329400752989, 0.1903505780647854,
                                   0.1690047266392679, 0.1406532597155259, 0.1047900103222502,
                                   0.0630920926299786, 0.0229353220105292};
  static constexpr double wg[4] = {0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
                                   0.1294849661688697};

  template <typename F>
  static void eval(const F& f, double a, double b, cdouble& kron, cdouble& gauss) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const cdouble f0 = f(c);
    kron = wk[0] * f0;
    gauss = wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
      const cdouble fp = f(c + h * xk[i]);
      const cdouble fm = f(c - h * xk[i]);
      kron += wk[i] * (fp + fm);
      if (i % 2 == 0) gauss += wg[i / 2] * (fp + fm);
    }
    kron *= h;
    gauss *= h;
  }
};

template <typename F>
cdouble integrate_adaptive(const F& f, double a, double b, double tol_abs, int depth,
                           bool& converged) {
  cdouble kron, gauss;
  Gk15::eval(f, a, b, kron, gauss);
  if (std::abs(kron - gauss) <= tol_abs || depth <= 0) {
    if (std::abs(kron - gauss) > tol_abs) converged = false;
    return kron;
  }
  const double c = 0.5 * (a + b);
  return integrate_adaptive(f, a, c, tol_abs / 2.0, depth - 1, converged) +
         integrate_adaptive(f, c, b, tol_abs / 2.0, depth - 1, converged);
}

}  // namespace detail

// One row of interaction coefficients: C_n[m], m in [-n_c, n_c].
struct CoefficientRow {
  int offset = 0;  // channel offset n
  std::vector<double> c;
  double residual = 0.0;  // max |imaginary part| discarded

  double at(int m) const {
    const int n_c = (static_cast<int>(c.size()) - 1) / 2;
    return c[m + n_c];
  }
};

// Coefficients from the double band integral of the kernel:
//   C_n[m] = T^2 int int_band K(mu, nu) e^{-j 2 pi (mu - nu) m T} dmu dnu,
// band = [(2n-1)/2T, (2n+1)/2T]. The phase rotation the coefficients weight is
// real, so the Hermitian part (K(mu,nu) + conj(K(nu,mu)))/2 carries all of it;
// integrating it equals taking Re of the raw integral, and the recorded
// imaginary residue then measures quadrature error alone.
inline CoefficientRow compute_coefficients(const KernelLink& link, double symbol_time_s, int n_c,
                                           int offset, double rel_tol = 1e-6) {
  if (symbol_time_s <= 0.0) throw ConfigError("coefficients: symbol time must be positive");
  if (n_c < 0) throw ConfigError("coefficients: half memory must be >= 0");
  const double t = symbol_time_s;
  const double lo = (2.0 * offset - 1.0) / (2.0 * t);
  const double hi = (2.0 * offset + 1.0) / (2.0 * t);

  CoefficientRow row;
  row.offset = offset;
  row.c.resize(2 * n_c + 1);
  bool converged = true;
  for (int m = -n_c; m <= n_c; ++m) {
    // scale tolerance to the memoryless magnitude C = O(1)
    const double tol = rel_tol / (t * t);
    auto outer = [&](double mu) {
      auto inner = [&](double nu) {
        const cdouble k_herm = 0.5 * (interaction_kernel(mu, nu, link) +
                                      std::conj(interaction_kernel(nu, mu, link)));
        return k_herm * std::polar(1.0, 2.0 * kPi * nu * m * t);
      };
      bool inner_ok = true;
      const cdouble iv =
          detail::integrate_adaptive(inner, lo, hi, tol * t / 8.0, 22, inner_ok);
      if (!inner_ok) converged = false;
      return iv * std::polar(1.0, -2.0 * kPi * mu * m * t);
    };
    const cdouble value = detail::integrate_adaptive(outer, lo, hi, tol / 4.0, 22, converged);
    const cdouble c = value * t * t;
    row.c[m + n_c] = c.real();
    row.residual = std::max(row.residual, std::abs(c.imag()));
  }
  if (!converged)
    throw NumericError("coefficient quadrature did not reach the requested tolerance");
  return row;
}

// Half-memory from the walk-off between the farthest channels:
// N_c = ceil(|beta2| 2 pi df_max Ns Ls / T) + margin.
inline int walk_off_half_memory(const KernelLink& link, double max_channel_offset_hz,
                                double symbol_time_s, int margin = 2) {
  const double tau = std::abs(link.beta2_s2_m) * 2.0 * kPi * max_channel_offset_hz *
                     link.n_spans * link.span_m;
  return static_cast<int>(std::ceil(tau / symbol_time_s)) + margin;
}

// Full table for channel offsets n in [-(M-1), M-1], CSV-cacheable.
struct KernelCoefficients {
  int n_c = 0;
  std::map<int, CoefficientRow> rows;

  const CoefficientRow& row(int offset) const {
    const auto it = rows.find(offset);
    if (it == rows.end()) throw ConfigError("kernel table: missing offset row");
    return it->second;
  }

  double max_residual() const {
    double r = 0.0;
    for (const auto& [n, row] : rows) r = std::max(r, row.residual);
    return r;
  }
  double peak() const {
    double p = 0.0;
    for (const auto& [n, row] : rows)
      for (double v : row.c) p = std::max(p, std::abs(v));
    return p;
  }
  bool residual_ok() const { return max_residual() < 1e-6 * std::max(peak(), 1e-300); }

  void export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "n,m,c,residual\n";
    out.precision(17);
    for (const auto& [n, row] : rows)
      for (int m = -n_c; m <= n_c; ++m)
        out << n << ',' << m << ',' << row.at(m) << ',' << row.residual << '\n';
  }

  static KernelCoefficients import_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    KernelCoefficients table;
    std::map<int, std::map<int, std::pair<double, double>>> cells;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tok;
      std::getline(ls, tok, ',');
      const int n = std::stoi(tok);
      std::getline(ls, tok, ',');
      const int m = std::stoi(tok);
      std::getline(ls, tok, ',');
      const double c = std::stod(tok);
      std::getline(ls, tok, ',');
      const double r = std::stod(tok);
      cells[n][m] = {c, r};
    }
    for (const auto& [n, ms] : cells) {
      CoefficientRow row;
      row.offset = n;
      const int n_c = (static_cast<int>(ms.size()) - 1) / 2;
      table.n_c = n_c;
      row.c.resize(2 * n_c + 1);
      for (const auto& [m, cr] : ms) {
        row.c[m + n_c] = cr.first;
        row.residual = std::max(row.residual, cr.second);
      }
      table.rows[n] = row;
    }
    return table;
  }
};

// Computes (or loads from cache_dir, keyed by the link/geometry hash) the
// coefficient rows needed for `channels` WDM channels.
inline KernelCoefficients kernel_table(const KernelLink& link, double symbol_time_s, int n_c,
                                       int channels, const std::string& cache_dir = "") {
  std::string cache_path;
  if (!cache_dir.empty()) {
    std::ostringstream key;
    key.precision(17);
    key << link.hash() << '-' << symbol_time_s << '-' << n_c << '-' << channels;
    cache_path = cache_dir + "/kernel-" + std::to_string(stream_key(0, key.str())) + ".csv";
    std::ifstream probe(cache_path);
    if (probe.good()) return KernelCoefficients::import_csv(cache_path);
  }
  KernelCoefficients table;
  table.n_c = n_c;
  for (int n = -(channels - 1); n <= channels - 1; ++n)
    table.rows[n] = compute_coefficients(link, symbol_time_s, n_c, n);
  if (!cache_path.empty()) table.export_csv(cache_path);
  return table;
}

}  // namespace paslab

#endif
