#include <catch2/catch_amalgamated.hpp>

#include "paslab/cpr.hpp"
#include "paslab/rng.hpp"

using namespace paslab;

namespace {

QamConstellation qam256() {
  const AmplitudeAlphabet alpha{{1, 3, 5, 7, 9, 11, 13, 15}};
  return QamConstellation::build(alpha, std::vector<double>(8, 0.125));
}

std::vector<cdouble> random_symbols(const QamConstellation& c, std::size_t n,
                                    std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<cdouble> s(n);
  const auto& v = c.dim_values();
  for (auto& z : s) z = cdouble(v[rng.next_below(v.size())], v[rng.next_below(v.size())]);
  return s;
}

double wrap_quarter(double phi) {
  // wrap into (-pi/4, pi/4]
  while (phi > kPi / 4) phi -= kPi / 2;
  while (phi <= -kPi / 4) phi += kPi / 2;
  return phi;
}

}  // namespace

TEST_CASE("MPR recovers a constant rotation") {
  const auto c = qam256();
  const auto t = random_symbols(c, 4096, 1);
  std::vector<cdouble> r(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) r[k] = t[k] * std::polar(1.0, 0.3);
  const auto res = mpr(r, t);
  CHECK(res.phase[0] == Catch::Approx(0.3).margin(1e-12));
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(std::abs(res.corrected[k] - t[k]) < 1e-12);

  const auto id = mpr(t, t);
  CHECK(id.phase[0] == Catch::Approx(0.0).margin(1e-12));

  std::vector<cdouble> zero(16, cdouble(0.0, 0.0));
  CHECK_THROWS_AS(mpr(zero, zero), NumericError);
}

TEST_CASE("MPR concentrates under AWGN") {
  const auto c = qam256();
  const std::size_t n = 100000;
  const auto t = random_symbols(c, n, 2);
  RngStream rng(3);
  std::vector<cdouble> r(n);
  const double sigma2 = 0.01;  // 20 dB
  for (std::size_t k = 0; k < n; ++k)
    r[k] = t[k] * std::polar(1.0, 0.3) + rng.next_circular_gaussian(sigma2);
  const auto res = mpr(r, t);
  CHECK(std::abs(res.phase[0] - 0.3) < 1e-3);
}

TEST_CASE("BPS snaps a constant offset to the test-phase grid") {
  const auto c = qam256();
  const auto t = random_symbols(c, 2048, 4);
  CprSpec spec;
  spec.kind = CprKind::Bps;
  spec.n_cpr = 16;
  spec.test_phases = 64;

  // offset exactly on the centered grid
  const double on_grid = -kPi / 4 + (20 + 0.5) * (kPi / 2) / 64;
  std::vector<cdouble> r(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) r[k] = t[k] * std::polar(1.0, on_grid);
  // interior symbols (edge windows shrink down to a single noiseless symbol,
  // where unambiguous recovery is not guaranteed)
  const std::size_t lo = spec.n_cpr, hi = t.size() - spec.n_cpr;
  const auto res = bps(r, c, spec);
  for (std::size_t k = lo; k < hi; ++k)
    CHECK(wrap_quarter(res.phase[k] - on_grid) == Catch::Approx(0.0).margin(1e-12));

  // offset between grid points: error bounded by pi/(4B)
  const double off_grid = on_grid + 0.3 * (kPi / 2) / 64;
  for (std::size_t k = 0; k < t.size(); ++k) r[k] = t[k] * std::polar(1.0, off_grid);
  const auto res2 = bps(r, c, spec);
  for (std::size_t k = lo; k < hi; ++k)
    CHECK(std::abs(wrap_quarter(res2.phase[k] - off_grid)) <= kPi / (4 * 64) + 1e-12);
}

TEST_CASE("BPS preserves magnitudes exactly") {
  const auto c = qam256();
  const auto t = random_symbols(c, 512, 5);
  RngStream rng(6);
  std::vector<cdouble> r(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    r[k] = t[k] * std::polar(1.0, 0.1) + rng.next_circular_gaussian(0.01);
  CprSpec spec;
  spec.kind = CprKind::Bps;
  spec.n_cpr = 8;
  const auto res = bps(r, c, spec);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK(std::abs(res.corrected[k]) == Catch::Approx(std::abs(r[k])).margin(1e-14));
}

TEST_CASE("full-window BPS agrees with MPR up to grid quantization") {
  const auto c = qam256();
  const auto t = random_symbols(c, 1024, 7);
  const double phi = 0.11;
  std::vector<cdouble> r(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) r[k] = t[k] * std::polar(1.0, phi);

  CprSpec spec;
  spec.kind = CprKind::Bps;
  spec.n_cpr = static_cast<int>(t.size());  // window spans the frame
  spec.test_phases = 64;
  const auto b = bps(r, c, spec);
  const auto m = mpr(r, t);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK(std::abs(wrap_quarter(b.phase[k] - m.phase[k])) <= kPi / (4 * 64) + 1e-9);
}

TEST_CASE("BPS rotation equivariance on the grid") {
  const auto c = qam256();
  const auto t = random_symbols(c, 512, 8);
  RngStream rng(9);
  std::vector<cdouble> r(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) r[k] = t[k] + rng.next_circular_gaussian(0.005);

  CprSpec spec;
  spec.kind = CprKind::Bps;
  spec.n_cpr = 6;
  const double g = kPi / 2 / 64;  // one grid step
  std::vector<cdouble> r2(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) r2[k] = r[k] * std::polar(1.0, g);
  const auto a = bps(r, c, spec);
  const auto b = bps(r2, c, spec);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK(wrap_quarter(b.phase[k] - a.phase[k] - g) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("residual phase-error variance is U-shaped in the BPS window") {
  const auto c = qam256();
  const std::size_t n = 8192;
  const auto t = random_symbols(c, n, 10);
  RngStream rng(11);

  // Wiener phase with increment variance 2 pi (dnu T) and AWGN at 17 dB
  const double dnu_t = 1e-5;
  const double sigma2 = 1.0 / db_to_linear(17.0);
  std::vector<cdouble> r(n);
  std::vector<double> true_phase(n);
  double phi = 0.0;
  const double inc = std::sqrt(2.0 * kPi * dnu_t);
  for (std::size_t k = 0; k < n; ++k) {
    true_phase[k] = phi;
    r[k] = t[k] * std::polar(1.0, phi) + rng.next_circular_gaussian(sigma2);
    phi += inc * rng.next_gaussian();
  }

  std::vector<double> var;
  for (int w : {2, 8, 64, 4096}) {
    CprSpec spec;
    spec.kind = CprKind::Bps;
    spec.n_cpr = w;
    const auto res = bps(r, c, spec);
    double v = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = wrap_quarter(res.phase[k] - true_phase[k]);
      v += e * e;
    }
    var.push_back(v / n);
  }
  const auto best = std::min_element(var.begin(), var.end()) - var.begin();
  CHECK(best != 0);
  CHECK(best != static_cast<long>(var.size()) - 1);
  CHECK(var.front() > var[best]);
  CHECK(var.back() > var[best]);
}

TEST_CASE("cycle-slip compensation") {
  const auto c = qam256();
  const auto t = random_symbols(c, 1024, 12);

  // aligned input: identity
  const auto same = cycle_slip_fix(t, t);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(std::abs(same[k] - t[k]) < 1e-14);

  // globally pre-rotated by pi/2: restored
  std::vector<cdouble> rot(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) rot[k] = t[k] * cdouble(0.0, 1.0);
  const auto fixed = cycle_slip_fix(rot, t);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(std::abs(fixed[k] - t[k]) < 1e-12);

  // synthetic mid-frame slip on a noisy frame: SER equals the no-slip SER
  RngStream rng(13);
  std::vector<cdouble> noisy(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) noisy[k] = t[k] + rng.next_circular_gaussian(0.004);
  std::vector<cdouble> slipped = noisy;
  for (std::size_t k = t.size() / 2; k < t.size(); ++k) slipped[k] *= cdouble(0.0, 1.0);
  // slip boundary aligned with the supervision block
  const auto repaired = cycle_slip_fix(slipped, t);
  auto ser = [&](const std::vector<cdouble>& s) {
    std::size_t errors = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const bool bad = c.nearest_dim_index(s[k].real()) != c.nearest_dim_index(t[k].real()) ||
                       c.nearest_dim_index(s[k].imag()) != c.nearest_dim_index(t[k].imag());
      errors += bad ? 1 : 0;
    }
    return static_cast<double>(errors) / s.size();
  };
  CHECK(ser(repaired) == Catch::Approx(ser(noisy)).margin(1e-12));
}
