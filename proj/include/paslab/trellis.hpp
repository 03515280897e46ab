#ifndef PASLAB_TRELLIS_HPP
#define PASLAB_TRELLIS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "paslab/common.hpp"
#include "paslab/mb.hpp"

namespace paslab {

// ASK amplitude levels of one dimension (1, 3, 5, ..., 2A-1 for square QAM).
struct AmplitudeAlphabet {
  std::vector<int> levels;
  bool unit_energy_normalized = false;

  void validate() const {
    if (levels.size() < 2) throw ConfigError("alphabet needs at least 2 levels");
    int prev = 0;
    for (int a : levels) {
      if (a <= 0) throw ConfigError("alphabet levels must be positive");
      if (a <= prev) throw ConfigError("alphabet levels must be strictly increasing");
      prev = a;
    }
  }

  int min_sq() const { return levels.front() * levels.front(); }
  int max_sq() const { return levels.back() * levels.back(); }
  std::size_t size() const { return levels.size(); }

  // index of a level, or -1
  int index_of(int level) const {
    const auto it = std::lower_bound(levels.begin(), levels.end(), level);
    if (it == levels.end() || *it != level) return -1;
    return static_cast<int>(it - levels.begin());
  }
};

// One block of shaped amplitudes.
struct AmplitudeBlock {
  std::vector<int> amplitudes;
  std::int64_t energy = 0;

  static AmplitudeBlock from_levels(std::vector<int> amps) {
    AmplitudeBlock b;
    b.amplitudes = std::move(amps);
    b.energy = 0;
    for (int a : b.amplitudes) b.energy += static_cast<std::int64_t>(a) * a;
    return b;
  }
};

// Suffix-count table of the enumerative shaping trellis.
//
// count_leq(pos, budget) is the number of length-(N - pos) suffixes whose
// energy is at most `budget`; counts are exact unbounded integers. The table
// is immutable after construction and safe to share across threads.
class TrellisCounts {
 public:
  static TrellisCounts build(const AmplitudeAlphabet& alphabet, int n, std::int64_t energy_cap) {
    alphabet.validate();
    if (n < 1) throw ConfigError("block length must be >= 1");
    if (energy_cap < static_cast<std::int64_t>(n) * alphabet.min_sq())
      throw CapacityError("empty support: energy budget below the all-minimum sequence");

    TrellisCounts tc;
    tc.alphabet_ = alphabet;
    tc.n_ = n;
    tc.cap_ = energy_cap;
    tc.layers_.resize(n + 1);

    tc.layers_[n].energies = {0};
    tc.layers_[n].cum_count = {BigInt(1)};
    tc.layers_[n].cum_esum = {BigInt(0)};

    for (int pos = n - 1; pos >= 0; --pos) {
      // a suffix at `pos` coexists with a prefix that spends >= pos * min_sq
      const std::int64_t layer_cap = energy_cap - static_cast<std::int64_t>(pos) * alphabet.min_sq();
      std::map<std::int64_t, BigInt> exact;
      const Layer& next = tc.layers_[pos + 1];
      for (int a : alphabet.levels) {
        const std::int64_t asq = static_cast<std::int64_t>(a) * a;
        for (std::size_t i = 0; i < next.energies.size(); ++i) {
          const std::int64_t e = next.energies[i] + asq;
          if (e > layer_cap) break;
          exact[e] += next.exact_at(i);
        }
      }
      Layer& cur = tc.layers_[pos];
      cur.energies.reserve(exact.size());
      cur.cum_count.reserve(exact.size());
      cur.cum_esum.reserve(exact.size());
      BigInt run_count = 0, run_esum = 0;
      for (const auto& [e, c] : exact) {
        run_count += c;
        run_esum += c * e;
        cur.energies.push_back(e);
        cur.cum_count.push_back(run_count);
        cur.cum_esum.push_back(run_esum);
      }
      if (cur.energies.empty())
        throw CapacityError("empty support: no sequence fits the energy budget");
    }
    return tc;
  }

  int block_length() const { return n_; }
  std::int64_t energy_cap() const { return cap_; }
  const AmplitudeAlphabet& alphabet() const { return alphabet_; }

  BigInt count_leq(int pos, std::int64_t budget) const {
    const Layer& l = layers_[pos];
    const auto idx = upper_index(l, budget);
    return idx == 0 ? BigInt(0) : l.cum_count[idx - 1];
  }

  BigInt count_in(int pos, std::int64_t lo, std::int64_t hi) const {
    if (hi < lo) return 0;
    return count_leq(pos, hi) - count_leq(pos, lo - 1);
  }

  // sum of suffix energies over suffixes with energy <= budget
  BigInt energy_sum_leq(int pos, std::int64_t budget) const {
    const Layer& l = layers_[pos];
    const auto idx = upper_index(l, budget);
    return idx == 0 ? BigInt(0) : l.cum_esum[idx - 1];
  }

  BigInt energy_sum_in(int pos, std::int64_t lo, std::int64_t hi) const {
    if (hi < lo) return 0;
    return energy_sum_leq(pos, hi) - energy_sum_leq(pos, lo - 1);
  }

  BigInt total_count() const { return count_leq(0, cap_); }

  // full-sequence energies with at least one sequence, ascending
  std::vector<std::int64_t> shells() const { return layers_[0].energies; }

  BigInt shell_count(std::int64_t energy) const { return count_in(0, energy, energy); }

  // Recomputes every stored count from the defining recurrence
  // count(pos, e) = sum_a count(pos+1, e - a^2) and checks the boundary layer.
  bool verify() const {
    for (std::size_t i = 0; i < layers_[n_].energies.size(); ++i)
      if (layers_[n_].exact_at(i) > 1) return false;
    for (int pos = 0; pos < n_; ++pos) {
      const Layer& l = layers_[pos];
      for (std::size_t i = 0; i < l.energies.size(); ++i) {
        BigInt expect = 0;
        for (int a : alphabet_.levels) {
          const std::int64_t asq = static_cast<std::int64_t>(a) * a;
          expect += count_leq(pos + 1, l.energies[i] - asq);
        }
        if (expect != l.cum_count[i]) return false;
      }
    }
    return true;
  }

 private:
  struct Layer {
    std::vector<std::int64_t> energies;  // ascending, exact-count > 0
    std::vector<BigInt> cum_count;       // count of suffixes with energy <= energies[i]
    std::vector<BigInt> cum_esum;        // sum of those suffixes' energies

    BigInt exact_at(std::size_t i) const {
      return i == 0 ? cum_count[0] : cum_count[i] - cum_count[i - 1];
    }
  };

  static std::size_t upper_index(const Layer& l, std::int64_t budget) {
    return static_cast<std::size_t>(
        std::upper_bound(l.energies.begin(), l.energies.end(), budget) - l.energies.begin());
  }

  AmplitudeAlphabet alphabet_;
  int n_ = 0;
  std::int64_t cap_ = 0;
  std::vector<Layer> layers_;
};

inline TrellisCounts build_energy_trellis(const AmplitudeAlphabet& alphabet, int n,
                                          std::int64_t e_max) {
  return TrellisCounts::build(alphabet, n, e_max);
}

// Smallest reachable sequence energy whose cumulative count reaches 2^k.
inline std::int64_t min_sphere_energy(const AmplitudeAlphabet& alphabet, int n, int k) {
  alphabet.validate();
  if (k < 0) throw ConfigError("k must be >= 0");
  const BigInt target = BigInt(1) << k;
  BigInt all = 1;
  for (int i = 0; i < n; ++i) all *= static_cast<int>(alphabet.size());
  if (all < target)
    throw CapacityError("2^" + std::to_string(k) + " exceeds the " +
                        std::to_string(alphabet.size()) + "^" + std::to_string(n) +
                        " available sequences");

  // initial cap from the MB entropy estimate, then geometric growth
  const double rate = static_cast<double>(k) / n;
  const auto mb = mb_fit_entropy(alphabet.levels, std::min(rate + 0.05, std::log2((double)alphabet.size())));
  std::int64_t cap = static_cast<std::int64_t>(
      std::ceil(n * std::max(distribution_mean_energy(alphabet.levels, mb),
                             static_cast<double>(alphabet.min_sq()))));
  const std::int64_t cap_max = static_cast<std::int64_t>(n) * alphabet.max_sq();
  cap = std::min(std::max<std::int64_t>(cap, n * alphabet.min_sq()), cap_max);

  for (;;) {
    const TrellisCounts tc = TrellisCounts::build(alphabet, n, cap);
    if (tc.total_count() >= target) {
      for (std::int64_t e : tc.shells())
        if (tc.count_leq(0, e) >= target) return e;
    }
    if (cap >= cap_max) throw CapacityError("sphere search exhausted the alphabet");
    cap = std::min(cap_max, cap + std::max<std::int64_t>(cap / 4, 64));
  }
}

}  // namespace paslab

#endif
