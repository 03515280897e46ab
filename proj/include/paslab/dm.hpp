#ifndef PASLAB_DM_HPP
#define PASLAB_DM_HPP

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "paslab/mb.hpp"
#include "paslab/rng.hpp"
#include "paslab/trellis.hpp"

namespace paslab {

enum class DmKind { SS, SM, SmMax, CCDM };

inline std::string to_string(DmKind k) {
  switch (k) {
    case DmKind::SS: return "SS";
    case DmKind::SM: return "SM";
    case DmKind::SmMax: return "SM_MAX";
    case DmKind::CCDM: return "CCDM";
  }
  return "?";
}

struct DmSpec {
  DmKind kind = DmKind::SS;
  int shells = 1;  // m for SM-m
  int n = 0;       // amplitudes per DM use
  int k = 0;       // input bits per DM use
  AmplitudeAlphabet alphabet;
  std::vector<int> composition;  // CCDM: per-level counts, aligned with alphabet.levels
  int emulate_factor = 1;        // c > 1: concatenate c uses + fixed interleaver
  std::uint64_t seed = 0;        // interleaver seed

  void validate() const {
    alphabet.validate();
    if (n < 1) throw ConfigError("dm: N must be >= 1");
    if (k < 0) throw ConfigError("dm: k must be >= 0");
    if (emulate_factor < 1) throw ConfigError("dm: emulation factor must be >= 1");
    if (kind == DmKind::SM && shells < 1) throw ConfigError("dm: SM needs m >= 1");
    if (kind == DmKind::CCDM) {
      if (composition.size() != alphabet.size())
        throw ConfigError("dm: composition must give a count per alphabet level");
      int sum = 0;
      for (int c : composition) {
        if (c < 0) throw ConfigError("dm: composition counts must be >= 0");
        sum += c;
      }
      if (sum != n) throw ConfigError("dm: composition counts must sum to N");
    }
  }

  // output amplitudes per encode (emulation included)
  int output_length() const { return n * emulate_factor; }
  int input_bits() const { return k * emulate_factor; }

  std::string to_record() const {
    std::ostringstream out;
    out << "kind=" << to_string(kind);
    if (kind == DmKind::SM) out << " m=" << shells;
    out << " n=" << n << " k=" << k << " levels=";
    for (std::size_t i = 0; i < alphabet.levels.size(); ++i)
      out << (i ? "," : "") << alphabet.levels[i];
    if (kind == DmKind::CCDM) {
      out << " composition=";
      for (std::size_t i = 0; i < composition.size(); ++i) out << (i ? "," : "") << composition[i];
    }
    if (emulate_factor > 1) out << " emulate=" << emulate_factor;
    if (seed != 0) out << " seed=" << seed;
    return out.str();
  }

  static DmSpec from_record(const std::string& record) {
    DmSpec spec;
    std::istringstream in(record);
    std::string tok;
    bool have_kind = false, have_n = false, have_k = false, have_levels = false;
    auto parse_ints = [](const std::string& s) {
      std::vector<int> out;
      std::istringstream ls(s);
      std::string item;
      while (std::getline(ls, item, ',')) out.push_back(std::stoi(item));
      return out;
    };
    while (in >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw ConfigError("dm record: expected key=value, got " + tok);
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "kind") {
        if (val == "SS") spec.kind = DmKind::SS;
        else if (val == "SM") spec.kind = DmKind::SM;
        else if (val == "SM_MAX") spec.kind = DmKind::SmMax;
        else if (val == "CCDM") spec.kind = DmKind::CCDM;
        else throw ConfigError("dm record: unknown kind " + val);
        have_kind = true;
      } else if (key == "m") spec.shells = std::stoi(val);
      else if (key == "n") { spec.n = std::stoi(val); have_n = true; }
      else if (key == "k") { spec.k = std::stoi(val); have_k = true; }
      else if (key == "levels") { spec.alphabet.levels = parse_ints(val); have_levels = true; }
      else if (key == "composition") spec.composition = parse_ints(val);
      else if (key == "emulate") spec.emulate_factor = std::stoi(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else throw ConfigError("dm record: unknown key " + key);
    }
    if (!have_kind || !have_n || !have_k || !have_levels)
      throw ConfigError("dm record: kind, n, k and levels are required");
    spec.validate();
    return spec;
  }
};

// Energies admitted by a DM kind, with exact per-shell sequence counts.
struct ShellSupport {
  std::vector<std::int64_t> energies;  // ascending
  std::vector<BigInt> counts;          // sequences per shell (full shell)
  std::int64_t e_lo = 0, e_hi = 0;     // admitted range [e_lo, e_hi]
  BigInt admitted;                     // total sequences in range
};

// Lexicographic enumerative (un)ranking over sequences whose total energy lies
// in [e_lo, e_hi]. Index order is alphabet-index order, position 0 most
// significant; the DM image is the 2^k lexicographically-first sequences.
class SequenceIndexer {
 public:
  SequenceIndexer(std::shared_ptr<const TrellisCounts> tc, std::int64_t e_lo, std::int64_t e_hi)
      : tc_(std::move(tc)), e_lo_(e_lo), e_hi_(e_hi) {}

  BigInt admitted() const { return tc_->count_in(0, e_lo_, e_hi_); }
  std::int64_t e_lo() const { return e_lo_; }
  std::int64_t e_hi() const { return e_hi_; }
  const TrellisCounts& trellis() const { return *tc_; }

  std::vector<int> unrank(BigInt r) const {
    const int n = tc_->block_length();
    const auto& levels = tc_->alphabet().levels;
    std::vector<int> out;
    out.reserve(n);
    std::int64_t used = 0;
    for (int pos = 0; pos < n; ++pos) {
      bool chosen = false;
      for (int a : levels) {
        const std::int64_t asq = static_cast<std::int64_t>(a) * a;
        const BigInt c = tc_->count_in(pos + 1, e_lo_ - used - asq, e_hi_ - used - asq);
        if (r < c) {
          out.push_back(a);
          used += asq;
          chosen = true;
          break;
        }
        r -= c;
      }
      if (!chosen) throw CapacityError("unrank index exceeds the admitted sequence count");
    }
    return out;
  }

  BigInt rank(const std::vector<int>& seq) const {
    const int n = tc_->block_length();
    if (static_cast<int>(seq.size()) != n) throw DecodeError("sequence length mismatch");
    const auto& levels = tc_->alphabet().levels;
    BigInt r = 0;
    std::int64_t used = 0;
    for (int pos = 0; pos < n; ++pos) {
      const int idx = tc_->alphabet().index_of(seq[pos]);
      if (idx < 0) throw DecodeError("amplitude is not an alphabet level");
      for (int j = 0; j < idx; ++j) {
        const std::int64_t asq = static_cast<std::int64_t>(levels[j]) * levels[j];
        r += tc_->count_in(pos + 1, e_lo_ - used - asq, e_hi_ - used - asq);
      }
      used += static_cast<std::int64_t>(seq[pos]) * seq[pos];
    }
    if (used < e_lo_ || used > e_hi_) throw DecodeError("sequence energy outside the DM support");
    return r;
  }

  // Exact sum of total energies of the first `m` sequences in index order.
  BigInt image_energy_sum(BigInt m) const {
    const int n = tc_->block_length();
    const auto& levels = tc_->alphabet().levels;
    BigInt total = 0;
    BigInt r = m;
    std::int64_t used = 0;
    for (int pos = 0; pos < n && r > 0; ++pos) {
      for (int a : levels) {
        const std::int64_t asq = static_cast<std::int64_t>(a) * a;
        const std::int64_t lo = e_lo_ - used - asq, hi = e_hi_ - used - asq;
        const BigInt c = tc_->count_in(pos + 1, lo, hi);
        if (r >= c) {
          total += c * asq + tc_->energy_sum_in(pos + 1, lo, hi);
          r -= c;
          if (r == 0) break;
        } else {
          // descend: each of the r remaining sequences carries this symbol
          total += r * asq;
          used += asq;
          break;
        }
      }
    }
    if (r != 0) throw CapacityError("image size exceeds the admitted sequence count");
    return total;
  }

 private:
  std::shared_ptr<const TrellisCounts> tc_;
  std::int64_t e_lo_, e_hi_;
};

// Constant-composition matcher: exact integer arithmetic coding over multiset
// permutations (interval subdivision by remaining counts), lexicographic order.
class CcdmCoder {
 public:
  CcdmCoder(AmplitudeAlphabet alphabet, std::vector<int> composition, int n, int k)
      : alphabet_(std::move(alphabet)), composition_(std::move(composition)), n_(n), k_(k) {
    total_ = multinomial(composition_);
    if ((BigInt(1) << k_) > total_)
      throw CapacityError("composition admits fewer than 2^" + std::to_string(k_) +
                          " permutations");
  }

  const BigInt& total() const { return total_; }

  std::vector<int> unrank(BigInt r) const {
    std::vector<int> counts = composition_;
    std::vector<int> out;
    out.reserve(n_);
    BigInt range = total_;
    for (int pos = 0; pos < n_; ++pos) {
      const int nrem = n_ - pos;
      bool chosen = false;
      for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const BigInt sub = range * counts[j] / nrem;  // exact: range is the multinomial
        if (r < sub) {
          out.push_back(alphabet_.levels[j]);
          counts[j] -= 1;
          range = sub;
          chosen = true;
          break;
        }
        r -= sub;
      }
      if (!chosen) throw CapacityError("unrank index exceeds the permutation count");
    }
    return out;
  }

  BigInt rank(const std::vector<int>& seq) const {
    if (static_cast<int>(seq.size()) != n_) throw DecodeError("sequence length mismatch");
    std::vector<int> counts(composition_.size(), 0);
    for (int a : seq) {
      const int idx = alphabet_.index_of(a);
      if (idx < 0) throw DecodeError("amplitude is not an alphabet level");
      counts[idx] += 1;
    }
    if (counts != composition_) throw DecodeError("composition mismatch");
    counts = composition_;
    BigInt r = 0, range = total_;
    for (int pos = 0; pos < n_; ++pos) {
      const int nrem = n_ - pos;
      const int idx = alphabet_.index_of(seq[pos]);
      for (int j = 0; j < idx; ++j) {
        if (counts[j] == 0) continue;
        r += range * counts[j] / nrem;
      }
      const BigInt sub = range * counts[idx] / nrem;
      counts[idx] -= 1;
      range = sub;
    }
    return r;
  }

  std::int64_t energy() const {
    std::int64_t e = 0;
    for (std::size_t j = 0; j < composition_.size(); ++j)
      e += static_cast<std::int64_t>(composition_[j]) * alphabet_.levels[j] * alphabet_.levels[j];
    return e;
  }

 private:
  AmplitudeAlphabet alphabet_;
  std::vector<int> composition_;
  int n_, k_;
  BigInt total_;
};

namespace detail {

inline double big_ratio(const BigInt& num, const BigInt& den) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  return static_cast<double>(Float(num) / Float(den));
}

// Bottom-filled energy sum of the cheapest `target` sequences in a shell range:
// the window-selection score for SM-m.
inline BigInt bottom_fill_energy(const std::vector<std::int64_t>& energies,
                                 const std::vector<BigInt>& counts, std::size_t first,
                                 std::size_t last, const BigInt& target) {
  BigInt remaining = target;
  BigInt sum = 0;
  for (std::size_t i = first; i <= last && remaining > 0; ++i) {
    const BigInt take = counts[i] < remaining ? counts[i] : remaining;
    sum += take * energies[i];
    remaining -= take;
  }
  if (remaining > 0) throw CapacityError("window does not admit the requested image size");
  return sum;
}

}  // namespace detail

// Trellis construction with enough headroom for a given DM kind; grows the
// energy cap geometrically until the kind's support is resolvable.
class DistributionMatcher {
 public:
  static DistributionMatcher build(const DmSpec& spec) {
    spec.validate();
    DistributionMatcher dm;
    dm.spec_ = spec;
    dm.use_size_ = BigInt(1) << spec.k;
    dm.image_size_ = BigInt(1) << spec.input_bits();
    switch (spec.kind) {
      case DmKind::CCDM:
        dm.ccdm_ = std::make_shared<CcdmCoder>(spec.alphabet, spec.composition, spec.n, spec.k);
        dm.avg_energy_ = static_cast<double>(dm.ccdm_->energy());
        break;
      case DmKind::SS: {
        const std::int64_t e_max = min_sphere_energy(spec.alphabet, spec.n, spec.k);
        auto tc = std::make_shared<const TrellisCounts>(
            TrellisCounts::build(spec.alphabet, spec.n, e_max));
        dm.indexer_ = std::make_shared<SequenceIndexer>(
            tc, static_cast<std::int64_t>(spec.n) * spec.alphabet.min_sq(), e_max);
        break;
      }
      case DmKind::SM:
        dm.indexer_ = build_sm_window(spec);
        break;
      case DmKind::SmMax:
        dm.indexer_ = build_sm_max(spec);
        break;
    }
    if (dm.indexer_) {
      if (dm.indexer_->admitted() < dm.use_size_)
        throw CapacityError("support smaller than 2^" + std::to_string(spec.k));
      dm.avg_energy_ =
          detail::big_ratio(dm.indexer_->image_energy_sum(dm.use_size_), dm.use_size_);
    }
    return dm;
  }

  const DmSpec& spec() const { return spec_; }
  // size of the full input space, 2^(k c) for emulated matchers
  const BigInt& image_size() const { return image_size_; }
  // image size of one DM use, 2^k
  const BigInt& use_size() const { return use_size_; }

  // bits -> amplitudes; bits is interpreted as an integer < 2^k (per use)
  AmplitudeBlock encode(const BigInt& bits) const {
    if (spec_.emulate_factor == 1) return encode_single(bits);
    const int c = spec_.emulate_factor;
    if (bits < 0 || bits >= image_size_)
      throw CapacityError("input exceeds the emulated 2^(c*k) range");
    std::vector<int> concat;
    concat.reserve(spec_.output_length());
    const BigInt mask = (BigInt(1) << spec_.k) - 1;
    for (int j = 0; j < c; ++j) {
      const BigInt chunk = (bits >> (j * spec_.k)) & mask;
      const auto blk = encode_single(chunk);
      concat.insert(concat.end(), blk.amplitudes.begin(), blk.amplitudes.end());
    }
    const auto perm = interleaver();
    std::vector<int> out(concat.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = concat[perm[i]];
    return AmplitudeBlock::from_levels(std::move(out));
  }

  BigInt decode(const AmplitudeBlock& block) const {
    if (spec_.emulate_factor == 1) return decode_single(block.amplitudes);
    const int c = spec_.emulate_factor;
    if (static_cast<int>(block.amplitudes.size()) != spec_.output_length())
      throw DecodeError("sequence length mismatch");
    const auto perm = interleaver();
    std::vector<int> concat(block.amplitudes.size());
    for (std::size_t i = 0; i < concat.size(); ++i) concat[perm[i]] = block.amplitudes[i];
    BigInt bits = 0;
    for (int j = c - 1; j >= 0; --j) {
      std::vector<int> chunk(concat.begin() + j * spec_.n, concat.begin() + (j + 1) * spec_.n);
      bits = (bits << spec_.k) | decode_single(chunk);
    }
    return bits;
  }

  // mean per-sequence energy over the 2^k image (one DM use, pre-emulation)
  double average_sequence_energy() const { return avg_energy_; }

  // H(target MB) - k/N. Default target: MB matched to the image's mean energy.
  double rate_loss(const std::optional<std::vector<double>>& target = std::nullopt) const {
    const std::vector<double> p =
        target ? *target : mb_fit_mean_energy(spec_.alphabet.levels, avg_energy_ / spec_.n);
    return entropy_bits(p) - static_cast<double>(spec_.k) / spec_.n;
  }

  // empirical target distribution for downstream priors
  std::vector<double> mb_target() const {
    return mb_fit_mean_energy(spec_.alphabet.levels, avg_energy_ / spec_.n);
  }

  ShellSupport support() const {
    ShellSupport s;
    if (ccdm_) {
      s.e_lo = s.e_hi = ccdm_->energy();
      s.energies = {s.e_lo};
      s.counts = {ccdm_->total()};
      s.admitted = ccdm_->total();
      return s;
    }
    s.e_lo = indexer_->e_lo();
    s.e_hi = indexer_->e_hi();
    s.admitted = indexer_->admitted();
    for (std::int64_t e : indexer_->trellis().shells()) {
      if (e < s.e_lo || e > s.e_hi) continue;
      s.energies.push_back(e);
      s.counts.push_back(indexer_->trellis().shell_count(e));
    }
    return s;
  }

 private:
  AmplitudeBlock encode_single(const BigInt& bits) const {
    if (bits < 0 || bits >= use_size_)
      throw CapacityError("input exceeds the 2^k image");
    return AmplitudeBlock::from_levels(ccdm_ ? ccdm_->unrank(bits) : indexer_->unrank(bits));
  }

  BigInt decode_single(const std::vector<int>& amps) const {
    const BigInt r = ccdm_ ? ccdm_->rank(amps) : indexer_->rank(amps);
    if (r >= use_size_) throw DecodeError("sequence is outside the encoder image");
    return r;
  }

  std::vector<std::uint32_t> interleaver() const {
    return random_permutation(static_cast<std::size_t>(spec_.output_length()),
                              stream_key(spec_.seed, "dm-interleaver"));
  }

  // SM-m: contiguous m-shell window with count >= 2^k minimizing the
  // bottom-filled average energy of 2^k sequences.
  static std::shared_ptr<SequenceIndexer> build_sm_window(const DmSpec& spec) {
    const BigInt target = BigInt(1) << spec.k;
    const std::int64_t cap_max = static_cast<std::int64_t>(spec.n) * spec.alphabet.max_sq();
    std::int64_t cap = grow_seed_cap(spec);
    for (;;) {
      auto tc = std::make_shared<const TrellisCounts>(
          TrellisCounts::build(spec.alphabet, spec.n, cap));
      const auto energies = tc->shells();
      std::vector<BigInt> counts(energies.size());
      for (std::size_t i = 0; i < energies.size(); ++i)
        counts[i] = tc->shell_count(energies[i]);

      const std::size_t m = static_cast<std::size_t>(spec.shells);
      std::optional<std::size_t> best_first;
      BigInt best_sum = 0;
      for (std::size_t first = 0; first < energies.size(); ++first) {
        const std::size_t last = std::min(first + m - 1, energies.size() - 1);
        BigInt window_count = 0;
        for (std::size_t i = first; i <= last; ++i) window_count += counts[i];
        if (window_count < target) continue;
        const BigInt sum = detail::bottom_fill_energy(energies, counts, first, last, target);
        if (!best_first || sum < best_sum) {
          best_first = first;
          best_sum = sum;
        }
      }
      if (best_first) {
        // windows not yet fully visible start above `cap - m shells`; accept the
        // best if no hidden window could beat it (hidden tail filled at >= cap)
        bool settled = true;
        for (std::size_t first = *best_first + 1; first < energies.size(); ++first) {
          const std::size_t last = first + m - 1;
          if (last < energies.size()) continue;  // fully visible, already scanned
          BigInt visible = 0, fill = 0;
          for (std::size_t i = first; i < energies.size(); ++i) {
            const BigInt take = counts[i] < target - visible ? counts[i] : target - visible;
            fill += take * energies[i];
            visible += take;
            if (visible == target) break;
          }
          if (visible < target) fill += (target - visible) * cap;
          if (fill < best_sum) {
            settled = false;
            break;
          }
        }
        if (settled || cap >= cap_max) {
          const std::size_t last = std::min(*best_first + m - 1, energies.size() - 1);
          return std::make_shared<SequenceIndexer>(tc, energies[*best_first], energies[last]);
        }
      }
      if (cap >= cap_max && !best_first)
        throw CapacityError("no " + std::to_string(spec.shells) +
                            "-shell window admits 2^" + std::to_string(spec.k) + " sequences");
      cap = std::min(cap_max, cap + std::max<std::int64_t>(cap / 4, 64));
    }
  }

  // SM-max: shells of SS plus the next shell above E_max, then drop innermost
  // shells (lowest energy first) while at least 2^k sequences remain.
  static std::shared_ptr<SequenceIndexer> build_sm_max(const DmSpec& spec) {
    const BigInt target = BigInt(1) << spec.k;
    const std::int64_t e_max = min_sphere_energy(spec.alphabet, spec.n, spec.k);
    const std::int64_t cap_max = static_cast<std::int64_t>(spec.n) * spec.alphabet.max_sq();
    // next reachable shell above e_max, if any
    std::int64_t cap = e_max;
    std::shared_ptr<const TrellisCounts> tc;
    std::int64_t top = e_max;
    while (true) {
      cap = std::min(cap_max, cap + std::max<std::int64_t>(8 * static_cast<std::int64_t>(
                                                               spec.alphabet.levels.back()),
                                                           64));
      tc = std::make_shared<const TrellisCounts>(TrellisCounts::build(spec.alphabet, spec.n, cap));
      const auto shells = tc->shells();
      bool found = false;
      for (std::int64_t e : shells)
        if (e > e_max) {
          top = e;
          found = true;
          break;
        }
      if (found || cap >= cap_max) break;
    }
    const auto shells = tc->shells();
    std::size_t first = 0;
    std::size_t top_idx = 0;
    for (std::size_t i = 0; i < shells.size(); ++i)
      if (shells[i] <= top) top_idx = i;
    BigInt remaining = tc->count_in(0, shells[0], shells[top_idx]);
    while (first < top_idx) {
      const BigInt without = remaining - tc->shell_count(shells[first]);
      if (without < target) break;
      remaining = without;
      ++first;
    }
    return std::make_shared<SequenceIndexer>(tc, shells[first], shells[top_idx]);
  }

  static std::int64_t grow_seed_cap(const DmSpec& spec) {
    const double rate = static_cast<double>(spec.k) / spec.n;
    const auto mb = mb_fit_entropy(
        spec.alphabet.levels,
        std::min(rate + 0.05, std::log2(static_cast<double>(spec.alphabet.size()))));
    const std::int64_t est = static_cast<std::int64_t>(
        std::ceil(spec.n * distribution_mean_energy(spec.alphabet.levels, mb)));
    return std::max<std::int64_t>(static_cast<std::int64_t>(spec.n) * spec.alphabet.min_sq(),
                                  est);
  }

  DmSpec spec_;
  BigInt use_size_;
  BigInt image_size_;
  std::shared_ptr<SequenceIndexer> indexer_;  // SS / SM / SM-max
  std::shared_ptr<CcdmCoder> ccdm_;           // CCDM
  double avg_energy_ = 0.0;
};

// spec-level convenience wrappers

inline ShellSupport shell_support(const DmSpec& spec) {
  return DistributionMatcher::build(spec).support();
}

inline double dm_rate_loss(const DmSpec& spec,
                           const std::optional<std::vector<double>>& target = std::nullopt) {
  return DistributionMatcher::build(spec).rate_loss(target);
}

inline double average_sequence_energy(const DmSpec& spec) {
  return DistributionMatcher::build(spec).average_sequence_energy();
}

inline AmplitudeBlock emulate_long_block(const DistributionMatcher& dm, int concat_factor,
                                         std::uint64_t interleaver_seed, const BigInt& bits) {
  DmSpec spec = dm.spec();
  spec.emulate_factor = concat_factor;
  spec.seed = interleaver_seed;
  return DistributionMatcher::build(spec).encode(bits);
}

}  // namespace paslab

#endif
