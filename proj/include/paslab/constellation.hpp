#ifndef PASLAB_CONSTELLATION_HPP
#define PASLAB_CONSTELLATION_HPP

#include <cmath>
#include <vector>

#include "paslab/common.hpp"
#include "paslab/trellis.hpp"

namespace paslab {

// Square QAM described per real dimension: 2A ASK points (sign x amplitude),
// reflected-binary labels. The scale normalizes to unit average symbol energy
// per polarization under the shaped amplitude distribution.
class QamConstellation {
 public:
  static QamConstellation build(const AmplitudeAlphabet& alphabet,
                                const std::vector<double>& amp_distribution) {
    alphabet.validate();
    if (amp_distribution.size() != alphabet.size())
      throw ConfigError("constellation: distribution size must match alphabet");
    QamConstellation c;
    c.alphabet_ = alphabet;
    c.amp_bits_ = 0;
    while ((1u << c.amp_bits_) < alphabet.size()) ++c.amp_bits_;
    if ((1u << c.amp_bits_) != alphabet.size())
      throw ConfigError("constellation: alphabet size must be a power of two");
    const double e_amp = distribution_mean_energy(alphabet.levels, amp_distribution);
    // per pol: 2 dimensions, E|dim|^2 = e_amp * scale^2 each
    c.scale_ = 1.0 / std::sqrt(2.0 * e_amp);
    const int a = static_cast<int>(alphabet.size());
    c.values_.resize(2 * a);
    for (int i = 0; i < 2 * a; ++i) c.values_[i] = c.level_value(i);
    return c;
  }

  int amp_count() const { return static_cast<int>(alphabet_.size()); }
  int bits_per_dim() const { return amp_bits_ + 1; }
  double scale() const { return scale_; }
  const AmplitudeAlphabet& alphabet() const { return alphabet_; }
  const std::vector<double>& dim_values() const { return values_; }

  // dimension index: 0..A-1 negative levels descending, A..2A-1 positive ascending
  double level_value(int dim_index) const {
    const int a = amp_count();
    return (dim_index < a ? -alphabet_.levels[a - 1 - dim_index]
                          : alphabet_.levels[dim_index - a]) *
           scale_;
  }

  static unsigned gray_label(int dim_index) {
    return static_cast<unsigned>(dim_index) ^ (static_cast<unsigned>(dim_index) >> 1);
  }

  int dim_index(int amp_index, bool positive) const {
    return positive ? amp_count() + amp_index : amp_count() - 1 - amp_index;
  }

  // sign bit = MSB of the reflected-binary label
  int sign_bit_position() const { return amp_bits_; }

  // prior of each dimension point given the amplitude prior and uniform signs
  std::vector<double> dim_priors(const std::vector<double>& amp_prior) const {
    const int a = amp_count();
    std::vector<double> p(2 * a);
    for (int j = 0; j < a; ++j) {
      p[dim_index(j, false)] = 0.5 * amp_prior[j];
      p[dim_index(j, true)] = 0.5 * amp_prior[j];
    }
    return p;
  }

  // nearest dimension point (Euclidean); used by BPS decisions
  int nearest_dim_index(double v) const {
    const auto it = std::lower_bound(values_.begin(), values_.end(), v);
    if (it == values_.begin()) return 0;
    if (it == values_.end()) return static_cast<int>(values_.size()) - 1;
    const int hi = static_cast<int>(it - values_.begin());
    return (v - values_[hi - 1] <= values_[hi] - v) ? hi - 1 : hi;
  }

  double nearest_value(double v) const { return values_[nearest_dim_index(v)]; }

  // squared distance of a complex sample to the nearest QAM point
  double decision_distance_sq(cdouble s) const {
    const double di = s.real() - nearest_value(s.real());
    const double dq = s.imag() - nearest_value(s.imag());
    return di * di + dq * dq;
  }

 private:
  AmplitudeAlphabet alphabet_;
  unsigned amp_bits_ = 0;
  double scale_ = 1.0;
  std::vector<double> values_;
};

}  // namespace paslab

#endif
