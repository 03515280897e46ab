#ifndef PASLAB_EXPERIMENT_HPP
#define PASLAB_EXPERIMENT_HPP

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "paslab/version.hpp"

#include "paslab/airmetrics.hpp"
#include "paslab/config.hpp"
#include "paslab/cpr.hpp"
#include "paslab/dm.hpp"
#include "paslab/edi.hpp"
#include "paslab/llr.hpp"
#include "paslab/npn.hpp"
#include "paslab/pas_map.hpp"
#include "paslab/rrc.hpp"
#include "paslab/ssfm.hpp"
#include "paslab/wdm.hpp"

namespace paslab {

// One sweep coordinate: (DM kind, block length, CPR, launch power).
struct PointCoords {
  std::string dm_kind;  // SS, SM1, SM2, ..., SM_MAX, CCDM
  int n = 0;            // total amplitudes per DM use (emulated length included)
  bool emulated = false;
  MapKind map = MapKind::Serial;
  CprKind cpr = CprKind::Mpr;
  int n_cpr = 0;  // BPS half window; ignored for MPR
  double power_dbm = 0.0;

  std::string key() const {
    std::ostringstream s;
    s << "kind=" << dm_kind << " n=" << n << (emulated ? "e" : "") << " map=" << to_string(map)
      << " cpr=" << to_string(cpr);
    if (cpr == CprKind::Bps) s << " ncpr=" << n_cpr;
    s << " p=" << power_dbm;
    return s.str();
  }

  // ordering for deterministic merges
  bool operator<(const PointCoords& o) const { return key() < o.key(); }
};

struct ExperimentPoint {
  PointCoords coords;
  std::map<std::string, double> values;
  bool optimal_power = false;
  double runtime_s = 0.0;
  std::vector<std::string> warnings;
  std::string error;  // non-empty: the whole point failed at the tagged stage
};

struct ExperimentConfig {
  Config raw;

  std::uint64_t seed = 1;
  int symbols_per_frame = 8192;
  int frames = 2;
  int guard_symbols = 256;
  int workers = 1;

  WdmGrid grid;
  std::vector<int> scoi;  // channel indices averaged for AIR/metrics

  bool awgn_only = false;
  double awgn_es_n0_db = 17.0;
  LinkSpec link;
  LaserSpec laser;
  bool use_dbp = false;
  StepRule step_rule;

  AmplitudeAlphabet alphabet;
  int bits_per_amp = 2;
  int base_n = 512;  // emulation base block length
  MapKind map = MapKind::Serial;

  std::vector<std::string> dm_kinds;
  std::vector<std::string> n_list;  // entries like "64" or "2048e"
  std::vector<CprKind> cpr_kinds;
  std::vector<int> n_cpr_list;
  int test_phases = 64;
  int slip_block = 64;

  std::vector<double> power_dbm_list;
  bool optimize_power = false;

  std::vector<std::string> metrics;
  double eedi_lambda = 0.985;
  int edi_window = 64;
  double e_cpr = 0.008;
  int npn_n_c = 0;  // 0: walk-off rule
  std::string cache_dir;

  static ExperimentConfig from_config(const Config& c) {
    ExperimentConfig e;
    e.raw = c;
    e.seed = static_cast<std::uint64_t>(c.get_int("seed", 1));
    e.symbols_per_frame = static_cast<int>(c.get_int("symbols_per_frame", 8192));
    e.frames = static_cast<int>(c.get_int("frames", 2));
    e.guard_symbols = static_cast<int>(c.get_int("guard_symbols", 256));
    e.workers = static_cast<int>(c.get_int("workers", 1));

    e.grid.channels = static_cast<int>(c.get_int("grid.channels", 3));
    e.grid.baud_gbd = c.get_double("grid.baud_gbd", 10.0);
    e.grid.spacing_ghz = c.get_double("grid.spacing_ghz", 18.0);
    e.grid.rolloff = c.get_double("grid.rolloff", 0.1);
    e.grid.oversampling = static_cast<int>(c.get_int("grid.oversampling", 8));
    if (c.has("grid.scoi"))
      for (long long v : c.get_int_list("grid.scoi")) e.scoi.push_back(static_cast<int>(v));
    else
      e.scoi = {e.grid.channels / 2};

    const std::string link_type = c.get_string("link.type", "ssfm");
    if (link_type == "awgn") {
      e.awgn_only = true;
      e.awgn_es_n0_db = c.get_double("link.awgn_es_n0_db", 17.0);
    } else if (link_type == "ssfm") {
      const int spans = static_cast<int>(c.get_int("link.spans", 4));
      FiberSpan smf;
      smf.length_km = c.get_double("link.span_km", 80.0);
      smf.attenuation_db_km = c.get_double("link.alpha_db_km", 0.2);
      smf.dispersion_ps_nm_km = c.get_double("link.d_ps_nm_km", 17.0);
      smf.gamma_w_km = c.get_double("link.gamma_w_km", 1.3);
      smf.step_km = c.get_double("link.step_smf_km", 1.0);
      const bool dcf = c.get_bool("link.dcf", false);
      FiberSpan dcf_span;
      if (dcf) {
        dcf_span.length_km = c.get_double("link.dcf_km", 13.0);
        dcf_span.attenuation_db_km = c.get_double("link.dcf_alpha_db_km", 0.57);
        dcf_span.beta2_ps2_km = c.get_double("link.dcf_beta2_ps2_km", 127.5);
        dcf_span.gamma_w_km = c.get_double("link.dcf_gamma_w_km", 6.5);
        dcf_span.launch_offset_db = c.get_double("link.dcf_offset_db", -4.0);
        dcf_span.step_km = c.get_double("link.step_dcf_km", 0.1);
      }
      for (int s = 0; s < spans; ++s) {
        e.link.spans.push_back(smf);
        if (dcf) e.link.spans.push_back(dcf_span);
      }
      e.link.dispersion_managed = dcf;
      e.link.edfa_nf_db = c.get_double("link.nf_db", 5.0);
    } else {
      throw ConfigError("link.type must be ssfm or awgn");
    }
    e.step_rule.nl_phase_warn_rad = c.get_double("link.nl_phase_warn_rad", 0.05);

    const double lw = c.get_double("laser.linewidth_khz", 0.0) * 1e3;
    e.laser.tx_linewidth_hz = lw;
    e.laser.rx_linewidth_hz = lw;

    e.use_dbp = c.get_string("rx.compensation", "edc") == "dbp";

    if (c.has("dm.alphabet"))
      for (long long v : c.get_int_list("dm.alphabet"))
        e.alphabet.levels.push_back(static_cast<int>(v));
    else
      e.alphabet.levels = {1, 3, 5, 7, 9, 11, 13, 15};
    e.bits_per_amp = static_cast<int>(c.get_int("dm.bits_per_amp", 2));
    e.base_n = static_cast<int>(c.get_int("dm.base_n", 512));
    e.dm_kinds = c.has("dm.kinds") ? c.get_string_list("dm.kinds") : std::vector<std::string>{"SS"};
    e.n_list = c.has("dm.n_list") ? c.get_string_list("dm.n_list") : std::vector<std::string>{"64"};

    e.map = c.get_string("map", "serial") == "parallel" ? MapKind::Parallel : MapKind::Serial;

    if (c.has("cpr.kinds")) {
      for (const auto& k : c.get_string_list("cpr.kinds")) {
        if (k == "MPR") e.cpr_kinds.push_back(CprKind::Mpr);
        else if (k == "BPS") e.cpr_kinds.push_back(CprKind::Bps);
        else throw ConfigError("cpr.kinds: unknown kind " + k);
      }
    } else {
      e.cpr_kinds = {CprKind::Mpr};
    }
    if (c.has("cpr.n_cpr_list"))
      for (long long v : c.get_int_list("cpr.n_cpr_list")) e.n_cpr_list.push_back(static_cast<int>(v));
    else
      e.n_cpr_list = {24};
    e.test_phases = static_cast<int>(c.get_int("cpr.test_phases", 64));
    e.slip_block = static_cast<int>(c.get_int("cpr.slip_block", 64));

    e.power_dbm_list = c.has("power.dbm_list") ? c.get_double_list("power.dbm_list")
                                               : std::vector<double>{1.0};
    e.optimize_power = c.get_bool("power.optimize", false);

    e.metrics = c.has("metrics") ? c.get_string_list("metrics")
                                 : std::vector<std::string>{"snr", "air", "rate_loss"};
    e.eedi_lambda = c.get_double("eedi.lambda", 0.985);
    e.edi_window = static_cast<int>(c.get_int("edi.window", 64));
    e.e_cpr = c.get_double("npn.e_cpr", 0.008);
    e.npn_n_c = static_cast<int>(c.get_int("npn.n_c", 0));
    e.cache_dir = c.get_string("cache_dir", "");

    e.validate();
    return e;
  }

  void validate() const {
    grid.validate();
    alphabet.validate();
    laser.validate();
    if (!awgn_only) link.validate();
    if (symbols_per_frame < 8) throw ConfigError("symbols_per_frame too small");
    if (frames < 1) throw ConfigError("frames must be >= 1");
    if (guard_symbols < 0 || 2 * guard_symbols >= symbols_per_frame)
      throw ConfigError("guard symbols leave no interior");
    if (dm_kinds.empty() || n_list.empty() || cpr_kinds.empty() || power_dbm_list.empty() ||
        metrics.empty())
      throw ConfigError("sweep lists must be non-empty");
    for (int ch : scoi)
      if (ch < 0 || ch >= grid.channels) throw ConfigError("scoi index out of range");
    if (bits_per_amp < 1 ||
        (1u << bits_per_amp) > alphabet.size() * 2)  // leave rate-loss headroom
      throw ConfigError("bits_per_amp incompatible with the alphabet");
  }

  bool wants(const std::string& metric) const {
    return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
  }

  // parse an n_list entry: plain block length or emulated "<n>e"
  std::pair<int, bool> parse_n(const std::string& s) const {
    if (!s.empty() && s.back() == 'e') {
      const int n = std::stoi(s.substr(0, s.size() - 1));
      if (n % base_n != 0) throw ConfigError("emulated n must be a multiple of dm.base_n");
      return {n, true};
    }
    return {std::stoi(s), false};
  }
};

// Orchestrates TX -> fiber -> RX -> metrics for points and sweeps.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

  const ExperimentConfig& config() const { return cfg_; }

  DmSpec dm_spec(const std::string& kind, int n, bool emulated) const {
    DmSpec spec;
    const int base = emulated ? cfg_.base_n : n;
    spec.n = base;
    spec.k = cfg_.bits_per_amp * base;
    spec.alphabet = cfg_.alphabet;
    spec.emulate_factor = emulated ? n / cfg_.base_n : 1;
    spec.seed = stream_key(cfg_.seed, "dm-interleaver");
    if (kind == "SS") spec.kind = DmKind::SS;
    else if (kind == "CCDM") {
      spec.kind = DmKind::CCDM;
      spec.composition = ccdm_composition_for_rate(cfg_.alphabet.levels, base, spec.k);
    } else if (kind == "SM_MAX") spec.kind = DmKind::SmMax;
    else if (kind.rfind("SM", 0) == 0) {
      spec.kind = DmKind::SM;
      spec.shells = std::stoi(kind.substr(2));
    } else {
      throw ConfigError("unknown DM kind " + kind);
    }
    return spec;
  }

  ExperimentPoint run_point(const PointCoords& coords) const {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentPoint point;
    point.coords = coords;
    try {
      const auto tx = build_tx(coords);
      const auto rx = propagate(tx, coords, point.warnings);
      eval_metrics(tx, rx, coords, point);
    } catch (const std::exception& ex) {
      point.error = ex.what();  // missing metrics are emitted as nan
    }
    point.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return point;
  }

  std::vector<ExperimentPoint> run_sweep() const {
    // build the coordinate list: Cartesian product of the sweep axes
    std::vector<std::vector<PointCoords>> groups;  // one group per (kind, n, cpr variant)
    for (const auto& kind : cfg_.dm_kinds)
      for (const auto& n_entry : cfg_.n_list) {
        const auto [n, emulated] = cfg_.parse_n(n_entry);
        for (const CprKind cpr : cfg_.cpr_kinds) {
          const std::vector<int> windows =
              cpr == CprKind::Bps ? cfg_.n_cpr_list : std::vector<int>{0};
          for (int w : windows) {
            std::vector<PointCoords> group;
            for (double p : cfg_.power_dbm_list) {
              PointCoords c;
              c.dm_kind = kind;
              c.n = n;
              c.emulated = emulated;
              c.map = cfg_.map;
              c.cpr = cpr;
              c.n_cpr = w;
              c.power_dbm = p;
              group.push_back(c);
            }
            groups.push_back(std::move(group));
          }
        }
      }

    auto run_group = [this](const std::vector<PointCoords>& group) {
      std::vector<ExperimentPoint> out;
      for (const auto& c : group) out.push_back(run_point(c));
      if (config().optimize_power && out.size() > 1) {
        // coarse argmax, then 0.5 dB refinement around it
        const auto best = best_air_index(out);
        if (best >= 0) {
          for (double dp : {-0.5, 0.5}) {
            PointCoords c = out[best].coords;
            c.power_dbm += dp;
            bool seen = false;
            for (const auto& p : out) seen |= p.coords.power_dbm == c.power_dbm;
            if (!seen) out.push_back(run_point(c));
          }
        }
      }
      const auto best = best_air_index(out);
      if (best >= 0) out[best].optimal_power = true;
      return out;
    };

    std::vector<ExperimentPoint> all;
    if (cfg_.workers <= 1) {
      for (const auto& g : groups) {
        auto pts = run_group(g);
        all.insert(all.end(), pts.begin(), pts.end());
      }
    } else {
      std::vector<std::future<std::vector<ExperimentPoint>>> futures;
      std::size_t next = 0;
      std::mutex m;
      const int nw = std::min<int>(cfg_.workers, static_cast<int>(groups.size()));
      for (int w = 0; w < nw; ++w)
        futures.push_back(std::async(std::launch::async, [&]() {
          std::vector<ExperimentPoint> mine;
          for (;;) {
            std::size_t i;
            {
              std::lock_guard<std::mutex> lock(m);
              if (next >= groups.size()) break;
              i = next++;
            }
            auto pts = run_group(groups[i]);
            mine.insert(mine.end(), pts.begin(), pts.end());
          }
          return mine;
        }));
      for (auto& f : futures) {
        auto pts = f.get();
        all.insert(all.end(), pts.begin(), pts.end());
      }
    }
    std::sort(all.begin(), all.end(),
              [](const ExperimentPoint& a, const ExperimentPoint& b) { return a.coords < b.coords; });
    return all;
  }

  // --- TX ---------------------------------------------------------------

  struct TxFrame {
    // per channel: unit-scale dual-pol symbols
    std::vector<std::vector<cdouble>> x, y;
  };

  struct TxData {
    std::vector<TxFrame> frames;
    std::vector<double> amp_prior;  // empirical amplitude distribution
    double prior_entropy = 0.0;     // per pol symbol
    double rate_loss = 0.0;
    QamConstellation constellation;
  };

  TxData build_tx(const PointCoords& coords) const {
    const auto& dm = dm_for(coords);
    const int n_total = dm.spec().output_length();
    if (cfg_.symbols_per_frame % n_total != 0)
      throw ConfigError("tx: symbols_per_frame must be a multiple of the DM block length");

    TxData tx;
    tx.rate_loss = dm.rate_loss();
    const double e_amp = dm.average_sequence_energy() / dm.spec().n;
    tx.constellation =
        QamConstellation::build(cfg_.alphabet, mb_fit_mean_energy(cfg_.alphabet.levels, e_amp));

    std::vector<std::size_t> hist(cfg_.alphabet.size(), 0);
    const int groups = cfg_.symbols_per_frame / n_total;
    const BigInt image = dm.image_size();
    const int k_use = dm.spec().input_bits();

    tx.frames.resize(cfg_.frames);
    for (int f = 0; f < cfg_.frames; ++f) {
      TxFrame& frame = tx.frames[f];
      frame.x.resize(cfg_.grid.channels);
      frame.y.resize(cfg_.grid.channels);
      for (int ch = 0; ch < cfg_.grid.channels; ++ch) {
        RngStream bits_rng(stream_key(
            cfg_.seed, "tx-bits|" + coords.dm_kind + "|" + std::to_string(coords.n) + "|ch" +
                           std::to_string(ch) + "|f" + std::to_string(f)));
        RngStream sign_rng(stream_key(cfg_.seed, "tx-signs|ch" + std::to_string(ch) + "|f" +
                                                     std::to_string(f)));
        frame.x[ch].reserve(cfg_.symbols_per_frame);
        frame.y[ch].reserve(cfg_.symbols_per_frame);
        for (int g = 0; g < groups; ++g) {
          std::array<AmplitudeBlock, 4> blocks;
          for (auto& b : blocks) {
            BigInt bits = 0;
            for (int used = 0; used < k_use; used += 32)
              bits = (bits << 32) | bits_rng.next_below(1ull << 32);
            b = dm.encode(bits % image);
            for (int a : b.amplitudes) hist[cfg_.alphabet.index_of(a)] += 1;
          }
          std::vector<int> signs(4 * n_total);
          for (auto& s : signs) s = sign_rng.next_bit() ? 1 : 0;
          const auto mapped = map_amplitudes(coords.map, blocks, signs, tx.constellation);
          frame.x[ch].insert(frame.x[ch].end(), mapped.x.begin(), mapped.x.end());
          frame.y[ch].insert(frame.y[ch].end(), mapped.y.begin(), mapped.y.end());
        }
      }
    }

    std::size_t total = 0;
    for (auto c : hist) total += c;
    tx.amp_prior.resize(hist.size());
    for (std::size_t i = 0; i < hist.size(); ++i)
      tx.amp_prior[i] = static_cast<double>(hist[i]) / static_cast<double>(total);
    tx.prior_entropy = 2.0 * (1.0 + entropy_bits(tx.amp_prior));
    return tx;
  }

  // --- channel ------------------------------------------------------------

  struct RxData {
    // per frame, per SCOI channel: sampled unit-scale symbols
    std::vector<std::vector<std::vector<cdouble>>> x, y;
    double es_n0_linear = 0.0;  // analytic ASE-only Es/N0 at this launch power
  };

  RxData propagate(const TxData& tx, const PointCoords& coords,
                   std::vector<std::string>& warnings) const {
    RxData rx;
    rx.x.resize(cfg_.frames);
    rx.y.resize(cfg_.frames);

    if (cfg_.awgn_only) {
      rx.es_n0_linear = db_to_linear(cfg_.awgn_es_n0_db);
      const double sigma2 = 1.0 / rx.es_n0_linear;
      for (int f = 0; f < cfg_.frames; ++f) {
        rx.x[f].resize(cfg_.scoi.size());
        rx.y[f].resize(cfg_.scoi.size());
        for (std::size_t s = 0; s < cfg_.scoi.size(); ++s) {
          const int ch = cfg_.scoi[s];
          RngStream noise(stream_key(cfg_.seed, "awgn|ch" + std::to_string(ch) + "|f" +
                                                    std::to_string(f)));
          rx.x[f][s] = tx.frames[f].x[ch];
          rx.y[f][s] = tx.frames[f].y[ch];
          for (auto& v : rx.x[f][s]) v += noise.next_circular_gaussian(sigma2);
          for (auto& v : rx.y[f][s]) v += noise.next_circular_gaussian(sigma2);
        }
      }
      return rx;
    }

    const double p_ch_w = dbm_to_watt(coords.power_dbm);
    const double pol_scale = std::sqrt(p_ch_w / 2.0);
    const double rs = cfg_.grid.baud_gbd * 1e9;
    rx.es_n0_linear =
        (p_ch_w / 2.0) * cfg_.grid.symbol_time_s() / cfg_.link.ase_psd_per_pol();

    for (int f = 0; f < cfg_.frames; ++f) {
      std::vector<WaveformGrid> shaped(cfg_.grid.channels);
      for (int ch = 0; ch < cfg_.grid.channels; ++ch) {
        shaped[ch] = rrc_shape(tx.frames[f].x[ch], tx.frames[f].y[ch], cfg_.grid.rolloff,
                               cfg_.grid.oversampling, rs);
        shaped[ch].scale(pol_scale);
        shaped[ch].reference_power_w = p_ch_w;
        if (cfg_.laser.tx_linewidth_hz > 0.0) {
          RngStream lrng(stream_key(cfg_.seed, "laser-tx|ch" + std::to_string(ch) + "|f" +
                                                   std::to_string(f)));
          apply_laser_phase_noise(shaped[ch], cfg_.laser.tx_linewidth_hz, lrng);
        }
      }
      WaveformGrid wave = wdm_mux(shaped, cfg_.grid);
      RngStream ase(stream_key(cfg_.seed, "ase|f" + std::to_string(f)));
      const auto result = ssfm_propagate(wave, cfg_.link, cfg_.step_rule, ase);
      for (const auto& w : result.warnings) warnings.push_back(w);

      rx.x[f].resize(cfg_.scoi.size());
      rx.y[f].resize(cfg_.scoi.size());
      for (std::size_t s = 0; s < cfg_.scoi.size(); ++s) {
        const int ch = cfg_.scoi[s];
        WaveformGrid base = wdm_demux(wave, cfg_.grid, ch);
        if (cfg_.laser.rx_linewidth_hz > 0.0) {
          RngStream lrng(stream_key(cfg_.seed, "laser-rx|ch" + std::to_string(ch) + "|f" +
                                                   std::to_string(f)));
          apply_laser_phase_noise(base, cfg_.laser.rx_linewidth_hz, lrng);
        }
        const double fc = cfg_.grid.center_frequency_hz(ch);
        if (cfg_.use_dbp) {
          const auto dres = dbp_single_channel(base, cfg_.link, cfg_.step_rule, fc);
          for (const auto& w : dres.warnings) warnings.push_back(w);
        } else {
          edc(base, cfg_.link, fc);
        }
        matched_filter_and_sample(base, cfg_.grid.rolloff, cfg_.grid.oversampling, rs,
                                  rx.x[f][s], rx.y[f][s]);
        const double unscale = 1.0 / pol_scale;
        for (auto& v : rx.x[f][s]) v *= unscale;
        for (auto& v : rx.y[f][s]) v *= unscale;
      }
    }
    return rx;
  }

  // --- metrics --------------------------------------------------------------

  void eval_metrics(const TxData& tx, const RxData& rx, const PointCoords& coords,
                    ExperimentPoint& point) const {
    const std::size_t g = cfg_.guard_symbols;
    const std::size_t interior_begin = g, interior_end = cfg_.symbols_per_frame - g;

    double snr_acc = 0.0;
    std::size_t snr_count = 0;
    double air_sum = 0.0, air_sumsq = 0.0;
    std::size_t air_n = 0;

    for (int f = 0; f < cfg_.frames; ++f) {
      for (std::size_t s = 0; s < cfg_.scoi.size(); ++s) {
        const int ch = cfg_.scoi[s];
        for (int pol = 0; pol < 2; ++pol) {
          const auto& r_full = pol == 0 ? rx.x[f][s] : rx.y[f][s];
          const auto& t_full = pol == 0 ? tx.frames[f].x[ch] : tx.frames[f].y[ch];

          // carrier phase recovery on the full frame
          std::vector<cdouble> corrected;
          if (coords.cpr == CprKind::Mpr) {
            corrected = mpr(r_full, t_full).corrected;
          } else {
            CprSpec spec;
            spec.kind = CprKind::Bps;
            spec.n_cpr = coords.n_cpr;
            spec.test_phases = cfg_.test_phases;
            corrected = bps(r_full, tx.constellation, spec).corrected;
            if (cfg_.laser.tx_linewidth_hz > 0.0 || cfg_.laser.rx_linewidth_hz > 0.0)
              corrected = cycle_slip_fix(corrected, t_full, cfg_.slip_block);
          }

          std::vector<cdouble> r(corrected.begin() + interior_begin,
                                 corrected.begin() + interior_end);
          std::vector<cdouble> t(t_full.begin() + interior_begin, t_full.begin() + interior_end);

          // scalar LS fit: signal part and residual-distortion variance
          cdouble num = 0.0;
          double den = 0.0;
          for (std::size_t k = 0; k < r.size(); ++k) {
            num += r[k] * std::conj(t[k]);
            den += std::norm(t[k]);
          }
          const cdouble h = num / den;
          double err = 0.0, sig = 0.0;
          for (std::size_t k = 0; k < r.size(); ++k) {
            err += std::norm(r[k] - h * t[k]);
            sig += std::norm(t[k]);
          }
          err /= r.size();
          sig /= r.size();
          snr_acc += sig / std::max(err, 1e-30);
          snr_count += 1;

          if (cfg_.wants("air")) {
            // normalize through the fitted gain, demap at the measured distortion
            std::vector<cdouble> rn(r.size());
            for (std::size_t k = 0; k < r.size(); ++k) rn[k] = r[k] / h;
            const double sigma2 = std::max(err / std::norm(h), 1e-12);
            const auto llrs = demap_bit_metrics(rn, sigma2, tx.constellation, tx.amp_prior);
            const int bits = tx.constellation.bits_per_dim();
            std::vector<int> tx_bits(llrs.size());
            std::size_t out = 0;
            for (std::size_t k = 0; k < t.size(); ++k) {
              const unsigned li =
                  QamConstellation::gray_label(tx.constellation.nearest_dim_index(t[k].real()));
              const unsigned lq =
                  QamConstellation::gray_label(tx.constellation.nearest_dim_index(t[k].imag()));
              for (int b = 0; b < bits; ++b) tx_bits[out++] = (li >> b) & 1u;
              for (int b = 0; b < bits; ++b) tx_bits[out++] = (lq >> b) & 1u;
            }
            const auto est = air_bmd(llrs, tx_bits, tx.prior_entropy, 2 * bits);
            // pool per-symbol statistics across pols/channels/frames
            const double seg_var =
                (est.halfwidth / 1.96) * (est.halfwidth / 1.96) * est.symbols;
            air_sum += est.air * est.symbols;
            air_sumsq += (seg_var + est.air * est.air) * est.symbols;
            air_n += est.symbols;
          }
        }
      }
    }

    if (cfg_.wants("snr"))
      point.values["snr_db"] = linear_to_db(snr_acc / std::max<std::size_t>(snr_count, 1));
    if (cfg_.wants("air")) {
      const double mean = air_sum / air_n;
      const double var = std::max(0.0, air_sumsq / air_n - mean * mean);
      point.values["air"] = mean;
      point.values["air_halfwidth"] = 1.96 * std::sqrt(var / air_n);
    }
    if (cfg_.wants("rate_loss")) point.values["rate_loss"] = tx.rate_loss;

    const int ch0 = cfg_.scoi.front();
    if (cfg_.wants("eedi")) {
      try {
        double acc = 0.0;
        for (int f = 0; f < cfg_.frames; ++f)
          acc += eedi(tx.frames[f].x[ch0], cfg_.eedi_lambda);
        point.values["eedi"] = acc / cfg_.frames;
      } catch (const std::exception& ex) {
        point.values["eedi"] = std::nan("");
        point.warnings.push_back(std::string("eedi: ") + ex.what());
      }
    }
    if (cfg_.wants("edi")) {
      try {
        double acc = 0.0;
        for (int f = 0; f < cfg_.frames; ++f) acc += edi(tx.frames[f].x[ch0], cfg_.edi_window);
        point.values["edi"] = acc / cfg_.frames;
      } catch (const std::exception& ex) {
        point.values["edi"] = std::nan("");
        point.warnings.push_back(std::string("edi: ") + ex.what());
      }
    }

    if (cfg_.wants("npn")) eval_npn(tx, rx, coords, point);
  }

  void eval_npn(const TxData& tx, const RxData& rx, const PointCoords& coords,
                ExperimentPoint& point) const {
    try {
      if (cfg_.awgn_only) throw UnsupportedLinkError("npn needs a fiber link");
      const auto klink = KernelLink::from(cfg_.link);
      const double t_sym = cfg_.grid.symbol_time_s();
      const int n_c = cfg_.npn_n_c > 0
                          ? cfg_.npn_n_c
                          : walk_off_half_memory(
                                klink, cfg_.grid.max_center_offset_ghz() * 2e9, t_sym);
      const auto table = kernel_table_cached(klink, t_sym, n_c);

      NpnSpec spec;
      spec.channels = cfg_.grid.channels;
      spec.channel_of_interest = cfg_.scoi.front();
      spec.n_c = n_c;
      spec.n_cpr = coords.cpr == CprKind::Bps ? coords.n_cpr : cfg_.symbols_per_frame;
      spec.es_n0 = rx.es_n0_linear;
      spec.e_cpr = cfg_.e_cpr;
      const double p_ch_w = dbm_to_watt(coords.power_dbm);
      spec.phibar.resize(cfg_.grid.channels);
      for (int l = 0; l < cfg_.grid.channels; ++l)
        spec.phibar[l] =
            nominal_phase_rotation(spec.channel_of_interest, l, cfg_.link, p_ch_w);

      double residual = 0.0;
      NpnMetric last{};
      for (int f = 0; f < cfg_.frames; ++f) {
        std::vector<std::vector<double>> intensity(cfg_.grid.channels);
        for (int l = 0; l < cfg_.grid.channels; ++l) {
          intensity[l].resize(cfg_.symbols_per_frame);
          for (int k = 0; k < cfg_.symbols_per_frame; ++k)
            intensity[l][k] =
                std::norm(tx.frames[f].x[l][k]) + std::norm(tx.frames[f].y[l][k]);
        }
        const auto series = npn_phase_series(intensity, table, spec);
        last = npn_metric(series, spec);
        residual += last.residual_var;
      }
      residual /= cfg_.frames;
      point.values["npn_residual"] = residual;
      point.values["npn_floor"] = last.cpr_noise_var;
      point.values["npn"] = residual + last.cpr_noise_var;
    } catch (const std::exception& ex) {
      point.values["npn"] = std::nan("");
      point.values["npn_residual"] = std::nan("");
      point.values["npn_floor"] = std::nan("");
      point.warnings.push_back(std::string("npn: ") + ex.what());
    }
  }

 private:
  static long best_air_index(const std::vector<ExperimentPoint>& pts) {
    long best = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].error.empty() || !pts[i].values.count("air")) continue;
      if (best < 0 || pts[i].values.at("air") > pts[best].values.at("air"))
        best = static_cast<long>(i);
    }
    return best;
  }

  const DistributionMatcher& dm_for(const PointCoords& coords) const {
    const DmSpec spec = dm_spec(coords.dm_kind, coords.n, coords.emulated);
    const std::string key = spec.to_record();
    std::lock_guard<std::mutex> lock(dm_mutex_);
    auto it = dm_cache_.find(key);
    if (it == dm_cache_.end())
      it = dm_cache_.emplace(key, std::make_shared<DistributionMatcher>(
                                      DistributionMatcher::build(spec)))
               .first;
    return *it->second;
  }

  KernelCoefficients kernel_table_cached(const KernelLink& link, double t_sym, int n_c) const {
    std::lock_guard<std::mutex> lock(kernel_mutex_);
    if (!kernel_table_) {
      kernel_table_ = std::make_shared<KernelCoefficients>(
          kernel_table(link, t_sym, n_c, cfg_.grid.channels, cfg_.cache_dir));
      if (!kernel_table_->residual_ok())
        throw NumericError("kernel coefficients: imaginary residual above tolerance");
    }
    return *kernel_table_;
  }

  ExperimentConfig cfg_;
  mutable std::mutex dm_mutex_;
  mutable std::map<std::string, std::shared_ptr<DistributionMatcher>> dm_cache_;
  mutable std::mutex kernel_mutex_;
  mutable std::shared_ptr<KernelCoefficients> kernel_table_;
};

// --- results ----------------------------------------------------------------

inline std::vector<std::string> result_columns(const ExperimentConfig& cfg) {
  std::vector<std::string> cols{"dm_kind", "n",     "emulated",  "map",
                                "cpr",     "n_cpr", "power_dbm", "optimal_power"};
  for (const auto& m : cfg.metrics) {
    if (m == "snr") cols.push_back("snr_db");
    else if (m == "air") {
      cols.push_back("air");
      cols.push_back("air_halfwidth");
    } else if (m == "npn") {
      cols.push_back("npn");
      cols.push_back("npn_residual");
      cols.push_back("npn_floor");
    } else {
      cols.push_back(m);
    }
  }
  cols.push_back("runtime_s");
  cols.push_back("warnings");
  return cols;
}

// CSV in heat-map-ready long format: one row per point, coordinates first.
inline void emit_results_csv(const std::vector<ExperimentPoint>& points,
                             const ExperimentConfig& cfg, std::ostream& out) {
  const auto cols = result_columns(cfg);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  out.precision(12);
  for (const auto& p : points) {
    out << p.coords.dm_kind << ',' << p.coords.n << ',' << (p.coords.emulated ? 1 : 0) << ','
        << to_string(p.coords.map) << ',' << to_string(p.coords.cpr) << ','
        << (p.coords.cpr == CprKind::Bps ? p.coords.n_cpr : 0) << ',' << p.coords.power_dbm
        << ',' << (p.optimal_power ? 1 : 0);
    for (std::size_t i = 8; i + 2 < cols.size(); ++i) {
      const auto it = p.values.find(cols[i]);
      out << ',';
      if (it != p.values.end() && !std::isnan(it->second))
        out << it->second;
      else
        out << "nan";
    }
    out << ',' << p.runtime_s << ',';
    std::string w = p.error.empty() ? "" : ("error: " + p.error);
    for (const auto& s : p.warnings) w += (w.empty() ? "" : "; ") + s;
    std::replace(w.begin(), w.end(), ',', ';');
    out << '"' << w << '"' << '\n';
  }
}

inline void emit_results(const std::vector<ExperimentPoint>& points, const ExperimentConfig& cfg,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/results.csv");
    if (!csv) throw ConfigError("cannot write " + out_dir + "/results.csv");
    emit_results_csv(points, cfg, csv);
  }
  {
    nlohmann::json manifest;
    std::ostringstream hash;
    hash << std::hex << cfg.raw.hash();
    manifest["config_hash"] = hash.str();
    manifest["seed"] = cfg.seed;
    manifest["version"] = kVersion;
    manifest["points"] = points.size();
    manifest["columns"] = result_columns(cfg);
    std::ofstream mf(out_dir + "/manifest.json");
    if (!mf) throw ConfigError("cannot write " + out_dir + "/manifest.json");
    mf << manifest.dump(2) << '\n';
  }
}

}  // namespace paslab

#endif
