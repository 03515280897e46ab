#ifndef PASLAB_PRESETS_HPP
#define PASLAB_PRESETS_HPP

#include <map>
#include <string>

#include "paslab/config.hpp"

namespace paslab {

// Bundled desk-scale presets. The acceptance suite and the CLI refer to these
// by name; configs/ ships the same text as files.
inline const std::map<std::string, std::string>& preset_registry() {
  static const std::map<std::string, std::string> presets{
      {"linear-awgn", R"(# Symbol-level AWGN reference chain (no fiber)
seed = 1001
symbols_per_frame = 8192
frames = 2
guard_symbols = 256

grid.channels = 1
grid.baud_gbd = 10
grid.spacing_ghz = 0
grid.rolloff = 0.1
grid.oversampling = 8
grid.scoi = 0

link.type = awgn
link.awgn_es_n0_db = 17

dm.kinds = SS
dm.n_list = 64
dm.alphabet = 1,3,5,7,9,11,13,15
dm.bits_per_amp = 2

map = serial
cpr.kinds = MPR
power.dbm_list = 0
metrics = snr,air,rate_loss
)"},
      {"ssfm-3ch-4span", R"(# Desk-scale WDM chain: 3 x 10 GBd, 18 GHz spacing, 4 x 80 km SMF
seed = 2002
symbols_per_frame = 8192
frames = 2
guard_symbols = 256

grid.channels = 3
grid.baud_gbd = 10
grid.spacing_ghz = 18
grid.rolloff = 0.1
grid.oversampling = 8
grid.scoi = 1

link.type = ssfm
link.spans = 4
link.span_km = 80
link.alpha_db_km = 0.2
link.d_ps_nm_km = 17
link.gamma_w_km = 1.3
link.nf_db = 5
link.step_smf_km = 1.0

laser.linewidth_khz = 0
rx.compensation = edc

dm.kinds = SS,CCDM
dm.n_list = 16,32,64,128,256,512,2048e
dm.alphabet = 1,3,5,7,9,11,13,15
dm.bits_per_amp = 2
dm.base_n = 512

map = serial
cpr.kinds = MPR
cpr.n_cpr_list = 32
cpr.test_phases = 64

power.dbm_list = -1,0,1,2,3
power.optimize = true

metrics = snr,air,rate_loss
)"},
      {"ssfm-3ch-dcf", R"(# Dispersion-managed variant: each 80 km SMF span followed by 13 km DCF
seed = 3003
symbols_per_frame = 8192
frames = 2
guard_symbols = 256

grid.channels = 3
grid.baud_gbd = 10
grid.spacing_ghz = 18
grid.rolloff = 0.1
grid.oversampling = 8
grid.scoi = 1

link.type = ssfm
link.spans = 4
link.span_km = 80
link.alpha_db_km = 0.2
link.d_ps_nm_km = 17
link.gamma_w_km = 1.3
link.nf_db = 5
link.step_smf_km = 1.0
link.dcf = true
link.dcf_km = 13
link.dcf_alpha_db_km = 0.57
link.dcf_beta2_ps2_km = 127.5
link.dcf_gamma_w_km = 6.5
link.dcf_offset_db = -4
link.step_dcf_km = 0.1

laser.linewidth_khz = 100
rx.compensation = edc

dm.kinds = SS
dm.n_list = 16,32,64,128,256,512
dm.alphabet = 1,3,5,7,9,11,13,15
dm.bits_per_amp = 2
dm.base_n = 512

map = serial
cpr.kinds = BPS
cpr.n_cpr_list = 256
cpr.test_phases = 64

power.dbm_list = -2,-1,0,1,2
power.optimize = true

metrics = snr,air,rate_loss
)"},
      {"npn-grid", R"(# (N, N_CPR) grid for the phase-noise metric against simulated SNR
seed = 4004
symbols_per_frame = 8192
frames = 2
guard_symbols = 256

grid.channels = 3
grid.baud_gbd = 10
grid.spacing_ghz = 18
grid.rolloff = 0.1
grid.oversampling = 8
grid.scoi = 1

link.type = ssfm
link.spans = 4
link.span_km = 80
link.alpha_db_km = 0.2
link.d_ps_nm_km = 17
link.gamma_w_km = 1.3
link.nf_db = 5
link.step_smf_km = 1.0

laser.linewidth_khz = 0
rx.compensation = edc

dm.kinds = SS
dm.n_list = 16,32,64,128,256,512,2048e
dm.alphabet = 1,3,5,7,9,11,13,15
dm.bits_per_amp = 2
dm.base_n = 512

map = serial
cpr.kinds = BPS
cpr.n_cpr_list = 4,8,24,64,512
cpr.test_phases = 64

# fixed near the optimal launch power of the 4-span chain
power.dbm_list = 2
power.optimize = false

metrics = snr,air,npn,eedi,rate_loss
eedi.lambda = 0.985
npn.e_cpr = 0.008
)"}};
  return presets;
}

inline Config load_preset(const std::string& name) {
  const auto& reg = preset_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown preset: " + name);
  return Config::parse(it->second);
}

// Loads a config file; a `preset = <name>` key starts from the bundled preset
// with the file's remaining keys applied as overrides.
inline Config load_config_with_presets(const std::string& path) {
  Config file = Config::load(path);
  if (!file.has("preset")) return file;
  Config base = load_preset(file.get_string("preset"));
  base.apply_overrides(file);
  return base;
}

}  // namespace paslab

#endif
