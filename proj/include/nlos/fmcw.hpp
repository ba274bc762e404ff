#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include "nlos/paths.hpp"
#include "nlos/scene.hpp"

namespace nlos {

/// Transmit waveform sample: cos(2 pi f_c t + pi (B / T_ramp) t^2) for t in
/// [0, ramp_time]. Phase is reduced in extended precision before the cosine,
/// since f_c * t reaches ~1e7 cycles.
double emitted_chirp(const SensorConfig& config, double t);

/// Complex baseband samples of one measurement frame, indexed
/// [antenna][chirp][sample].
struct RawFrame {
  int num_antennas = 0;
  int num_chirps = 0;
  int num_samples = 0;
  double timestamp = 0.0;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(int antenna, int chirp, int sample) {
    return data[(static_cast<std::size_t>(antenna) * num_chirps + chirp) * num_samples +
                sample];
  }
  const std::complex<double>& at(int antenna, int chirp, int sample) const {
    return data[(static_cast<std::size_t>(antenna) * num_chirps + chirp) * num_samples +
                sample];
  }

  static RawFrame zeros(const SensorConfig& config, double timestamp);
};

/// Deterministic frame synthesis: every propagation path contributes a
/// dechirped tone with beat frequency (B/T_ramp) * (path_length / c), a
/// per-chirp Doppler phase step 4 pi T_chirp v_r / lambda, and a per-antenna
/// phase step 2 pi d sin(azimuth) / lambda, plus (optionally) complex white
/// noise drawn from a per-frame substream of the scenario seed.
RawFrame synthesize_frame(const Scenario& scenario, int frame_index);

/// Variant with externally supplied paths (used by tests to inject exact
/// tones) and an explicit noise switch.
RawFrame synthesize_frame(const Scenario& scenario, int frame_index,
                          const std::vector<PropagationPath>& paths,
                          bool add_noise);

/// Binary frame dump: a short text header (shape, config fingerprint) then
/// little-endian float32 I/Q pairs per frame prefixed by a float64 timestamp.
void dump_raw_frames(const std::filesystem::path& path,
                     const std::vector<RawFrame>& frames,
                     std::uint64_t config_hash);
struct RawDump {
  std::uint64_t config_hash = 0;
  std::vector<RawFrame> frames;
};
RawDump load_raw_frames(const std::filesystem::path& path);

}  // namespace nlos
