#include "nlos/fmcw.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlos/io_util.hpp"
#include "nlos/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw frame dumps assume a little-endian host");

namespace nlos {

double emitted_chirp(const SensorConfig& config, double t) {
  if (t < 0.0 || t > config.ramp_time)
    throw std::invalid_argument("emitted_chirp: t outside the active ramp");
  const long double cycles =
      static_cast<long double>(config.carrier_frequency) * t +
      0.5L * (static_cast<long double>(config.bandwidth) / config.ramp_time) * t * t;
  const long double frac = cycles - std::floor(cycles);
  return std::cos(2.0 * std::numbers::pi * static_cast<double>(frac));
}

RawFrame RawFrame::zeros(const SensorConfig& config, double timestamp) {
  RawFrame f;
  f.num_antennas = config.num_rx_antennas;
  f.num_chirps = config.num_chirps;
  f.num_samples = config.num_samples_per_chirp;
  f.timestamp = timestamp;
  f.data.assign(static_cast<std::size_t>(f.num_antennas) * f.num_chirps * f.num_samples,
                {0.0, 0.0});
  return f;
}

RawFrame synthesize_frame(const Scenario& scenario, int frame_index,
                          const std::vector<PropagationPath>& paths,
                          bool add_noise) {
  if (frame_index < 0 || frame_index >= scenario.frames.count)
    throw std::invalid_argument("synthesize_frame: frame index outside the schedule");
  const SensorConfig& cfg = scenario.sensor;
  const double t0 = scenario.frames.time_of(frame_index);
  RawFrame frame = RawFrame::zeros(cfg, t0);

  const int M = frame.num_antennas, N = frame.num_chirps, S = frame.num_samples;
  const double lambda = cfg.wavelength();
  const double slope = cfg.bandwidth / cfg.ramp_time;
  const double dt_sample = cfg.ramp_time / S;

  std::vector<std::complex<double>> tone(S), doppler(N), steer(M);
  for (const PropagationPath& path : paths) {
    const double delay = path.path_length / kSpeedOfLight;
    const double f_beat = slope * delay;
    const double base_phase = 2.0 * std::numbers::pi * cfg.carrier_frequency * delay;
    const double doppler_step = 4.0 * std::numbers::pi * cfg.chirp_period *
                                path.radial_velocity / lambda;
    const double steer_step =
        2.0 * std::numbers::pi * cfg.antenna_spacing * std::sin(path.azimuth) / lambda;

    for (int s = 0; s < S; ++s) {
      const double ph = 2.0 * std::numbers::pi * f_beat * (s * dt_sample);
      tone[s] = {std::cos(ph), std::sin(ph)};
    }
    for (int k = 0; k < N; ++k) {
      const double ph = doppler_step * k;
      doppler[k] = {std::cos(ph), std::sin(ph)};
    }
    for (int m = 0; m < M; ++m) {
      const double ph = steer_step * m;
      steer[m] = {std::cos(ph), std::sin(ph)};
    }
    const std::complex<double> scale =
        0.5 * path.amplitude *
        std::complex<double>(std::cos(base_phase), std::sin(base_phase));

    for (int m = 0; m < M; ++m) {
      const std::complex<double> cm = scale * steer[m];
      for (int k = 0; k < N; ++k) {
        const std::complex<double> ck = cm * doppler[k];
        std::complex<double>* row = &frame.at(m, k, 0);
        for (int s = 0; s < S; ++s) row[s] += ck * tone[s];
      }
    }
  }

  if (add_noise && scenario.noise_power > 0.0) {
    RngStream rng(scenario.rng_seed, 0x4e015eull + static_cast<std::uint64_t>(frame_index));
    for (auto& v : frame.data) v += rng.complex_gaussian(scenario.noise_power);
  }
  return frame;
}

RawFrame synthesize_frame(const Scenario& scenario, int frame_index) {
  const double t0 = scenario.frames.time_of(frame_index);
  return synthesize_frame(scenario, frame_index, enumerate_paths(scenario, t0), true);
}

void dump_raw_frames(const std::filesystem::path& path,
                     const std::vector<RawFrame>& frames,
                     std::uint64_t config_hash) {
  if (frames.empty()) throw std::invalid_argument("dump_raw_frames: no frames");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  const RawFrame& first = frames.front();
  std::ostringstream header;
  header << "# nlos_raw v1\n"
         << "config_hash " << to_hex(config_hash) << "\n"
         << "frames " << frames.size() << "\n"
         << "shape " << first.num_antennas << " " << first.num_chirps << " "
         << first.num_samples << "\n"
         << "data complex_float32 little_endian\n";
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));

  std::vector<float> buf;
  for (const RawFrame& f : frames) {
    if (f.num_antennas != first.num_antennas || f.num_chirps != first.num_chirps ||
        f.num_samples != first.num_samples)
      throw std::invalid_argument("dump_raw_frames: frames must share one shape");
    out.write(reinterpret_cast<const char*>(&f.timestamp), sizeof(double));
    buf.resize(f.data.size() * 2);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      buf[2 * i] = static_cast<float>(f.data[i].real());
      buf[2 * i + 1] = static_cast<float>(f.data[i].imag());
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

RawDump load_raw_frames(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  auto read_line = [&]() {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated header");
    return line;
  };
  if (read_line() != "# nlos_raw v1")
    throw std::runtime_error(path.string() + ": not a raw frame dump");

  RawDump dump;
  std::size_t frame_count = 0;
  int M = 0, N = 0, S = 0;
  for (int i = 0; i < 4; ++i) {
    std::istringstream line(read_line());
    std::string key;
    line >> key;
    if (key == "config_hash") {
      std::string hex;
      line >> hex;
      dump.config_hash = std::stoull(hex, nullptr, 16);
    } else if (key == "frames") {
      line >> frame_count;
    } else if (key == "shape") {
      line >> M >> N >> S;
    } else if (key != "data") {
      throw std::runtime_error(path.string() + ": unexpected header line '" + key + "'");
    }
  }
  if (frame_count == 0 || M <= 0 || N <= 0 || S <= 0)
    throw std::runtime_error(path.string() + ": bad header");

  const std::size_t n = static_cast<std::size_t>(M) * N * S;
  std::vector<float> buf(n * 2);
  for (std::size_t fi = 0; fi < frame_count; ++fi) {
    RawFrame f;
    f.num_antennas = M;
    f.num_chirps = N;
    f.num_samples = S;
    in.read(reinterpret_cast<char*>(&f.timestamp), sizeof(double));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw std::runtime_error(path.string() + ": truncated frame data");
    f.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.data[i] = {buf[2 * i], buf[2 * i + 1]};
    dump.frames.push_back(std::move(f));
  }
  return dump;
}

}  // namespace nlos
