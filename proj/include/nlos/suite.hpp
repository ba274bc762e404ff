#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "nlos/detect.hpp"
#include "nlos/dsp.hpp"
#include "nlos/scene.hpp"

namespace nlos {

/// Signal-chain and clustering settings a scenario ships with.
struct ProcessingConfig {
  DspParams dsp;
  DetectParams detect;
};

/// A scenario plus the processing settings it ships with.
struct SuiteEntry {
  Scenario scenario;
  ProcessingConfig processing;
};

/// Radar settings sized so a multi-frame run stays interactive on one core:
/// shorter fast-time axis and half the array, same bandwidth and chirp
/// timing as the default sensor.
SensorConfig suite_sensor();

/// Noise variance per raw sample that puts an on-grid return of amplitude
/// alpha at snr_db after windowed range/velocity/angle processing. The
/// budget keeps a straddle margin, so on-grid peaks come out a few dB hot.
double noise_power_for_snr(const SensorConfig& cfg, double alpha,
                           double snr_db);

/// Calibration anchor: each object's strongest bounce amplitude is probed
/// at a handful of times and the weakest probe wins, so a noise floor tied
/// to it makes the design SNR a floor over the whole sweep. Throws when no
/// bounce path exists at any probe.
double nominal_bounce_amplitude(const Scenario& scenario);

/// Clutter strength whose direct return at the given range stays at snr_db.
double clutter_rcs_for_snr(const SensorConfig& cfg, double noise_power,
                           double range, double snr_db);

/// The built-in scenario set: street-corner layouts where a walker or rider
/// starts hidden behind a building edge and emerges into direct view. Each
/// entry is self-checked at build time (valid scenario, object hidden at the
/// start, bounce coverage while hidden, direct view by the end).
std::vector<SuiteEntry> suite_scenarios();

nlohmann::ordered_json processing_to_json(const ProcessingConfig& p);
ProcessingConfig processing_from_json(const nlohmann::ordered_json& j,
                                      ProcessingConfig base = {});

/// Write one scenario file per entry (processing block included) plus an
/// index file, returning the scenario paths in suite order.
std::vector<std::filesystem::path> write_suite(
    const std::filesystem::path& dir);

}  // namespace nlos
