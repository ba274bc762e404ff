#include "nlos/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace nlos {
namespace {

std::vector<double> hann_window(int n, bool enabled) {
  std::vector<double> w(n, 1.0);
  if (!enabled) return w;
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n));
  return w;
}

/// Three-point parabolic vertex on log power. Returns the sub-bin offset in
/// [-0.5, 0.5] and fills the refined peak power.
double log_parabola_offset(double pm, double p0, double pp, double& refined) {
  refined = p0;
  if (pm <= 0.0 || pp <= 0.0 || p0 <= 0.0) return 0.0;
  const double lm = std::log(pm), l0 = std::log(p0), lp = std::log(pp);
  const double den = lm - 2.0 * l0 + lp;
  if (den >= -1e-12) return 0.0;
  double delta = 0.5 * (lm - lp) / den;
  delta = std::clamp(delta, -0.5, 0.5);
  refined = std::exp(l0 - 0.125 * (lm - lp) * (lm - lp) / den);
  return delta;
}

}  // namespace

RadarCube transform(const RawFrame& frame, const SensorConfig& config,
                    const DspParams& params) {
  const int M = frame.num_antennas, N = frame.num_chirps, S = frame.num_samples;
  if (M != config.num_rx_antennas || N != config.num_chirps ||
      S != config.num_samples_per_chirp)
    throw std::invalid_argument("transform: frame shape does not match the sensor config");
  const int R = S, V = N, A = config.angle_bins;

  RadarCube cube;
  cube.range_bins = R;
  cube.angle_bins = A;
  cube.velocity_bins = V;
  cube.range_scale = kSpeedOfLight / (2.0 * config.bandwidth);
  cube.velocity_scale = config.wavelength() / (2.0 * N * config.chirp_period);
  cube.angle_sin_scale = config.wavelength() / (config.antenna_spacing * A);
  cube.max_range = config.max_range;
  cube.fov_azimuth = config.fov_azimuth;
  cube.timestamp = frame.timestamp;

  const auto w_fast = hann_window(S, params.window_fast_time);
  const auto w_slow = hann_window(N, params.window_slow_time);
  const auto w_ant = hann_window(M, params.window_angle);

  Eigen::FFT<double> fft;
  const std::size_t rv = static_cast<std::size_t>(R) * V;
  Eigen::MatrixXcf ant_mat(M, rv);  // per-antenna range-velocity spectra
  Eigen::VectorXf rv_power = Eigen::VectorXf::Zero(rv);

  std::vector<std::complex<double>> in(S), out(S);
  std::vector<std::complex<double>> fast(static_cast<std::size_t>(R) * N);
  std::vector<std::complex<double>> chirp_in(N), chirp_out(N);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < N; ++k) {
      const std::complex<double>* row = &frame.at(m, k, 0);
      for (int s = 0; s < S; ++s) in[s] = row[s] * w_fast[s];
      fft.fwd(out, in);
      for (int r = 0; r < R; ++r) fast[static_cast<std::size_t>(r) * N + k] = out[r];
    }
    for (int r = 0; r < R; ++r) {
      const std::complex<double>* row = &fast[static_cast<std::size_t>(r) * N];
      for (int k = 0; k < N; ++k) chirp_in[k] = row[k] * w_slow[k];
      fft.fwd(chirp_out, chirp_in);
      for (int b = 0; b < N; ++b) {
        const int shifted = (b + N / 2) % N;  // index 0 = most negative velocity
        const std::size_t col = static_cast<std::size_t>(r) * V + shifted;
        const std::complex<float> value(static_cast<float>(chirp_out[b].real()),
                                        static_cast<float>(chirp_out[b].imag()));
        ant_mat(m, col) = value;
        rv_power[col] += std::norm(value);
      }
    }
  }

  // Angle spectra: only above the energy floor when one is configured.
  std::vector<std::size_t> active;
  if (params.angle_floor_median_factor > 0.0) {
    std::vector<float> sorted(rv_power.data(), rv_power.data() + rv);
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    cube.power_floor = params.angle_floor_median_factor * sorted[sorted.size() / 2];
    for (std::size_t c = 0; c < rv; ++c)
      if (rv_power[c] >= cube.power_floor) active.push_back(c);
  } else {
    active.resize(rv);
    for (std::size_t c = 0; c < rv; ++c) active[c] = c;
  }

  Eigen::MatrixXcf steering(A, M);
  for (int a = 0; a < A; ++a) {
    for (int m = 0; m < M; ++m) {
      const double ph = -2.0 * std::numbers::pi * m * (a - A / 2) / A;
      steering(a, m) = std::complex<float>(static_cast<float>(w_ant[m] * std::cos(ph)),
                                           static_cast<float>(w_ant[m] * std::sin(ph)));
    }
  }

  cube.power.assign(static_cast<std::size_t>(R) * A * V, 0.0f);
  float best = -1.0f;
  const std::size_t slice = static_cast<std::size_t>(V) * R;
  const int chunk = 2048;
  Eigen::MatrixXcf sub(M, chunk), spec(A, chunk);
  for (std::size_t begin = 0; begin < active.size(); begin += chunk) {
    const int bc = static_cast<int>(std::min<std::size_t>(chunk, active.size() - begin));
    for (int jc = 0; jc < bc; ++jc) sub.col(jc) = ant_mat.col(active[begin + jc]);
    spec.leftCols(bc).noalias() = steering * sub.leftCols(bc);
    for (int jc = 0; jc < bc; ++jc) {
      const std::size_t col = active[begin + jc];
      const std::size_t r = col / V, v = col % V;
      const std::size_t base = v * R + r;
      for (int a = 0; a < A; ++a) {
        const float p = std::norm(spec(a, jc));
        const std::size_t idx = static_cast<std::size_t>(a) * slice + base;
        cube.power[idx] = p;
        if (p > best) {
          best = p;
          cube.peak_index = idx;
        }
      }
    }
  }
  return cube;
}

double os_cfar_scale(double pfa, int n, int k) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("os_cfar_scale: pfa in (0,1)");
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("os_cfar_scale: need 1 <= k <= n");
  // P_fa(alpha) = prod_{i=0}^{k-1} (n - i) / (n - i + alpha), monotone
  // decreasing in alpha; bisect.
  auto prob = [&](double alpha) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= (n - i) / (n - i + alpha);
    return p;
  };
  double lo = 0.0, hi = 1.0;
  while (prob(hi) > pfa) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (prob(mid) > pfa ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RadarPoint refine_cube_peak(const RadarCube& cube, int r, int a, int v) {
  const int R = cube.range_bins, A = cube.angle_bins, V = cube.velocity_bins;
  const float p0 = cube.at(r, a, v);
  double refined_r = p0, refined_dummy = 0.0;

  const double pm_r = r > 0 ? cube.at(r - 1, a, v) : 0.0;
  const double pp_r = r + 1 < R ? cube.at(r + 1, a, v) : 0.0;
  const double dr = log_parabola_offset(pm_r, p0, pp_r, refined_r);

  const double pm_a = a > 0 ? cube.at(r, a - 1, v) : 0.0;
  const double pp_a = a + 1 < A ? cube.at(r, a + 1, v) : 0.0;
  const double da = log_parabola_offset(pm_a, p0, pp_a, refined_dummy);

  const double pm_v = cube.at(r, a, (v + V - 1) % V);
  const double pp_v = cube.at(r, a, (v + 1) % V);
  const double dv = log_parabola_offset(pm_v, p0, pp_v, refined_dummy);

  RadarPoint pt;
  pt.range = cube.range_of(r + dr);
  const double sin_az = std::clamp(cube.sin_azimuth_of(a + da), -1.0, 1.0);
  pt.azimuth = std::asin(sin_az);
  const double v_max = 0.5 * V * cube.velocity_scale;
  pt.radial_velocity = std::clamp(cube.velocity_of(v + dv), -v_max, v_max);
  pt.amplitude = refined_r;
  pt.log_amplitude = refined_r > 0.0 ? std::log(refined_r) : 0.0;
  return pt;
}

PointCloud cfar_detect(const RadarCube& cube, const DspParams& params) {
  const CfarParams& cp = params.cfar;
  if (cp.guard < 0 || cp.window <= cp.guard)
    throw std::invalid_argument("cfar: need window > guard >= 0");
  if (!(cp.order_fraction > 0.0 && cp.order_fraction <= 1.0))
    throw std::invalid_argument("cfar: order_fraction in (0, 1]");
  const int R = cube.range_bins, A = cube.angle_bins, V = cube.velocity_bins;
  if (R <= 0 || A <= 0 || V <= 0) throw std::invalid_argument("cfar: empty cube");

  // Threshold scale per achievable training-cell count (edges may gather
  // fewer than the full window).
  std::vector<double> scale(cp.window + 1, 0.0);
  std::vector<int> rank(cp.window + 1, 0);
  for (int n = 1; n <= cp.window; ++n) {
    const int k = std::clamp(static_cast<int>(std::lround(cp.order_fraction * n)), 1, n);
    rank[n] = k;
    scale[n] = os_cfar_scale(cp.pfa, n, k);
  }

  PointCloud out;
  out.timestamp = cube.timestamp;
  std::vector<float> training(cp.window);
  struct Hit {
    std::size_t idx;
    RadarPoint point;
  };
  std::vector<Hit> hits;

  const std::size_t slice_stride = static_cast<std::size_t>(V) * R;
  for (int a = 0; a < A; ++a) {
    for (int v = 0; v < V; ++v) {
      const float* slice = &cube.power[(static_cast<std::size_t>(a) * V + v) * R];
      const float* slice_am = a > 0 ? slice - slice_stride : nullptr;
      const float* slice_ap = a + 1 < A ? slice + slice_stride : nullptr;
      const float* slice_vm = &cube.power[(static_cast<std::size_t>(a) * V + (v + V - 1) % V) * R];
      const float* slice_vp = &cube.power[(static_cast<std::size_t>(a) * V + (v + 1) % V) * R];

      for (int r = 0; r < R; ++r) {
        const float p0 = slice[r];
        if (p0 <= 0.0f) continue;
        // Local maximum over the six cube neighbours.
        if (r > 0 && slice[r - 1] >= p0) continue;
        if (r + 1 < R && slice[r + 1] >= p0) continue;
        if (slice_am && slice_am[r] >= p0) continue;
        if (slice_ap && slice_ap[r] >= p0) continue;
        if (slice_vm != slice && slice_vm[r] >= p0) continue;
        if (slice_vp != slice && slice_vp[r] >= p0) continue;

        // Gather the nearest training cells outside the guard band, walking
        // outward on both sides and clamping at the slice edges.
        int count = 0;
        int lo = r - cp.guard - 1, hi = r + cp.guard + 1;
        while (count < cp.window && (lo >= 0 || hi < R)) {
          if (lo >= 0) training[count++] = slice[lo--];
          if (count < cp.window && hi < R) training[count++] = slice[hi++];
        }
        if (count == 0) continue;
        const int k = rank[count];
        std::nth_element(training.begin(), training.begin() + (k - 1),
                         training.begin() + count);
        const double stat = std::max<double>(training[k - 1], cube.power_floor);
        if (p0 <= scale[count] * stat) continue;

        RadarPoint pt = refine_cube_peak(cube, r, a, v);
        if (!(pt.range > 0.0) || pt.range > cube.max_range) continue;
        if (std::abs(pt.azimuth) > 0.5 * cube.fov_azimuth) continue;
        if (params.suppress_static &&
            std::abs(pt.radial_velocity) < cube.velocity_scale)
          continue;
        hits.push_back({cube.index(r, a, v), pt});
      }
    }
  }

  if (cp.sidelobe_rejection_db > 0.0) {
    const double keep = std::pow(10.0, -cp.sidelobe_rejection_db / 10.0);
    std::unordered_map<std::size_t, float> cell_max;
    for (const Hit& h : hits) {
      auto [it, fresh] = cell_max.try_emplace(h.idx % slice_stride, 0.0f);
      it->second = std::max(it->second, cube.power[h.idx]);
    }
    std::erase_if(hits, [&](const Hit& h) {
      return cube.power[h.idx] <
             static_cast<float>(keep * cell_max[h.idx % slice_stride]);
    });
  }

  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
    if (x.point.amplitude != y.point.amplitude)
      return x.point.amplitude > y.point.amplitude;
    return x.idx < y.idx;
  });
  if (static_cast<int>(hits.size()) > cp.max_points) hits.resize(cp.max_points);
  out.points.reserve(hits.size());
  for (const Hit& h : hits) out.points.push_back(h.point);
  return out;
}

Vec2 to_cartesian(const RadarPoint& point, const Pose2D& sensor_pose) {
  return sensor_pose.to_world(point.range * unit_vector(point.azimuth));
}

}  // namespace nlos
