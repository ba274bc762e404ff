#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlos/detect.hpp"
#include "nlos/scene.hpp"

namespace nlos {

enum class Visibility { nlos, los };

const char* to_string(Visibility v);

struct GtBox {
  std::string object_id;
  OrientedBox box;
  Visibility visibility = Visibility::los;
};

struct FrameGroundTruth {
  std::size_t frame = 0;
  double timestamp = 0.0;
  std::vector<GtBox> boxes;
};

/// Ground truth for every frame of a scenario: one box per object with pose
/// from the trajectory and visibility from wall occlusion of the center.
std::vector<FrameGroundTruth> make_ground_truth(const Scenario& scenario);

void save_ground_truth(const std::string& path,
                       const std::vector<FrameGroundTruth>& frames);
std::vector<FrameGroundTruth> load_ground_truth(const std::string& path);

/// Intersection over union of two rotated rectangles (convex clipping, exact
/// areas). Zero-area boxes give 0.
double oriented_iou(const OrientedBox& a, const OrientedBox& b);

/// All-point-interpolated average precision on a 0..100 scale. Detections
/// are ranked by score; each claims the highest-IoU unmatched ground truth
/// of its frame at or above the threshold. Without a class filter the labels
/// are merged ("object" row). No ground truth yields 0.
double average_precision(const std::vector<BoxRecord>& detections,
                         const std::vector<FrameGroundTruth>& gts,
                         double iou_thresh,
                         std::optional<BoxClass> cls = std::nullopt);

struct LocalizationError {
  double mae = 0.0;  // m
  double mse = 0.0;  // m^2
  std::size_t matches = 0;
};

/// Mean absolute / squared center distance over explicit matched pairs
/// (prediction, ground truth). Throws on an empty set.
LocalizationError localization_error(
    std::span<const std::pair<Vec2, Vec2>> pairs);

/// Score-ranked matching at the IoU threshold, then center pairs.
std::vector<std::pair<Vec2, Vec2>> matched_center_pairs(
    const std::vector<BoxRecord>& detections,
    const std::vector<FrameGroundTruth>& gts, double iou_thresh = 0.1);

struct MotParams {
  double iou_threshold = 0.1;  // match gate
  bool distance_motp = false;  // report MOTP as mean center distance instead
};

struct MotResult {
  double mota = 0.0;
  double motp = 0.0;
  std::size_t gt_count = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t id_switches = 0;
  std::size_t matches = 0;
};

/// CLEAR-MOT accumulation over frame-aligned track records and ground truth.
/// Existing gt-to-track correspondences are kept while they still overlap;
/// the rest are matched greedily by IoU. MOTA = 1 - (FN+FP+IDSW)/GT, MOTP is
/// the mean matched IoU (or distance under the flag).
MotResult clear_mot(const std::vector<BoxRecord>& tracks,
                    const std::vector<FrameGroundTruth>& gts,
                    const MotParams& params = {});

struct MotSplit {
  MotResult all, nlos, los;
};

/// Same accumulation with per-frame attribution: a frame counts as NLOS when
/// any of its ground-truth boxes is occluded, as LOS otherwise (frames
/// without ground truth land in the LOS bucket). The id-switch bookkeeping
/// spans the whole sequence.
MotSplit clear_mot_split(const std::vector<BoxRecord>& tracks,
                         const std::vector<FrameGroundTruth>& gts,
                         const MotParams& params = {});

struct MetricsParams {
  std::vector<double> ap_thresholds{0.5, 0.25, 0.1};
  double loc_iou = 0.1;
  MotParams mot;
  std::string label = "tracking";
};

struct SplitScalars {
  LocalizationError det_loc;  // from detections
  LocalizationError trk_loc;  // from track records
  MotResult mot;
};

struct MetricsReport {
  std::string label;
  std::vector<double> ap_thresholds;
  // Class rows: "object" (merged), then per class; one AP per threshold.
  std::vector<std::pair<std::string, std::vector<double>>> ap;
  SplitScalars all, nlos, los;
  std::size_t frames = 0;
  std::size_t nlos_frames = 0;
  std::size_t los_frames = 0;
};

MetricsReport compute_metrics(const std::vector<BoxRecord>& detections,
                              const std::vector<BoxRecord>& tracks,
                              const std::vector<FrameGroundTruth>& gts,
                              const MetricsParams& params = {});

std::string metrics_to_json(const MetricsReport& report);
/// Human-readable tables; split_rows=false keeps only the "all" row of the
/// localization and tracking table.
std::string metrics_to_markdown(const MetricsReport& report,
                                bool split_rows = true);
MetricsReport metrics_from_json(const std::string& text);

}  // namespace nlos
