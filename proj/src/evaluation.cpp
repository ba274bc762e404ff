#include "nlos/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nlos/io_util.hpp"
#include <json.hpp>

namespace nlos {

using Json = nlohmann::ordered_json;

const char* to_string(Visibility v) {
  return v == Visibility::nlos ? "nlos" : "los";
}

std::vector<FrameGroundTruth> make_ground_truth(const Scenario& scenario) {
  std::vector<FrameGroundTruth> out;
  out.reserve(static_cast<std::size_t>(std::max(0, scenario.frames.count)));
  const Vec2 sensor = scenario.sensor_pose.position;
  for (int k = 0; k < scenario.frames.count; ++k) {
    FrameGroundTruth fgt;
    fgt.frame = static_cast<std::size_t>(k);
    fgt.timestamp = scenario.frames.time_of(k);
    for (const HiddenObject& obj : scenario.objects) {
      const State2D st = obj.trajectory.state_at(fgt.timestamp);
      if ((st.position - sensor).norm() > scenario.sensor.max_range) continue;
      GtBox g;
      g.object_id = obj.id;
      g.box.center = st.position;
      g.box.width = obj.width;
      g.box.length = obj.length;
      g.box.yaw = wrap_half_pi(obj.trajectory.heading_at(fgt.timestamp));
      g.box.velocity = st.velocity.norm();
      g.box.velocity_vector = st.velocity;
      g.box.velocity_measured = true;
      g.box.cls = obj.object_class == ObjectClass::cyclist ? BoxClass::cyclist
                                                           : BoxClass::pedestrian;
      g.box.score = 1.0;
      g.visibility = line_of_sight_blocked(sensor, st.position, scenario.walls)
                         ? Visibility::nlos
                         : Visibility::los;
      fgt.boxes.push_back(g);
    }
    out.push_back(fgt);
  }
  return out;
}

void save_ground_truth(const std::string& path,
                       const std::vector<FrameGroundTruth>& frames) {
  std::string out;
  Json head;
  head["format"] = "nlos_ground_truth";
  head["version"] = 1;
  head["frames"] = frames.size();
  out += head.dump();
  out += '\n';
  for (const FrameGroundTruth& f : frames) {
    Json j;
    j["frame"] = f.frame;
    j["timestamp"] = f.timestamp;
    Json boxes = Json::array();
    for (const GtBox& g : f.boxes) {
      Json b;
      b["id"] = g.object_id;
      b["class"] = to_string(g.box.cls);
      b["x"] = g.box.center.x();
      b["y"] = g.box.center.y();
      b["w"] = g.box.width;
      b["l"] = g.box.length;
      b["theta"] = g.box.yaw;
      b["v"] = g.box.velocity;
      b["vx"] = g.box.velocity_vector.x();
      b["vy"] = g.box.velocity_vector.y();
      b["visibility"] = to_string(g.visibility);
      boxes.push_back(std::move(b));
    }
    j["boxes"] = std::move(boxes);
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<FrameGroundTruth> load_ground_truth(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty ground truth");
  Json head = Json::parse(line);
  if (head.value("format", "") != "nlos_ground_truth")
    throw std::runtime_error(path + ": not a ground truth file");
  const std::size_t count = head.at("frames").get<std::size_t>();
  std::vector<FrameGroundTruth> frames;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    FrameGroundTruth f;
    f.frame = j.at("frame").get<std::size_t>();
    f.timestamp = j.at("timestamp").get<double>();
    for (const Json& b : j.at("boxes")) {
      GtBox g;
      g.object_id = b.at("id").get<std::string>();
      g.box.cls = box_class_from_string(b.at("class").get<std::string>());
      g.box.center = Vec2(b.at("x").get<double>(), b.at("y").get<double>());
      g.box.width = b.at("w").get<double>();
      g.box.length = b.at("l").get<double>();
      g.box.yaw = b.at("theta").get<double>();
      g.box.velocity = b.at("v").get<double>();
      g.box.velocity_vector = Vec2(b.value("vx", 0.0), b.value("vy", 0.0));
      g.box.velocity_measured = true;
      const std::string vis = b.at("visibility").get<std::string>();
      g.visibility = vis == "nlos" ? Visibility::nlos : Visibility::los;
      f.boxes.push_back(std::move(g));
    }
    frames.push_back(std::move(f));
  }
  if (frames.size() != count)
    throw std::runtime_error(path + ": frame count does not match header");
  return frames;
}

namespace {

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += cross2(p, q);
  }
  return 0.5 * a;
}

// Clip a convex polygon by the half plane left of (a -> b).
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, const Vec2& a,
                                  const Vec2& b) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double dp = cross2(b - a, p - a);
    const double dq = cross2(b - a, q - a);
    if (dp >= 0.0) out.push_back(p);
    if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

std::vector<Vec2> ccw_corners(const OrientedBox& box) {
  const auto c = box.corners();
  std::vector<Vec2> poly(c.begin(), c.end());
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

}  // namespace

double oriented_iou(const OrientedBox& a, const OrientedBox& b) {
  const double area_a = a.area(), area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  std::vector<Vec2> poly = ccw_corners(a);
  const std::vector<Vec2> clip = ccw_corners(b);
  for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i)
    poly = clip_half_plane(poly, clip[i], clip[(i + 1) % clip.size()]);
  if (poly.size() < 3) return 0.0;
  const double inter = std::abs(polygon_area(poly));
  return inter / (area_a + area_b - inter);
}

namespace {

struct RankedDet {
  double score;
  std::size_t frame;
  const OrientedBox* box;
  std::size_t order;  // original position, tie breaker
};

std::vector<RankedDet> ranked_detections(const std::vector<BoxRecord>& dets,
                                         std::optional<BoxClass> cls) {
  std::vector<RankedDet> out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (cls && dets[i].box.cls != *cls) continue;
    out.push_back({dets[i].box.score, dets[i].frame, &dets[i].box, i});
  }
  std::sort(out.begin(), out.end(), [](const RankedDet& a, const RankedDet& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.order < b.order;
  });
  return out;
}

}  // namespace

double average_precision(const std::vector<BoxRecord>& detections,
                         const std::vector<FrameGroundTruth>& gts,
                         double iou_thresh, std::optional<BoxClass> cls) {
  // Ground truth boxes per frame, filtered by class.
  std::map<std::size_t, std::vector<const OrientedBox*>> gt_by_frame;
  std::size_t total_gt = 0;
  for (const FrameGroundTruth& f : gts)
    for (const GtBox& g : f.boxes) {
      if (cls && g.box.cls != *cls) continue;
      gt_by_frame[f.frame].push_back(&g.box);
      ++total_gt;
    }
  if (total_gt == 0) return 0.0;

  const auto ranked = ranked_detections(detections, cls);
  std::map<std::size_t, std::vector<char>> used;
  for (auto& [frame, boxes] : gt_by_frame) used[frame].assign(boxes.size(), 0);

  std::vector<char> is_tp;
  is_tp.reserve(ranked.size());
  for (const RankedDet& d : ranked) {
    const auto it = gt_by_frame.find(d.frame);
    char tp = 0;
    if (it != gt_by_frame.end()) {
      double best = iou_thresh;
      std::size_t best_idx = it->second.size();
      for (std::size_t gi = 0; gi < it->second.size(); ++gi) {
        if (used[d.frame][gi]) continue;
        const double iou = oriented_iou(*d.box, *it->second[gi]);
        if (iou >= best) {
          best = iou;
          best_idx = gi;
        }
      }
      if (best_idx < it->second.size()) {
        used[d.frame][best_idx] = 1;
        tp = 1;
      }
    }
    is_tp.push_back(tp);
  }

  // Precision-recall points, then the all-point (envelope) area.
  std::vector<double> precision, recall;
  std::size_t tp_cum = 0;
  for (std::size_t i = 0; i < is_tp.size(); ++i) {
    if (is_tp[i]) ++tp_cum;
    precision.push_back(static_cast<double>(tp_cum) / static_cast<double>(i + 1));
    recall.push_back(static_cast<double>(tp_cum) / static_cast<double>(total_gt));
  }
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return 100.0 * ap;
}

LocalizationError localization_error(std::span<const std::pair<Vec2, Vec2>> pairs) {
  if (pairs.empty())
    throw std::invalid_argument("localization_error: empty match set");
  LocalizationError e;
  for (const auto& [pred, gt] : pairs) {
    const double d = (pred - gt).norm();
    e.mae += d;
    e.mse += d * d;
  }
  const auto n = static_cast<double>(pairs.size());
  e.mae /= n;
  e.mse /= n;
  e.matches = pairs.size();
  return e;
}

std::vector<std::pair<Vec2, Vec2>> matched_center_pairs(
    const std::vector<BoxRecord>& detections,
    const std::vector<FrameGroundTruth>& gts, double iou_thresh) {
  std::map<std::size_t, std::vector<const OrientedBox*>> gt_by_frame;
  for (const FrameGroundTruth& f : gts)
    for (const GtBox& g : f.boxes) gt_by_frame[f.frame].push_back(&g.box);

  std::map<std::size_t, std::vector<char>> used;
  for (auto& [frame, boxes] : gt_by_frame) used[frame].assign(boxes.size(), 0);

  std::vector<std::pair<Vec2, Vec2>> pairs;
  for (const RankedDet& d : ranked_detections(detections, std::nullopt)) {
    const auto it = gt_by_frame.find(d.frame);
    if (it == gt_by_frame.end()) continue;
    double best = iou_thresh;
    std::size_t best_idx = it->second.size();
    for (std::size_t gi = 0; gi < it->second.size(); ++gi) {
      if (used[d.frame][gi]) continue;
      const double iou = oriented_iou(*d.box, *it->second[gi]);
      if (iou >= best) {
        best = iou;
        best_idx = gi;
      }
    }
    if (best_idx < it->second.size()) {
      used[d.frame][best_idx] = 1;
      pairs.emplace_back(d.box->center, it->second[best_idx]->center);
    }
  }
  return pairs;
}

namespace {

Visibility frame_bucket(const FrameGroundTruth& f) {
  for (const GtBox& g : f.boxes)
    if (g.visibility == Visibility::nlos) return Visibility::nlos;
  return Visibility::los;
}

struct MotAccum {
  std::size_t gt = 0, fn = 0, fp = 0, idsw = 0, matches = 0;
  double overlap_sum = 0.0;

  void finish(MotResult& r, bool distance_motp) const {
    r.gt_count = gt;
    r.fn = fn;
    r.fp = fp;
    r.id_switches = idsw;
    r.matches = matches;
    r.mota = 1.0 - static_cast<double>(fn + fp + idsw) /
                       static_cast<double>(std::max<std::size_t>(1, gt));
    r.motp = matches > 0 ? overlap_sum / static_cast<double>(matches) : 0.0;
    (void)distance_motp;
  }
};

}  // namespace

MotSplit clear_mot_split(const std::vector<BoxRecord>& tracks,
                         const std::vector<FrameGroundTruth>& gts,
                         const MotParams& params) {
  // Track records per frame.
  std::map<std::size_t, std::vector<const BoxRecord*>> trk_by_frame;
  for (const BoxRecord& r : tracks) trk_by_frame[r.frame].push_back(&r);

  std::map<std::string, int> last_track_of_gt;  // correspondence carried over
  MotAccum acc_all, acc_nlos, acc_los;

  std::vector<const FrameGroundTruth*> frames;
  for (const FrameGroundTruth& f : gts) frames.push_back(&f);
  std::sort(frames.begin(), frames.end(),
            [](const FrameGroundTruth* a, const FrameGroundTruth* b) {
              return a->frame < b->frame;
            });

  for (const FrameGroundTruth* f : frames) {
    const auto it = trk_by_frame.find(f->frame);
    static const std::vector<const BoxRecord*> none;
    const std::vector<const BoxRecord*>& trks = it != trk_by_frame.end() ? it->second : none;

    const std::size_t ng = f->boxes.size(), nt = trks.size();
    std::vector<int> gt_match(ng, -1);   // index into trks
    std::vector<char> trk_used(nt, 0);

    auto pair_score = [&](std::size_t gi, std::size_t ti) {
      return oriented_iou(f->boxes[gi].box, trks[ti]->box);
    };

    // Keep correspondences from the previous frames while they still hold.
    for (std::size_t gi = 0; gi < ng; ++gi) {
      const auto prev = last_track_of_gt.find(f->boxes[gi].object_id);
      if (prev == last_track_of_gt.end()) continue;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        if (trk_used[ti] || trks[ti]->id != prev->second) continue;
        if (pair_score(gi, ti) >= params.iou_threshold) {
          gt_match[gi] = static_cast<int>(ti);
          trk_used[ti] = 1;
        }
        break;
      }
    }

    // Remaining pairs greedily by best overlap; deterministic tie break.
    struct Cand {
      double iou;
      std::size_t gi, ti;
    };
    std::vector<Cand> cands;
    for (std::size_t gi = 0; gi < ng; ++gi) {
      if (gt_match[gi] >= 0) continue;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        if (trk_used[ti]) continue;
        const double iou = pair_score(gi, ti);
        if (iou >= params.iou_threshold) cands.push_back({iou, gi, ti});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.gi != b.gi) return a.gi < b.gi;
      return a.ti < b.ti;
    });
    std::size_t frame_idsw = 0;
    for (const Cand& c : cands) {
      if (gt_match[c.gi] >= 0 || trk_used[c.ti]) continue;
      gt_match[c.gi] = static_cast<int>(c.ti);
      trk_used[c.ti] = 1;
      const auto prev = last_track_of_gt.find(f->boxes[c.gi].object_id);
      if (prev != last_track_of_gt.end() && prev->second != trks[c.ti]->id) ++frame_idsw;
    }

    std::size_t frame_matches = 0, frame_fn = 0;
    double frame_overlap = 0.0;
    for (std::size_t gi = 0; gi < ng; ++gi) {
      if (gt_match[gi] < 0) {
        ++frame_fn;
        continue;
      }
      ++frame_matches;
      const auto ti = static_cast<std::size_t>(gt_match[gi]);
      frame_overlap += params.distance_motp
                           ? (f->boxes[gi].box.center - trks[ti]->box.center).norm()
                           : pair_score(gi, ti);
      last_track_of_gt[f->boxes[gi].object_id] = trks[ti]->id;
    }
    const std::size_t frame_fp = nt - frame_matches;

    MotAccum* bucket = frame_bucket(*f) == Visibility::nlos ? &acc_nlos : &acc_los;
    for (MotAccum* a : {&acc_all, bucket}) {
      a->gt += ng;
      a->fn += frame_fn;
      a->fp += frame_fp;
      a->idsw += frame_idsw;
      a->matches += frame_matches;
      a->overlap_sum += frame_overlap;
    }
  }

  MotSplit split;
  acc_all.finish(split.all, params.distance_motp);
  acc_nlos.finish(split.nlos, params.distance_motp);
  acc_los.finish(split.los, params.distance_motp);
  return split;
}

MotResult clear_mot(const std::vector<BoxRecord>& tracks,
                    const std::vector<FrameGroundTruth>& gts,
                    const MotParams& params) {
  return clear_mot_split(tracks, gts, params).all;
}

MetricsReport compute_metrics(const std::vector<BoxRecord>& detections,
                              const std::vector<BoxRecord>& tracks,
                              const std::vector<FrameGroundTruth>& gts,
                              const MetricsParams& params) {
  MetricsReport rep;
  rep.label = params.label;
  rep.ap_thresholds = params.ap_thresholds;
  rep.frames = gts.size();
  for (const FrameGroundTruth& f : gts)
    (frame_bucket(f) == Visibility::nlos ? rep.nlos_frames : rep.los_frames) += 1;

  const std::vector<std::pair<std::string, std::optional<BoxClass>>> rows{
      {"object", std::nullopt},
      {"cyclist", BoxClass::cyclist},
      {"pedestrian", BoxClass::pedestrian},
  };
  for (const auto& [name, cls] : rows) {
    std::vector<double> values;
    for (double thr : params.ap_thresholds)
      values.push_back(average_precision(detections, gts, thr, cls));
    rep.ap.emplace_back(name, std::move(values));
  }

  // Per-visibility localization: split frames, then match inside each split.
  const auto loc_for = [&](const std::vector<BoxRecord>& records,
                           const std::vector<FrameGroundTruth>& frames) {
    const auto pairs = matched_center_pairs(records, frames, params.loc_iou);
    LocalizationError e;
    if (!pairs.empty()) e = localization_error(pairs);
    return e;
  };
  std::vector<FrameGroundTruth> nlos_frames, los_frames;
  for (const FrameGroundTruth& f : gts)
    (frame_bucket(f) == Visibility::nlos ? nlos_frames : los_frames).push_back(f);

  rep.all.det_loc = loc_for(detections, gts);
  rep.all.trk_loc = loc_for(tracks, gts);
  rep.nlos.det_loc = loc_for(detections, nlos_frames);
  rep.nlos.trk_loc = loc_for(tracks, nlos_frames);
  rep.los.det_loc = loc_for(detections, los_frames);
  rep.los.trk_loc = loc_for(tracks, los_frames);

  const MotSplit mot = clear_mot_split(tracks, gts, params.mot);
  rep.all.mot = mot.all;
  rep.nlos.mot = mot.nlos;
  rep.los.mot = mot.los;
  return rep;
}

namespace {

Json mot_to_json(const MotResult& m) {
  Json j;
  j["mota"] = m.mota;
  j["motp"] = m.motp;
  j["gt"] = m.gt_count;
  j["fn"] = m.fn;
  j["fp"] = m.fp;
  j["id_switches"] = m.id_switches;
  j["matches"] = m.matches;
  return j;
}

MotResult mot_from_json(const Json& j) {
  MotResult m;
  m.mota = j.at("mota").get<double>();
  m.motp = j.at("motp").get<double>();
  m.gt_count = j.at("gt").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.id_switches = j.at("id_switches").get<std::size_t>();
  m.matches = j.at("matches").get<std::size_t>();
  return m;
}

Json loc_to_json(const LocalizationError& e) {
  Json j;
  j["mae"] = e.mae;
  j["mse"] = e.mse;
  j["matches"] = e.matches;
  return j;
}

LocalizationError loc_from_json(const Json& j) {
  LocalizationError e;
  e.mae = j.at("mae").get<double>();
  e.mse = j.at("mse").get<double>();
  e.matches = j.at("matches").get<std::size_t>();
  return e;
}

Json split_to_json(const SplitScalars& s) {
  Json j;
  j["detection_localization"] = loc_to_json(s.det_loc);
  j["tracking_localization"] = loc_to_json(s.trk_loc);
  j["mot"] = mot_to_json(s.mot);
  return j;
}

SplitScalars split_from_json(const Json& j) {
  SplitScalars s;
  s.det_loc = loc_from_json(j.at("detection_localization"));
  s.trk_loc = loc_from_json(j.at("tracking_localization"));
  s.mot = mot_from_json(j.at("mot"));
  return s;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report) {
  Json j;
  j["format"] = "nlos_metrics";
  j["version"] = 1;
  j["label"] = report.label;
  j["frames"] = report.frames;
  j["nlos_frames"] = report.nlos_frames;
  j["los_frames"] = report.los_frames;
  j["ap_thresholds"] = report.ap_thresholds;
  Json ap = Json::object();
  for (const auto& [name, values] : report.ap) ap[name] = values;
  j["ap"] = std::move(ap);
  j["all"] = split_to_json(report.all);
  j["nlos"] = split_to_json(report.nlos);
  j["los"] = split_to_json(report.los);
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
  const Json j = Json::parse(text);
  if (j.value("format", "") != "nlos_metrics")
    throw std::runtime_error("not a metrics report");
  MetricsReport rep;
  rep.label = j.at("label").get<std::string>();
  rep.frames = j.at("frames").get<std::size_t>();
  rep.nlos_frames = j.at("nlos_frames").get<std::size_t>();
  rep.los_frames = j.at("los_frames").get<std::size_t>();
  rep.ap_thresholds = j.at("ap_thresholds").get<std::vector<double>>();
  for (const auto& [name, values] : j.at("ap").items())
    rep.ap.emplace_back(name, values.get<std::vector<double>>());
  rep.all = split_from_json(j.at("all"));
  rep.nlos = split_from_json(j.at("nlos"));
  rep.los = split_from_json(j.at("los"));
  return rep;
}

std::string metrics_to_markdown(const MetricsReport& report, bool split_rows) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "## Detection (" << report.label << ")\n\n";
  out << "| Class |";
  for (double t : report.ap_thresholds) out << " AP@" << t << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < report.ap_thresholds.size(); ++i) out << "---|";
  out << "\n";
  for (const auto& [name, values] : report.ap) {
    out << "| " << name << " |";
    for (double v : values) out << " " << v << " |";
    out << "\n";
  }
  out << "\n## Localization and tracking (" << report.label << ")\n\n";
  out << "| Split | Frames | Det MAE (m) | Det MSE (m2) | Trk MAE (m) | Trk MSE (m2) "
         "| MOTA | MOTP |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  const auto row = [&](const char* name, std::size_t frames, const SplitScalars& s) {
    out << "| " << name << " | " << frames << " | " << s.det_loc.mae << " | "
        << s.det_loc.mse << " | " << s.trk_loc.mae << " | " << s.trk_loc.mse << " | "
        << s.mot.mota << " | " << s.mot.motp << " |\n";
  };
  row("all", report.frames, report.all);
  if (split_rows) {
    row("nlos", report.nlos_frames, report.nlos);
    row("los", report.los_frames, report.los);
  }
  return out.str();
}

}  // namespace nlos
