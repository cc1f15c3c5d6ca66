#include <algorithm>
#include <map>

#include "cdrag/error.hpp"
#include "cdrag/metrics/metrics.hpp"

namespace cdrag::metrics {

namespace {

const Trajectory* find_track(const std::vector<Trajectory>& tracks, const std::string& id) {
  for (const Trajectory& t : tracks) {
    if (t.object_id == id) return &t;
  }
  return nullptr;
}

struct Sum {
  double total = 0.0;
  std::size_t terms = 0;
};

// Distance sum of one matched track, prediction resampled to the truth length.
Sum track_sum(const EvalPair& pair, const std::pair<std::string, std::string>& match) {
  const Trajectory* pred = find_track(pair.predicted, match.first);
  const Trajectory* gt = find_track(pair.ground_truth, match.second);
  if (pred == nullptr || gt == nullptr) {
    throw Error(ErrorCode::InvalidArgument,
                "matching refers to unknown track " + match.first + "/" + match.second);
  }
  Sum s;
  if (gt->points.empty()) return s;
  const Trajectory aligned = resample_trajectory(*pred, gt->points.size());
  for (std::size_t k = 0; k < gt->points.size(); ++k) {
    s.total += distance(aligned.points[k], gt->points[k]);
  }
  s.terms = gt->points.size();
  return s;
}

std::string object_key(const EvalPair& pair, const std::string& gt_id) {
  return pair.video_id.empty() ? gt_id : pair.video_id + "/" + gt_id;
}

}  // namespace

MetricResult moc(std::span<const EvalPair> pairs) {
  MetricResult r;
  double total = 0.0;
  for (const EvalPair& pair : pairs) {
    for (const auto& match : pair.matching) {
      const Sum s = track_sum(pair, match);
      if (s.terms == 0) continue;
      total += s.total;
      r.n_terms += s.terms;
      r.per_object[object_key(pair, match.second)] = s.total / static_cast<double>(s.terms);
    }
  }
  if (r.n_terms == 0) throw Error(ErrorCode::UndefinedMetric, "no matched points to score");
  r.value = total / static_cast<double>(r.n_terms);
  return r;
}

MetricResult objmc(const EvalPair& pair, const std::string& controlled_id) {
  for (const auto& match : pair.matching) {
    if (match.second != controlled_id) continue;
    EvalPair one{pair.video_id, pair.predicted, pair.ground_truth, {match}};
    return moc(std::span<const EvalPair>(&one, 1));
  }
  throw Error(ErrorCode::NotFound, "controlled track " + controlled_id + " is not matched");
}

Json evaluate(std::span<const VideoTracks> predicted, std::span<const VideoTracks> ground_truth,
              MatchMode mode) {
  std::map<std::string, const VideoTracks*> pred_by_id;
  std::map<std::string, const VideoTracks*> gt_by_id;
  for (const VideoTracks& v : predicted) pred_by_id[v.video_id] = &v;
  for (const VideoTracks& v : ground_truth) gt_by_id[v.video_id] = &v;

  Json unmatched = Json::array();
  std::vector<EvalPair> pairs;
  std::vector<std::string> controlled;
  for (const auto& [id, pred] : pred_by_id) {
    const auto it = gt_by_id.find(id);
    if (it == gt_by_id.end()) {
      unmatched.push_back(Json{{"video_id", id}, {"side", "predicted"}, {"object_id", nullptr}});
      continue;
    }
    const VideoTracks* gt = it->second;
    EvalPair pair{id, pred->trajectories, gt->trajectories, {}};
    if (!pred->trajectories.empty() && !gt->trajectories.empty()) {
      const Matching m = match_objects(pred->trajectories, gt->trajectories, mode);
      pair.matching = m.pairs;
      for (const auto& o : m.unmatched_predicted) {
        unmatched.push_back(Json{{"video_id", id}, {"side", "predicted"}, {"object_id", o}});
      }
      for (const auto& o : m.unmatched_ground_truth) {
        unmatched.push_back(Json{{"video_id", id}, {"side", "ground_truth"}, {"object_id", o}});
      }
    }
    // Controlled track named by the truth, else the prediction's controlled id
    // carried through the matching.
    std::string ctrl = gt->controlled_id;
    if (ctrl.empty()) {
      for (const auto& [p, g] : pair.matching) {
        if (p == pred->controlled_id) ctrl = g;
      }
    }
    controlled.push_back(ctrl);
    pairs.push_back(std::move(pair));
  }
  for (const auto& [id, gt] : gt_by_id) {
    if (!pred_by_id.contains(id)) {
      unmatched.push_back(Json{{"video_id", id}, {"side", "ground_truth"}, {"object_id", nullptr}});
    }
  }
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "no video is present on both sides");

  const MetricResult all = moc(pairs);
  Json per_video = Json::array();
  double obj_total = 0.0;
  std::size_t obj_terms = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const EvalPair& pair = pairs[i];
    Json matching = Json::array();
    for (const auto& [p, g] : pair.matching) matching.push_back(Json::array({p, g}));
    Json row{{"video_id", pair.video_id}, {"matching", matching}};
    try {
      const MetricResult r = moc(std::span<const EvalPair>(&pair, 1));
      row["moc"] = r.value;
      row["n_terms"] = r.n_terms;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UndefinedMetric) throw;
      row["moc"] = nullptr;
      row["n_terms"] = 0;
    }
    row["objmc"] = nullptr;
    if (!controlled[i].empty()) {
      try {
        const MetricResult r = objmc(pair, controlled[i]);
        row["objmc"] = r.value;
        obj_total += r.value * static_cast<double>(r.n_terms);
        obj_terms += r.n_terms;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotFound && e.code() != ErrorCode::UndefinedMetric) throw;
      }
    }
    per_video.push_back(std::move(row));
  }

  Json out{{"moc", all.value},
           {"objmc", nullptr},
           {"n_terms", all.n_terms},
           {"per_video", per_video},
           {"unmatched", unmatched}};
  if (obj_terms > 0) out["objmc"] = obj_total / static_cast<double>(obj_terms);
  return out;
}

}  // namespace cdrag::metrics
