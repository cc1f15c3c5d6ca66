#include "cdrag/cot/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <optional>

#include "cdrag/error.hpp"

namespace cdrag::cot {

namespace {

Json object_json(const SceneObject& o) {
  return Json{{"id", o.id}, {"category", o.category}, {"bbox", o.bbox},
              {"mass", o.mass}, {"mobile", o.mobile}};
}

Json inventory_json(const ObjectInventory& inv) {
  Json others = Json::array();
  for (const SceneObject& o : inv.others) others.push_back(object_json(o));
  return Json{{"controlled", object_json(inv.controlled)}, {"others", others}};
}

Scene with_inventory(Scene scene, const ObjectInventory& inv) {
  scene.objects = inv.all();
  return scene;
}

}  // namespace

std::vector<const StageRecord*> StageTrace::find(std::string_view stage) const {
  std::vector<const StageRecord*> out;
  for (const StageRecord& r : stages) {
    const std::string_view name = r.name;
    if (name == stage ||
        (name.size() > stage.size() && name.starts_with(stage) && name[stage.size()] == '-')) {
      out.push_back(&r);
    }
  }
  return out;
}

Json to_json(const StageRecord& r) {
  return Json{{"name", r.name}, {"iteration", r.iteration}, {"summary", r.summary},
              {"output", r.output}};
}

Json to_json(const StageTrace& t) {
  Json stages = Json::array();
  for (const StageRecord& r : t.stages) stages.push_back(to_json(r));
  return Json{{"stages", stages}, {"iterations", t.iterations}};
}

Json to_json(const PipelineResult& r) {
  Json report = to_json(r.report);
  report["controlled_id"] = r.controlled_id;
  return Json{{"trajectories", r.trajectories}, {"report", report}, {"trace", to_json(r.trace)}};
}

Pipeline::Pipeline(PipelineConfig cfg, StageFunctions stages)
    : cfg_(cfg), stages_(std::move(stages)) {
  cfg_.validate();
}

PipelineResult Pipeline::run(const Scene& input_scene, const DragInput& drag,
                             const perception::PerceptionBackend* backend) const {
  if (const auto violations = validate_scene(input_scene); !violations.empty()) {
    const Violation& v = violations.front();
    throw Error(ErrorCode::InvalidArgument,
                "invalid scene: " + v.rule + (v.object_id.empty() ? "" : " (" + v.object_id + ")"));
  }
  if (drag.points.points.empty() || !drag.points.all_finite()) {
    throw Error(ErrorCode::InvalidDrag, "drag has no usable points");
  }
  if (!input_scene.bounds().contains(drag.start)) {
    throw Error(ErrorCode::InvalidDrag, "drag starts outside the image");
  }

  PipelineResult result;
  StageTrace& trace = result.trace;

  ObjectInventory inventory =
      backend != nullptr ? perception::perceive(*backend, input_scene.image_ref, drag.start)
                         : perception::inventory_from_scene(input_scene, drag.start);
  const Scene scene = backend != nullptr ? with_inventory(input_scene, inventory) : input_scene;
  result.controlled_id = inventory.controlled.id;
  trace.stages.push_back({"perception", 0,
                          Json{{"controlled", inventory.controlled.id},
                               {"objects", inventory.others.size() + 1},
                               {"source", backend != nullptr ? "backend" : "scene"}},
                          inventory_json(inventory)});

  const SceneUnderstanding understanding = stages_.understand(inventory, scene);
  trace.stages.push_back({"S1-understand", 0,
                          Json{{"interaction_type", to_string(understanding.interaction_type)},
                               {"scene_label", understanding.scene_label}},
                          to_json(understanding)});

  const RelationGraph graph = stages_.relations(understanding, inventory, scene);
  trace.stages.push_back({"S2-relations", 0,
                          Json{{"nodes", graph.nodes.size()}, {"edges", graph.edges.size()}},
                          to_json(graph)});

  std::optional<CandidateBundle> chosen;
  ValidationReport chosen_report;
  for (int iteration = 0; iteration < cfg_.max_iterations; ++iteration) {
    trace.iterations = iteration + 1;
    const CandidateSet candidates =
        stages_.interactions(graph, understanding, drag, inventory, scene, cfg_, iteration);
    Json provenance = Json::array();
    for (const CandidateBundle& b : candidates.bundles) provenance.push_back(b.provenance);
    trace.stages.push_back({"S3-interactions", iteration,
                            Json{{"candidates", candidates.bundles.size()},
                                 {"provenance", provenance}},
                            to_json(candidates)});

    const CandidateBundle best = stages_.rank(candidates, scene, cfg_);
    trace.stages.push_back({"S4-rank", iteration,
                            Json{{"provenance", best.provenance}, {"score", best.score}},
                            to_json(best)});

    const ValidationReport report =
        stages_.validate(best, drag, understanding, graph, scene, cfg_);
    trace.stages.push_back({"S5-validate", iteration,
                            Json{{"passed", report.passed},
                                 {"backward_error", report.backward_error},
                                 {"violations", report.forward_violations.size()}},
                            to_json(report)});
    spdlog::debug("iteration {}: provenance {} score {} backward {} passed {}", iteration,
                  best.provenance, best.score, report.backward_error, report.passed);

    if (report.passed) {
      chosen = best;
      chosen_report = report;
      break;
    }
    if (!chosen || report.backward_error < chosen_report.backward_error) {
      chosen = best;
      chosen_report = report;
    }
  }

  chosen_report.iterations_used = trace.iterations;
  result.report = chosen_report;
  result.trajectories = chosen->trajectories;
  return result;
}

PipelineResult run_pipeline(const Scene& scene, const DragInput& drag,
                            const perception::PerceptionBackend* backend,
                            const PipelineConfig& cfg) {
  return Pipeline(cfg).run(scene, drag, backend);
}

}  // namespace cdrag::cot
