#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cdrag/cot/stages.hpp"
#include "cdrag/cot/types.hpp"
#include "cdrag/perception/perception.hpp"

namespace cdrag::cot {

struct StageRecord {
  std::string name;  // perception, S1-understand, ..., S5-validate
  int iteration = 0;
  Json summary;
  Json output;
};

struct StageTrace {
  std::vector<StageRecord> stages;
  int iterations = 0;

  /// Records whose name equals `stage` or starts with `stage` followed by '-'
  /// (so "S3" selects every "S3-interactions" entry).
  [[nodiscard]] std::vector<const StageRecord*> find(std::string_view stage) const;
};

Json to_json(const StageRecord& r);
Json to_json(const StageTrace& t);

struct PipelineResult {
  std::vector<Trajectory> trajectories;  // sorted by object id
  ValidationReport report;
  StageTrace trace;
  std::string controlled_id;
};

/// `{"trajectories":[...],"report":{...,"controlled_id"},"trace":{...}}`
Json to_json(const PipelineResult& r);

/// Stage implementations used by a Pipeline. Defaults are the stage
/// functions from stages.hpp; tests swap individual stages.
struct StageFunctions {
  std::function<SceneUnderstanding(const ObjectInventory&, const Scene&)> understand =
      stage1_understand;
  std::function<RelationGraph(const SceneUnderstanding&, const ObjectInventory&, const Scene&)>
      relations = stage2_relations;
  std::function<CandidateSet(const RelationGraph&, const SceneUnderstanding&, const DragInput&,
                             const ObjectInventory&, const Scene&, const PipelineConfig&, int)>
      interactions = stage3_interactions;
  std::function<CandidateBundle(const CandidateSet&, const Scene&, const PipelineConfig&)> rank =
      stage4_rank;
  std::function<ValidationReport(const CandidateBundle&, const DragInput&,
                                 const SceneUnderstanding&, const RelationGraph&, const Scene&,
                                 const PipelineConfig&)>
      validate = stage5_validate;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg = {}, StageFunctions stages = {});

  /// S1 -> S5, re-entering S3 with fresh provenance indices while S5 fails,
  /// up to max_iterations. Without a backend the scene's own objects form the
  /// inventory. An unpassed report is a normal result, not an error.
  [[nodiscard]] PipelineResult run(const Scene& scene, const DragInput& drag,
                                   const perception::PerceptionBackend* backend = nullptr) const;

  [[nodiscard]] const PipelineConfig& config() const { return cfg_; }

 private:
  PipelineConfig cfg_;
  StageFunctions stages_;
};

PipelineResult run_pipeline(const Scene& scene, const DragInput& drag,
                            const perception::PerceptionBackend* backend,
                            const PipelineConfig& cfg);

}  // namespace cdrag::cot
