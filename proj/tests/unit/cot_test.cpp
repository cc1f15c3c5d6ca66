#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cdrag/cot/pipeline.hpp"
#include "cdrag/cot/scoring.hpp"
#include "cdrag/cot/stages.hpp"
#include "cdrag/error.hpp"

namespace cdrag::cot {
namespace {

const std::string kData = CDRAG_DATA;

SceneObject obj(std::string id, std::string cat, BBox b, bool mobile = true) {
  return SceneObject{std::move(id), std::move(cat), b, std::nullopt, b.area(), mobile};
}

SceneObject ball(std::string id, Point2 c, double r = 10) {
  return obj(std::move(id), "ball", {c.x - r, c.y - r, c.x + r, c.y + r});
}

Scene scene_of(int w, int h, std::vector<SceneObject> objects) {
  Scene s;
  s.width = w;
  s.height = h;
  s.objects = std::move(objects);
  return s;
}

DragInput line_drag(Point2 from, Vec2 step, int n) {
  std::vector<Point2> pts;
  for (int k = 0; k < n; ++k) pts.push_back(from + step * k);
  return DragInput::from_points("drag", pts);
}

ObjectInventory inventory(const Scene& s, const DragInput& d) {
  return perception::inventory_from_scene(s, d.start);
}

Scene billiard_pair() { return scene_of(640, 360, {ball("cue", {110, 180}), ball("red", {130, 180})}); }

// ---------------------------------------------------------------- S1

TEST(Stage1, RuleTable) {
  Scene s = billiard_pair();
  const auto inv = inventory(s, line_drag({110, 180}, {10, 0}, 14));
  EXPECT_EQ(stage1_understand(inv, s).interaction_type, InteractionType::CollisionChain);

  Scene m = s;
  m.statics.mirrors.push_back({{300, 0}, {300, 360}});
  EXPECT_EQ(stage1_understand(inv, m).interaction_type, InteractionType::LeverMirror);

  Scene p = s;
  p.statics.pivots.push_back({200, 200});
  EXPECT_EQ(stage1_understand(inv, p).interaction_type, InteractionType::LeverMirror);

  Scene g = s;
  g.gravity = {0, 0.5};
  const auto ug = stage1_understand(inv, g);
  EXPECT_EQ(ug.interaction_type, InteractionType::GravityForce);
  EXPECT_TRUE(ug.gravity_active);
  EXPECT_EQ(ug.gravity, (Vec2{0, 0.5}));

  Scene ground = s;
  ground.statics.ground = 300;
  const auto u = stage1_understand(inv, ground);
  EXPECT_EQ(u.interaction_type, InteractionType::GravityForce);
  EXPECT_EQ(u.gravity, (Vec2{0, kDefaultGravity}));
}

TEST(Stage1, LabelAndRestitution) {
  Scene s = scene_of(640, 360, {obj("c1", "car", {0, 0, 10, 10}), obj("c2", "car", {20, 0, 30, 10}),
                                obj("p", "person", {40, 0, 50, 10})});
  const auto inv = inventory(s, line_drag({5, 5}, {1, 0}, 3));
  auto u = stage1_understand(inv, s);
  EXPECT_EQ(u.scene_label, "car");
  EXPECT_DOUBLE_EQ(u.restitution, 1.0);
  s.scene_category = "Traffic";
  u = stage1_understand(inv, s);
  EXPECT_EQ(u.scene_label, "Traffic");
  EXPECT_DOUBLE_EQ(u.restitution, 0.6);
  s.restitution = 0.25;
  EXPECT_DOUBLE_EQ(stage1_understand(inv, s).restitution, 0.25);
}

// ---------------------------------------------------------------- S2

TEST(Stage2, FiveBirdsOnAWire) {
  std::vector<SceneObject> birds;
  for (int i = 0; i < 5; ++i) {
    birds.push_back(obj("bird" + std::to_string(i), "bird", {20.0 + 30 * i, 50, 50.0 + 30 * i, 70}));
  }
  const Scene s = scene_of(300, 200, birds);
  const auto inv = inventory(s, line_drag({35, 60}, {1, 0}, 3));
  const auto g = stage2_relations(stage1_understand(inv, s), inv, s);
  ASSERT_EQ(g.nodes.size(), 5u);
  ASSERT_EQ(g.edges.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(g.edges[i].type, EdgeType::Contact);
    EXPECT_EQ(g.edges[i].from, "bird" + std::to_string(i));
    EXPECT_EQ(g.edges[i].to, "bird" + std::to_string(i + 1));
  }
}

TEST(Stage2, SingleObject) {
  const Scene s = scene_of(100, 100, {ball("a", {50, 50})});
  const auto inv = inventory(s, line_drag({50, 50}, {1, 0}, 2));
  const auto g = stage2_relations(stage1_understand(inv, s), inv, s);
  EXPECT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(Stage2, MirrorPairByReflectedCorners) {
  Scene s = scene_of(600, 300, {obj("dog", "dog", {100, 200, 150, 260}),
                                obj("dog2", "dog", {450, 200, 500, 260}),
                                obj("cat", "cat", {452, 20, 498, 80})});
  s.statics.mirrors.push_back({{300, 0}, {300, 300}});
  // Reflection across x = 300 maps x to 600 - x; the corners land within 0 px.
  const BBox d = s.objects[0].bbox;
  EXPECT_EQ((BBox{600 - d.x2, d.y1, 600 - d.x1, d.y2}), s.objects[1].bbox);
  const auto inv = inventory(s, line_drag({125, 230}, {1, 0}, 2));
  const auto g = stage2_relations(stage1_understand(inv, s), inv, s);
  std::vector<RelationEdge> mirror_edges;
  for (const auto& e : g.edges) {
    if (e.type == EdgeType::MirrorPair) mirror_edges.push_back(e);
  }
  ASSERT_EQ(mirror_edges.size(), 1u);
  EXPECT_EQ(mirror_edges[0], (RelationEdge{EdgeType::MirrorPair, "dog", "dog2", 0}));

  // 11 px off in one corner breaks the pair.
  s.objects[1].bbox.x2 += 11;
  const auto inv2 = inventory(s, line_drag({125, 230}, {1, 0}, 2));
  const auto g2 = stage2_relations(stage1_understand(inv2, s), inv2, s);
  for (const auto& e : g2.edges) EXPECT_NE(e.type, EdgeType::MirrorPair);
}

TEST(Stage2, LeverSupportsAdjacent) {
  Scene s = scene_of(500, 300, {obj("left", "kid", {90, 170, 130, 210}),
                                obj("right", "kid", {370, 170, 410, 210}),
                                obj("plank", "plank", {200, 210, 300, 220}),
                                obj("box", "box", {230, 190, 260, 211}),
                                obj("near", "box", {310, 210, 330, 220})});
  s.statics.pivots.push_back({250, 190});
  const auto inv = inventory(s, line_drag({110, 190}, {0, 1}, 2));
  const auto g = stage2_relations(stage1_understand(inv, s), inv, s);
  auto has = [&](EdgeType t, const std::string& a, const std::string& b) {
    return std::any_of(g.edges.begin(), g.edges.end(), [&](const RelationEdge& e) {
      return e.type == t && e.from == a && e.to == b;
    });
  };
  EXPECT_TRUE(has(EdgeType::LeverCoupled, "left", "right"));
  EXPECT_TRUE(has(EdgeType::Supports, "plank", "box"));
  EXPECT_TRUE(has(EdgeType::Adjacent, "near", "plank"));
  EXPECT_FALSE(has(EdgeType::LeverCoupled, "box", "plank"));
  EXPECT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end(), [](const auto& x, const auto& y) {
    return std::tie(x.type, x.from, x.to, x.index) < std::tie(y.type, y.from, y.to, y.index);
  }));
}

// ---------------------------------------------------------------- S3

struct Run3 {
  Scene scene;
  DragInput drag;
  ObjectInventory inv;
  SceneUnderstanding u;
  RelationGraph g;
  CandidateSet cs;
};

Run3 run_s3(Scene s, DragInput d, PipelineConfig cfg = {}) {
  Run3 r{std::move(s), std::move(d), {}, {}, {}, {}};
  r.inv = inventory(r.scene, r.drag);
  r.u = stage1_understand(r.inv, r.scene);
  r.g = stage2_relations(r.u, r.inv, r.scene);
  r.cs = stage3_interactions(r.g, r.u, r.drag, r.inv, r.scene, cfg);
  return r;
}

TEST(Stage3, BilliardCueStopsTargetDeparts) {
  const auto r = run_s3(billiard_pair(), line_drag({110, 180}, {10, 0}, 14));
  ASSERT_EQ(r.cs.bundles.size(), 5u);
  // Equal masses, e = 1: the whole 10 px/frame passes to the target,
  // scaled by each candidate's multiplier.
  const double table[] = {1.0, 0.9, 1.1, 0.8, 1.2};
  for (int c = 0; c < 5; ++c) {
    const auto& b = r.cs.bundles[c];
    EXPECT_EQ(b.provenance, c);
    const Trajectory* cue = b.find("cue");
    const Trajectory* red = b.find("red");
    ASSERT_NE(cue, nullptr);
    ASSERT_NE(red, nullptr);
    ASSERT_EQ(red->points.size(), 14u);
    for (std::size_t k = 0; k < 14; ++k) {
      EXPECT_EQ(cue->points[k], (Point2{110, 180})) << k;
      EXPECT_NEAR(red->points[k].x, 130 + 10 * table[c] * k, 1e-9);
    }
    ASSERT_EQ(b.collisions.size(), 1u);
    EXPECT_EQ(b.collisions[0].event.frame, 0);
  }
}

TEST(Stage3, NoPathsMeansOnlyControlledMoves) {
  const Scene s = scene_of(640, 360, {ball("cue", {110, 180}), ball("far", {500, 60}),
                                      ball("other", {300, 300})});
  const auto r = run_s3(s, line_drag({110, 180}, {5, 0}, 14));
  const auto& b = r.cs.bundles[0];
  for (const char* id : {"far", "other"}) {
    const Trajectory* t = b.find(id);
    ASSERT_NE(t, nullptr);
    for (const Point2& p : t->points) EXPECT_EQ(p, t->points.front());
  }
  EXPECT_EQ(b.find("cue")->points.back(), (Point2{175, 180}));
}

TEST(Stage3, ChainReactionThroughCradle) {
  std::vector<SceneObject> balls{ball("a0", {40, 100})};
  for (int i = 1; i < 5; ++i) balls.push_back(ball("a" + std::to_string(i), {100.0 + 20 * (i - 1), 100}));
  const auto r = run_s3(scene_of(400, 200, balls), line_drag({40, 100}, {5, 0}, 14));
  const auto& b = r.cs.bundles[0];
  // Contact at center 80 -> frame 8; the far ball leaves at 5 px/frame.
  const Trajectory* last = b.find("a4");
  EXPECT_EQ(last->points[8], (Point2{160, 100}));
  EXPECT_NEAR(last->points[13].x, 160 + 5 * 5, 1e-9);
  for (const char* id : {"a1", "a2", "a3"}) {
    for (const Point2& p : b.find(id)->points) EXPECT_NEAR(p.x, b.find(id)->points[0].x, 1e-9);
  }
  EXPECT_NEAR(b.find("a0")->points[13].x, 80, 1e-9);
}

TEST(Stage3, MirrorPartnerIsExactReflection) {
  Scene s = scene_of(600, 300, {obj("dog", "dog", {100, 75, 150, 125}),
                                obj("dog2", "dog", {450, 75, 500, 125})});
  s.statics.mirrors.push_back({{300, 0}, {300, 300}});
  const auto r = run_s3(s, line_drag({125, 100}, {20.0 / 13, 0}, 14));
  for (const auto& b : r.cs.bundles) {
    const Trajectory* c = b.find("dog");
    const Trajectory* p = b.find("dog2");
    for (std::size_t k = 0; k < 14; ++k) {
      EXPECT_NEAR(p->points[k].x, 600 - c->points[k].x, 1e-9);
      EXPECT_NEAR(p->points[k].y, c->points[k].y, 1e-9);
    }
    EXPECT_LT(p->points.back().x, p->points.front().x);
  }
}

TEST(Stage3, LeverPartnerRotatesRigidly) {
  Scene s = scene_of(500, 300, {obj("left", "kid", {90, 170, 130, 210}),
                                obj("right", "kid", {370, 170, 410, 210})});
  s.statics.pivots.push_back({250, 190});
  std::vector<Point2> pts;
  for (int k = 0; k < 14; ++k) {
    const double a = std::numbers::pi - 0.3 * k / 13;
    pts.push_back({250 + 140 * std::cos(a), 190 + 140 * std::sin(a)});
  }
  const auto r = run_s3(s, DragInput::from_points("drag", pts));
  const Trajectory* right = r.cs.bundles[0].find("right");
  for (std::size_t k = 0; k < 14; ++k) {
    // The far end sweeps the same angle: start angle 0, then -0.3 k / 13.
    const double a = -0.3 * static_cast<double>(k) / 13;
    EXPECT_NEAR(right->points[k].x, 250 + 140 * std::cos(a), 1e-9);
    EXPECT_NEAR(right->points[k].y, 190 + 140 * std::sin(a), 1e-9);
  }
  EXPECT_LT(right->points.back().y, 190);  // rises while the left end drops
}

TEST(Stage3, GravityLaunchFollowsBallistic) {
  Scene s = scene_of(640, 480, {obj("hand", "hand", {80, 380, 120, 420}),
                                obj("ball", "ball", {120, 385, 150, 415})});
  s.gravity = {0, 0.5};
  s.statics.ground = 470;
  const DragInput d = line_drag({100, 400}, {4, -3}, 14);
  const auto r = run_s3(s, d);
  const auto& b = r.cs.bundles[0];
  const Trajectory* t = b.find("ball");
  ASSERT_EQ(b.collisions.size(), 1u);
  const auto f = static_cast<std::size_t>(b.collisions[0].event.frame);
  // Launch velocity: (1 + e) m_hand / (m_hand + m_ball) times the drag's final step.
  const double m_hand = 40 * 40;
  const double m_ball = 30 * 30;
  const Vec2 v0 = Vec2{4, -3} * (2.0 * m_hand / (m_hand + m_ball));
  for (std::size_t k = f; k < 14; ++k) {
    const double dt = static_cast<double>(k - f);
    EXPECT_NEAR(t->points[k].x, t->points[f].x + v0.x * dt, 1e-9);
    EXPECT_NEAR(t->points[k].y, t->points[f].y + v0.y * dt + 0.25 * dt * dt, 1e-9);
  }
  for (std::size_t k = 0; k <= f; ++k) EXPECT_EQ(t->points[k], (Point2{135, 400}));
}

TEST(Stage3, DragOffControlledObject) {
  const Scene s = billiard_pair();
  const auto d = line_drag({110, 180}, {10, 0}, 14);
  auto inv = inventory(s, d);
  const auto u = stage1_understand(inv, s);
  const auto g = stage2_relations(u, inv, s);
  const auto off = line_drag({300, 300}, {1, 0}, 3);
  try {
    (void)stage3_interactions(g, u, off, inv, s, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDrag);
  }
}

TEST(Stage3, ShapeInvariants) {
  Scene s = billiard_pair();
  s.objects.push_back(obj("rail", "rail", {0, 0, 640, 5}, false));
  PipelineConfig cfg;
  cfg.frame_count = 9;
  cfg.k = 7;
  const auto r = run_s3(s, line_drag({110, 180}, {10, 0}, 14), cfg);
  ASSERT_EQ(r.cs.bundles.size(), 7u);
  for (const auto& b : r.cs.bundles) {
    ASSERT_EQ(b.trajectories.size(), 2u);  // the immobile rail carries no track
    for (const auto& t : b.trajectories) EXPECT_EQ(t.points.size(), 9u);
    EXPECT_EQ(b.controlled_id, "cue");
  }
}

TEST(Multiplier, TableThenSeededDraws) {
  const double table[] = {1.0, 0.9, 1.1, 0.8, 1.2};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(candidate_multiplier(42, i), table[i]);
  for (std::size_t i = 5; i < 50; ++i) {
    const double m = candidate_multiplier(42, i);
    EXPECT_GE(m, 0.7);
    EXPECT_LT(m, 1.3);
    EXPECT_EQ(m, candidate_multiplier(42, i));
  }
  EXPECT_NE(candidate_multiplier(1, 5), candidate_multiplier(2, 5));
}

// ---------------------------------------------------------------- S4

CandidateBundle bundle_with(std::vector<Trajectory> ts, int provenance) {
  CandidateBundle b;
  b.trajectories = std::move(ts);
  b.provenance = provenance;
  b.controlled_id = b.trajectories.front().object_id;
  return b;
}

TEST(Stage4, ArgminAndTies) {
  std::vector<CandidateBundle> bs;
  for (double s : {0.2, 0.5, 0.1}) {
    bs.push_back(bundle_with({{"a", {{1, 1}}}}, static_cast<int>(bs.size())));
    bs.back().score = s;
  }
  EXPECT_EQ(select_best(bs).provenance, 2);
  for (auto& b : bs) b.score = 0.3;
  EXPECT_EQ(select_best(bs).provenance, 0);
  EXPECT_THROW((void)select_best(std::span<const CandidateBundle>{}), Error);
  EXPECT_THROW((void)stage4_rank(CandidateSet{}, billiard_pair(), {}), Error);
}

TEST(Stage4, OutOfBoundsBundleLosesByExcursion) {
  const Scene s = scene_of(100, 100, {ball("a", {50, 50}, 2)});
  CandidateSet cs;
  cs.bundles.push_back(bundle_with({{"a", {{50, 50}, {50, 50}, {105, 50}}}}, 0));
  cs.bundles.push_back(bundle_with({{"a", {{50, 50}, {50, 50}, {95, 50}}}}, 1));
  for (auto& b : cs.bundles) b.segments.push_back({"a", 0, 2, MotionKind::Ballistic});
  const auto scored = score_candidates(cs, s, {});
  EXPECT_DOUBLE_EQ(scored.bundles[0].score - scored.bundles[1].score, 5.0);
  EXPECT_EQ(stage4_rank(cs, s, {}).provenance, 1);
}

TEST(Stage4, ScoreTermsAgainstHandSums) {
  const Scene s = scene_of(100, 100, {ball("a", {20, 50}, 5), ball("b", {40, 50}, 5)});
  CandidateBundle b = bundle_with({{"a", {{20, 50}, {28, 50}, {30, 50}}},
                                   {"b", {{40, 50}, {40, 50}, {40, 50}}}}, 0);
  b.segments = {{"a", 0, 2, MotionKind::Driven}, {"b", 0, 2, MotionKind::Stationary}};
  const auto br = score_bundle(b, s, {});
  // Frame 1: distance 12 < 10 -> no; frame 2: distance 10 -> touching, depth 0.
  EXPECT_DOUBLE_EQ(br.penetration, 0.0);
  // a: second difference (30 - 56 + 20) = -6.
  EXPECT_DOUBLE_EQ(br.smoothness, 6.0);
  ScoreWeights w;
  w.smoothness = 0.5;
  EXPECT_DOUBLE_EQ(score_bundle(b, s, w).total, 3.0);
  b.trajectories[0].points[2] = {33, 50};
  EXPECT_DOUBLE_EQ(score_bundle(b, s, {}).penetration, 3.0);
}

// ---------------------------------------------------------------- S5

TEST(Stage5, IdentityPasses) {
  const auto d = line_drag({110, 180}, {3, 1}, 14);
  CandidateBundle b = bundle_with({d.points}, 0);
  b.trajectories[0].object_id = "cue";
  b.controlled_id = "cue";
  const Scene s = billiard_pair();
  const auto rep = stage5_validate(b, d, {}, {}, s, {});
  EXPECT_TRUE(rep.passed);
  EXPECT_DOUBLE_EQ(rep.backward_error, 0.0);
  EXPECT_TRUE(rep.forward_violations.empty());
}

TEST(Stage5, ConstantOffsetFailsBackward) {
  const auto d = line_drag({110, 180}, {3, 1}, 14);
  CandidateBundle b = bundle_with({d.points}, 0);
  for (auto& p : b.trajectories[0].points) p += Vec2{10, 0};
  PipelineConfig cfg;
  cfg.tau = 2.0;
  const auto rep = stage5_validate(b, d, {}, {}, billiard_pair(), cfg);
  EXPECT_NEAR(rep.backward_error, 10.0, 1e-12);
  EXPECT_FALSE(rep.passed);
}

TEST(Stage5, MirrorSkewIsForwardViolation) {
  Scene s = scene_of(600, 300, {obj("dog", "dog", {100, 75, 150, 125}),
                                obj("dog2", "dog", {450, 75, 500, 125})});
  s.statics.mirrors.push_back({{300, 0}, {300, 300}});
  const auto r = run_s3(s, line_drag({125, 100}, {1, 0}, 14));
  CandidateBundle b = r.cs.bundles[0];
  EXPECT_TRUE(stage5_validate(b, r.drag, r.u, r.g, s, {}).passed);
  for (auto& t : b.trajectories) {
    if (t.object_id == "dog2") t.points[6].y += 3;
  }
  const auto rep = stage5_validate(b, r.drag, r.u, r.g, s, {});
  EXPECT_FALSE(rep.passed);
  ASSERT_EQ(rep.forward_violations.size(), 1u);
  EXPECT_EQ(rep.forward_violations[0].rule, "mirror-asymmetry");
  EXPECT_EQ(rep.forward_violations[0].frame, 6);
  EXPECT_NEAR(rep.forward_violations[0].magnitude, 3.0, 1e-9);
}

TEST(Stage5, BackwardUndoesCollisionTransfer) {
  // The cue stops at contact, yet its reconstruction recovers the full drag.
  const auto r = run_s3(billiard_pair(), line_drag({110, 180}, {10, 0}, 14));
  const auto rep = stage5_validate(r.cs.bundles[1], r.drag, r.u, r.g, r.scene, {});
  EXPECT_NEAR(rep.backward_error, 0.0, 1e-12);
}

// ---------------------------------------------------------------- pipeline

TEST(Pipeline, DeterministicAndTraced) {
  const Scene s = scene_from_json(read_json_file(kData + "/scenes/billiard.json"));
  const DragInput d = drag_from_json(read_json_file(kData + "/drags/billiard.json"));
  const auto a = to_json(run_pipeline(s, d, nullptr, {})).dump();
  const auto b = to_json(run_pipeline(s, d, nullptr, {})).dump();
  EXPECT_EQ(a, b);
  const auto r = run_pipeline(s, d, nullptr, {});
  EXPECT_TRUE(r.report.passed);
  EXPECT_EQ(r.report.iterations_used, 1);
  EXPECT_EQ(r.trajectories.size(), 5u);
  std::vector<std::string> names;
  for (const auto& st : r.trace.stages) names.push_back(st.name);
  EXPECT_EQ(names, (std::vector<std::string>{"perception", "S1-understand", "S2-relations",
                                             "S3-interactions", "S4-rank", "S5-validate"}));
  EXPECT_EQ(r.trace.find("S3").size(), 1u);
  EXPECT_TRUE(r.trace.find("S").empty());
}

TEST(Pipeline, BackendInventoryRenamesObjects) {
  const Scene s = scene_from_json(read_json_file(kData + "/scenes/billiard.json"));
  const DragInput d = drag_from_json(read_json_file(kData + "/drags/billiard.json"));
  const auto fb = perception::FixtureBackend::load(kData + "/perception/billiard.json");
  const auto r = run_pipeline(s, d, &fb, {});
  EXPECT_EQ(r.controlled_id, "ball_0");
  ASSERT_EQ(r.trajectories.size(), 5u);
  const auto plain = run_pipeline(s, d, nullptr, {});
  // Same geometry, new names: the struck ball moves identically.
  EXPECT_EQ(r.trajectories[1].points, plain.trajectories[3].points);  // ball_1 == red
}

TEST(Pipeline, FailingValidationReiterates) {
  const Scene s = billiard_pair();
  const DragInput d = line_drag({110, 180}, {10, 0}, 14);
  StageFunctions stages;
  stages.interactions = [](const RelationGraph& g, const SceneUnderstanding& u, const DragInput& drag,
                           const ObjectInventory& inv, const Scene& sc, const PipelineConfig& cfg,
                           int it) {
    CandidateSet cs = stage3_interactions(g, u, drag, inv, sc, cfg, it);
    for (auto& b : cs.bundles) {
      for (auto& t : b.trajectories) {
        for (auto& p : t.points) p += Vec2{10, 0};
      }
    }
    return cs;
  };
  PipelineConfig cfg;
  cfg.max_iterations = 3;
  const auto r = Pipeline(cfg, stages).run(s, d);
  EXPECT_FALSE(r.report.passed);
  EXPECT_EQ(r.report.iterations_used, 3);
  EXPECT_EQ(r.trace.iterations, 3);
  EXPECT_EQ(r.trace.find("S5").size(), 3u);
  EXPECT_GE(r.report.backward_error, 10.0 - 1e-9);
  // Provenance keeps counting across iterations.
  EXPECT_EQ(r.trace.find("S3")[2]->summary["provenance"][0], 10);
}

TEST(Pipeline, InputErrors) {
  const Scene s = billiard_pair();
  try {
    (void)run_pipeline(s, line_drag({400, 300}, {1, 0}, 3), nullptr, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDrag);
  }
  Scene bad = s;
  bad.objects[1].id = "cue";
  EXPECT_THROW((void)run_pipeline(bad, line_drag({110, 180}, {1, 0}, 3), nullptr, {}), Error);
  PipelineConfig cfg;
  cfg.frame_count = 1;
  EXPECT_THROW((void)run_pipeline(s, line_drag({110, 180}, {1, 0}, 3), nullptr, cfg), Error);
}

TEST(Config, JsonOverlay) {
  const auto cfg = config_from_json(Json::parse(R"({"k":3,"tau":0.5,"weights":{"bounds":2}})"));
  EXPECT_EQ(cfg.k, 3);
  EXPECT_EQ(cfg.max_iterations, 3);
  EXPECT_DOUBLE_EQ(cfg.tau, 0.5);
  EXPECT_DOUBLE_EQ(cfg.weights.bounds, 2.0);
  EXPECT_DOUBLE_EQ(cfg.weights.momentum, 1.0);
  EXPECT_THROW((void)config_from_json(Json::parse(R"({"k":"many"})")), Error);
}

}  // namespace
}  // namespace cdrag::cot
