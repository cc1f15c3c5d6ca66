#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cdrag/error.hpp"
#include "cdrag/physics/kernels.hpp"

namespace cdrag::physics {
namespace {

BodyState body(std::string id, Point2 c, Vec2 v, double r = 1.0, double m = 1.0) {
  return BodyState{std::move(id), c, v, r, m};
}

Vec2 momentum(const BodyState& a, const BodyState& b) {
  return a.velocity * a.mass + b.velocity * b.mass;
}

double energy(const BodyState& a, const BodyState& b) {
  return 0.5 * a.mass * dot(a.velocity, a.velocity) + 0.5 * b.mass * dot(b.velocity, b.velocity);
}

// 1D elastic pairwise sweep along x: an independent model of a head-on chain.
std::vector<double> chain_oracle(const std::vector<double>& m, std::vector<double> v) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (v[i] > v[i + 1]) {
        const double a = ((m[i] - m[i + 1]) * v[i] + 2 * m[i + 1] * v[i + 1]) / (m[i] + m[i + 1]);
        const double b = ((m[i + 1] - m[i]) * v[i + 1] + 2 * m[i] * v[i]) / (m[i] + m[i + 1]);
        v[i] = a;
        v[i + 1] = b;
        changed = true;
      }
    }
  }
  return v;
}

TEST(Collide, HeadOnExchange) {
  const auto [a, b] = collide(body("a", {0, 0}, {1, 0}), body("b", {2, 0}, {0, 0}), 1.0);
  EXPECT_EQ(a.velocity, (Vec2{0, 0}));
  EXPECT_EQ(b.velocity, (Vec2{1, 0}));
}

TEST(Collide, ObliqueContact) {
  const double s = std::sqrt(2.0);
  const auto [a, b] = collide(body("a", {0, 0}, {1, 0}), body("b", {s, s}, {0, 0}), 1.0);
  EXPECT_NEAR(a.velocity.x, 0.5, 1e-12);
  EXPECT_NEAR(a.velocity.y, -0.5, 1e-12);
  EXPECT_NEAR(b.velocity.x, 0.5, 1e-12);
  EXPECT_NEAR(b.velocity.y, 0.5, 1e-12);
  const Vec2 p = momentum(a, b);
  EXPECT_NEAR(p.x, 1.0, 1e-12);
  EXPECT_NEAR(p.y, 0.0, 1e-12);
  EXPECT_NEAR(energy(a, b), 0.5, 1e-12);
}

TEST(Collide, PerfectlyInelastic) {
  const auto [a, b] = collide(body("a", {0, 0}, {2, 0}), body("b", {2, 0}, {0, 0}), 0.0);
  EXPECT_EQ(a.velocity, (Vec2{1, 0}));
  EXPECT_EQ(b.velocity, (Vec2{1, 0}));
}

TEST(Collide, SeparatingPairUntouched) {
  const auto a0 = body("a", {0, 0}, {-1, 0});
  const auto b0 = body("b", {2, 0}, {1, 0});
  const auto [a, b] = collide(a0, b0, 1.0);
  EXPECT_EQ(a.velocity, a0.velocity);
  EXPECT_EQ(b.velocity, b0.velocity);
}

TEST(Collide, Errors) {
  try {
    (void)collide(body("a", {1, 1}, {1, 0}), body("b", {1, 1}, {0, 0}), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateContact);
  }
  EXPECT_THROW((void)collide(body("a", {0, 0}, {1, 0}), body("b", {5, 0}, {}), 1.0), Error);
  EXPECT_THROW((void)collide(body("a", {0, 0}, {1, 0}), body("b", {2, 0}, {}), 1.5), Error);
}

TEST(Collide, RandomConservation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_real_distribution<double> mass(0.1, 10);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const double angle = unit(rng) * 2 * std::numbers::pi;
    const double ra = mass(rng);
    const double rb = mass(rng);
    const Point2 ca{u(rng), u(rng)};
    const Point2 cb = ca + Vec2{std::cos(angle), std::sin(angle)} * (ra + rb);
    const auto a0 = body("a", ca, {u(rng), u(rng)}, ra, mass(rng));
    const auto b0 = body("b", cb, {u(rng), u(rng)}, rb, mass(rng));
    const double e = i % 2 == 0 ? 1.0 : unit(rng);
    const auto [a, b] = collide(a0, b0, e);
    const Vec2 p0 = momentum(a0, b0);
    const Vec2 p1 = momentum(a, b);
    const double scale = std::max(norm(p0), 1e-12);
    EXPECT_LE(norm(p1 - p0) / scale, 1e-9 * std::max(1.0, 1.0 / scale));
    const double k0 = energy(a0, b0);
    const double k1 = energy(a, b);
    if (e == 1.0) {
      EXPECT_LE(std::abs(k1 - k0) / k0, 1e-9);
    } else {
      EXPECT_LE(k1, k0 * (1 + 1e-12));
    }
    // Tangential components survive.
    const Vec2 n = (cb - ca) / norm(cb - ca);
    const Vec2 t{-n.y, n.x};
    EXPECT_NEAR(dot(a.velocity, t), dot(a0.velocity, t), 1e-9);
    EXPECT_NEAR(dot(b.velocity, t), dot(b0.velocity, t), 1e-9);
  }
}

std::vector<BodyState> equal_chain(int n, double r = 1.0) {
  std::vector<BodyState> chain;
  for (int i = 0; i < n; ++i) chain.push_back(body("b" + std::to_string(i), {2.0 * r * i, 0}, {}, r));
  return chain;
}

TEST(Chain, NewtonsCradle) {
  const auto out = propagate_chain(equal_chain(5), {3, 0}, 1.0);
  for (int i = 0; i < 4; ++i) EXPECT_LE(norm(out[i].velocity), 1e-12);
  EXPECT_NEAR(out[4].velocity.x, 3.0, 1e-12);
}

TEST(Chain, TwoBalls) {
  const auto out = propagate_chain(equal_chain(2), {1, 0}, 1.0);
  EXPECT_EQ(out[0].velocity, (Vec2{0, 0}));
  EXPECT_EQ(out[1].velocity, (Vec2{1, 0}));
}

TEST(Chain, UnequalMassesMatchPairwiseOracle) {
  auto chain = equal_chain(3);
  chain[0].mass = 2.0;
  const auto out = propagate_chain(chain, {1, 0}, 1.0);
  const auto want = chain_oracle({2, 1, 1}, {1, 0, 0});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[i].velocity.x, want[i], 1e-12);
  EXPECT_NEAR(want[0], 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(want[1], 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(want[2], 4.0 / 3.0, 1e-12);
  double p = 0;
  for (const auto& b : out) p += b.mass * b.velocity.x;
  EXPECT_NEAR(p, 2.0, 1e-12);
}

TEST(Chain, MomentumConservedForAnyRestitution) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.2, 5);
  for (int trial = 0; trial < 200; ++trial) {
    auto chain = equal_chain(2 + trial % 5);
    for (auto& b : chain) b.mass = u(rng);
    const double e = (trial % 11) / 10.0;
    const Vec2 v{u(rng), 0};
    const auto out = propagate_chain(chain, v, e);
    Vec2 p;
    for (const auto& b : out) p += b.velocity * b.mass;
    const double p0 = chain[0].mass * v.x;
    EXPECT_LE(std::abs(p.x - p0) / p0, 1e-9);
    EXPECT_LE(std::abs(p.y), 1e-12);
  }
}

TEST(Chain, Errors) {
  auto bent = equal_chain(3);
  bent[1].center.y = 0.01;
  for (const auto& chain : {equal_chain(1), bent}) {
    try {
      (void)propagate_chain(chain, {1, 0}, 1.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidChain);
    }
  }
  auto gapped = equal_chain(3);
  gapped[2].center.x = 10;
  EXPECT_THROW((void)propagate_chain(gapped, {1, 0}, 1.0), Error);
}

TEST(Ballistic, ClosedForm) {
  const auto t = ballistic({0, 0}, {10, -20}, {0, 2}, {}, 4);
  EXPECT_EQ(t.points[3], (Point2{30, -51}));
  const auto u = ballistic({1, 2}, {3, 4}, {}, {}, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(u.points[k], (Point2{1 + 3.0 * k, 2 + 4.0 * k}));
  }
  const std::vector<Point2> one{{7, 8}};
  EXPECT_EQ(ballistic({7, 8}, {1, 1}, {0, 1}, {}, 1).points, one);
}

TEST(Ballistic, SecondDifferenceIsAcceleration) {
  // Dyadic inputs keep every step exact in binary floating point.
  const Vec2 g{0.25, 0.5};
  const Vec2 extra{-0.125, 0.0625};
  const auto t = ballistic({3.5, -2.25}, {1.5, -4.75}, g, extra, 30);
  for (std::size_t k = 1; k + 1 < t.points.size(); ++k) {
    const Vec2 d2 = t.points[k + 1] - t.points[k] * 2.0 + t.points[k - 1];
    EXPECT_EQ(d2, g + extra) << k;
  }
}

TEST(Ballistic, StopsAtRestLine) {
  const auto t = ballistic_until({0, 0}, {1, 0}, {0, 2}, {}, 10, 9.0);
  // y = k^2 reaches 9 at k = 3 and stays there.
  EXPECT_EQ(t.points[2], (Point2{2, 4}));
  for (std::size_t k = 3; k < 10; ++k) EXPECT_EQ(t.points[k], (Point2{3, 9}));
}

TEST(Lever, RotationExample) {
  const Point2 p = lever_rotate({0, 0}, {10, 0}, 0.1);
  EXPECT_NEAR(p.x, 10 * std::cos(0.1), 1e-12);
  EXPECT_NEAR(p.y, 10 * std::sin(0.1), 1e-12);
  EXPECT_NEAR(p.x, 9.95004, 1e-5);
  EXPECT_NEAR(p.y, 0.99833, 1e-5);
  const Point2 q = lever_rotate({0, 0}, {-10, 0}, 0.1);
  EXPECT_NEAR(q.x, -p.x, 1e-12);
  EXPECT_NEAR(q.y, -p.y, 1e-12);
  EXPECT_EQ(lever_rotate({3, 4}, {5, 6}, 0.0), (Point2{5, 6}));
}

TEST(Lever, RadiusPreserved) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1000, 1000);
  for (int i = 0; i < 1000; ++i) {
    const Point2 pivot{u(rng), u(rng)};
    const Point2 p{u(rng), u(rng)};
    const double r0 = distance(p, pivot);
    const double r1 = distance(lever_rotate(pivot, p, u(rng) / 100), pivot);
    EXPECT_LE(std::abs(r1 - r0) / r0, 1e-9);
  }
}

TEST(Mirror, Examples) {
  EXPECT_EQ(reflect_point({{5, 0}, {5, 10}}, {2, 3}), (Point2{8, 3}));
  EXPECT_EQ(reflect_point({{5, 0}, {5, 10}}, {5, 7}), (Point2{5, 7}));
  const Point2 r = reflect_point({{0, 0}, {1, 1}}, {1, 0});
  EXPECT_NEAR(r.x, 0.0, 1e-15);
  EXPECT_NEAR(r.y, 1.0, 1e-15);
  try {
    (void)mirror_reflect({{1, 1}, {1, 1}}, Trajectory{"t", {{0, 0}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Mirror, Involution) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int i = 0; i < 1000; ++i) {
    const Segment m{{u(rng), u(rng)}, {u(rng), u(rng)}};
    Trajectory t{"t", {}};
    for (int k = 0; k < 8; ++k) t.points.push_back({u(rng), u(rng)});
    const Trajectory back = mirror_reflect(m, mirror_reflect(m, t));
    ASSERT_EQ(back.points.size(), t.points.size());
    for (std::size_t k = 0; k < t.points.size(); ++k) {
      EXPECT_NEAR(back.points[k].x, t.points[k].x, 1e-9);
      EXPECT_NEAR(back.points[k].y, t.points[k].y, 1e-9);
    }
  }
}

std::pair<BodyState, Trajectory> moving(std::string id, std::vector<Point2> pts, double r = 1.0) {
  return {body(id, pts.front(), {}, r), Trajectory{id, std::move(pts)}};
}

TEST(Detect, SweepFindsFirstApproachingContact) {
  std::vector<std::pair<BodyState, Trajectory>> bodies{
      moving("A", std::vector<Point2>(6, Point2{4, 0})),
      moving("B", {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}})};
  const auto events = detect_collisions(bodies);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].frame, 2);
  EXPECT_EQ(events[0].pair, (std::pair<std::string, std::string>{"A", "B"}));
  EXPECT_NEAR(events[0].normal.x, -1.0, 1e-12);
}

TEST(Detect, NoContactAndReceding) {
  std::vector<std::pair<BodyState, Trajectory>> apart{
      moving("A", {{0, 0}, {0, 0}}), moving("B", {{10, 0}, {11, 0}})};
  EXPECT_TRUE(detect_collisions(apart).empty());
  std::vector<std::pair<BodyState, Trajectory>> receding{
      moving("A", {{0, 0}, {-1, 0}, {-2, 0}}), moving("B", {{1, 0}, {2, 0}, {3, 0}})};
  EXPECT_TRUE(detect_collisions(receding).empty());
}

TEST(Detect, MismatchedLengths) {
  std::vector<std::pair<BodyState, Trajectory>> bodies{moving("A", {{0, 0}}),
                                                       moving("B", {{5, 0}, {6, 0}})};
  EXPECT_THROW((void)detect_collisions(bodies), Error);
}

TEST(Detect, TranslationInvariant) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<BodyState, Trajectory>> bodies;
    for (int b = 0; b < 4; ++b) {
      std::vector<Point2> pts;
      Point2 p{u(rng) * 4, u(rng) * 4};
      const Vec2 v{u(rng), u(rng)};
      for (int k = 0; k < 12; ++k) pts.push_back(p + v * k);
      bodies.push_back(moving("o" + std::to_string(b), pts, 1.5));
    }
    // Power-of-two shift keeps coordinates exactly representable.
    auto shifted = bodies;
    for (auto& [state, t] : shifted) {
      for (auto& p : t.points) p += Vec2{256, -512};
    }
    const auto a = detect_collisions(bodies);
    const auto b = detect_collisions(shifted);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].frame, b[i].frame);
      EXPECT_EQ(a[i].pair, b[i].pair);
    }
  }
}

}  // namespace
}  // namespace cdrag::physics
