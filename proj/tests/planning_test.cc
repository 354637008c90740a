#include "fastrack/planning.h"

#include <gtest/gtest.h>

#include <cmath>

#include "fastrack/catalog.h"
#include "fastrack/error.h"
#include "fastrack/world.h"

namespace fastrack {
namespace {

PlanningModel Integrator2d() {
  return make_model("rel1d", {{"dims", 2}}).system.planning;
}

double Dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Runs a planner to the goal, checking every step against the obstacles.
std::vector<std::vector<double>> Drive(Planner& planner, PlannerInput in,
                                       const PlanningModel& model,
                                       std::size_t max_steps) {
  std::vector<std::vector<double>> states = {in.state};
  for (std::size_t k = 0; k < max_steps; ++k) {
    const PlannedStep step = planner.Next(in);
    if (step.at_goal) return states;
    const auto pos = PlanningPosition(model, step.next);
    EXPECT_TRUE(in.bounds.Contains(pos));
    EXPECT_FALSE(InsideAny(in.ObstaclesAt(0), pos));
    EXPECT_LE(Dist(pos, PlanningPosition(model, in.state)),
              planner.MaxStep(in.dt) + 1e-9);
    in.state = step.next;
    states.push_back(in.state);
  }
  ADD_FAILURE() << "goal not reached";
  return states;
}

TEST(Segment, HitsBox) {
  const Box b({1, -1}, {2, 1});
  EXPECT_TRUE(SegmentHitsBox(std::vector<double>{0, 0},
                             std::vector<double>{3, 0}, b));
  EXPECT_FALSE(SegmentHitsBox(std::vector<double>{0, 2},
                              std::vector<double>{3, 2}, b));
  EXPECT_FALSE(SegmentHitsBox(std::vector<double>{0, 0},
                              std::vector<double>{0.9, 0}, b));
  EXPECT_TRUE(SegmentHitsBox(std::vector<double>{0, -3},
                             std::vector<double>{3, 3}, b));
  EXPECT_FALSE(SegmentHitsBox(std::vector<double>{0, 1.5},
                              std::vector<double>{1.4, 3}, b));
}

TEST(Segment, TraversalTime) {
  const std::vector<double> speed = {0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(TraversalTime(std::vector<double>{-12, 0, 0},
                                 std::vector<double>{12, 0, 0}, speed),
                   48.0);
  EXPECT_DOUBLE_EQ(TraversalTime(std::vector<double>{0, 0, 0},
                                 std::vector<double>{1, -2, 0.5}, speed),
                   4.0);
}

TEST(GridPlanner, CarStraightLine) {
  const PlanningModel car = make_model("car5d_car3d").system.planning;
  GridPlanner planner(car, {});
  PlannerInput in;
  in.state = {0, 0, 0};
  in.goal = Box({0.28, -0.03}, {0.34, 0.03});
  in.bounds = Box({-0.5, -0.5}, {0.5, 0.5});
  in.dt = 0.067;
  const auto states = Drive(planner, in, car, 200);
  EXPECT_LE(planner.MaxStep(in.dt), 0.1 * 0.067 + 1e-9);
  EXPECT_TRUE(in.goal.Contains(PlanningPosition(car, states.back())));
  // Straight motion at full speed takes about 0.28 / (0.1 * 0.067) steps.
  EXPECT_LE(states.size(), 48u);
}

TEST(GridPlanner, WallWithGap) {
  const PlanningModel m = Integrator2d();
  GridPlanner planner(m, {});
  PlannerInput in;
  in.state = {0.5, 0.5};
  in.goal = Box({3.3, 0.3}, {3.7, 0.7});
  in.bounds = Box({0, 0}, {4, 4});
  in.dt = 0.1;
  in.obstacles = {{Box({1.9, 0}, {2.1, 1.8}), Box({1.9, 2.2}, {2.1, 4})}};
  const auto states = Drive(planner, in, m, 1000);
  bool through_gap = false;
  for (const auto& s : states) {
    if (s[0] > 1.9 && s[0] < 2.1) through_gap = through_gap || (s[1] > 1.8 && s[1] < 2.2);
  }
  EXPECT_TRUE(through_gap);
  EXPECT_TRUE(in.goal.Contains(states.back()));
  EXPECT_EQ(planner.replans(), 1u);
}

TEST(GridPlanner, StartInsideGoal) {
  const PlanningModel m = Integrator2d();
  GridPlanner planner(m, {});
  PlannerInput in;
  in.state = {1, 1};
  in.goal = Box({0.5, 0.5}, {1.5, 1.5});
  in.bounds = Box({0, 0}, {4, 4});
  in.dt = 0.1;
  const PlannedStep step = planner.Next(in);
  EXPECT_TRUE(step.at_goal);
  EXPECT_EQ(step.next, in.state);
}

TEST(GridPlanner, EnclosedGoalIsStuck) {
  const PlanningModel m = Integrator2d();
  GridPlanner planner(m, {});
  PlannerInput in;
  in.state = {0.5, 0.5};
  in.goal = Box({2.8, 2.8}, {3.2, 3.2});
  in.bounds = Box({0, 0}, {4, 4});
  in.dt = 0.1;
  in.obstacles = {{Box({2.5, 2.5}, {3.5, 3.5})}};
  try {
    planner.Next(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPlannerStuck);
  }
}

TEST(GridPlanner, TimeIndexedObstacles) {
  // An obstacle that appears from step 3 onward only blocks later states.
  const PlanningModel m = Integrator2d();
  GridPlanner planner(m, {});
  PlannerInput in;
  in.state = {0.5, 0.5};
  in.goal = Box({2.8, 0.3}, {3.2, 0.7});
  in.bounds = Box({0, 0}, {4, 4});
  in.dt = 0.1;
  in.obstacles = {{}, {}, {Box({0.45, 0.45}, {0.55, 0.55})}};
  const PlannedStep step = planner.Next(in);
  ASSERT_FALSE(step.lookahead.empty());
  for (std::size_t k = 2; k < step.lookahead.size(); ++k) {
    EXPECT_FALSE(in.ObstaclesAt(k).front().Contains(step.lookahead[k]));
  }
}

TEST(GridPlanner, ReplansWhenPlanBlocked) {
  const PlanningModel m = Integrator2d();
  GridPlanner planner(m, {});
  PlannerInput in;
  in.state = {0.5, 0.5};
  in.goal = Box({3.3, 0.3}, {3.7, 0.7});
  in.bounds = Box({0, 0}, {4, 4});
  in.dt = 0.1;
  in.state = planner.Next(in).next;
  in.state = planner.Next(in).next;
  EXPECT_EQ(planner.replans(), 1u);
  in.obstacles = {{Box({1.9, 0}, {2.1, 1.8})}};
  const PlannedStep step = planner.Next(in);
  EXPECT_EQ(planner.replans(), 2u);
  for (const auto& s : step.lookahead) {
    EXPECT_FALSE(InsideAny(in.obstacles[0], s));
  }
}

TEST(RrtPlanner, StraightLineAtSpeedLimit) {
  const PlanningModel m = make_model("quad10d_int3d").system.planning;
  RrtPlanner planner(m, {}, 7);
  PlannerInput in;
  in.state = {-12, 0, 0};
  in.goal = Box({11.5, -0.5, -0.5}, {12.5, 0.5, 0.5});
  in.bounds = Box({-13, -3, -3}, {13, 3, 3});
  in.dt = 0.1;
  const auto states = Drive(planner, in, m, 2000);
  for (std::size_t k = 1; k < states.size(); ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_LE(std::abs(states[k][i] - states[k - 1][i]), 0.5 * 0.1 + 1e-9);
    }
  }
  // At least L / v steps from the start to the goal's near face.
  EXPECT_GE(static_cast<double>(states.size() - 1) * 0.1, 23.5 / 0.5 - 0.1);
  EXPECT_TRUE(in.goal.Contains(states.back()));
  EXPECT_EQ(planner.rebuilds(), 1u);
}

TEST(RrtPlanner, AvoidsObstaclesAndIsDeterministic) {
  const PlanningModel m = make_model("quad10d_int3d").system.planning;
  PlannerInput in;
  in.state = {-8, 0, 0};
  in.goal = Box({7, -1, -1}, {9, 1, 1});
  in.bounds = Box({-10, -5, -5}, {10, 5, 5});
  in.dt = 0.1;
  in.obstacles = {{Box({-4, -5, -5}, {-3, 3, 5}), Box({0, -3, -5}, {1, 5, 5}),
                   Box({4, -5, -5}, {5, 3, 5})}};
  RrtPlanner a(m, {}, 11);
  RrtPlanner b(m, {}, 11);
  const auto sa = Drive(a, in, m, 20000);
  const auto sb = Drive(b, in, m, 20000);
  EXPECT_EQ(sa, sb);
  EXPECT_TRUE(in.goal.Contains(sa.back()));
  for (std::size_t k = 1; k < a.path().size(); ++k) {
    for (const Box& o : in.obstacles[0]) {
      EXPECT_FALSE(SegmentHitsBox(a.path()[k - 1], a.path()[k], o));
    }
  }
}

TEST(RrtPlanner, RejectsNonIntegrators) {
  const PlanningModel car = make_model("car5d_car3d").system.planning;
  EXPECT_THROW(RrtPlanner(car, {}, 1), Error);
}

TEST(RrtPlanner, RebuildsWhenPathBlocked) {
  const PlanningModel m = make_model("quad10d_int3d").system.planning;
  RrtPlanner planner(m, {}, 3);
  PlannerInput in;
  in.state = {-5, 0, 0};
  in.goal = Box({4, -1, -1}, {6, 1, 1});
  in.bounds = Box({-6, -4, -4}, {6, 4, 4});
  in.dt = 0.1;
  in.state = planner.Next(in).next;
  in.obstacles = {{Box({-1, -4, -4}, {1, 4, 2})}};
  planner.Next(in);
  EXPECT_EQ(planner.rebuilds(), 2u);
  for (std::size_t k = 1; k < planner.path().size(); ++k) {
    EXPECT_FALSE(SegmentHitsBox(planner.path()[k - 1], planner.path()[k],
                                in.obstacles[0][0]));
  }
}

}  // namespace
}  // namespace fastrack
