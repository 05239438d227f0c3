#include "doctest.h"

#include "stlcbot/cbot.hpp"
#include "stlcbot/stl/eval.hpp"
#include "stlcbot/stl/parser.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace stlcbot;

namespace {

Environment open_field(double half = 10.0) {
  Environment env;
  env.name = "field";
  env.bounds = Box{Vec2::Zero(), Vec2(half, half)};
  env.d_min = 0.1;
  return env;
}

RobotSpec unicycle_robot(const Vec2& start, const Vec2& goal, double heading = 0.0) {
  RobotSpec r;
  r.start = State(5);
  r.start << start.x(), start.y(), heading, 0.0, 0.0;
  r.goal = goal;
  r.size = 0.2;
  r.goal_radius = 0.3;
  return r;
}

RobotSpec integrator_robot(const Vec2& start, const Vec2& goal) {
  RobotSpec r;
  r.model = ModelKind::SingleIntegrator2D;
  r.start = State(2);
  r.start << start.x(), start.y();
  r.goal = goal;
  r.size = 0.2;
  r.goal_radius = 0.3;
  return r;
}

PlanRequest request_for(const RobotSpec& spec, const Environment& env, std::uint64_t seed = 0,
                        double horizon = 50.0, double epsilon = 0.05) {
  PlanRequest q;
  q.robot = 0;
  q.spec = spec;
  q.env = &env;
  q.epsilon = epsilon;
  q.horizon = horizon;
  q.seed = seed;
  return q;
}

Control control(double a, double b) {
  Control u(2);
  u << a, b;
  return u;
}

CandidateEvaluation synthetic(double cost, std::initializer_list<double> margins) {
  CandidateEvaluation e;
  e.cost = cost;
  e.margins = Eigen::VectorXd(static_cast<Eigen::Index>(margins.size()));
  Eigen::Index k = 0;
  for (double m : margins) e.margins(k++) = m;
  return e;
}

/// Robustness of a formula on the whole plan held at its final state to the horizon.
double plan_robustness(const stl::Formula& f, const PlanResult& plan, double horizon) {
  return stl::eval_robustness(f, plan_signal(plan, 0, horizon), 0.0);
}

}  // namespace

TEST_CASE("parameter validation") {
  CbotParams p;
  CHECK_NOTHROW(p.validate(50.0));
  CHECK_THROWS_AS(p.validate(2.0), PlanningError);
  CHECK_THROWS_AS(p.validate(60.0), PlanningError);
  p.candidates = 1;
  CHECK_THROWS_AS(p.validate(10.0), PlanningError);
  p = {};
  p.step_horizon = 0.25;
  CHECK_THROWS_AS(p.validate(10.0), std::invalid_argument);
  p = {};
  CHECK(p.resolved_window_radius(RobotModel()) == doctest::Approx(std::hypot(0.5, 2.0472)));
  p.window_radius = 0.3;
  CHECK(p.resolved_window_radius(RobotModel()) == 0.3);
}

TEST_CASE("candidate cost and margins") {
  const Environment env = open_field();
  const RobotModel model;
  RobotSpec spec = unicycle_robot({0, 0}, {5, 0});
  spec.start(3) = 0.5;
  const PlanRequest q = request_for(spec, env);
  const SegmentChecker checker(q);

  SUBCASE("accelerating toward the goal beats braking") {
    const auto go = evaluate_candidate(model, checker, q, spec.start, 0.0, control(0.5, 0), 1.0, {});
    const auto stop = evaluate_candidate(model, checker, q, spec.start, 0.0, control(-0.5, 0), 1.0, {});
    CHECK(go.cost < stop.cost);
    CHECK(go.feasible());
    CHECK(go.segment.size() == 11);
    CHECK(go.cost == doctest::Approx((RobotModel::position(go.segment.back()) - spec.goal).norm()));
  }
  SUBCASE("grazing an obstacle at exactly the clearance gives a zero margin") {
    Environment with_box = open_field();
    with_box.obstacles.push_back(Box{Vec2(1.0, 0.55), Vec2(0.25, 0.25)});
    const RobotSpec integ = integrator_robot({0, 0}, {5, 0});
    const PlanRequest qi = request_for(integ, with_box, 0, 50.0, 0.0);  // footprint 0.2 + 0.1 clearance
    const SegmentChecker ci(qi);
    const RobotModel im(ModelKind::SingleIntegrator2D);
    const auto e = evaluate_candidate(im, ci, qi, integ.start, 0.0, control(1.0, 0.0), 2.0, {});
    CHECK(e.margins(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.margins.size() == 1);
  }
  SUBCASE("a violated imposed constraint yields the negated robustness") {
    PlanRequest qc = q;
    qc.constraints.push_back(stl::parse_formula("G[0,5] dist(0, 0.6, 0) > 0.5"));
    const SegmentChecker cc(qc);
    const std::vector<int> active = cc.active(0.0, 1.0);
    REQUIRE(active.size() == 1);
    const auto e = evaluate_candidate(model, cc, qc, spec.start, 0.0, control(0.5, 0), 1.0, active);
    REQUIRE(e.margins.size() == 2);
    CHECK(e.margins(1) > 0.0);
    const double rho = *stl::segment_robustness(qc.constraints[0], cc.segment_signal(e.segment, 0.0));
    CHECK(e.margins(1) == -rho);
    CHECK_FALSE(e.feasible());
  }
  SUBCASE("constraints outside the segment time are inactive") {
    PlanRequest qc = q;
    qc.constraints.push_back(stl::parse_formula("G[10,12] dist(0, 0, 0) > 1"));
    const SegmentChecker cc(qc);
    CHECK(cc.active(0.0, 1.0).empty());
    CHECK(cc.active(9.5, 10.5).size() == 1);
  }
}

TEST_CASE("control selection") {
  const std::vector<Control> two{control(0.1, 0.0), control(-0.2, 0.3)};
  SUBCASE("a single finite candidate is chosen") {
    const std::vector<Control> one{control(0.1, 0.2)};
    const std::vector<CandidateEvaluation> e{synthetic(1.0, {-0.5})};
    CHECK(select_control(one, e) == 0);
  }
  SUBCASE("non-finite candidates are skipped or signal failure") {
    const std::vector<CandidateEvaluation> e{synthetic(1.0, {std::numeric_limits<double>::infinity()}),
                                             synthetic(2.0, {-0.5})};
    CHECK(select_control(two, e) == 1);
    const std::vector<CandidateEvaluation> none{synthetic(1.0, {std::numeric_limits<double>::infinity()}),
                                                synthetic(std::numeric_limits<double>::infinity(), {0.0})};
    CHECK(select_control(two, none) == -1);
  }
  SUBCASE("widely infeasible candidates fall back to the lowest cost") {
    std::vector<Control> us;
    std::vector<CandidateEvaluation> es;
    for (int k = 0; k < 8; ++k) {
      us.push_back(control(-0.4 + 0.1 * k, 0.2 * std::sin(k)));
      es.push_back(synthetic(3.0 + std::cos(3.0 * k), {50.0 + 0.1 * k}));
    }
    int lowest = 0;
    for (int k = 1; k < 8; ++k)
      if (es[static_cast<std::size_t>(k)].cost < es[static_cast<std::size_t>(lowest)].cost) lowest = k;
    CHECK(select_control(us, es) == lowest);
  }
  SUBCASE("exact ties go to the lower index") {
    const std::vector<CandidateEvaluation> e{synthetic(1.0, {50.0}), synthetic(1.0, {50.0})};
    CHECK(select_control(two, e) == 0);
  }
  SUBCASE("a dominant feasible candidate wins") {
    std::vector<Control> us;
    std::vector<CandidateEvaluation> es;
    for (int k = 0; k < 10; ++k) {
      us.push_back(control(-0.45 + 0.1 * k, 1.5 - 0.3 * k));
      es.push_back(synthetic(4.0 + 0.05 * k, {0.4 + 0.01 * k}));
    }
    es[6] = synthetic(2.0, {-0.3});
    CHECK(select_control(us, es) == 6);
  }
}

TEST_CASE("goal arrival uses the max norm") {
  const RobotSpec r = unicycle_robot({0, 0}, {1, 1});
  Trajectory seg(3, r.start);
  seg[1](0) = 0.75;
  seg[1](1) = 0.75;  // |(-0.25, -0.25)|_inf within 0.3
  CHECK(goal_arrival(seg, r) == 1);
  seg[1](0) = 0.6;
  CHECK(goal_arrival(seg, r) == -1);
}

TEST_CASE("a start inside the goal region is solved immediately") {
  const Environment env = open_field();
  const PlanResult r = cbot_plan(request_for(unicycle_robot({1, 1}, {1.1, 0.9}), env));
  CHECK(r.solved);
  CHECK(r.states.size() == 1);
  CHECK(r.controls.empty());
  CHECK(r.path_length == 0.0);
  CHECK(r.duration() == 0.0);
}

TEST_CASE("a straight five metre task is solved with a short path") {
  const Environment env = open_field();
  const PlanResult r = cbot_plan(request_for(unicycle_robot({-2.5, 0}, {2.5, 0}), env));
  REQUIRE(r.solved);
  CHECK(r.path_length <= 1.5 * 5.0);
  CHECK(norm_inf(r.position_at(static_cast<long>(r.states.size()) - 1) - Vec2(2.5, 0)) <= 0.3);
}

TEST_CASE("the five metre task is solved on every seed without runaway detours") {
  // Seeds that narrowly miss the goal box loop back around it, so individual
  // paths may exceed 1.5x the straight-line distance; none should run away.
  const Environment env = open_field();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PlanResult r = cbot_plan(request_for(unicycle_robot({-2.5, 0}, {2.5, 0}), env, seed));
    CAPTURE(seed);
    REQUIRE(r.solved);
    CHECK(r.path_length >= 5.0 - 2 * 0.3);
    CHECK(r.path_length <= 3.0 * 5.0);
  }
}

TEST_CASE("an enclosed start cannot be solved and never leaves its pen") {
  Environment env = open_field();
  env.obstacles = {Box{Vec2(0, 2), Vec2(2.5, 0.5)}, Box{Vec2(0, -2), Vec2(2.5, 0.5)},
                   Box{Vec2(2, 0), Vec2(0.5, 1.5)}, Box{Vec2(-2, 0), Vec2(0.5, 1.5)}};
  CbotParams p;
  p.max_iterations = 150;
  const PlanRequest q = request_for(unicycle_robot({0, 0}, {6, 6}), env, 3);
  const PlanResult r = cbot_plan(q, p);
  CHECK_FALSE(r.solved);
  CHECK(r.iterations == 150);
  CHECK(segment_clear(env, r.states, q.footprint()));
  for (const State& s : r.states) CHECK(norm_inf(RobotModel::position(s)) < 1.5);
}

TEST_CASE("invalid starts are rejected") {
  Environment env = open_field();
  env.obstacles.push_back(Box{Vec2(0, 0), Vec2(1, 1)});
  CHECK_THROWS_AS(cbot_plan(request_for(unicycle_robot({0, 0}, {5, 5}), env)), PlanningError);
  RobotSpec fast = unicycle_robot({-5, -5}, {5, 5});
  fast.start(3) = 3.0;  // above v_max
  CHECK_THROWS_AS(cbot_plan(request_for(fast, env)), PlanningError);
  PlanRequest q = request_for(unicycle_robot({-5, -5}, {5, 5}), env);
  q.env = nullptr;
  CHECK_THROWS_AS(cbot_plan(q), PlanningError);
}

TEST_CASE("returned plans are safe, on the grid and reproducible") {
  const Scenario sc = make_scenario(EnvironmentKind::Forest, 1, 2);
  const RobotModel model;
  PlanRequest q = request_for(sc.robots[0], sc.env, 11, sc.horizon, sc.epsilon);
  // An extra keep-out region in the middle of the workspace.
  q.constraints.push_back(stl::parse_formula("G[0,50] distbox(0, 0, 0, 2, 2) > 0.3"));
  const PlanResult a = cbot_plan(q);
  const PlanResult b = cbot_plan(q);
  REQUIRE(a.solved);

  SUBCASE("determinism") {
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK((a.states[k].array() == b.states[k].array()).all());
    CHECK(a.path_length == b.path_length);
    CHECK(a.iterations == b.iterations);
  }
  SUBCASE("grid integrity: each sample is one RK4 step of its control") {
    REQUIRE(a.controls.size() + 1 == a.states.size());
    CHECK(a.dt == kGridStep);
    for (std::size_t k = 0; k < a.controls.size(); ++k) {
      CHECK(model.control_admissible(a.controls[k]));
      const Trajectory step = rk4_propagate(model, a.states[k], a.controls[k], kGridStep, kGridStep);
      CHECK((step.back().array() == a.states[k + 1].array()).all());
    }
    CHECK(a.duration() <= q.horizon + 1e-9);
  }
  SUBCASE("monitor re-validation of static clearance and the extra constraint") {
    const stl::Formula clearance = clearance_formula(sc.env, 0, q.footprint(), q.horizon);
    CHECK(plan_robustness(clearance, a, q.horizon) >= 0.0);
    CHECK(plan_robustness(q.constraints[0], a, q.horizon) >= 0.0);
    CHECK(segment_clear(sc.env, a.states, q.footprint()));
    CHECK(a.path_length == doctest::Approx(path_length(a.states)));
  }
}

TEST_CASE("median distance-to-goal over seeded runs never increases") {
  const Environment env = make_environment(EnvironmentKind::Empty, 0);
  std::vector<std::vector<double>> runs;
  std::size_t longest = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PlanResult r = cbot_plan(request_for(unicycle_robot({-8, -3}, {8, 4}), env, seed));
    CHECK(r.solved);
    runs.push_back(r.progress);
    longest = std::max(longest, r.progress.size());
  }
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < longest; ++it) {
    std::vector<double> column;
    for (const auto& run : runs) column.push_back(run.empty() ? 0.0 : run[std::min(it, run.size() - 1)]);
    std::nth_element(column.begin(), column.begin() + 10, column.end());
    const double median = column[10];
    CHECK(median <= previous);
    previous = median;
  }
  CHECK(previous <= 0.3 * std::sqrt(2.0));
}

TEST_CASE("plan signals hold the final position") {
  const Environment env = open_field();
  const PlanResult r = cbot_plan(request_for(unicycle_robot({-2, 0}, {2, 0}), env, 1));
  REQUIRE(r.solved);
  const stl::Signal s = plan_signal(r, 3, r.duration() + 2.0);
  CHECK(s.size() == static_cast<Eigen::Index>(r.states.size()) + 20);
  CHECK(s.position(3, s.size() - 1) == r.position_at(static_cast<long>(r.states.size()) - 1));
  CHECK(r.position_at(100000) == r.position_at(static_cast<long>(r.states.size()) - 1));
}

TEST_CASE("a caller time limit stops the search") {
  const Environment env = open_field();
  PlanRequest q = request_for(unicycle_robot({-2.5, 0}, {2.5, 0}), env);
  q.time_limit = 0.0;
  const PlanResult r = cbot_plan(q);
  CHECK_FALSE(r.solved);
  CHECK(r.iterations == 0);
  CHECK(r.states.size() == 1);
}

TEST_CASE("factory wraps the planner") {
  const Environment env = open_field();
  const LowLevelPlanner planner = make_cbot_planner();
  const PlanRequest q = request_for(unicycle_robot({-2, 0}, {2, 0}), env, 4);
  const PlanResult a = planner(q);
  const PlanResult b = cbot_plan(q);
  CHECK(a.solved == b.solved);
  CHECK(a.path_length == b.path_length);
}
