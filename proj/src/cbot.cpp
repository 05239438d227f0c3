#include "stlcbot/cbot.hpp"

#include "stlcbot/gp/acquisition.hpp"
#include "stlcbot/gp/gaussian_process.hpp"
#include "stlcbot/stl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace stlcbot {

Vec2 PlanResult::position_at(long k) const {
  if (states.empty()) throw std::logic_error("empty plan has no positions");
  const long last = static_cast<long>(states.size()) - 1;
  return RobotModel::position(states[static_cast<std::size_t>(std::clamp(k, 0L, last))]);
}

double path_length(const Trajectory& states) {
  double len = 0.0;
  for (std::size_t k = 1; k < states.size(); ++k)
    len += (RobotModel::position(states[k]) - RobotModel::position(states[k - 1])).norm();
  return len;
}

stl::Signal plan_signal(const PlanResult& plan, int robot, double hold_until) {
  const long n = static_cast<long>(plan.states.size());
  const long held = std::max(n, static_cast<long>(std::llround(hold_until / plan.dt)) + 1);
  Eigen::Matrix<double, Eigen::Dynamic, 2> xy(held, 2);
  for (long k = 0; k < held; ++k) xy.row(k) = plan.position_at(k).transpose();
  return stl::Signal::positions(robot, xy, plan.dt);
}

void CbotParams::validate(double horizon) const {
  if (!(window_radius >= 0.0) || !std::isfinite(window_radius))
    throw PlanningError("window radius must be positive (or 0 for the default)");
  if (candidates < 2) throw PlanningError("at least two candidates per window are required");
  if (max_iterations < 1) throw PlanningError("max_iterations must be positive");
  grid_steps(step_horizon, kGridStep);
  if (!(horizon >= 3.0 && horizon <= 50.0)) throw PlanningError("plan horizon T must lie in [3, 50] s");
  if (step_horizon > horizon) throw PlanningError("propagation horizon exceeds the plan horizon");
  if (!(noise_variance >= gp::KernelHyperparams<double>::kNoiseFloor))
    throw PlanningError("noise variance below the jitter floor");
  limits.validate();
}

double CbotParams::resolved_window_radius(const RobotModel& model) const {
  if (window_radius > 0.0) return window_radius;
  return (0.5 * (model.control_upper() - model.control_lower())).norm();
}

// ---------------------------------------------------------------------------

SegmentChecker::SegmentChecker(const PlanRequest& request)
    : request_(request),
      clearance_(clearance_formula(*request.env, request.robot, request.footprint(), request.horizon)),
      hold_until_(request.horizon) {
  for (const auto& c : request.constraints) hold_until_ = std::max(hold_until_, c.support().hi);
}

stl::Signal SegmentChecker::segment_signal(const Trajectory& segment, double t0) const {
  Eigen::Matrix<double, Eigen::Dynamic, 2> xy(static_cast<Eigen::Index>(segment.size()), 2);
  for (std::size_t k = 0; k < segment.size(); ++k) xy.row(static_cast<Eigen::Index>(k)) << segment[k](0), segment[k](1);
  return stl::Signal::positions(request_.robot, xy, kGridStep, t0);
}

std::vector<int> SegmentChecker::active(double t0, double t1) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < request_.constraints.size(); ++k) {
    const stl::Interval s = request_.constraints[k].support();
    if (s.hi >= t0 - 1e-9 && s.lo <= t1 + 1e-9) out.push_back(static_cast<int>(k));
  }
  return out;
}

Eigen::VectorXd SegmentChecker::margins(const Trajectory& segment, double t0, std::span<const int> active) const {
  const stl::Signal sig = segment_signal(segment, t0);
  Eigen::VectorXd c(1 + static_cast<Eigen::Index>(active.size()));
  c(0) = -stl::segment_robustness(clearance_, sig).value_or(1.0);
  for (std::size_t k = 0; k < active.size(); ++k)
    c(static_cast<Eigen::Index>(k) + 1) =
        -stl::segment_robustness(request_.constraints[static_cast<std::size_t>(active[k])], sig).value_or(1.0);
  return c;
}

bool SegmentChecker::satisfied(const Trajectory& segment, double t0) const {
  const stl::Signal sig = segment_signal(segment, t0);
  if (stl::segment_robustness(clearance_, sig).value_or(0.0) < 0.0) return false;
  return std::all_of(request_.constraints.begin(), request_.constraints.end(), [&](const stl::Formula& f) {
    return stl::segment_robustness(f, sig).value_or(0.0) >= 0.0;
  });
}

bool SegmentChecker::hold_satisfied(const State& x, double t0) const {
  const long g0 = std::lround(t0 / kGridStep);
  const long g1 = std::lround(hold_until_ / kGridStep);
  if (g1 <= g0 || request_.constraints.empty()) return true;
  const Trajectory held(static_cast<std::size_t>(g1 - g0 + 1), x);
  const stl::Signal sig = segment_signal(held, t0);
  return std::all_of(request_.constraints.begin(), request_.constraints.end(), [&](const stl::Formula& f) {
    return stl::segment_robustness(f, sig).value_or(0.0) >= 0.0;
  });
}

// ---------------------------------------------------------------------------

CandidateEvaluation evaluate_candidate(const RobotModel& model, const SegmentChecker& checker,
                                       const PlanRequest& request, const State& x, double t0,
                                       const Control& u, double step_horizon, std::span<const int> active) {
  CandidateEvaluation e;
  try {
    e.segment = rk4_propagate(model, x, u, kGridStep, step_horizon);
  } catch (const NumericalBlowUp&) {
    e.margins = Eigen::VectorXd::Constant(1 + static_cast<Eigen::Index>(active.size()),
                                          std::numeric_limits<double>::infinity());
    return e;
  }
  e.cost = (RobotModel::position(e.segment.back()) - request.spec.goal).norm();
  e.margins = checker.margins(e.segment, t0, active);
  return e;
}

namespace {

struct Standardised {
  Eigen::VectorXd y;
  double offset;
  double scale2;
};

Standardised standardise(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  const Eigen::VectorXd y = v.array() - mean;
  const double var = y.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, v.size()));
  return {y, mean, std::max(var, 1e-6)};
}

gp::GaussianProcess<double> surrogate(const Eigen::MatrixXd& x, const Standardised& t,
                                      const Eigen::VectorXd& lengthscales, double noise, bool refine) {
  gp::KernelHyperparams<double> h{t.scale2, lengthscales, std::max(noise * t.scale2, 1e-8)};
  if (refine) h = gp::refine_lengthscales(x, t.y, h);
  return gp::GaussianProcess<double>(x, t.y, h);
}

}  // namespace

int select_control(std::span<const Control> controls, std::span<const CandidateEvaluation> evaluations,
                   double noise_variance, bool refine) {
  if (controls.size() != evaluations.size()) throw std::invalid_argument("controls and evaluations disagree");
  std::vector<int> finite;
  for (std::size_t k = 0; k < evaluations.size(); ++k)
    if (evaluations[k].finite()) finite.push_back(static_cast<int>(k));
  if (finite.empty()) return -1;
  if (finite.size() == 1) return finite.front();

  const auto n = static_cast<Eigen::Index>(finite.size());
  const Eigen::Index dim = controls[static_cast<std::size_t>(finite[0])].size();
  const Eigen::Index kc = evaluations[static_cast<std::size_t>(finite[0])].margins.size();
  gp::Dataset<double> data(dim, kc);
  for (int i : finite) data.add(controls[static_cast<std::size_t>(i)], evaluations[static_cast<std::size_t>(i)].cost,
                                evaluations[static_cast<std::size_t>(i)].margins);

  const Eigen::VectorXd spread = data.controls().colwise().maxCoeff() - data.controls().colwise().minCoeff();
  const Eigen::VectorXd lengthscales = (0.5 * spread).cwiseMax(1e-3);

  const Standardised cost = standardise(data.costs());
  const auto objective = surrogate(data.controls(), cost, lengthscales, noise_variance, refine);
  std::vector<gp::GaussianProcess<double>> constraint_models;
  std::vector<double> offsets;
  for (Eigen::Index k = 0; k < kc; ++k) {
    const Standardised c = standardise(data.constraints().col(k));
    constraint_models.push_back(surrogate(data.controls(), c, lengthscales, noise_variance, refine));
    offsets.push_back(c.offset);
  }

  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if ((data.constraints().row(i).array() <= 0.0).all()) best = std::min(best, data.costs()(i));
  if (!std::isfinite(best)) best = data.costs().minCoeff();
  const double best_centred = best - cost.offset;

  int chosen = -1;
  double chosen_cei = -1.0;
  double chosen_cost = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd u = data.controls().row(i).transpose();
    const auto po = objective.predict(u);
    double value = gp::expected_improvement(po.mean, po.variance, best_centred);
    for (Eigen::Index k = 0; k < kc && value > 0.0; ++k) {
      const auto pc = constraint_models[static_cast<std::size_t>(k)].predict(u);
      value *= gp::satisfaction_probability(pc.mean + offsets[static_cast<std::size_t>(k)], pc.variance);
    }
    const double j = data.costs()(i);
    if (value > chosen_cei || (value == chosen_cei && j < chosen_cost)) {
      chosen = finite[static_cast<std::size_t>(i)];
      chosen_cei = value;
      chosen_cost = j;
    }
  }
  return chosen;
}

int goal_arrival(const Trajectory& segment, const RobotSpec& spec) {
  for (std::size_t k = 0; k < segment.size(); ++k)
    if (norm_inf(RobotModel::position(segment[k]) - spec.goal) <= spec.goal_radius) return static_cast<int>(k);
  return -1;
}

// ---------------------------------------------------------------------------

namespace {

struct TreeNode {
  State state;
  long step;  // node time in grid steps
  int parent;
  Control control;  // incoming control (zero at the root)
  Trajectory segment;
};

PlanResult extract(const std::vector<TreeNode>& tree, int leaf) {
  std::vector<int> chain;
  for (int n = leaf; n >= 0; n = tree[static_cast<std::size_t>(n)].parent) chain.push_back(n);
  std::reverse(chain.begin(), chain.end());
  PlanResult r;
  r.states.push_back(tree.front().state);
  for (std::size_t c = 1; c < chain.size(); ++c) {
    const TreeNode& node = tree[static_cast<std::size_t>(chain[c])];
    for (std::size_t k = 1; k < node.segment.size(); ++k) {
      r.states.push_back(node.segment[k]);
      r.controls.push_back(node.control);
    }
  }
  r.path_length = path_length(r.states);
  return r;
}

}  // namespace

PlanResult cbot_plan(const PlanRequest& request, const CbotParams& params) {
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  if (request.env == nullptr) throw PlanningError("plan request has no environment");
  params.validate(request.horizon);
  const RobotModel model(request.spec.model, request.spec.limits.value_or(params.limits));
  const SegmentChecker checker(request);
  const State& x0 = request.spec.start;
  if (x0.size() != model.state_dim() || !model.state_valid(x0)) throw PlanningError("invalid start state");
  if (!checker.satisfied(Trajectory{x0}, 0.0)) throw PlanningError("start state violates the constraints");

  const double radius = params.resolved_window_radius(model);
  const long steps_per = grid_steps(params.step_horizon, kGridStep);
  const long max_steps = static_cast<long>(std::floor(request.horizon / kGridStep + 1e-9));

  std::vector<TreeNode> tree;
  tree.push_back({x0, 0, -1, model.zero_control(), Trajectory{x0}});
  double closest = (RobotModel::position(x0) - request.spec.goal).norm();

  auto finish = [&](PlanResult r, int iterations, std::vector<double> progress) {
    r.iterations = iterations;
    r.nodes = static_cast<int>(tree.size());
    r.progress = std::move(progress);
    r.wall_time = elapsed();
    return r;
  };

  if (goal_arrival(tree.front().segment, request.spec) == 0 && checker.hold_satisfied(x0, 0.0)) {
    PlanResult r = extract(tree, 0);
    r.solved = true;
    return finish(std::move(r), 0, {});
  }

  std::mt19937_64 rng(request.seed);
  std::vector<double> progress;
  int current = 0;
  Control nominal = model.zero_control();
  std::vector<Control> controls(static_cast<std::size_t>(params.candidates));
  std::vector<CandidateEvaluation> evals(static_cast<std::size_t>(params.candidates));

  auto backtrack = [&] {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(tree.size()) - 1);
    current = pick(rng);
    nominal = tree[static_cast<std::size_t>(current)].control;
  };

  int iteration = 0;
  const double budget = std::min(params.time_budget, request.time_limit);
  while (iteration < params.max_iterations && elapsed() < budget) {
    ++iteration;
    const TreeNode node = tree[static_cast<std::size_t>(current)];
    if (node.step + steps_per > max_steps) {
      backtrack();
      progress.push_back(closest);
      continue;
    }
    const double t0 = static_cast<double>(node.step) * kGridStep;
    const std::vector<int> active = checker.active(t0, t0 + params.step_horizon);
    const ControlWindow window = control_window(nominal, radius, model);
    for (std::size_t k = 0; k < controls.size(); ++k) {
      controls[k] = window.sample(rng);
      evals[k] = evaluate_candidate(model, checker, request, node.state, t0, controls[k], params.step_horizon, active);
    }
    const int chosen = select_control(controls, evals, params.noise_variance, params.refine_lengthscales);
    bool accepted = false;
    if (chosen >= 0) {
      const CandidateEvaluation& e = evals[static_cast<std::size_t>(chosen)];
      Trajectory segment = e.segment;
      const int arrival = goal_arrival(segment, request.spec);
      bool at_goal = false;
      if (arrival > 0) {
        Trajectory truncated(segment.begin(), segment.begin() + arrival + 1);
        const double t_arrive = t0 + arrival * kGridStep;
        if (checker.satisfied(truncated, t0) && checker.hold_satisfied(truncated.back(), t_arrive)) {
          segment = std::move(truncated);
          at_goal = true;
        }
      }
      if (at_goal || checker.satisfied(segment, t0)) {
        const long step = node.step + static_cast<long>(segment.size()) - 1;
        tree.push_back({segment.back(), step, current, controls[static_cast<std::size_t>(chosen)], std::move(segment)});
        current = static_cast<int>(tree.size()) - 1;
        nominal = tree.back().control;
        closest = std::min(closest, (RobotModel::position(tree.back().state) - request.spec.goal).norm());
        accepted = true;
        if (at_goal) {
          progress.push_back(closest);
          PlanResult r = extract(tree, current);
          r.solved = true;
          return finish(std::move(r), iteration, std::move(progress));
        }
      }
    }
    if (!accepted) backtrack();
    progress.push_back(closest);
  }

  // Unsolved: report the branch that came closest to the goal.
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tree.size(); ++k) {
    const double d = (RobotModel::position(tree[k].state) - request.spec.goal).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return finish(extract(tree, best), iteration, std::move(progress));
}

LowLevelPlanner make_cbot_planner(CbotParams params) {
  return [params](const PlanRequest& request) { return cbot_plan(request, params); };
}

}  // namespace stlcbot
