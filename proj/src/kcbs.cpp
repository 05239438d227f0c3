#include "stlcbot/kcbs.hpp"

#include "stlcbot/stl/eval.hpp"
#include "stlcbot/stl/monitor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace stlcbot {

double pair_threshold(double s_i, double s_j, double epsilon, double d_min) {
  return s_i + s_j + 2.0 * epsilon + d_min;
}

stl::Formula pair_safety_formula(int i, int j, double d_min, double s_i, double s_j, double epsilon,
                                 double horizon) {
  if (i == j) throw std::invalid_argument("pair safety needs two distinct robots");
  return stl::Formula::always(
      {0.0, horizon}, stl::Formula::atom(stl::Predicate::pairwise(i, j, pair_threshold(s_i, s_j, epsilon, d_min))));
}

std::vector<SafetyPair> team_safety(const Scenario& sc) {
  std::vector<SafetyPair> pairs;
  for (int i = 0; i < sc.team_size(); ++i)
    for (int j = i + 1; j < sc.team_size(); ++j) {
      const double si = sc.robots[static_cast<std::size_t>(i)].size;
      const double sj = sc.robots[static_cast<std::size_t>(j)].size;
      pairs.push_back({i, j, si, sj, 2.0 * sc.epsilon + sc.env.d_min,
                       pair_safety_formula(i, j, sc.env.d_min, si, sj, sc.epsilon, sc.horizon)});
    }
  return pairs;
}

namespace {

long common_length(std::span<const PlanResult> plans) {
  if (plans.empty()) return 0;
  const double dt = plans.front().dt;
  long n = 0;
  for (const PlanResult& p : plans) {
    if (std::abs(p.dt - dt) > 1e-12) throw std::invalid_argument("plans are not on a shared time grid");
    if (p.states.empty()) throw std::invalid_argument("conflict search needs non-empty plans");
    n = std::max(n, static_cast<long>(p.states.size()));
  }
  return n;
}

void check_pair(const SafetyPair& pr, std::size_t plans) {
  if (pr.i < 0 || pr.j < 0 || static_cast<std::size_t>(std::max(pr.i, pr.j)) >= plans || pr.i == pr.j)
    throw std::invalid_argument("safety pair references a robot without a plan");
}

}  // namespace

std::vector<Conflict> stl_conflict_search(std::span<const PlanResult> plans, std::span<const SafetyPair> pairs) {
  const long length = common_length(plans);
  std::vector<Conflict> out;
  for (const SafetyPair& pr : pairs) {
    check_pair(pr, plans.size());
    const int a = std::min(pr.i, pr.j);
    const int b = std::max(pr.i, pr.j);
    const stl::Formula& phi = pr.formula;
    // mu(t) is the instantaneous robustness of the always-body at t.
    const stl::Formula body = phi.op() == stl::Op::Always ? phi.lhs() : phi;
    const long last = phi.op() == stl::Op::Always
                          ? std::min(length - 1, stl::universal_window(phi.interval(), plans[0].dt).hi)
                          : length - 1;
    stl::Monitor mu(body, plans[0].dt, 0.0, stl::SignalLayout{{a, b}, 2, 1});
    Eigen::VectorXd x(5);
    for (long t = 0; t < length; ++t) {
      const Vec2 pa = plans[static_cast<std::size_t>(a)].position_at(t);
      const Vec2 pb = plans[static_cast<std::size_t>(b)].position_at(t);
      x << static_cast<double>(t) * plans[0].dt, pa.x(), pa.y(), pb.x(), pb.y();
      mu.add_sample(x);
      if (t <= last && mu.robustness_at(t) < 0.0) out.push_back({a, b, t, t});
    }
  }
  return out;
}

std::vector<Conflict> geometric_conflict_search(std::span<const PlanResult> plans, std::span<const SafetyPair> pairs) {
  const long length = common_length(plans);
  std::vector<Conflict> out;
  for (const SafetyPair& pr : pairs) {
    check_pair(pr, plans.size());
    const int a = std::min(pr.i, pr.j);
    const int b = std::max(pr.i, pr.j);
    for (long t = 0; t < length; ++t)
      if (footprints_overlap(plans[static_cast<std::size_t>(pr.i)].position_at(t), pr.s_i,
                             plans[static_cast<std::size_t>(pr.j)].position_at(t), pr.s_j, pr.margin))
        out.push_back({a, b, t, t});
  }
  return out;
}

std::vector<Conflict> coalesce(std::span<const Conflict> conflicts) {
  std::vector<Conflict> sorted(conflicts.begin(), conflicts.end());
  std::sort(sorted.begin(), sorted.end(), [](const Conflict& x, const Conflict& y) {
    return std::tie(x.i, x.j, x.t) < std::tie(y.i, y.j, y.t);
  });
  std::vector<Conflict> out;
  for (const Conflict& c : sorted) {
    if (!out.empty() && out.back().i == c.i && out.back().j == c.j && c.t <= out.back().t_end + 1)
      out.back().t_end = std::max(out.back().t_end, c.t_end);
    else
      out.push_back(c);
  }
  return out;
}

stl::Formula moving_keep_out(int robot, const PlanResult& other, double threshold, long from, long to) {
  std::vector<stl::Formula> parts;
  for (long k = std::max(0L, from); k <= to; ++k) {
    const double tau = static_cast<double>(k) * other.dt;
    parts.push_back(stl::Formula::always(
        {tau, tau}, stl::Formula::atom(stl::Predicate::dist_to_point(robot, other.position_at(k), threshold))));
  }
  return stl::Formula::conjunction(parts);
}

StlConstraint constraint_from_conflict(const Conflict& conflict, int robot, const PlanResult& other_plan,
                                       double threshold, double padding, double horizon) {
  if (robot != conflict.i && robot != conflict.j) throw std::invalid_argument("robot is not part of the conflict");
  const double dt = other_plan.dt;
  const long pad = std::lround(padding / dt);
  const long last = static_cast<long>(std::floor(horizon / dt + 1e-9));
  const long from = std::max(0L, conflict.t - pad);
  const long to = std::min(last, conflict.t_end + pad);
  return {robot, moving_keep_out(robot, other_plan, threshold, from, to), conflict};
}

PlanValidation validate_plan(const Scenario& sc, std::span<const PlanResult> plans) {
  if (static_cast<int>(plans.size()) != sc.team_size()) throw std::invalid_argument("one plan per robot is required");
  PlanValidation v;
  const long length = common_length(plans);
  const double dt = plans.empty() ? kGridStep : plans.front().dt;

  double safety = std::numeric_limits<double>::infinity();
  const auto pairs = team_safety(sc);
  if (!pairs.empty()) {
    Eigen::MatrixXd team(length, 2 * sc.team_size());
    for (long k = 0; k < length; ++k)
      for (int r = 0; r < sc.team_size(); ++r) team.block(k, 2 * r, 1, 2) = plans[static_cast<std::size_t>(r)].position_at(k).transpose();
    const stl::Signal signal(team, dt);
    for (const SafetyPair& pr : pairs) safety = std::min(safety, stl::eval_robustness(pr.formula, signal, 0.0));
  }

  std::vector<stl::Signal> signals;
  std::vector<stl::Formula> clear;
  std::vector<stl::Formula> reach;
  for (int r = 0; r < sc.team_size(); ++r) {
    const RobotSpec& spec = sc.robots[static_cast<std::size_t>(r)];
    signals.push_back(plan_signal(plans[static_cast<std::size_t>(r)], r));
    clear.push_back(stl::Formula::agent(r, clearance_formula(sc.env, r, spec.size + sc.epsilon, sc.horizon)));
    reach.push_back(stl::Formula::agent(
        r, stl::Formula::eventually({0.0, sc.horizon},
                                    stl::Formula::atom(stl::Predicate::within_goal(r, spec.goal, spec.goal_radius)))));
  }
  const double clearance = stl::ma_stl_robustness(stl::Formula::conjunction(clear), signals);
  v.reach_robustness = stl::ma_stl_robustness(stl::Formula::conjunction(reach), signals);
  v.min_robustness = std::min(safety, clearance);
  v.satisfied = v.min_robustness >= 0.0 && v.reach_robustness >= 0.0;
  return v;
}

PlanRequest make_request(const Scenario& sc, int robot, std::vector<stl::Formula> constraints, std::uint64_t seed) {
  PlanRequest r;
  r.robot = robot;
  r.spec = sc.robots[static_cast<std::size_t>(robot)];
  r.env = &sc.env;
  r.epsilon = sc.epsilon;
  r.horizon = sc.horizon;
  r.constraints = std::move(constraints);
  r.seed = seed;
  return r;
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct TreeNode {
  std::vector<std::vector<stl::Formula>> constraints;
  std::vector<PlanResult> plans;
  double cost = 0.0;
  long id = 0;
};

struct ByCost {
  bool operator()(const TreeNode* a, const TreeNode* b) const {
    return std::tie(a->cost, a->id) > std::tie(b->cost, b->id);
  }
};

double total_cost(const std::vector<PlanResult>& plans) {
  double c = 0.0;
  for (const auto& p : plans) c += p.path_length;
  return c;
}

class Search {
 public:
  Search(const Scenario& sc, const LowLevelPlanner& planner, const KcbsParams& params)
      : sc_(sc), planner_(planner), params_(params), pairs_(team_safety(sc)) {
    for (int r = 0; r < sc.team_size(); ++r) unit_of_.push_back(r);
  }

  MultiRobotPlan run() {
    MultiRobotPlan out;
    std::vector<PlanResult> root_plans(static_cast<std::size_t>(sc_.team_size()));
    std::vector<bool> have_root(root_plans.size(), false);

    for (;;) {
      // fresh root: units without a cached root plan are (re)planned
      auto root = std::make_unique<TreeNode>();
      root->constraints.assign(root_plans.size(), {});
      root->plans = root_plans;
      for (int u : units()) {
        const auto members = members_of(u);
        if (std::all_of(members.begin(), members.end(), [&](int m) { return have_root[static_cast<std::size_t>(m)]; }))
          continue;
        bool ok = false;
        for (int attempt = 0; attempt < params_.root_attempts && !ok && !out_of_time(); ++attempt)
          ok = plan_unit(u, *root, mix(params_.seed, 1000003ULL * static_cast<std::uint64_t>(u) + attempt));
        if (!ok) return finish(std::move(out), nullptr, "root plan failed for unit " + std::to_string(u));
        for (int m : members) {
          root_plans[static_cast<std::size_t>(m)] = root->plans[static_cast<std::size_t>(m)];
          have_root[static_cast<std::size_t>(m)] = true;
        }
      }
      root->cost = total_cost(root->plans);
      root->id = next_id_++;

      std::vector<std::unique_ptr<TreeNode>> storage;
      std::priority_queue<TreeNode*, std::vector<TreeNode*>, ByCost> open;
      storage.push_back(std::move(root));
      open.push(storage.back().get());

      bool restart = false;
      while (!open.empty() && !restart) {
        if (out_of_time()) return finish(std::move(out), nullptr, budget_note("time budget exhausted", open.size()));
        if (out.nodes_expanded >= params_.node_budget)
          return finish(std::move(out), nullptr, budget_note("node budget exhausted", open.size()));
        TreeNode* node = open.top();
        open.pop();
        ++out.nodes_expanded;

        const auto raw = params_.detector == ConflictDetector::Stl ? stl_conflict_search(node->plans, pairs_)
                                                                   : geometric_conflict_search(node->plans, pairs_);
        if (raw.empty()) return finish(std::move(out), node, "");
        const auto intervals = coalesce(raw);
        const Conflict first = *std::min_element(intervals.begin(), intervals.end(), [](const Conflict& a, const Conflict& b) {
          return std::tie(a.t, a.i, a.j) < std::tie(b.t, b.i, b.j);
        });
        ++out.conflicts_resolved;

        const auto key = std::minmax(unit_of_[static_cast<std::size_t>(first.i)], unit_of_[static_cast<std::size_t>(first.j)]);
        int& count = counters_[key];
        ++count;
        max_count_ = std::max(max_count_, count);
        if (key.first != key.second && count > params_.merge_bound) {
          merge(key.first, key.second);
          ++out.merges;
          for (int m : members_of(key.first)) have_root[static_cast<std::size_t>(m)] = false;
          restart = true;
          break;
        }

        const double threshold = pair_threshold(sc_.robots[static_cast<std::size_t>(first.i)].size,
                                                sc_.robots[static_cast<std::size_t>(first.j)].size, sc_.epsilon,
                                                sc_.env.d_min);
        for (int r : {first.i, first.j}) {
          const int other = r == first.i ? first.j : first.i;
          const StlConstraint c = constraint_from_conflict(first, r, node->plans[static_cast<std::size_t>(other)],
                                                           threshold, params_.padding, sc_.horizon);
          auto child = std::make_unique<TreeNode>(*node);
          child->constraints[static_cast<std::size_t>(r)].push_back(c.formula);
          if (!plan_unit(unit_of_[static_cast<std::size_t>(r)], *child, mix(params_.seed, static_cast<std::uint64_t>(next_id_) + 7919ULL)))
            continue;
          child->cost = total_cost(child->plans);
          child->id = next_id_++;
          storage.push_back(std::move(child));
          open.push(storage.back().get());
        }
      }
      if (!restart) return finish(std::move(out), nullptr, "constraint tree exhausted");
    }
  }

 private:
  std::vector<int> units() const {
    std::vector<int> u(unit_of_.begin(), unit_of_.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  }

  std::vector<int> members_of(int unit) const {
    std::vector<int> m;
    for (std::size_t r = 0; r < unit_of_.size(); ++r)
      if (unit_of_[r] == unit) m.push_back(static_cast<int>(r));
    return m;
  }

  void merge(int a, int b) {
    const int into = std::min(a, b);
    const int from = std::max(a, b);
    for (int& u : unit_of_)
      if (u == from) u = into;
    for (auto it = counters_.begin(); it != counters_.end();)
      if (it->first.first == a || it->first.second == a || it->first.first == b || it->first.second == b)
        it = counters_.erase(it);
      else
        ++it;
  }

  /// Internal prioritisation: members in ascending index, each keeping out of
  /// the already planned members over [0, T].
  bool plan_unit(int unit, TreeNode& node, std::uint64_t seed) {
    const auto members = members_of(unit);
    const long last = static_cast<long>(std::floor(sc_.horizon / kGridStep + 1e-9));
    for (std::size_t k = 0; k < members.size(); ++k) {
      const int m = members[k];
      std::vector<stl::Formula> cs = node.constraints[static_cast<std::size_t>(m)];
      for (std::size_t q = 0; q < k; ++q) {
        const int p = members[q];
        cs.push_back(moving_keep_out(m, node.plans[static_cast<std::size_t>(p)],
                                     pair_threshold(sc_.robots[static_cast<std::size_t>(m)].size,
                                                    sc_.robots[static_cast<std::size_t>(p)].size, sc_.epsilon,
                                                    sc_.env.d_min),
                                     0, last));
      }
      PlanRequest request = make_request(sc_, m, std::move(cs), mix(seed, static_cast<std::uint64_t>(m)));
      request.time_limit = remaining_time();
      PlanResult r = planner_(request);
      if (!r.solved) return false;
      node.plans[static_cast<std::size_t>(m)] = std::move(r);
    }
    return true;
  }

  double remaining_time() const {
    return params_.time_budget - std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  }

  bool out_of_time() const { return remaining_time() < 0.0; }

  std::string budget_note(const std::string& what, std::size_t open) const {
    std::ostringstream s;
    s << what << " (open list " << open << ", max pair conflict count " << max_count_ << ")";
    return s.str();
  }

  MultiRobotPlan finish(MultiRobotPlan out, const TreeNode* solution, std::string diagnostics) {
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    out.diagnostics = std::move(diagnostics);
    if (solution == nullptr) return out;
    out.plans = solution->plans;
    out.cost = solution->cost;
    const PlanValidation v = validate_plan(sc_, out.plans);
    out.solved = v.satisfied;
    if (!v.satisfied) out.diagnostics = "conflict-free plan failed validation";
    return out;
  }

  const Scenario& sc_;
  const LowLevelPlanner& planner_;
  KcbsParams params_;
  std::vector<SafetyPair> pairs_;
  std::vector<int> unit_of_;
  std::map<std::pair<int, int>, int> counters_;
  int max_count_ = 0;
  long next_id_ = 0;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

}  // namespace

MultiRobotPlan kcbs_solve(const Scenario& scenario, const LowLevelPlanner& planner, const KcbsParams& params) {
  scenario.validate();
  if (params.merge_bound < 0) throw std::invalid_argument("merge bound must be nonnegative");
  return Search(scenario, planner, params).run();
}

}  // namespace stlcbot
