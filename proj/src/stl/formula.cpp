#include "stlcbot/stl/formula.hpp"

#include "stlcbot/geometry.hpp"
#include "stlcbot/stl/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace stlcbot::stl {

Predicate Predicate::dist_to_point(int robot, const Eigen::Vector2d& q, double c) {
  Predicate p;
  p.kind = PredicateKind::DistToPointAbove;
  p.robot = robot;
  p.point = q;
  p.threshold = c;
  return p;
}

Predicate Predicate::dist_to_box(int robot, const Eigen::Vector2d& center,
                                 const Eigen::Vector2d& half, double c) {
  Predicate p;
  p.kind = PredicateKind::DistToBoxAbove;
  p.robot = robot;
  p.point = center;
  p.half = half;
  p.threshold = c;
  return p;
}

Predicate Predicate::pairwise(int i, int j, double c) {
  Predicate p;
  p.kind = PredicateKind::PairwiseDistAbove;
  p.robot = i;
  p.other = j;
  p.threshold = c;
  return p;
}

Predicate Predicate::half_space(int robot, const Eigen::Vector2d& normal, double c) {
  Predicate p;
  p.kind = PredicateKind::HalfSpace;
  p.robot = robot;
  p.point = normal;
  p.threshold = c;
  return p;
}

Predicate Predicate::within_goal(int robot, double radius) {
  Predicate p;
  p.kind = PredicateKind::WithinGoalRadius;
  p.robot = robot;
  p.threshold = radius;
  return p;
}

Predicate Predicate::within_goal(int robot, const Eigen::Vector2d& goal, double radius) {
  Predicate p = within_goal(robot, radius);
  p.point = goal;
  p.goal_bound = true;
  return p;
}

double Predicate::margin(const Eigen::Vector2d& p, const Eigen::Vector2d& partner) const {
  switch (kind) {
    case PredicateKind::DistToPointAbove:
      return (p - point).cwiseAbs().maxCoeff() - threshold;
    case PredicateKind::DistToBoxAbove:
      return dist_inf(p, Box{point, half}) - threshold;
    case PredicateKind::PairwiseDistAbove:
      return (p - partner).cwiseAbs().maxCoeff() - threshold;
    case PredicateKind::HalfSpace:
      return point.dot(p) - threshold;
    case PredicateKind::WithinGoalRadius:
      if (!goal_bound) throw EvaluationError("goal predicate for robot " + std::to_string(robot) + " is unbound");
      return threshold - (p - point).cwiseAbs().maxCoeff();
  }
  return 0.0;
}

void Predicate::validate() const {
  if (!std::isfinite(threshold)) throw std::invalid_argument("predicate threshold is not finite");
  if (!point.allFinite() || !half.allFinite()) throw std::invalid_argument("predicate parameters are not finite");
  if (robot < 0) throw std::invalid_argument("negative robot index");
  if (kind == PredicateKind::DistToBoxAbove && (half.array() <= 0.0).any())
    throw std::invalid_argument("box half extents must be strictly positive");
  if (kind == PredicateKind::PairwiseDistAbove) {
    if (other < 0) throw std::invalid_argument("negative robot index");
    if (other == robot) throw std::invalid_argument("pairwise predicate needs two distinct robots");
  }
}

namespace {

Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

void check_interval(Interval iv) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
    throw std::invalid_argument("temporal interval must be bounded");
  if (iv.lo < 0.0) throw std::invalid_argument("temporal interval must start at a >= 0");
  if (iv.lo > iv.hi) throw std::invalid_argument("malformed temporal interval: a > b");
}

}  // namespace

Formula Formula::make(Node n) {
  switch (n.op) {
    case Op::True:
    case Op::Atom:
      n.support = {0.0, 0.0};
      break;
    case Op::Not:
    case Op::Agent:
      n.support = n.children[0].support();
      break;
    case Op::And:
    case Op::Or:
      n.support = hull(n.children[0].support(), n.children[1].support());
      break;
    case Op::Eventually:
    case Op::Always: {
      const Interval c = n.children[0].support();
      n.support = {n.interval.lo + c.lo, n.interval.hi + c.hi};
      break;
    }
    case Op::Until: {
      const Interval a = n.children[0].support();
      const Interval b = n.children[1].support();
      n.support = hull({a.lo, n.interval.hi + a.hi}, {n.interval.lo + b.lo, n.interval.hi + b.hi});
      break;
    }
  }
  n.has_agent = n.op == Op::Agent;
  for (const auto& c : n.children) n.has_agent = n.has_agent || c.has_agent_atoms();
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::truth() { return make(Node{}); }

Formula Formula::atom(Predicate p) {
  p.validate();
  Node n;
  n.op = Op::Atom;
  n.pred = p;
  return make(std::move(n));
}

Formula Formula::negation(Formula f) {
  Node n;
  n.op = Op::Not;
  n.children = {std::move(f)};
  return make(std::move(n));
}

Formula Formula::conjunction(Formula a, Formula b) {
  Node n;
  n.op = Op::And;
  n.children = {std::move(a), std::move(b)};
  return make(std::move(n));
}

Formula Formula::disjunction(Formula a, Formula b) {
  Node n;
  n.op = Op::Or;
  n.children = {std::move(a), std::move(b)};
  return make(std::move(n));
}

namespace {

template <class Combine>
Formula balanced(std::span<const Formula> fs, Combine combine) {
  if (fs.size() == 1) return fs[0];
  const std::size_t mid = fs.size() / 2;
  return combine(balanced(fs.first(mid), combine), balanced(fs.subspan(mid), combine));
}

}  // namespace

Formula Formula::conjunction(std::span<const Formula> fs) {
  if (fs.empty()) return truth();
  return balanced(fs, [](Formula a, Formula b) { return conjunction(std::move(a), std::move(b)); });
}

Formula Formula::disjunction(std::span<const Formula> fs) {
  if (fs.empty()) return negation(truth());
  return balanced(fs, [](Formula a, Formula b) { return disjunction(std::move(a), std::move(b)); });
}

Formula Formula::eventually(Interval iv, Formula f) {
  check_interval(iv);
  Node n;
  n.op = Op::Eventually;
  n.interval = iv;
  n.children = {std::move(f)};
  return make(std::move(n));
}

Formula Formula::always(Interval iv, Formula f) {
  check_interval(iv);
  Node n;
  n.op = Op::Always;
  n.interval = iv;
  n.children = {std::move(f)};
  return make(std::move(n));
}

Formula Formula::until(Interval iv, Formula lhs, Formula rhs) {
  check_interval(iv);
  Node n;
  n.op = Op::Until;
  n.interval = iv;
  n.children = {std::move(lhs), std::move(rhs)};
  return make(std::move(n));
}

Formula Formula::agent(int robot, Formula f) {
  if (robot < 0) throw std::invalid_argument("negative agent index");
  if (f.has_agent_atoms()) throw std::invalid_argument("agent atoms cannot be nested");
  Node n;
  n.op = Op::Agent;
  n.agent = robot;
  n.children = {std::move(f)};
  return make(std::move(n));
}

const Predicate& Formula::predicate() const {
  if (op() != Op::Atom) throw std::logic_error("formula is not an atom");
  return node_->pred;
}

const Formula& Formula::lhs() const {
  if (node_->children.empty()) throw std::logic_error("formula has no operands");
  return node_->children[0];
}

const Formula& Formula::rhs() const {
  if (node_->children.size() < 2) throw std::logic_error("formula has no right operand");
  return node_->children[1];
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op || x.agent != y.agent || !(x.interval == y.interval)) return false;
  if (x.op == Op::Atom && !(x.pred == y.pred)) return false;
  if (x.children.size() != y.children.size()) return false;
  for (std::size_t k = 0; k < x.children.size(); ++k)
    if (!(x.children[k] == y.children[k])) return false;
  return true;
}

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string iv_text(Interval iv) { return "[" + num(iv.lo) + ", " + num(iv.hi) + "]"; }

}  // namespace

std::string to_string(const Predicate& p) {
  const auto r = std::to_string(p.robot);
  switch (p.kind) {
    case PredicateKind::DistToPointAbove:
      return "dist(" + r + ", " + num(p.point.x()) + ", " + num(p.point.y()) + ") > " + num(p.threshold);
    case PredicateKind::DistToBoxAbove:
      return "distbox(" + r + ", " + num(p.point.x()) + ", " + num(p.point.y()) + ", " +
             num(p.half.x()) + ", " + num(p.half.y()) + ") > " + num(p.threshold);
    case PredicateKind::PairwiseDistAbove:
      return "pairdist(" + r + ", " + std::to_string(p.other) + ") > " + num(p.threshold);
    case PredicateKind::HalfSpace:
      return "half(" + r + ", " + num(p.point.x()) + ", " + num(p.point.y()) + ") > " + num(p.threshold);
    case PredicateKind::WithinGoalRadius:
      if (p.goal_bound)
        return "goal(" + r + ", " + num(p.point.x()) + ", " + num(p.point.y()) + ") < " + num(p.threshold);
      return "goal(" + r + ") < " + num(p.threshold);
  }
  return {};
}

std::string to_string(const Formula& f) {
  switch (f.op()) {
    case Op::True:
      return "true";
    case Op::Atom:
      return to_string(f.predicate());
    case Op::Not:
      return "!" + to_string(f.lhs());
    case Op::And:
      return "(" + to_string(f.lhs()) + " & " + to_string(f.rhs()) + ")";
    case Op::Or:
      return "(" + to_string(f.lhs()) + " | " + to_string(f.rhs()) + ")";
    case Op::Eventually:
      return "F" + iv_text(f.interval()) + " " + to_string(f.lhs());
    case Op::Always:
      return "G" + iv_text(f.interval()) + " " + to_string(f.lhs());
    case Op::Until:
      return "(" + to_string(f.lhs()) + " U" + iv_text(f.interval()) + " " + to_string(f.rhs()) + ")";
    case Op::Agent:
      return "agent(" + std::to_string(f.agent_index()) + "): " + to_string(f.lhs());
  }
  return {};
}

Formula bind_goals(const Formula& f, std::span<const Eigen::Vector2d> goals) {
  switch (f.op()) {
    case Op::True:
      return f;
    case Op::Atom: {
      const auto& p = f.predicate();
      if (p.kind != PredicateKind::WithinGoalRadius || p.goal_bound) return f;
      if (p.robot >= static_cast<int>(goals.size()))
        throw std::out_of_range("no goal for robot " + std::to_string(p.robot));
      return Formula::atom(Predicate::within_goal(p.robot, goals[p.robot], p.threshold));
    }
    case Op::Not:
      return Formula::negation(bind_goals(f.lhs(), goals));
    case Op::And:
      return Formula::conjunction(bind_goals(f.lhs(), goals), bind_goals(f.rhs(), goals));
    case Op::Or:
      return Formula::disjunction(bind_goals(f.lhs(), goals), bind_goals(f.rhs(), goals));
    case Op::Eventually:
      return Formula::eventually(f.interval(), bind_goals(f.lhs(), goals));
    case Op::Always:
      return Formula::always(f.interval(), bind_goals(f.lhs(), goals));
    case Op::Until:
      return Formula::until(f.interval(), bind_goals(f.lhs(), goals), bind_goals(f.rhs(), goals));
    case Op::Agent:
      return Formula::agent(f.agent_index(), bind_goals(f.lhs(), goals));
  }
  return f;
}

namespace {

void collect_robots(const Formula& f, std::set<int>& out) {
  if (f.op() == Op::Atom) {
    out.insert(f.predicate().robot);
    if (f.predicate().kind == PredicateKind::PairwiseDistAbove) out.insert(f.predicate().other);
    return;
  }
  if (f.op() == Op::True) return;
  collect_robots(f.lhs(), out);
  if (f.op() == Op::And || f.op() == Op::Or || f.op() == Op::Until) collect_robots(f.rhs(), out);
}

}  // namespace

std::vector<int> referenced_robots(const Formula& f) {
  std::set<int> out;
  collect_robots(f, out);
  return {out.begin(), out.end()};
}

}  // namespace stlcbot::stl
