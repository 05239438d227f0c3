#pragma once

#include <Eigen/Core>

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlcbot::stl {

/// Closed vocabulary of atomic predicates. Every predicate is a margin
/// mu(s(t)); it holds when mu >= 0.
enum class PredicateKind {
  DistToPointAbove,   ///< ||p_r - q||_inf - c
  DistToBoxAbove,     ///< dist_inf(p_r, box) - c
  PairwiseDistAbove,  ///< ||p_r - p_o||_inf - c
  HalfSpace,          ///< n . p_r - c
  WithinGoalRadius,   ///< r - ||p_r - g||_inf
};

struct Predicate {
  PredicateKind kind = PredicateKind::DistToPointAbove;
  int robot = 0;
  int other = -1;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();  // point, box centre, normal or goal
  Eigen::Vector2d half = Eigen::Vector2d::Zero();   // box half extents
  double threshold = 0.0;
  bool goal_bound = false;

  static Predicate dist_to_point(int robot, const Eigen::Vector2d& q, double c);
  static Predicate dist_to_box(int robot, const Eigen::Vector2d& center,
                               const Eigen::Vector2d& half, double c);
  static Predicate pairwise(int i, int j, double c);
  static Predicate half_space(int robot, const Eigen::Vector2d& normal, double c);
  static Predicate within_goal(int robot, double radius);
  static Predicate within_goal(int robot, const Eigen::Vector2d& goal, double radius);

  /// Margin given the primary robot's position and (for pairwise) the partner's.
  double margin(const Eigen::Vector2d& p, const Eigen::Vector2d& partner) const;

  /// Throws std::invalid_argument on non-finite thresholds or degenerate boxes.
  void validate() const;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Op { True, Atom, Not, And, Or, Eventually, Always, Until, Agent };

/// Immutable STL / MA-STL syntax tree. Copies share structure.
class Formula {
 public:
  static Formula truth();
  static Formula atom(Predicate p);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula disjunction(Formula a, Formula b);
  /// Balanced conjunction of one or more formulas; empty input yields `true`.
  static Formula conjunction(std::span<const Formula> fs);
  static Formula disjunction(std::span<const Formula> fs);
  static Formula eventually(Interval iv, Formula f);
  static Formula always(Interval iv, Formula f);
  static Formula until(Interval iv, Formula lhs, Formula rhs);
  static Formula agent(int robot, Formula f);

  Op op() const { return node_->op; }
  const Predicate& predicate() const;
  Interval interval() const { return node_->interval; }
  int agent_index() const { return node_->agent; }
  /// Single operand of Not/Eventually/Always/Agent, or left operand of binary ops.
  const Formula& lhs() const;
  const Formula& rhs() const;

  /// Absolute time hull over which the formula reads the signal when it is
  /// evaluated at time 0.
  Interval support() const { return node_->support; }
  /// Largest forward reach of all temporal windows (seconds).
  double reach() const { return node_->support.hi; }
  bool has_agent_atoms() const { return node_->has_agent; }

  /// Identity of the shared node; stable for the lifetime of any copy.
  const void* id() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Op op = Op::True;
    Predicate pred;
    Interval interval;
    int agent = -1;
    std::vector<Formula> children;
    Interval support;
    bool has_agent = false;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Node n);

  std::shared_ptr<const Node> node_;
};

/// Canonical, fully parenthesised text form. parse_formula(to_string(f)) == f.
std::string to_string(const Formula& f);
std::string to_string(const Predicate& p);

/// Replaces every unbound WithinGoalRadius predicate with one carrying the
/// goal of its robot. Throws std::out_of_range for robots without a goal.
Formula bind_goals(const Formula& f, std::span<const Eigen::Vector2d> goals);

/// Robot indices referenced by predicates (not by agent atoms).
std::vector<int> referenced_robots(const Formula& f);

}  // namespace stlcbot::stl
