#include "stlcbot/stl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace stlcbot::stl {

namespace {

constexpr double kGridTol = 1e-9;

}  // namespace

IndexWindow universal_window(Interval iv, double dt) {
  return {static_cast<long>(std::floor(iv.lo / dt + kGridTol)),
          static_cast<long>(std::ceil(iv.hi / dt - kGridTol))};
}

IndexWindow existential_window(Interval iv, double dt) {
  return {static_cast<long>(std::ceil(iv.lo / dt - kGridTol)),
          static_cast<long>(std::floor(iv.hi / dt + kGridTol))};
}

namespace {

struct BoolOps {
  using Value = bool;
  static Value atom(double margin) { return margin >= 0.0; }
  static Value top() { return true; }
  static Value negate(Value v) { return !v; }
  static Value meet(Value a, Value b) { return a && b; }
  static Value join(Value a, Value b) { return a || b; }
};

struct RobustOps {
  using Value = double;
  static Value atom(double margin) { return margin; }
  static Value top() { return std::numeric_limits<double>::infinity(); }
  static Value negate(Value v) { return -v; }
  static Value meet(Value a, Value b) { return std::min(a, b); }
  static Value join(Value a, Value b) { return std::max(a, b); }
};

/// Memoised recursion of the sampled semantics. Windows are clamped to the
/// signal; an empty clamped window throws.
template <class Ops>
class Evaluator {
 public:
  using Value = typename Ops::Value;

  explicit Evaluator(const Signal& s) : s_(s), n_(static_cast<long>(s.size())) {}

  Value at(const Formula& f, long k) {
    auto& slot = memo_[f.id()];
    if (slot.empty()) slot.resize(static_cast<std::size_t>(n_));
    auto& cell = slot[static_cast<std::size_t>(k)];
    if (cell.ready) return cell.value;
    // unordered_map keeps element references stable across rehashing
    cell.value = compute(f, k);
    cell.ready = true;
    return cell.value;
  }

 private:
  struct Cell {
    Value value{};
    bool ready = false;
  };

  std::pair<long, long> clamp(IndexWindow w, long k) const {
    const long lo = std::max(0L, k + w.lo);
    const long hi = std::min(n_ - 1, k + w.hi);
    if (lo > hi)
      throw EvaluationError("empty evaluation window at t = " + std::to_string(s_.time(k)));
    return {lo, hi};
  }

  Value compute(const Formula& f, long k) {
    switch (f.op()) {
      case Op::True:
        return Ops::top();
      case Op::Atom: {
        const auto& p = f.predicate();
        const Eigen::Vector2d pos = s_.position(p.robot, k);
        const Eigen::Vector2d partner =
            p.kind == PredicateKind::PairwiseDistAbove ? s_.position(p.other, k) : Eigen::Vector2d::Zero();
        return Ops::atom(p.margin(pos, partner));
      }
      case Op::Not:
        return Ops::negate(at(f.lhs(), k));
      case Op::And: {
        const Value a = at(f.lhs(), k);
        return Ops::meet(a, at(f.rhs(), k));
      }
      case Op::Or: {
        const Value a = at(f.lhs(), k);
        return Ops::join(a, at(f.rhs(), k));
      }
      case Op::Always: {
        const auto [lo, hi] = clamp(universal_window(f.interval(), s_.dt()), k);
        Value v = at(f.lhs(), lo);
        for (long j = lo + 1; j <= hi; ++j) v = Ops::meet(v, at(f.lhs(), j));
        return v;
      }
      case Op::Eventually: {
        const auto [lo, hi] = clamp(existential_window(f.interval(), s_.dt()), k);
        Value v = at(f.lhs(), lo);
        for (long j = lo + 1; j <= hi; ++j) v = Ops::join(v, at(f.lhs(), j));
        return v;
      }
      case Op::Until: {
        const auto [lo, hi] = clamp(existential_window(f.interval(), s_.dt()), k);
        Value hold = at(f.lhs(), k);
        for (long j = k + 1; j < lo; ++j) hold = Ops::meet(hold, at(f.lhs(), j));
        Value best{};
        for (long j = lo; j <= hi; ++j) {
          if (j > k) hold = Ops::meet(hold, at(f.lhs(), j));
          const Value here = Ops::meet(at(f.rhs(), j), hold);
          best = j == lo ? here : Ops::join(best, here);
        }
        return best;
      }
      case Op::Agent:
        throw EvaluationError("agent atoms are evaluated with eval_ma_stl");
    }
    return Ops::top();
  }

  const Signal& s_;
  long n_;
  std::unordered_map<const void*, std::vector<Cell>> memo_;
};

long index_of(const Signal& s, double t) {
  const double x = (t - s.t0()) / s.dt();
  const long k = std::lround(x);
  if (!std::isfinite(x) || k < 0 || k >= static_cast<long>(s.size()))
    throw EvaluationError("evaluation time " + std::to_string(t) + " lies outside the signal");
  return k;
}

}  // namespace

bool eval_boolean(const Formula& f, const Signal& s, double t) {
  Evaluator<BoolOps> ev(s);
  return ev.at(f, index_of(s, t));
}

double eval_robustness(const Formula& f, const Signal& s, double t) {
  Evaluator<RobustOps> ev(s);
  return ev.at(f, index_of(s, t));
}

namespace {

const Signal& agent_signal(std::span<const Signal> trajectories, int robot, std::optional<Signal>& rebound) {
  if (robot < 0 || robot >= static_cast<int>(trajectories.size()))
    throw EvaluationError("no trajectory for robot " + std::to_string(robot));
  const Signal& s = trajectories[static_cast<std::size_t>(robot)];
  if (s.has_robot(robot)) return s;
  // single-block signal without an explicit robot id: bind it to this robot
  const auto& lay = s.layout();
  if (lay.offset + lay.stride == s.dimension()) {
    rebound.emplace(s.samples(), s.dt(), s.t0(), SignalLayout{{robot}, lay.stride, lay.offset});
    return *rebound;
  }
  throw EvaluationError("trajectory " + std::to_string(robot) + " does not contain its robot");
}

template <class Ops>
typename Ops::Value team_eval(const Formula& f, std::span<const Signal> trajectories) {
  switch (f.op()) {
    case Op::True:
      return Ops::top();
    case Op::Agent: {
      std::optional<Signal> rebound;
      const Signal& s = agent_signal(trajectories, f.agent_index(), rebound);
      Evaluator<Ops> ev(s);
      return ev.at(f.lhs(), 0);
    }
    case Op::Not:
      return Ops::negate(team_eval<Ops>(f.lhs(), trajectories));
    case Op::And: {
      const auto a = team_eval<Ops>(f.lhs(), trajectories);
      return Ops::meet(a, team_eval<Ops>(f.rhs(), trajectories));
    }
    case Op::Or: {
      const auto a = team_eval<Ops>(f.lhs(), trajectories);
      return Ops::join(a, team_eval<Ops>(f.rhs(), trajectories));
    }
    default:
      throw EvaluationError("team-level formulas may only combine agent atoms with !, &, |");
  }
}

}  // namespace

bool eval_ma_stl(const Formula& f, std::span<const Signal> trajectories) {
  return team_eval<BoolOps>(f, trajectories);
}

double ma_stl_robustness(const Formula& f, std::span<const Signal> trajectories) {
  return team_eval<RobustOps>(f, trajectories);
}

namespace {

class SegmentEvaluator {
 public:
  explicit SegmentEvaluator(const Signal& s)
      : s_(s),
        g0_(std::lround(s.t0() / s.dt())),
        g1_(g0_ + static_cast<long>(s.size()) - 1) {}

  std::optional<double> at(const Formula& f, long g) const {
    const Interval sup = f.support();
    const long lo = g + static_cast<long>(std::floor(sup.lo / s_.dt() - kGridTol));
    const long hi = g + static_cast<long>(std::ceil(sup.hi / s_.dt() + kGridTol));
    if (hi < g0_ || lo > g1_) return std::nullopt;

    switch (f.op()) {
      case Op::True:
        return std::nullopt;
      case Op::Atom: {
        if (g < g0_ || g > g1_) return std::nullopt;
        const auto& p = f.predicate();
        const long k = g - g0_;
        const Eigen::Vector2d partner =
            p.kind == PredicateKind::PairwiseDistAbove ? s_.position(p.other, k) : Eigen::Vector2d::Zero();
        return p.margin(s_.position(p.robot, k), partner);
      }
      case Op::Not: {
        if (f.lhs().op() != Op::Atom)
          throw EvaluationError("segment robustness supports negation of atoms only");
        const auto v = at(f.lhs(), g);
        return v ? std::optional<double>(-*v) : std::nullopt;
      }
      case Op::And:
      case Op::Or: {
        const auto a = at(f.lhs(), g);
        const auto b = at(f.rhs(), g);
        if (!a) return b;
        if (!b) return a;
        return f.op() == Op::And ? std::min(*a, *b) : std::max(*a, *b);
      }
      case Op::Always: {
        const IndexWindow w = universal_window(f.interval(), s_.dt());
        const Interval cs = f.lhs().support();
        const long c_lo = static_cast<long>(std::floor(cs.lo / s_.dt() - kGridTol));
        const long c_hi = static_cast<long>(std::ceil(cs.hi / s_.dt() + kGridTol));
        const long from = std::max(g + w.lo, g0_ - c_hi);
        const long to = std::min(g + w.hi, g1_ - c_lo);
        std::optional<double> acc;
        for (long j = from; j <= to; ++j) {
          const auto v = at(f.lhs(), j);
          if (v) acc = acc ? std::min(*acc, *v) : *v;
        }
        return acc;
      }
      case Op::Eventually:
      case Op::Until:
        throw EvaluationError("segment robustness is defined for safety formulas only");
      case Op::Agent:
        throw EvaluationError("agent atoms are evaluated with eval_ma_stl");
    }
    return std::nullopt;
  }

 private:
  const Signal& s_;
  long g0_;
  long g1_;
};

}  // namespace

std::optional<double> segment_robustness(const Formula& f, const Signal& segment) {
  return SegmentEvaluator(segment).at(f, 0);
}

}  // namespace stlcbot::stl
