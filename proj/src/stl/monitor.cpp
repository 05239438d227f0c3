#include "stlcbot/stl/monitor.hpp"

#include "stlcbot/stl/eval.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace stlcbot::stl {

struct Monitor::Impl {
  struct Node {
    Op op;
    const Predicate* pred = nullptr;
    int lhs = -1;
    int rhs = -1;
    IndexWindow window{0, 0};
    long horizon = 0;  // samples past k needed to compute value k
    std::vector<double> values;
  };

  Formula formula;
  double dt;
  double t0;
  SignalLayout layout;
  std::vector<Eigen::VectorXd> rows;
  std::vector<Node> nodes;  // children precede parents
  int root = -1;

  int compile(const Formula& f) {
    Node n;
    n.op = f.op();
    switch (f.op()) {
      case Op::True:
        break;
      case Op::Atom:
        n.pred = &f.predicate();
        break;
      case Op::Not:
        n.lhs = compile(f.lhs());
        n.horizon = nodes[n.lhs].horizon;
        break;
      case Op::And:
      case Op::Or:
        n.lhs = compile(f.lhs());
        n.rhs = compile(f.rhs());
        n.horizon = std::max(nodes[n.lhs].horizon, nodes[n.rhs].horizon);
        break;
      case Op::Always:
        n.lhs = compile(f.lhs());
        n.window = universal_window(f.interval(), dt);
        n.horizon = n.window.hi + nodes[n.lhs].horizon;
        break;
      case Op::Eventually:
        n.lhs = compile(f.lhs());
        n.window = existential_window(f.interval(), dt);
        n.horizon = n.window.hi + nodes[n.lhs].horizon;
        break;
      case Op::Until:
        n.lhs = compile(f.lhs());
        n.rhs = compile(f.rhs());
        n.window = existential_window(f.interval(), dt);
        n.horizon = n.window.hi + std::max(nodes[n.lhs].horizon, nodes[n.rhs].horizon);
        break;
      case Op::Agent:
        throw EvaluationError("agent atoms cannot be monitored on a single stream");
    }
    if ((n.op == Op::Always || n.op == Op::Eventually || n.op == Op::Until) && n.window.lo > n.window.hi)
      throw EvaluationError("temporal window contains no sample at this dt");
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  Eigen::Vector2d position(int robot, long k) const {
    const int b = layout.block_of(robot);
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (b < 0 || layout.offset + layout.stride * (b + 1) > row.size())
      throw EvaluationError("monitored stream has no samples for robot " + std::to_string(robot));
    const int c = layout.offset + layout.stride * b;
    return {row(c), row(c + 1)};
  }

  double value(const Node& n, long k) const {
    switch (n.op) {
      case Op::True:
        return std::numeric_limits<double>::infinity();
      case Op::Atom: {
        const auto& p = *n.pred;
        const Eigen::Vector2d partner =
            p.kind == PredicateKind::PairwiseDistAbove ? position(p.other, k) : Eigen::Vector2d::Zero();
        return p.margin(position(p.robot, k), partner);
      }
      case Op::Not:
        return -nodes[n.lhs].values[k];
      case Op::And:
        return std::min(nodes[n.lhs].values[k], nodes[n.rhs].values[k]);
      case Op::Or:
        return std::max(nodes[n.lhs].values[k], nodes[n.rhs].values[k]);
      case Op::Always: {
        const auto& c = nodes[n.lhs].values;
        double v = c[k + n.window.lo];
        for (long j = k + n.window.lo + 1; j <= k + n.window.hi; ++j) v = std::min(v, c[j]);
        return v;
      }
      case Op::Eventually: {
        const auto& c = nodes[n.lhs].values;
        double v = c[k + n.window.lo];
        for (long j = k + n.window.lo + 1; j <= k + n.window.hi; ++j) v = std::max(v, c[j]);
        return v;
      }
      case Op::Until: {
        const auto& a = nodes[n.lhs].values;
        const auto& b = nodes[n.rhs].values;
        const long lo = k + n.window.lo;
        const long hi = k + n.window.hi;
        double hold = a[k];
        for (long j = k + 1; j < lo; ++j) hold = std::min(hold, a[j]);
        double best = 0.0;
        for (long j = lo; j <= hi; ++j) {
          if (j > k) hold = std::min(hold, a[j]);
          const double here = std::min(b[j], hold);
          best = j == lo ? here : std::max(best, here);
        }
        return best;
      }
      case Op::Agent:
        break;
    }
    return 0.0;
  }

  void advance() {
    const long n = static_cast<long>(rows.size());
    for (auto& node : nodes) {
      while (static_cast<long>(node.values.size()) + node.horizon <= n - 1) {
        const long k = static_cast<long>(node.values.size());
        node.values.push_back(value(node, k));
      }
    }
  }
};

Monitor::Monitor(Formula f, double dt, double t0, SignalLayout layout)
    : impl_(std::make_unique<Impl>(Impl{std::move(f), dt, t0, std::move(layout), {}, {}, -1})) {
  if (!(dt > 0.0)) throw std::invalid_argument("monitor dt must be positive");
  impl_->root = impl_->compile(impl_->formula);
}

Monitor::~Monitor() = default;
Monitor::Monitor(Monitor&&) noexcept = default;
Monitor& Monitor::operator=(Monitor&&) noexcept = default;

void Monitor::add_sample(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  if (!impl_->rows.empty() && impl_->rows.front().size() != sample.size())
    throw std::invalid_argument("monitor samples must share one dimension");
  impl_->rows.emplace_back(sample);
  impl_->advance();
}

long Monitor::samples() const { return static_cast<long>(impl_->rows.size()); }

long Monitor::covered() const { return static_cast<long>(impl_->nodes[impl_->root].values.size()); }

double Monitor::robustness_at(long step) const {
  if (step < 0 || step >= covered())
    throw InsufficientHorizon("timestep " + std::to_string(step) + " is not covered by " +
                              std::to_string(samples()) + " samples");
  return impl_->nodes[impl_->root].values[static_cast<std::size_t>(step)];
}

const Formula& Monitor::formula() const { return impl_->formula; }

}  // namespace stlcbot::stl
