#pragma once

#include "stlcbot/stl/formula.hpp"
#include "stlcbot/stl/signal.hpp"

#include <optional>
#include <span>

namespace stlcbot::stl {

/// Sampled-grid Boolean semantics. Windows are clamped to the signal span;
/// an empty effective window throws EvaluationError.
bool eval_boolean(const Formula& f, const Signal& s, double t);

/// Space robustness: min/max recursion over the sample grid.
double eval_robustness(const Formula& f, const Signal& s, double t);

/// Team-level semantics: agent(i): phi dispatches eval_boolean(phi, s_i, t0 of s_i).
/// Only True, Not, And, Or and agent atoms may appear above agent atoms.
bool eval_ma_stl(const Formula& f, std::span<const Signal> trajectories);
double ma_stl_robustness(const Formula& f, std::span<const Signal> trajectories);

/// Robustness of a safety-fragment formula (True, atoms, negated atoms, And,
/// Or, Always) evaluated at absolute time 0 but restricted to the samples of
/// `segment`. Window parts outside the segment are ignored; returns nullopt
/// when no part of the formula falls on the segment.
std::optional<double> segment_robustness(const Formula& f, const Signal& segment);

/// Sample-index window for a temporal operator: outward rounding for
/// universal windows, inward rounding for existential ones.
struct IndexWindow {
  long lo;
  long hi;
};
IndexWindow universal_window(Interval iv, double dt);
IndexWindow existential_window(Interval iv, double dt);

}  // namespace stlcbot::stl
