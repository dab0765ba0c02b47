#pragma once

#include <cstdint>
#include <vector>

#include "binpack/model.hpp"

namespace binpack {

enum class ScheduleVariant { QuadFixed, QuadAnytime, ExpFixed, ExpAnytime };

// Step-size schedule driving the primal-dual penalty weight. Fixed variants
// need the horizon n; anytime variants decay with t. With departures_aware
// set, callers pass the number of items currently in the system as t (clamped
// to >= 1 here, since the formulas are undefined at t = 0).
struct EpsilonSchedule {
  ScheduleVariant variant = ScheduleVariant::ExpAnytime;
  int capacity = 0;
  uint64_t horizon = 0;
  bool departures_aware = false;

  double epsilon(double t) const;
  void validate() const;

  static EpsilonSchedule quad_fixed(int capacity, uint64_t n);
  static EpsilonSchedule quad_anytime(int capacity);
  static EpsilonSchedule exp_fixed(int capacity, uint64_t n);
  static EpsilonSchedule exp_anytime(int capacity);
  EpsilonSchedule with_departures_aware() const;
};

// One candidate placement with its Lagrangian increase. Scores drop the
// constant -s common to every option; argmins are unaffected.
struct ScoredOption {
  Placement placement;
  double delta_lagrangian = 0.0;
};

// Quadratic-penalty scores: one option per target level h in 0..B-s. Levels
// without a bin become fresh bins with a forbidden hole of size h.
std::vector<ScoredOption> pdquad_options(const LevelProfile& profile, int size, double eps);

// Exponential-penalty scores: a fresh hole-free bin (h = 0) plus every
// occupied level h <= B-s. Never creates holes; bins are packed bottom-up.
std::vector<ScoredOption> pdexp_options(const LevelProfile& profile, int size, double eps);

// Minimizes the sum of squared level counts after placement.
Placement ss_choose(const LevelProfile& profile, int size);

// Fullest feasible bin, else a fresh one.
Placement bf_choose(const LevelProfile& profile, int size);

// Argmin under the documented tie-break: (1) an existing bin beats a new one,
// (2) among existing targets the larger level wins, (3) among new bins the
// smaller hole wins. Options within tie_tol of the minimum count as tied.
Placement pick_min_option(const std::vector<ScoredOption>& options, double tie_tol = 1e-12);

struct PolicyKind {
  enum Kind { PdQuad, PdExp, SumOfSquares, BestFit };

  Kind kind = BestFit;
  EpsilonSchedule schedule;  // PD variants only

  static PolicyKind pd_quad(EpsilonSchedule s);
  static PolicyKind pd_exp(EpsilonSchedule s);
  static PolicyKind sum_of_squares();
  static PolicyKind best_fit();
  const char* name() const;
};

// Dispatches to the policy's rule; t is the arrival index (or the in-system
// item count under departures).
Placement choose(const PolicyKind& policy, const LevelProfile& profile, int size, double t);

}  // namespace binpack
