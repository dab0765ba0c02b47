#include "binpack/policies.hpp"

#include <cassert>
#include <cmath>

#include "binpack/errors.hpp"

namespace binpack {

void EpsilonSchedule::validate() const {
  if (capacity < 2) throw ValidationError("schedule: capacity must be >= 2");
  switch (variant) {
    case ScheduleVariant::QuadFixed:
      if (horizon < 1) throw InvalidHorizon("schedule: fixed variants need a horizon >= 1");
      break;
    case ScheduleVariant::ExpFixed:
      if (horizon <= static_cast<uint64_t>(capacity))
        throw InvalidHorizon("schedule: exponential fixed step needs horizon > capacity");
      break;
    default:
      break;
  }
}

double EpsilonSchedule::epsilon(double t) const {
  if (departures_aware) t = std::max(1.0, t);
  assert(t >= 1.0);
  const double b = static_cast<double>(capacity);
  switch (variant) {
    case ScheduleVariant::QuadFixed:
      return b * b / std::sqrt(2.0 * static_cast<double>(horizon));
    case ScheduleVariant::QuadAnytime:
      return b * b / std::sqrt(4.0 * t);
    case ScheduleVariant::ExpFixed:
      return std::sqrt(b / static_cast<double>(horizon));
    case ScheduleVariant::ExpAnytime:
      return std::sqrt(b / (2.0 * (b + t)));
  }
  return 0.0;  // unreachable
}

EpsilonSchedule EpsilonSchedule::quad_fixed(int capacity, uint64_t n) {
  EpsilonSchedule s{ScheduleVariant::QuadFixed, capacity, n, false};
  s.validate();
  return s;
}

EpsilonSchedule EpsilonSchedule::quad_anytime(int capacity) {
  EpsilonSchedule s{ScheduleVariant::QuadAnytime, capacity, 0, false};
  s.validate();
  return s;
}

EpsilonSchedule EpsilonSchedule::exp_fixed(int capacity, uint64_t n) {
  EpsilonSchedule s{ScheduleVariant::ExpFixed, capacity, n, false};
  s.validate();
  return s;
}

EpsilonSchedule EpsilonSchedule::exp_anytime(int capacity) {
  EpsilonSchedule s{ScheduleVariant::ExpAnytime, capacity, 0, false};
  s.validate();
  return s;
}

EpsilonSchedule EpsilonSchedule::with_departures_aware() const {
  EpsilonSchedule s = *this;
  s.departures_aware = true;
  return s;
}

std::vector<ScoredOption> pdquad_options(const LevelProfile& profile, int size, double eps) {
  const int b = profile.capacity();
  assert(size >= 1 && size < b);
  assert(eps > 0.0);
  std::vector<ScoredOption> options;
  options.reserve(static_cast<size_t>(b - size) + 1);
  for (int h = 0; h + size <= b; ++h) {
    const int64_t nh = h > 0 ? profile.at(h) : 0;
    const bool closes = (h + size == b);
    double score;
    Placement placement;
    if (nh > 0) {
      placement = Placement::existing(h);
      score = closes
                  ? static_cast<double>(b) + eps * (0.5 - static_cast<double>(nh))
                  : eps * static_cast<double>(profile.at(h + size) - nh + 1);
    } else {
      placement = Placement::fresh(h);
      score = closes ? static_cast<double>(b)
                     : eps * (static_cast<double>(profile.at(h + size)) + 0.5);
    }
    options.push_back({placement, score});
  }
  return options;
}

std::vector<ScoredOption> pdexp_options(const LevelProfile& profile, int size, double eps) {
  const int b = profile.capacity();
  assert(size >= 1 && size < b);
  assert(eps > 0.0 && eps < 1.0);
  const double scale = static_cast<double>(b) / eps;
  std::vector<ScoredOption> options;
  options.reserve(static_cast<size_t>(b - size) + 1);

  const double ns = static_cast<double>(profile.at(size));
  options.push_back({Placement::fresh(0),
                     static_cast<double>(b) +
                         scale * (std::exp(-eps * (ns + 1.0)) - std::exp(-eps * ns))});

  for (int h = 1; h + size <= b; ++h) {
    const int64_t nh = profile.at(h);
    if (nh == 0) continue;
    const double nhd = static_cast<double>(nh);
    double score = scale * (std::exp(-eps * (nhd - 1.0)) - std::exp(-eps * nhd));
    if (h + size < b) {
      const double nt = static_cast<double>(profile.at(h + size));
      score += scale * (std::exp(-eps * (nt + 1.0)) - std::exp(-eps * nt));
    }
    options.push_back({Placement::existing(h), score});
  }
  return options;
}

Placement ss_choose(const LevelProfile& profile, int size) {
  const int b = profile.capacity();
  assert(size >= 1 && size < b);
  // Potential change of a fresh bin; level-B counts are treated as zero.
  int64_t best = 2 * profile.at(size) + 1;
  Placement pick = Placement::fresh(0);
  for (int h = 1; h + size <= b; ++h) {
    if (profile.at(h) == 0) continue;
    int64_t delta = 1 - 2 * profile.at(h);
    if (h + size < b) delta += 2 * profile.at(h + size) + 1;
    // <=: ties go to the fuller bin, and an existing bin beats a fresh one.
    if (delta <= best) {
      best = delta;
      pick = Placement::existing(h);
    }
  }
  return pick;
}

Placement bf_choose(const LevelProfile& profile, int size) {
  const int b = profile.capacity();
  assert(size >= 1 && size < b);
  for (int h = b - size; h >= 1; --h) {
    if (profile.at(h) > 0) return Placement::existing(h);
  }
  return Placement::fresh(0);
}

namespace {

// True when a is preferred over b under the tie-break order.
bool tie_prefer(const Placement& a, const Placement& b) {
  const bool a_existing = a.kind == Placement::Kind::ExistingAtLevel;
  const bool b_existing = b.kind == Placement::Kind::ExistingAtLevel;
  if (a_existing != b_existing) return a_existing;
  if (a_existing) return a.level > b.level;
  return a.level < b.level;
}

}  // namespace

Placement pick_min_option(const std::vector<ScoredOption>& options, double tie_tol) {
  if (options.empty()) throw InvariantError("policy produced no placement options");
  double best = options.front().delta_lagrangian;
  for (const auto& o : options) best = std::min(best, o.delta_lagrangian);
  const Placement* pick = nullptr;
  for (const auto& o : options) {
    if (o.delta_lagrangian > best + tie_tol) continue;
    if (pick == nullptr || tie_prefer(o.placement, *pick)) pick = &o.placement;
  }
  return *pick;
}

PolicyKind PolicyKind::pd_quad(EpsilonSchedule s) {
  s.validate();
  return {PdQuad, s};
}

PolicyKind PolicyKind::pd_exp(EpsilonSchedule s) {
  s.validate();
  return {PdExp, s};
}

PolicyKind PolicyKind::sum_of_squares() { return {SumOfSquares, {}}; }

PolicyKind PolicyKind::best_fit() { return {BestFit, {}}; }

const char* PolicyKind::name() const {
  switch (kind) {
    case PdQuad: return "pd-quad";
    case PdExp: return "pd-exp";
    case SumOfSquares: return "ss";
    case BestFit: return "bf";
  }
  return "?";
}

Placement choose(const PolicyKind& policy, const LevelProfile& profile, int size, double t) {
  switch (policy.kind) {
    case PolicyKind::PdQuad:
      return pick_min_option(pdquad_options(profile, size, policy.schedule.epsilon(t)));
    case PolicyKind::PdExp:
      return pick_min_option(pdexp_options(profile, size, policy.schedule.epsilon(t)));
    case PolicyKind::SumOfSquares:
      return ss_choose(profile, size);
    case PolicyKind::BestFit:
      return bf_choose(profile, size);
  }
  throw InvariantError("unknown policy kind");
}

}  // namespace binpack
