#include "latlab/dynamics.hpp"

#include <cstdio>
#include <unordered_map>

#include "latlab/errors.hpp"

namespace latlab {

namespace {

// Direct near-fixed test at lattice point z: x - h/2 <= f(x) < x + h/2
// componentwise, evaluated on the raw image.
bool near_fixed_direct(const GridContext& ctx, const LatticeIndex& z, const Vector& fx) {
  Vector x = ctx.point_at(z);
  double half = ctx.h() / 2;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(fx[i] >= x[i] - half && fx[i] < x[i] + half)) return false;
  }
  return true;
}

std::string index_to_string(const LatticeIndex& z) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(z[i]);
  }
  return s + ")";
}

}  // namespace

DiscretizedSystem discretize(const MapSpec& map, const DomainSpec& dom, const GridContext& ctx,
                             Index cap) {
  if (map.dimension != dom.dim() || dom.dim() != ctx.dim()) {
    throw ArgumentError("map, domain and grid dimensions must agree");
  }

  DiscretizedSystem sys{ctx, enumerate_domain(dom, ctx, cap), {}, {}, {}};
  const std::size_t n = sys.points.size();

  std::unordered_map<LatticeIndex, Index, LatticeIndexHash, LatticeIndexEq> position;
  position.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) position.emplace(sys.points[i], static_cast<Index>(i));

  sys.image_values.reserve(n);
  sys.image_indices.reserve(n);
  sys.successor.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector fx = map.evaluate(ctx.point_at(sys.points[i]));
    if (!fx.allFinite()) {
      throw ArgumentError("map produced a non-finite image at " +
                          index_to_string(sys.points[i]));
    }
    LatticeIndex w = round_to_lattice(fx, ctx);
    auto it = position.find(w);
    sys.successor[i] = it == position.end() ? kEscape : it->second;
    sys.image_values.push_back(std::move(fx));
    sys.image_indices.push_back(std::move(w));
  }
  return sys;
}

std::vector<Index> fixed_point_positions(const DiscretizedSystem& sys) {
  std::vector<Index> fixed;
  for (Index i = 0; i < sys.n(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    bool by_successor = same_index(sys.image_indices[u], sys.points[u]);
    bool by_condition = near_fixed_direct(sys.ctx, sys.points[u], sys.image_values[u]);
    if (by_successor != by_condition) {
      throw InvariantViolation(
          "fixed-point routes disagree at " + index_to_string(sys.points[u]) +
          ": rounded-image test says " + (by_successor ? "fixed" : "moving") +
          ", direct half-cell test says " + (by_condition ? "fixed" : "moving"));
    }
    if (by_successor) fixed.push_back(i);
  }
  return fixed;
}

std::vector<LatticeIndex> fixed_points(const DiscretizedSystem& sys) {
  std::vector<LatticeIndex> out;
  for (Index i : fixed_point_positions(sys)) out.push_back(sys.points[static_cast<std::size_t>(i)]);
  return out;
}

Index k_of(const MapSpec& map, const DomainSpec& dom, const GridContext& ctx, Index cap) {
  if (map.dimension != dom.dim() || dom.dim() != ctx.dim()) {
    throw ArgumentError("map, domain and grid dimensions must agree");
  }
  Index by_round = 0, by_condition = 0;
  for (const LatticeIndex& z : enumerate_domain(dom, ctx, cap)) {
    Vector fx = map.evaluate(ctx.point_at(z));
    if (same_index(round_to_lattice(fx, ctx), z)) ++by_round;
    if (near_fixed_direct(ctx, z, fx)) ++by_condition;
  }
  if (by_round != by_condition) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "near-fixed counts disagree: %lld by rounding, %lld by direct test",
                  static_cast<long long>(by_round), static_cast<long long>(by_condition));
    throw InvariantViolation(buf);
  }
  return by_round;
}

CycleReport analyze_cycles(const DiscretizedSystem& sys) {
  const Index n = sys.n();
  CycleReport report;
  report.total = n;

  constexpr Index kUnresolved = -2;
  constexpr Index kToEscape = -1;
  // attractor[i]: cycle id the orbit of i lands in, or kToEscape.
  std::vector<Index> attractor(static_cast<std::size_t>(n), kUnresolved);
  std::vector<Index> path_pos(static_cast<std::size_t>(n), -1);
  std::vector<Index> path;

  for (Index s = 0; s < n; ++s) {
    if (attractor[static_cast<std::size_t>(s)] != kUnresolved) continue;
    path.clear();
    Index v = s;
    Index resolved = kUnresolved;

    while (true) {
      if (v == kEscape) {
        resolved = kToEscape;
        break;
      }
      const auto u = static_cast<std::size_t>(v);
      if (path_pos[u] >= 0) {
        // Current walk closed on itself: the path suffix from path_pos[v] is
        // a new cycle.
        Index id = static_cast<Index>(report.cycles.size());
        CycleReport::Cycle cycle;
        for (std::size_t p = static_cast<std::size_t>(path_pos[u]); p < path.size(); ++p) {
          cycle.members.push_back(path[p]);
        }
        cycle.period = static_cast<Index>(cycle.members.size());
        report.cycles.push_back(std::move(cycle));
        resolved = id;
        break;
      }
      if (attractor[u] != kUnresolved) {
        resolved = attractor[u];
        break;
      }
      path_pos[u] = static_cast<Index>(path.size());
      path.push_back(v);
      v = sys.successor[u];
    }

    for (Index p : path) {
      attractor[static_cast<std::size_t>(p)] = resolved;
      path_pos[static_cast<std::size_t>(p)] = -1;
    }
  }

  for (Index i = 0; i < n; ++i) {
    Index a = attractor[static_cast<std::size_t>(i)];
    if (a == kToEscape) {
      ++report.escaped;
    } else {
      ++report.cycles[static_cast<std::size_t>(a)].basin_size;
    }
  }
  return report;
}

const char* to_string(RobustnessReason reason) {
  switch (reason) {
    case RobustnessReason::kUniqueEquilibriumGlobalConvergence:
      return "unique-equilibrium-global-convergence";
    case RobustnessReason::kNoEquilibrium:
      return "no-equilibrium";
    case RobustnessReason::kMultipleEquilibria:
      return "multiple-equilibria";
    case RobustnessReason::kNontrivialCycle:
      return "nontrivial-cycle";
    case RobustnessReason::kOrbitEscape:
      return "orbit-escape";
  }
  return "unknown";
}

RobustnessVerdict robustness_verdict(const DiscretizedSystem& sys) {
  return robustness_verdict(sys, fixed_point_positions(sys), analyze_cycles(sys));
}

RobustnessVerdict robustness_verdict(const DiscretizedSystem& sys,
                                     const std::vector<Index>& fixed,
                                     const CycleReport& cycles) {
  RobustnessVerdict verdict;

  // A period-above-one cycle defeats robustness regardless of what else the
  // graph contains, so it is reported first.
  for (const CycleReport::Cycle& c : cycles.cycles) {
    if (c.period > 1) {
      verdict.reason = RobustnessReason::kNontrivialCycle;
      for (Index m : c.members) verdict.cycle.push_back(sys.points[static_cast<std::size_t>(m)]);
      return verdict;
    }
  }
  if (fixed.empty()) {
    // With no equilibrium and no nontrivial cycle every orbit leaves the
    // domain (a finite graph orbit that stays must land in some cycle).
    if (cycles.escaped > 0) {
      verdict.reason = RobustnessReason::kOrbitEscape;
      for (Index i = 0; i < sys.n(); ++i) {
        if (sys.successor[static_cast<std::size_t>(i)] == kEscape) {
          verdict.escape_witness = sys.points[static_cast<std::size_t>(i)];
          break;
        }
      }
    } else {
      verdict.reason = RobustnessReason::kNoEquilibrium;
    }
    return verdict;
  }
  if (fixed.size() > 1) {
    verdict.reason = RobustnessReason::kMultipleEquilibria;
    for (Index i : fixed) verdict.equilibria.push_back(sys.points[static_cast<std::size_t>(i)]);
    return verdict;
  }
  if (cycles.escaped > 0) {
    verdict.reason = RobustnessReason::kOrbitEscape;
    for (Index i = 0; i < sys.n(); ++i) {
      if (sys.successor[static_cast<std::size_t>(i)] == kEscape) {
        verdict.escape_witness = sys.points[static_cast<std::size_t>(i)];
        break;
      }
    }
    verdict.equilibrium = sys.points[static_cast<std::size_t>(fixed[0])];
    return verdict;
  }

  verdict.robust = true;
  verdict.reason = RobustnessReason::kUniqueEquilibriumGlobalConvergence;
  verdict.equilibrium = sys.points[static_cast<std::size_t>(fixed[0])];
  return verdict;
}

IterationResult iterate_to_fixed_point(const DiscretizedSystem& sys, const LatticeIndex& start) {
  std::unordered_map<LatticeIndex, Index, LatticeIndexHash, LatticeIndexEq> position;
  position.reserve(sys.points.size() * 2);
  for (std::size_t i = 0; i < sys.points.size(); ++i) {
    position.emplace(sys.points[i], static_cast<Index>(i));
  }
  auto it = position.find(start);
  if (it == position.end()) {
    throw ArgumentError("iteration start " + index_to_string(start) +
                        " is not an enumerated domain point");
  }

  Index v = it->second;
  {
    const auto u = static_cast<std::size_t>(v);
    Index nxt = sys.successor[u];
    if (nxt != kEscape) {
      const LatticeIndex& a = sys.points[u];
      const LatticeIndex& b = sys.points[static_cast<std::size_t>(nxt)];
      if (!cw_leq(a, b) && !cw_leq(b, a)) {
        throw ArgumentError("iteration start " + index_to_string(start) +
                            " is not order-comparable with its successor");
      }
    }
  }

  std::vector<LatticeIndex> visited{sys.points[static_cast<std::size_t>(v)]};
  const Index cap = sys.n() + 1;
  for (Index step = 0; step < cap; ++step) {
    Index nxt = sys.successor[static_cast<std::size_t>(v)];
    if (nxt == v) return IterationResult{sys.points[static_cast<std::size_t>(v)], step};
    if (nxt == kEscape) {
      throw DivergenceError("iteration escaped the domain after " + std::to_string(step) +
                                " steps from " + index_to_string(start),
                            std::move(visited));
    }
    v = nxt;
    visited.push_back(sys.points[static_cast<std::size_t>(v)]);
  }
  throw DivergenceError("iteration failed to settle within " + std::to_string(cap) +
                            " steps from " + index_to_string(start),
                        std::move(visited));
}

OneStepAudit one_step_convergence_audit(const DiscretizedSystem& sys,
                                        const RobustnessVerdict& verdict) {
  if (!verdict.robust || !verdict.equilibrium) {
    throw ArgumentError("one-step audit requires a robust system");
  }
  const LatticeIndex& star = *verdict.equilibrium;

  // The equilibrium's position; robustness guarantees it exists and is unique.
  Index star_pos = -1;
  for (Index i = 0; i < sys.n(); ++i) {
    if (same_index(sys.points[static_cast<std::size_t>(i)], star)) {
      star_pos = i;
      break;
    }
  }
  if (star_pos < 0) throw InvariantViolation("equilibrium not among enumerated points");

  OneStepAudit audit;
  audit.one_step_from_above = true;
  audit.finite_from_below = true;

  for (Index i = 0; i < sys.n(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const LatticeIndex& z = sys.points[u];
    if (cw_leq(star, z)) {
      ++audit.above_checked;
      if (sys.successor[u] != star_pos) {
        audit.one_step_from_above = false;
        audit.above_witnesses.push_back(z);
      }
    }
    if (cw_leq(z, star)) {
      ++audit.below_checked;
      Index v = i, steps = 0;
      const Index cap = sys.n() + 1;
      while (v != star_pos && steps <= cap) {
        Index nxt = sys.successor[static_cast<std::size_t>(v)];
        if (nxt == kEscape) break;
        v = nxt;
        ++steps;
      }
      if (v != star_pos) {
        audit.finite_from_below = false;
        if (!audit.below_witness) audit.below_witness = z;
      } else if (steps > audit.max_steps_from_below) {
        audit.max_steps_from_below = steps;
      }
    }
  }

  audit.satisfied = audit.one_step_from_above && audit.finite_from_below;
  return audit;
}

}  // namespace latlab
