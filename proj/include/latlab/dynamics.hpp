#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latlab/lattice.hpp"
#include "latlab/maps.hpp"
#include "latlab/types.hpp"

namespace latlab {

inline constexpr Index kEscape = -1;

/// The finite dynamical system induced by rounding f on the domain's lattice
/// points: position i holds lattice point points[i], its raw image
/// image_values[i] = f(q + h z_i), the rounded image index image_indices[i],
/// and successor[i], which is either the position of the rounded image among
/// the enumerated points or kEscape when the image leaves the domain.
struct DiscretizedSystem {
  GridContext ctx;
  std::vector<LatticeIndex> points;  // lexicographic order
  std::vector<Vector> image_values;
  std::vector<LatticeIndex> image_indices;
  std::vector<Index> successor;

  Index n() const { return static_cast<Index>(points.size()); }
  Vector point_at(Index i) const { return ctx.point_at(points[static_cast<std::size_t>(i)]); }
};

DiscretizedSystem discretize(const MapSpec& map, const DomainSpec& dom, const GridContext& ctx,
                             Index cap = kDefaultEnumerationCap);

/// Equilibria of the discretized system, reported two redundant ways and
/// cross-checked: successor[i] == i must coincide with the direct condition
/// x - h/2 <= f(x) < x + h/2 componentwise. Disagreement is an
/// InvariantViolation, never silently resolved.
std::vector<Index> fixed_point_positions(const DiscretizedSystem& sys);
std::vector<LatticeIndex> fixed_points(const DiscretizedSystem& sys);

/// Number of near-fixed lattice points of the domain, i.e. equilibria of the
/// discretization; same dual-route cross-check as fixed_points.
Index k_of(const MapSpec& map, const DomainSpec& dom, const GridContext& ctx,
           Index cap = kDefaultEnumerationCap);

/// Cycle decomposition of the successor graph. Every point's orbit either
/// escapes or lands in exactly one cycle, so basin sizes plus escapes sum to
/// the point count. Basins include the cycle members themselves.
struct CycleReport {
  struct Cycle {
    Index period = 0;
    std::vector<Index> members;  // positions, in orbit order
    Index basin_size = 0;
  };

  std::vector<Cycle> cycles;
  Index escaped = 0;
  Index total = 0;

  bool has_nontrivial_cycle() const {
    for (const Cycle& c : cycles)
      if (c.period > 1) return true;
    return false;
  }
};

CycleReport analyze_cycles(const DiscretizedSystem& sys);

enum class RobustnessReason {
  kUniqueEquilibriumGlobalConvergence,
  kNoEquilibrium,
  kMultipleEquilibria,
  kNontrivialCycle,
  kOrbitEscape,
};

const char* to_string(RobustnessReason reason);

/// Robust means: exactly one equilibrium, no cycle of period above one, and
/// no orbit leaving the domain; then every orbit converges to the
/// equilibrium. The verdict is decided purely from the successor graph.
struct RobustnessVerdict {
  bool robust = false;
  RobustnessReason reason = RobustnessReason::kNoEquilibrium;
  std::optional<LatticeIndex> equilibrium;
  std::vector<LatticeIndex> equilibria;     // populated for multiple-equilibria
  std::vector<LatticeIndex> cycle;          // populated for nontrivial-cycle
  std::optional<LatticeIndex> escape_witness;  // populated for orbit-escape
};

RobustnessVerdict robustness_verdict(const DiscretizedSystem& sys);

/// Overload for callers that already computed the pieces.
RobustnessVerdict robustness_verdict(const DiscretizedSystem& sys,
                                     const std::vector<Index>& fixed,
                                     const CycleReport& cycles);

/// Successor iteration from an order-comparable start, for monotone systems:
/// the start must satisfy successor(start) >= start or <= start
/// componentwise. Terminates at a fixed point within n steps or fails with
/// DivergenceError carrying the visited prefix (an escape mid-iteration fails
/// the same way).
struct IterationResult {
  LatticeIndex fixed_point;
  Index steps = 0;
};

IterationResult iterate_to_fixed_point(const DiscretizedSystem& sys, const LatticeIndex& start);

/// Audit of one-step convergence on a robust monotone system with
/// equilibrium x*: the from-above claim asserts every point x >= x* maps to
/// x* in a single step; the from-below claim asserts every point x <= x*
/// reaches x* in finitely many steps. The from-above claim genuinely fails on
/// concrete systems; the audit reports its witnesses rather than assuming it.
struct OneStepAudit {
  bool satisfied = false;  // both claims
  bool one_step_from_above = false;
  bool finite_from_below = false;
  Index above_checked = 0;
  Index below_checked = 0;
  std::vector<LatticeIndex> above_witnesses;  // x >= x* needing more than one step
  std::optional<LatticeIndex> below_witness;
  Index max_steps_from_below = 0;
};

/// Precondition: verdict.robust. Anything else is an ArgumentError.
OneStepAudit one_step_convergence_audit(const DiscretizedSystem& sys,
                                        const RobustnessVerdict& verdict);

}  // namespace latlab
