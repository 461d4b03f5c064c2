#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latlab/dynamics.hpp"
#include "latlab/lattice.hpp"
#include "latlab/maps.hpp"
#include "latlab/types.hpp"

namespace latlab {

/// Monte Carlo estimate with a 95% confidence interval. Fraction-type
/// estimates (robust-offset volume, near-fixed volume) carry a Wilson
/// interval scaled by the sampling volume; mean-type estimates (the count
/// integral) carry a normal interval. Always ci_low <= value <= ci_high.
///
/// All estimator accumulation is integer counting over counter-based
/// per-sample substreams, so a result depends only on (inputs, n, seed),
/// never on worker count or scheduling.
struct MeasureEstimate {
  double value = 0;
  double std_error = 0;
  double ci_low = 0;
  double ci_high = 0;
  Index n_samples = 0;
  std::uint64_t seed = 0;
};

/// Volume of the set of offsets q in (-h/2, h/2]^d whose discretized system
/// is robust. Sampled uniformly over the offset cube; value is the robust
/// fraction times h^d.
MeasureEstimate estimate_robust_offset_volume(const MapSpec& map, const DomainSpec& dom,
                                              double h, Index n_samples, std::uint64_t seed,
                                              int workers = 0);

/// Volume of the near-fixed set {x in domain : x - h/2 <= f(x) < x + h/2},
/// sampled uniformly over the domain box (predicate domains by rejection
/// against the box).
MeasureEstimate estimate_near_fixed_measure(const MapSpec& map, const DomainSpec& dom,
                                            double h, Index n_samples, std::uint64_t seed,
                                            int workers = 0);

/// Offset average of the equilibrium count times h^d, i.e. the integral of
/// k(h, q) over the offset cube. Agrees with the near-fixed volume in
/// expectation; the two estimators are independent, which makes the identity
/// a real consistency check.
MeasureEstimate estimate_count_integral(const MapSpec& map, const DomainSpec& dom, double h,
                                        Index n_samples, std::uint64_t seed, int workers = 0);

struct CheckResult {
  std::string name;
  bool pass = false;
  double slack = 0;  // margin by which the check held (negative = failed by)
};

/// Counts of per-offset hypothesis-gate failures observed while sampling.
/// Gates are advisory: estimates and bounds are still produced when a gate
/// fails, and hypotheses_verified on the report records the outcome.
struct GateStats {
  Index samples = 0;
  Index order_bound_failures = 0;
  Index self_map_failures = 0;
  Index monotone_failures = 0;       // declared-monotone maps only
  Index nontrivial_cycle_failures = 0;  // undeclared maps only
  Index count_above_ceiling = 0;     // k > L occurrences; must stay zero

  bool clean() const {
    return order_bound_failures == 0 && self_map_failures == 0 && monotone_failures == 0 &&
           nontrivial_cycle_failures == 0;
  }
};

/// Two-sided volume bounds for the robust offset set, from the three
/// estimators plus the lattice-count ceiling L:
///
///   lower = max{0, 2 h^d - vnear}
///   upper = L/(L-1) h^d - vnear/(L-1)        (needs L >= 2)
///
/// together with named consistency checks, each carrying its slack. The
/// upper bound is omitted, with a note, when L = 1 makes it undefined.
struct BoundReport {
  MeasureEstimate vs;        // unconditional robust-offset volume
  MeasureEstimate vs_gated;  // counting only offsets that also pass every gate
  MeasureEstimate vnear;
  MeasureEstimate count_integral;

  ExtentReport extent;
  double lower_bound = 0;
  std::optional<double> upper_bound;
  std::string upper_bound_note;

  ConditionVerdict margin;
  GateStats gates;
  bool hypotheses_verified = false;

  std::vector<CheckResult> checks;

  bool all_checks_pass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

BoundReport bounds_report(const MapSpec& map, const DomainSpec& dom, double h, Index n_samples,
                          std::uint64_t seed, int workers = 0);

/// One row per offset of a deterministic grid over the offset cube
/// (cell centers, resolution cells per axis, first axis outermost).
struct ScanRow {
  Vector q;
  Index k = 0;
  bool robust = false;
  std::optional<Vector> equilibrium;  // real coordinates, present when robust
};

/// Dimension must be 1 or 2 and resolution at least 2; the grid fraction
/// with k = 1 converges to the robust-offset fraction as resolution grows.
std::vector<ScanRow> q_grid_scan(const MapSpec& map, const DomainSpec& dom, double h,
                                 Index resolution);

}  // namespace latlab
