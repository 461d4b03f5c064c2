#include "latlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

#include "latlab/errors.hpp"
#include "latlab/rng.hpp"

namespace latlab {

namespace {

constexpr double kZ95 = 1.959963984540054;

void require_samples(Index n) {
  if (n < 100) throw ArgumentError("estimators need at least 100 samples");
}

void require_inputs(const MapSpec& map, const DomainSpec& dom, double h) {
  if (map.dimension != dom.dim()) throw ArgumentError("map and domain dimensions must agree");
  if (!(h > 0) || !std::isfinite(h)) throw ArgumentError("spacing h must be finite and positive");
}

int resolve_workers(int workers, Index n) {
  if (workers < 0) throw ArgumentError("worker count must be >= 0");
  long hw = workers > 0 ? workers : static_cast<long>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  return static_cast<int>(std::min<long>({hw, 64, static_cast<long>(n)}));
}

// Deterministic sample partition: contiguous chunks, merged in chunk order.
// All accumulators are integer counters, so the merged totals are identical
// for every worker count.
template <class Acc, class Fn>
Acc parallel_accumulate(Index n, int workers, Fn&& fn) {
  const int w = resolve_workers(workers, n);
  std::vector<Acc> parts(static_cast<std::size_t>(w));
  if (w == 1) {
    for (Index i = 0; i < n; ++i) fn(i, parts[0]);
    return parts[0];
  }

  const Index chunk = (n + w - 1) / w;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      const Index begin = chunk * t;
      const Index end = std::min<Index>(n, begin + chunk);
      try {
        for (Index i = begin; i < end; ++i) fn(i, parts[static_cast<std::size_t>(t)]);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Acc total{};
  for (const Acc& p : parts) total += p;
  return total;
}

MeasureEstimate wilson_estimate(std::uint64_t hits, Index n, double volume,
                                std::uint64_t seed) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2n = kZ95 * kZ95 / nn;
  const double denom = 1.0 + z2n;
  const double center = (p + z2n / 2.0) / denom;
  const double half =
      kZ95 / denom * std::sqrt(p * (1.0 - p) / nn + z2n / (4.0 * nn));

  MeasureEstimate est;
  est.value = p * volume;
  est.std_error = std::sqrt(p * (1.0 - p) / nn) * volume;
  est.ci_low = std::max(0.0, center - half) * volume;
  est.ci_high = std::min(1.0, center + half) * volume;
  est.n_samples = n;
  est.seed = seed;
  return est;
}

MeasureEstimate mean_estimate(std::uint64_t sum, std::uint64_t sum_sq, Index n, double scale,
                              std::uint64_t seed) {
  const double nn = static_cast<double>(n);
  const double mean = static_cast<double>(sum) / nn;
  double variance = 0.0;
  if (n > 1) {
    variance = (static_cast<double>(sum_sq) - nn * mean * mean) / (nn - 1.0);
    variance = std::max(0.0, variance);
  }

  MeasureEstimate est;
  est.value = scale * mean;
  est.std_error = scale * std::sqrt(variance / nn);
  est.ci_low = std::max(0.0, est.value - kZ95 * est.std_error);
  est.ci_high = est.value + kZ95 * est.std_error;
  est.n_samples = n;
  est.seed = seed;
  return est;
}

GridContext sampled_offset(int d, double h, std::uint64_t seed, std::uint64_t domain,
                           std::uint64_t counter) {
  SubstreamRng rng(seed, domain, counter);
  Vector q(d);
  for (int i = 0; i < d; ++i) q[i] = rng.left_open(-h / 2, h / 2);
  return GridContext::make(h, q);
}

// Exhaustive order-preservation test of the raw images over the lattice
// points. The integer order on indices equals the real order on points, so
// the left side of each comparison is exact.
bool lattice_monotone(const DiscretizedSystem& sys) {
  const std::size_t n = sys.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (cw_leq(sys.points[i], sys.points[j])) {
        if (!cw_leq(sys.image_values[i], sys.image_values[j])) return false;
      } else if (cw_leq(sys.points[j], sys.points[i])) {
        if (!cw_leq(sys.image_values[j], sys.image_values[i])) return false;
      }
    }
  }
  return true;
}

struct OffsetCounters {
  std::uint64_t robust = 0;
  std::uint64_t gates_pass = 0;
  std::uint64_t robust_and_gates = 0;
  std::uint64_t order_fail = 0;
  std::uint64_t selfmap_fail = 0;
  std::uint64_t monotone_fail = 0;
  std::uint64_t cycle_fail = 0;
  std::uint64_t count_above_ceiling = 0;

  OffsetCounters& operator+=(const OffsetCounters& o) {
    robust += o.robust;
    gates_pass += o.gates_pass;
    robust_and_gates += o.robust_and_gates;
    order_fail += o.order_fail;
    selfmap_fail += o.selfmap_fail;
    monotone_fail += o.monotone_fail;
    cycle_fail += o.cycle_fail;
    count_above_ceiling += o.count_above_ceiling;
    return *this;
  }
};

OffsetCounters robust_offset_pass(const MapSpec& map, const DomainSpec& dom, double h,
                                  Index n_samples, std::uint64_t seed, int workers,
                                  bool with_gates, Index ceiling) {
  return parallel_accumulate<OffsetCounters>(
      n_samples, workers, [&](Index i, OffsetCounters& acc) {
        GridContext ctx =
            sampled_offset(map.dimension, h, seed, stream_domain::kOffsetSampling,
                           static_cast<std::uint64_t>(i));
        DiscretizedSystem sys = discretize(map, dom, ctx);
        std::vector<Index> fixed = fixed_point_positions(sys);
        CycleReport cycles = analyze_cycles(sys);
        RobustnessVerdict verdict = robustness_verdict(sys, fixed, cycles);

        if (verdict.robust) ++acc.robust;
        if (static_cast<Index>(fixed.size()) > ceiling) ++acc.count_above_ceiling;

        if (!with_gates) return;

        bool order_ok = dom.is_box() || order_bounds(sys.points).found();
        bool selfmap_ok = cycles.escaped == 0;
        bool shape_ok = map.declared_monotone ? lattice_monotone(sys)
                                              : !cycles.has_nontrivial_cycle();
        if (!order_ok) ++acc.order_fail;
        if (!selfmap_ok) ++acc.selfmap_fail;
        if (map.declared_monotone && !shape_ok) ++acc.monotone_fail;
        if (!map.declared_monotone && !shape_ok) ++acc.cycle_fail;

        if (order_ok && selfmap_ok && shape_ok) {
          ++acc.gates_pass;
          if (verdict.robust) ++acc.robust_and_gates;
        }
      });
}

struct HitCounter {
  std::uint64_t hits = 0;
  HitCounter& operator+=(const HitCounter& o) {
    hits += o.hits;
    return *this;
  }
};

struct CountCounters {
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
  std::uint64_t above_ceiling = 0;
  CountCounters& operator+=(const CountCounters& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    above_ceiling += o.above_ceiling;
    return *this;
  }
};

CountCounters count_integral_pass(const MapSpec& map, const DomainSpec& dom, double h,
                                  Index n_samples, std::uint64_t seed, int workers,
                                  Index ceiling) {
  return parallel_accumulate<CountCounters>(
      n_samples, workers, [&](Index i, CountCounters& acc) {
        GridContext ctx =
            sampled_offset(map.dimension, h, seed, stream_domain::kCountSampling,
                           static_cast<std::uint64_t>(i));
        Index k = k_of(map, dom, ctx);
        acc.sum += static_cast<std::uint64_t>(k);
        acc.sum_sq += static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(k);
        if (k > ceiling) ++acc.above_ceiling;
      });
}

}  // namespace

MeasureEstimate estimate_robust_offset_volume(const MapSpec& map, const DomainSpec& dom,
                                              double h, Index n_samples, std::uint64_t seed,
                                              int workers) {
  require_inputs(map, dom, h);
  require_samples(n_samples);
  const Index ceiling = compute_extent(dom, GridContext::make(h, Vector::Zero(dom.dim()))).L;
  OffsetCounters c =
      robust_offset_pass(map, dom, h, n_samples, seed, workers, /*with_gates=*/false, ceiling);
  return wilson_estimate(c.robust, n_samples, std::pow(h, map.dimension), seed);
}

MeasureEstimate estimate_near_fixed_measure(const MapSpec& map, const DomainSpec& dom,
                                            double h, Index n_samples, std::uint64_t seed,
                                            int workers) {
  require_inputs(map, dom, h);
  require_samples(n_samples);

  const int d = map.dimension;
  const double half = h / 2;
  HitCounter c = parallel_accumulate<HitCounter>(
      n_samples, workers, [&](Index i, HitCounter& acc) {
        SubstreamRng rng(seed, stream_domain::kPointSampling, static_cast<std::uint64_t>(i));
        Vector x(d);
        for (int k = 0; k < d; ++k) x[k] = rng.closed_open(dom.lower[k], dom.upper[k]);
        if (!dom.contains(x)) return;  // rejection for predicate domains
        Vector fx = map.evaluate(x);
        for (int k = 0; k < d; ++k) {
          if (!(fx[k] >= x[k] - half && fx[k] < x[k] + half)) return;
        }
        ++acc.hits;
      });
  return wilson_estimate(c.hits, n_samples, dom.box_volume(), seed);
}

MeasureEstimate estimate_count_integral(const MapSpec& map, const DomainSpec& dom, double h,
                                        Index n_samples, std::uint64_t seed, int workers) {
  require_inputs(map, dom, h);
  require_samples(n_samples);
  const Index ceiling = compute_extent(dom, GridContext::make(h, Vector::Zero(dom.dim()))).L;
  CountCounters c = count_integral_pass(map, dom, h, n_samples, seed, workers, ceiling);
  if (c.above_ceiling > 0) {
    throw InvariantViolation("equilibrium count exceeded the lattice-count ceiling");
  }
  return mean_estimate(c.sum, c.sum_sq, n_samples, std::pow(h, map.dimension), seed);
}

BoundReport bounds_report(const MapSpec& map, const DomainSpec& dom, double h, Index n_samples,
                          std::uint64_t seed, int workers) {
  require_inputs(map, dom, h);
  require_samples(n_samples);

  const int d = map.dimension;
  const double hd = std::pow(h, d);

  BoundReport report;
  report.extent = compute_extent(dom, GridContext::make(h, Vector::Zero(d)));
  const Index L = report.extent.L;

  // Margin gate. An unverifiable margin (predicate domain, box thinner than
  // h) downgrades the hypotheses without blocking the estimates.
  try {
    report.margin = check_margin(map, dom, h, std::min<Index>(n_samples, 10'000), seed);
  } catch (const ConfigError& e) {
    report.margin.satisfied = false;
    report.margin.certified = false;
    report.margin.witness =
        ConditionVerdict::Witness{{}, {}, std::string("margin not checkable: ") + e.what()};
  }

  OffsetCounters vs_pass =
      robust_offset_pass(map, dom, h, n_samples, seed, workers, /*with_gates=*/true, L);
  report.vs = wilson_estimate(vs_pass.robust, n_samples, hd, seed);
  report.vs_gated = wilson_estimate(vs_pass.robust_and_gates, n_samples, hd, seed);

  report.vnear = estimate_near_fixed_measure(map, dom, h, n_samples, seed, workers);

  CountCounters ci_pass = count_integral_pass(map, dom, h, n_samples, seed, workers, L);
  report.count_integral = mean_estimate(ci_pass.sum, ci_pass.sum_sq, n_samples, hd, seed);

  report.gates.samples = n_samples;
  report.gates.order_bound_failures = static_cast<Index>(vs_pass.order_fail);
  report.gates.self_map_failures = static_cast<Index>(vs_pass.selfmap_fail);
  report.gates.monotone_failures = static_cast<Index>(vs_pass.monotone_fail);
  report.gates.nontrivial_cycle_failures = static_cast<Index>(vs_pass.cycle_fail);
  report.gates.count_above_ceiling =
      static_cast<Index>(vs_pass.count_above_ceiling + ci_pass.above_ceiling);
  report.hypotheses_verified = report.margin.satisfied && report.gates.clean();

  const double vn = report.vnear.value;
  report.lower_bound = std::max(0.0, 2.0 * hd - vn);
  if (L >= 2) {
    report.upper_bound = (static_cast<double>(L) * hd - vn) / static_cast<double>(L - 1);
  } else {
    report.upper_bound_note =
        "upper bound undefined at L = 1 (single-cell domain); omitted";
  }

  const double se_vs = report.vs.std_error;
  const double se_vn = report.vnear.std_error;
  const double se_ci = report.count_integral.std_error;

  auto add_check = [&](std::string name, bool pass, double slack) {
    report.checks.push_back(CheckResult{std::move(name), pass, slack});
  };

  {
    double gap = std::abs(report.count_integral.value - vn);
    double tol = 3.0 * std::hypot(se_ci, se_vn);
    add_check("count-integral-identity", gap <= tol, tol - gap);
  }
  {
    double slack = vn - (hd - 3.0 * se_vn);
    add_check("near-volume-at-least-cell", slack >= 0, slack);
  }
  {
    double slack = (static_cast<double>(L) * hd + 3.0 * se_vn) - vn;
    add_check("near-volume-at-most-ceiling", slack >= 0, slack);
  }
  add_check("count-ceiling", report.gates.count_above_ceiling == 0,
            -static_cast<double>(report.gates.count_above_ceiling));
  {
    double tol = 3.0 * std::hypot(se_vs, se_vn);
    double slack = report.vs.value - (report.lower_bound - tol);
    add_check("vs-above-lower-bound", slack >= 0, slack);
  }
  if (report.upper_bound) {
    double tol = 3.0 * std::hypot(se_vs, se_vn / static_cast<double>(L - 1));
    double slack = (*report.upper_bound + tol) - report.vs.value;
    add_check("vs-below-upper-bound", slack >= 0, slack);
  }

  return report;
}

std::vector<ScanRow> q_grid_scan(const MapSpec& map, const DomainSpec& dom, double h,
                                 Index resolution) {
  require_inputs(map, dom, h);
  const int d = map.dimension;
  if (d > 2) throw ConfigError("offset grid scan supports dimensions 1 and 2 only");
  if (resolution < 2) throw ConfigError("offset grid scan needs resolution >= 2");

  double rows_d = std::pow(static_cast<double>(resolution), d);
  if (rows_d > 1e7) throw ResourceError("offset grid scan would exceed 10^7 rows");
  const Index rows = static_cast<Index>(rows_d);

  std::vector<ScanRow> out;
  out.reserve(static_cast<std::size_t>(rows));

  // Cell centers of the offset cube, first axis outermost.
  auto center = [&](Index j) { return -h / 2 + (static_cast<double>(j) + 0.5) * h /
                                          static_cast<double>(resolution); };

  std::vector<Index> j(static_cast<std::size_t>(d), 0);
  while (true) {
    Vector q(d);
    for (int a = 0; a < d; ++a) q[a] = center(j[static_cast<std::size_t>(a)]);
    GridContext ctx = GridContext::make(h, q);
    DiscretizedSystem sys = discretize(map, dom, ctx);
    std::vector<Index> fixed = fixed_point_positions(sys);
    RobustnessVerdict verdict = robustness_verdict(sys, fixed, analyze_cycles(sys));

    ScanRow row;
    row.q = ctx.q();
    row.k = static_cast<Index>(fixed.size());
    row.robust = verdict.robust;
    if (verdict.robust) row.equilibrium = ctx.point_at(*verdict.equilibrium);
    out.push_back(std::move(row));

    int axis = d - 1;
    while (axis >= 0 && j[static_cast<std::size_t>(axis)] == resolution - 1) {
      j[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
    ++j[static_cast<std::size_t>(axis)];
  }
  return out;
}

}  // namespace latlab
