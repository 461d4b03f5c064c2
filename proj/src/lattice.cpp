#include "latlab/lattice.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>
#include <utility>

#include "latlab/errors.hpp"

namespace latlab {

namespace {

// Index magnitudes stay far from the int64 edge so that arithmetic on ranges
// (counts, products) cannot overflow.
constexpr double kIndexLimit = 4.6e18;

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw ArgumentError(std::string(what) + " must be finite");
}

void require_spacing(double h) {
  if (!(std::isfinite(h) && h > 0.0)) {
    throw ArgumentError("lattice spacing h must be finite and positive");
  }
}

Index checked_index(double v, const char* what) {
  if (!(std::abs(v) < kIndexLimit)) {
    throw ArgumentError(std::string(what) + ": lattice index out of integer range");
  }
  return static_cast<Index>(v);
}

}  // namespace

GridContext GridContext::make(double h, Vector q) {
  require_spacing(h);
  require_finite(q, "offset q");
  if (q.size() < 1) throw ArgumentError("offset q must have dimension >= 1");
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    // Wrap into (-h/2, h/2]. The shift count is zero for in-range offsets, so
    // those are not perturbed.
    double shift = std::ceil(q[i] / h - 0.5);
    if (shift != 0.0) {
      checked_index(shift, "offset canonicalization");
      q[i] -= shift * h;
    }
  }
  return GridContext(h, std::move(q));
}

DomainSpec DomainSpec::box(Vector lower, Vector upper) {
  return restricted(std::move(lower), std::move(upper), nullptr, "");
}

DomainSpec DomainSpec::restricted(Vector lower, Vector upper,
                                  std::function<bool(const Vector&)> membership,
                                  std::string name) {
  require_finite(lower, "domain lower corner");
  require_finite(upper, "domain upper corner");
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw ArgumentError("domain corners must share a dimension >= 1");
  }
  if (!cw_leq(lower, upper)) {
    throw ArgumentError("domain box must satisfy lower <= upper componentwise");
  }
  DomainSpec dom;
  dom.lower = std::move(lower);
  dom.upper = std::move(upper);
  dom.membership = std::move(membership);
  dom.predicate_name = std::move(name);
  return dom;
}

bool DomainSpec::contains(const Vector& x) const {
  if (x.size() != lower.size()) throw ArgumentError("point dimension mismatch");
  if (!(cw_leq(lower, x) && cw_leq(x, upper))) return false;
  return membership ? membership(x) : true;
}

double DomainSpec::box_volume() const { return (upper - lower).prod(); }

Index scalar_round_index(double y, double h) {
  require_spacing(h);
  if (!std::isfinite(y)) throw ArgumentError("roundoff input must be finite");
  return checked_index(std::floor(y / h + 0.5), "scalar roundoff");
}

double scalar_round(double y, double h) {
  return static_cast<double>(scalar_round_index(y, h)) * h;
}

LatticeIndex round_to_lattice(const Vector& x, const GridContext& ctx) {
  if (x.size() != ctx.q().size()) throw ArgumentError("point dimension mismatch");
  LatticeIndex z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    z[i] = scalar_round_index(x[i] - ctx.q()[i], ctx.h());
  }
  return z;
}

std::vector<LatticeIndex> enumerate_domain(const DomainSpec& dom, const GridContext& ctx,
                                           Index cap) {
  if (dom.dim() != ctx.dim()) throw ArgumentError("domain and grid dimension mismatch");
  if (cap < 1) throw ArgumentError("enumeration cap must be positive");

  const int d = dom.dim();
  const double h = ctx.h();

  // Conservative per-axis candidate ranges, widened by one cell each way;
  // the exact membership test below trims them. This keeps the boundary
  // decision in one place (DomainSpec::contains) instead of in ceil/floor
  // arithmetic.
  std::vector<Index> lo(d), hi(d);
  double estimated = 1.0;
  for (int i = 0; i < d; ++i) {
    double a = (dom.lower[i] - ctx.q()[i]) / h;
    double b = (dom.upper[i] - ctx.q()[i]) / h;
    lo[i] = checked_index(std::floor(a), "enumeration range") - 1;
    hi[i] = checked_index(std::ceil(b), "enumeration range") + 1;
    estimated *= static_cast<double>(hi[i] - lo[i] + 1);
    if (estimated > static_cast<double>(cap)) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "domain enumeration would exceed cap of %lld lattice points",
                    static_cast<long long>(cap));
      throw ResourceError(buf);
    }
  }

  std::vector<LatticeIndex> out;
  LatticeIndex z(d);
  for (int i = 0; i < d; ++i) z[i] = lo[i];
  // Odometer with the first axis outermost: lexicographic output order.
  while (true) {
    if (dom.contains(ctx.point_at(z))) out.push_back(z);
    int axis = d - 1;
    while (axis >= 0 && z[axis] == hi[axis]) {
      z[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
    ++z[axis];
  }
  return out;
}

OrderBounds order_bounds(std::span<const LatticeIndex> points) {
  if (points.empty()) throw ArgumentError("order_bounds requires a nonempty point set");

  std::unordered_set<LatticeIndex, LatticeIndexHash, LatticeIndexEq> set(points.begin(),
                                                                         points.end());
  OrderBounds result;

  // Fold the meet (resp. join) across the set, verifying membership after
  // each step. If every partial fold is a member, the total fold is the
  // least (resp. greatest) member; the first failing step yields two members
  // whose meet (join) is missing.
  auto fold = [&](bool upper) {
    LatticeIndex acc = points[0];
    for (std::size_t i = 1; i < points.size(); ++i) {
      LatticeIndex corner = upper ? acc.cwiseMax(points[i]).eval() : acc.cwiseMin(points[i]).eval();
      if (same_index(corner, acc)) continue;
      if (!set.contains(corner)) {
        if (!result.witness) {
          result.witness = OrderBounds::Witness{acc, points[i], corner, upper};
        }
        return std::optional<LatticeIndex>();
      }
      acc = std::move(corner);
    }
    return std::optional<LatticeIndex>(std::move(acc));
  };

  result.least = fold(false);
  result.greatest = fold(true);
  return result;
}

ExtentReport compute_extent(const DomainSpec& dom, const GridContext& ctx) {
  if (dom.dim() != ctx.dim()) throw ArgumentError("domain and grid dimension mismatch");

  const int d = dom.dim();
  ExtentReport report;
  report.l = dom.upper - dom.lower;
  report.L_per_axis.resize(d);
  report.L = 1;
  for (int i = 0; i < d; ++i) {
    double ratio = report.l[i] / ctx.h();
    double nearest = std::round(ratio);
    double r;
    // Exact-multiple recognition: l = m h counts as r = m even when the
    // floating division lands a hair below m.
    if (std::abs(ratio - nearest) <= 0x1.0p-40 * std::max(1.0, std::abs(nearest))) {
      r = nearest;
    } else {
      r = std::floor(ratio);
    }
    Index li = checked_index(r, "extent") + 1;
    report.L_per_axis[i] = li;
    if (report.L > (static_cast<Index>(1) << 62) / li) {
      throw ResourceError("lattice-count ceiling overflows");
    }
    report.L *= li;
  }
  return report;
}

}  // namespace latlab
