#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latlab/types.hpp"

namespace latlab {

inline constexpr Index kDefaultEnumerationCap = 10'000'000;

/// Spacing h plus an offset q inside the h-cube (-h/2, h/2]^d. The lattice it
/// denotes is {q + h z : z integer}. Offsets handed in outside the h-cube are
/// wrapped componentwise by whole multiples of h; the wrap changes nothing
/// about the lattice itself. Offsets already in range pass through unchanged,
/// bit for bit.
class GridContext {
 public:
  static GridContext make(double h, Vector q);

  double h() const { return h_; }
  const Vector& q() const { return q_; }
  int dim() const { return static_cast<int>(q_.size()); }

  /// Real coordinates of lattice point z.
  Vector point_at(const LatticeIndex& z) const { return q_ + h_ * z.cast<double>(); }

 private:
  GridContext(double h, Vector q) : h_(h), q_(std::move(q)) {}
  double h_;
  Vector q_;
};

/// Compact domain: a closed axis-aligned box, optionally cut down by a
/// membership predicate whose true-set lies inside the box. Membership is
/// always box containment first, then the predicate.
struct DomainSpec {
  Vector lower;
  Vector upper;
  std::function<bool(const Vector&)> membership;  // empty = plain box
  std::string predicate_name;                     // reporting only

  static DomainSpec box(Vector lower, Vector upper);
  static DomainSpec restricted(Vector lower, Vector upper,
                               std::function<bool(const Vector&)> membership,
                               std::string name);

  int dim() const { return static_cast<int>(lower.size()); }
  bool is_box() const { return !membership; }
  bool contains(const Vector& x) const;
  double box_volume() const;
};

/// Per-axis extents l_i of the domain box and the derived lattice-count
/// ceilings: writing l_i = r h + p with 0 <= p < h gives L_i = r + 1, and
/// L is the product. No offset places more than L lattice points in the box.
struct ExtentReport {
  Vector l;
  LatticeIndex L_per_axis;
  Index L = 0;
};

/// Nearest multiple of h, with cells closed below and open above: the result
/// is k h where (k - 1/2) h <= y < (k + 1/2) h. Ties at half spacing round up.
double scalar_round(double y, double h);

/// The integer k itself.
Index scalar_round_index(double y, double h);

/// Componentwise roundoff of x onto the lattice of ctx, returned as the
/// integer vector z of the denoted point q + h z.
LatticeIndex round_to_lattice(const Vector& x, const GridContext& ctx);

/// All z with q + h z inside the domain, in lexicographic z order. Fails with
/// ResourceError when the candidate box exceeds cap points.
std::vector<LatticeIndex> enumerate_domain(const DomainSpec& dom, const GridContext& ctx,
                                           Index cap = kDefaultEnumerationCap);

/// Least and greatest members of a finite lattice-point set under the
/// componentwise order, when such members exist. When a side is missing, a
/// witness records two members whose meet (or join) is not itself a member;
/// the failing corner is included for reporting.
struct OrderBounds {
  struct Witness {
    LatticeIndex a;
    LatticeIndex b;
    LatticeIndex corner;
    bool upper = false;  // true: join(a,b) missing, false: meet(a,b) missing
  };

  std::optional<LatticeIndex> least;
  std::optional<LatticeIndex> greatest;
  std::optional<Witness> witness;

  bool found() const { return least.has_value() && greatest.has_value(); }
};

OrderBounds order_bounds(std::span<const LatticeIndex> points);

/// Extents from the domain's declared box (predicates are ignored here; the
/// box is the conservative extent). Exact multiples are recognized up to a
/// relative tolerance of 2^-40 so that l = m h yields L_i = m + 1 even when
/// the division is inexact in floating point.
ExtentReport compute_extent(const DomainSpec& dom, const GridContext& ctx);

}  // namespace latlab
