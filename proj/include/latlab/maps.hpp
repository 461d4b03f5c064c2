#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latlab/lattice.hpp"
#include "latlab/types.hpp"

namespace latlab {

/// Map under study: a pure evaluator plus family metadata and the
/// monotonicity claim the family makes about itself. The claim is exactly
/// that, a claim; check_monotone verifies it on concrete point sets.
struct MapSpec {
  int dimension = 0;
  std::function<Vector(const Vector&)> evaluate;
  bool declared_monotone = false;
  std::string family;
  std::vector<double> params;

  /// Exact interval image of an axis-aligned box, available when the family
  /// admits one in closed form (affine and componentwise-monotone families).
  /// Lets check_margin certify instead of sample.
  std::function<std::pair<Vector, Vector>(const Vector&, const Vector&)> image_box;

  Vector operator()(const Vector& x) const { return evaluate(x); }
};

/// Outcome of a hypothesis check. `certified` distinguishes an exhaustive or
/// closed-form verification from a sampled one, which can only report "not
/// falsified". A populated witness always re-checks as a violation.
struct ConditionVerdict {
  struct Witness {
    std::vector<Vector> points;
    std::vector<Vector> values;
    std::string detail;
  };

  bool satisfied = true;
  bool certified = false;
  std::optional<Witness> witness;
};

/// Families constructible by name, with a flat numeric parameter list:
///
///   affine              d*d row-major entries of A, then d entries of b
///   scalar-linear       one entry a, the map a*x
///   sigmoid-contraction amplitude s and rate r, componentwise s*tanh(r*x)
///   negated-linear      one entry or d entries c, the map c - x
///   shift               one entry or d entries c, the map x + c
///
/// declared_monotone is set exactly for affine with entrywise-nonnegative A,
/// scalar-linear with a >= 0, and sigmoid contractions with s, r >= 0.
MapSpec builtin_map(const std::string& family, const std::vector<double>& params,
                    int dimension);

/// Direct affine constructor, A x + b.
MapSpec affine_map(Matrix a, Vector b);

/// Conjugation by a per-axis sign flip S = diag(signs): x -> S f(S x).
/// A map that is order-preserving with respect to a flipped orthant order
/// becomes order-preserving in the standard order after conjugation, which is
/// the only route by which order-reversing axes are supported here. For the
/// builtin families the conjugate is rebuilt exactly in-family, so its
/// monotonicity claim is re-derived rather than copied.
MapSpec conjugate_by_signs(const MapSpec& map, const std::vector<int>& signs);

/// Exhaustive monotonicity check over all comparable pairs of the given
/// points: x <= y componentwise must give f(x) <= f(y) componentwise.
ConditionVerdict check_monotone(const MapSpec& map, std::span<const Vector> points);

/// Every lattice point of the domain must round back into the domain after
/// one application of the map.
ConditionVerdict check_self_mapping(const MapSpec& map, const DomainSpec& dom,
                                    const GridContext& ctx);

/// Boundary-margin condition: the image of the domain must stay at least h/2
/// inside the box on every axis. Certified via the exact image box when the
/// family provides one, otherwise sampled (n points, counter-based streams of
/// seed). Requires a plain box domain at least h wide on every axis.
ConditionVerdict check_margin(const MapSpec& map, const DomainSpec& dom, double h,
                              Index n_samples, std::uint64_t seed);

}  // namespace latlab
