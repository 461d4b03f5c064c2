#include <doctest.h>

#include <cmath>
#include <vector>

#include "latlab/dynamics.hpp"
#include "latlab/errors.hpp"
#include "latlab/maps.hpp"

#include "test_support.hpp"

using namespace latlab;
using namespace latlab::testing;

namespace {

std::vector<Vector> lattice_points_of(const DomainSpec& dom, const GridContext& ctx) {
  std::vector<Vector> out;
  for (const LatticeIndex& z : enumerate_domain(dom, ctx)) out.push_back(ctx.point_at(z));
  return out;
}

}  // namespace

TEST_CASE("builtin_map families and their monotonicity claims") {
  MapSpec quarter = builtin_map("scalar-linear", {0.25}, 1);
  CHECK(quarter.declared_monotone);
  CHECK(quarter(vec1(2.0))[0] == 0.5);

  MapSpec affine = builtin_map("affine", {0.25, 0.125, 0.0, 0.25, 0.0, 0.0}, 2);
  CHECK(affine.declared_monotone);
  Vector img = affine(vec2(2.0, 2.0));
  CHECK(img[0] == doctest::Approx(0.75));
  CHECK(img[1] == doctest::Approx(0.5));

  MapSpec mirror = builtin_map("negated-linear", {1.0}, 1);
  CHECK(!mirror.declared_monotone);
  CHECK(mirror(vec1(0.25))[0] == 0.75);

  MapSpec slide = builtin_map("shift", {10.0}, 1);
  CHECK(!slide.declared_monotone);  // the claim is reserved for the three families
  CHECK(slide(vec1(-2.0))[0] == 8.0);

  MapSpec squash = builtin_map("sigmoid-contraction", {0.5, 1.0}, 2);
  CHECK(squash.declared_monotone);
  CHECK(squash(vec2(0.0, 100.0))[0] == 0.0);
  CHECK(squash(vec2(0.0, 100.0))[1] == doctest::Approx(0.5));
  CHECK(!builtin_map("sigmoid-contraction", {-0.5, 1.0}, 1).declared_monotone);

  MapSpec negative = builtin_map("scalar-linear", {-0.5}, 1);
  CHECK(!negative.declared_monotone);

  CHECK_THROWS_AS(builtin_map("foo", {1.0}, 1), ConfigError);
  CHECK_THROWS_AS(builtin_map("affine", {1.0, 2.0}, 2), ConfigError);
  CHECK_THROWS_AS(builtin_map("scalar-linear", {}, 1), ConfigError);

  // one rate broadcasts componentwise to any dimension
  MapSpec wide = builtin_map("scalar-linear", {0.5}, 2);
  CHECK(wide(vec2(2.0, -4.0))[0] == 1.0);
  CHECK(wide(vec2(2.0, -4.0))[1] == -2.0);
}

TEST_CASE("check_monotone verifies comparable pairs and produces witnesses") {
  GridContext unit = GridContext::make(1.0, vec1(0.0));
  DomainSpec seg = DomainSpec::box(vec1(-2), vec1(2));
  MapSpec quarter = builtin_map("scalar-linear", {0.25}, 1);
  ConditionVerdict good = check_monotone(quarter, lattice_points_of(seg, unit));
  CHECK(good.satisfied);
  CHECK(good.certified);
  CHECK(!good.witness.has_value());

  MapSpec mirror = builtin_map("negated-linear", {1.0}, 1);
  std::vector<Vector> pair = {vec1(0.0), vec1(1.0)};
  ConditionVerdict bad = check_monotone(mirror, pair);
  CHECK(!bad.satisfied);
  REQUIRE(bad.witness.has_value());
  REQUIRE(bad.witness->points.size() == 2);
  const Vector& lo = bad.witness->points[0];
  const Vector& hi = bad.witness->points[1];
  CHECK(cw_leq(lo, hi));
  CHECK(!cw_leq(mirror(lo), mirror(hi)));  // the witness re-checks as a violation

  Matrix a(2, 2);
  a << 0.25, 0.125, 0.0, 0.25;
  MapSpec planar = affine_map(a, Vector::Zero(2));
  GridContext ctx = GridContext::make(1.0, vec2(0.0, 0.0));
  DomainSpec square = DomainSpec::box(vec2(-2, -2), vec2(2, 2));
  auto points = lattice_points_of(square, ctx);
  REQUIRE(points.size() == 25);
  CHECK(check_monotone(planar, points).satisfied);
}

TEST_CASE("check_self_mapping pins the containment examples") {
  DomainSpec seg = DomainSpec::box(vec1(-2), vec1(2));
  MapSpec quarter = builtin_map("scalar-linear", {0.25}, 1);
  for (double q : {0.0, 0.3, -0.49, 0.5}) {
    CHECK(check_self_mapping(quarter, seg, GridContext::make(1.0, vec1(q))).satisfied);
  }

  MapSpec slide = builtin_map("shift", {10.0}, 1);
  ConditionVerdict escape = check_self_mapping(slide, seg, GridContext::make(1.0, vec1(0.0)));
  CHECK(!escape.satisfied);
  REQUIRE(escape.witness.has_value());
  REQUIRE(!escape.witness->points.empty());
  CHECK(!seg.contains(vec1(scalar_round(escape.witness->values[0][0], 1.0))));

  MapSpec identity = builtin_map("scalar-linear", {1.0}, 1);
  DomainSpec small = DomainSpec::box(vec1(-1), vec1(1));
  CHECK(check_self_mapping(identity, small, GridContext::make(0.5, vec1(0.0))).satisfied);
}

TEST_CASE("check_margin certifies affine images and rejects impossible boxes") {
  DomainSpec seg = DomainSpec::box(vec1(-2), vec1(2));
  MapSpec quarter = builtin_map("scalar-linear", {0.25}, 1);
  ConditionVerdict ok = check_margin(quarter, seg, 1.0, 10'000, 42);
  CHECK(ok.satisfied);
  CHECK(ok.certified);  // exact interval image, not sampling

  MapSpec identity = builtin_map("scalar-linear", {1.0}, 1);
  ConditionVerdict tight = check_margin(identity, seg, 1.0, 10'000, 42);
  CHECK(!tight.satisfied);
  REQUIRE(tight.witness.has_value());
  REQUIRE(!tight.witness->points.empty());
  {
    const Vector& x = tight.witness->points[0];
    Vector fx = identity(x);
    bool inside_strip = fx[0] >= -2.0 + 0.5 && fx[0] <= 2.0 - 0.5;
    CHECK(!inside_strip);
  }

  CHECK_THROWS_AS(check_margin(quarter, seg, 5.0, 100, 42), ConfigError);

  DomainSpec pred = DomainSpec::restricted(
      vec1(-2), vec1(2), [](const Vector& x) { return std::abs(x[0]) <= 1.0; }, "ball");
  CHECK_THROWS_AS(check_margin(quarter, pred, 1.0, 100, 42), ConfigError);
}

TEST_CASE("sampled margin checks are usable for families without image boxes") {
  MapSpec bumpy = builtin_map("sigmoid-contraction", {0.5, 2.0}, 1);
  MapSpec stripped = bumpy;
  stripped.image_box = nullptr;  // force the sampled path
  DomainSpec seg = DomainSpec::box(vec1(-2), vec1(2));
  ConditionVerdict sampled = check_margin(stripped, seg, 1.0, 5'000, 42);
  CHECK(sampled.satisfied);  // image is within (-0.5, 0.5), well inside the strip
  CHECK(!sampled.certified);
}

TEST_CASE("a passing margin implies self-mapping for the affine corpus") {
  SubstreamRng rng(16, stream_domain::kSystemGeneration, 5);
  for (const CorpusInstance& inst : evaluation_corpus()) {
    ConditionVerdict margin = check_margin(inst.map, inst.dom, inst.h, 2'000, 42);
    if (!margin.satisfied) continue;
    for (int i = 0; i < 10; ++i) {
      Vector q(inst.map.dimension);
      for (int c = 0; c < inst.map.dimension; ++c) q[c] = dyadic_offset(rng, inst.h);
      GridContext ctx = GridContext::make(inst.h, q);
      CHECK(check_self_mapping(inst.map, inst.dom, ctx).satisfied);
    }
  }
}

TEST_CASE("conjugate_by_signs turns orthant-monotone maps standard-monotone") {
  Matrix a(2, 2);
  a << 0.0, -0.5, -0.5, 0.0;
  MapSpec crossed = affine_map(a, Vector::Zero(2));
  CHECK(!crossed.declared_monotone);

  MapSpec flipped = conjugate_by_signs(crossed, {1, -1});
  CHECK(flipped.declared_monotone);  // S A S has entries {0, 1/2}

  // Conjugation law: g(x) = S f(S x).
  Vector x = vec2(0.75, -0.25);
  Vector sx = vec2(x[0], -x[1]);
  Vector fsx = crossed(sx);
  Vector expected = vec2(fsx[0], -fsx[1]);
  Vector got = flipped(x);
  CHECK(got[0] == doctest::Approx(expected[0]));
  CHECK(got[1] == doctest::Approx(expected[1]));

  GridContext ctx = GridContext::make(0.5, vec2(0.0, 0.0));
  DomainSpec square = DomainSpec::box(vec2(-1, -1), vec2(1, 1));
  std::vector<Vector> points;
  for (const LatticeIndex& z : enumerate_domain(square, ctx)) points.push_back(ctx.point_at(z));
  CHECK(check_monotone(flipped, points).satisfied);

  // In-family conjugates stay in family: c - x flips to (S c) - x.
  MapSpec mirror = builtin_map("negated-linear", {1.0, 2.0}, 2);
  MapSpec mflip = conjugate_by_signs(mirror, {-1, 1});
  CHECK(mflip.family == "negated-linear");
  Vector mx = mflip(vec2(0.25, 0.25));
  CHECK(mx[0] == doctest::Approx(-1.0 - 0.25));
  CHECK(mx[1] == doctest::Approx(2.0 - 0.25));

  CHECK_THROWS_AS(conjugate_by_signs(crossed, {1}), ArgumentError);
  CHECK_THROWS_AS(conjugate_by_signs(crossed, {1, 2}), ArgumentError);
}

TEST_CASE("affine image boxes contain the image of every sampled point") {
  SubstreamRng rng(17, stream_domain::kSystemGeneration, 6);
  for (const CorpusInstance& inst : evaluation_corpus()) {
    REQUIRE(inst.map.image_box);
    auto [img_lo, img_hi] = inst.map.image_box(inst.dom.lower, inst.dom.upper);
    for (int i = 0; i < 200; ++i) {
      Vector x(inst.map.dimension);
      for (int c = 0; c < inst.map.dimension; ++c) {
        x[c] = rng.closed_open(inst.dom.lower[c], inst.dom.upper[c]);
      }
      Vector fx = inst.map(x);
      CHECK(cw_leq(img_lo, fx));
      CHECK(cw_leq(fx, img_hi));
    }
  }
}
