#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "latlab/errors.hpp"
#include "latlab/lattice.hpp"
#include "latlab/rng.hpp"

#include "test_support.hpp"

using namespace latlab;
using namespace latlab::testing;

TEST_CASE("scalar_round pins the closed-left cell rule") {
  CHECK(scalar_round(0.5, 1.0) == 1.0);
  CHECK(scalar_round(-0.5, 1.0) == 0.0);
  CHECK(scalar_round(0.31, 0.2) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(scalar_round(0.0, 1.0) == 0.0);
  CHECK(scalar_round(-1.0, 0.5) == -1.0);

  CHECK_THROWS_AS(scalar_round(1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(scalar_round(1.0, -0.5), ArgumentError);
  CHECK_THROWS_AS(scalar_round(std::nan(""), 1.0), ArgumentError);
  CHECK_THROWS_AS(scalar_round(INFINITY, 1.0), ArgumentError);
}

TEST_CASE("scalar_round lands in the half-open cell for dyadic inputs") {
  SubstreamRng rng(11, stream_domain::kSystemGeneration, 0);
  for (int i = 0; i < 2000; ++i) {
    double h = dyadic_spacing(rng);
    double y = (std::floor(rng.uniform01() * 8192.0) - 4096.0) / 1024.0;
    Index k = scalar_round_index(y, h);
    double v = scalar_round(y, h);
    CHECK(v == static_cast<double>(k) * h);
    CHECK((static_cast<double>(k) - 0.5) * h <= y);
    CHECK(y < (static_cast<double>(k) + 0.5) * h);
  }
}

TEST_CASE("round_to_lattice matches the componentwise definition") {
  GridContext ctx = GridContext::make(0.5, vec2(0.1, 0.1));
  LatticeIndex z = round_to_lattice(vec2(0.3, -0.2), ctx);
  CHECK(same_index(z, idx2(0, -1)));
  Vector denoted = ctx.point_at(z);
  CHECK(denoted[0] == doctest::Approx(0.1));
  CHECK(denoted[1] == doctest::Approx(-0.4));

  GridContext unit = GridContext::make(1.0, vec1(0.0));
  CHECK(same_index(round_to_lattice(vec1(0.25), unit), idx1(0)));

  CHECK_THROWS_AS(round_to_lattice(vec1(std::nan("")), unit), ArgumentError);
}

TEST_CASE("lattice points are their own roundoff") {
  SubstreamRng rng(12, stream_domain::kSystemGeneration, 1);
  for (int i = 0; i < 500; ++i) {
    double h = dyadic_spacing(rng);
    Vector q = vec2(dyadic_offset(rng, h), dyadic_offset(rng, h));
    GridContext ctx = GridContext::make(h, q);
    LatticeIndex z = idx2(static_cast<Index>(rng.next_u64() % 41) - 20,
                          static_cast<Index>(rng.next_u64() % 41) - 20);
    CHECK(same_index(round_to_lattice(ctx.point_at(z), ctx), z));
  }
}

TEST_CASE("roundoff image cell contains the input") {
  SubstreamRng rng(13, stream_domain::kSystemGeneration, 2);
  for (int i = 0; i < 2000; ++i) {
    double h = dyadic_spacing(rng);
    Vector q = vec2(dyadic_offset(rng, h), dyadic_offset(rng, h));
    GridContext ctx = GridContext::make(h, q);
    Vector x = vec2(rng.closed_open(-3.0, 3.0), rng.closed_open(-3.0, 3.0));
    Vector p = ctx.point_at(round_to_lattice(x, ctx));
    for (int c = 0; c < 2; ++c) {
      CHECK(p[c] - h / 2 <= x[c]);
      CHECK(x[c] < p[c] + h / 2);
    }
  }
}

TEST_CASE("GridContext canonicalizes offsets into the half-open cube") {
  GridContext wrapped = GridContext::make(1.0, vec1(2.0 / 3.0));
  CHECK(wrapped.q()[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));

  GridContext top = GridContext::make(1.0, vec1(0.5));
  CHECK(top.q()[0] == 0.5);

  GridContext bottom = GridContext::make(1.0, vec1(-0.5));
  CHECK(bottom.q()[0] == 0.5);

  GridContext inside = GridContext::make(1.0, vec1(0.3));
  CHECK(inside.q()[0] == 0.3);  // bit-identical, no arithmetic applied

  CHECK_THROWS_AS(GridContext::make(0.0, vec1(0.0)), ArgumentError);
  CHECK_THROWS_AS(GridContext::make(-1.0, vec1(0.0)), ArgumentError);
}

TEST_CASE("enumerate_domain pins the interval examples") {
  DomainSpec dom = DomainSpec::box(vec1(-1), vec1(1));

  auto centered = enumerate_domain(dom, GridContext::make(0.5, vec1(0.0)));
  REQUIRE(centered.size() == 5);
  for (Index i = 0; i < 5; ++i) CHECK(same_index(centered[i], idx1(i - 2)));

  auto offset = enumerate_domain(dom, GridContext::make(0.5, vec1(0.1)));
  REQUIRE(offset.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(same_index(offset[i], idx1(i - 2)));
}

TEST_CASE("enumerate_domain respects a membership predicate") {
  DomainSpec dom = DomainSpec::restricted(
      vec2(0, 0), vec2(1, 1), [](const Vector& x) { return x[0] + x[1] <= 1.0; },
      "simplex");
  GridContext ctx = GridContext::make(0.5, vec2(0.25, 0.25));
  auto points = enumerate_domain(dom, ctx);
  REQUIRE(points.size() == 3);
  CHECK(same_index(points[0], idx2(0, 0)));  // (0.25, 0.25)
  CHECK(same_index(points[1], idx2(0, 1)));  // (0.25, 0.75)
  CHECK(same_index(points[2], idx2(1, 0)));  // (0.75, 0.25)
}

TEST_CASE("enumerate_domain agrees with a brute-force scan") {
  SubstreamRng rng(14, stream_domain::kSystemGeneration, 3);
  for (int i = 0; i < 200; ++i) {
    double h = dyadic_spacing(rng);
    Vector lo = vec2(rng.closed_open(-2.0, 0.0), rng.closed_open(-2.0, 0.0));
    Vector hi = vec2(lo[0] + rng.closed_open(0.1, 3.0), lo[1] + rng.closed_open(0.1, 3.0));
    DomainSpec dom = DomainSpec::box(lo, hi);
    GridContext ctx = GridContext::make(h, vec2(dyadic_offset(rng, h), dyadic_offset(rng, h)));

    auto fast = enumerate_domain(dom, ctx);
    auto slow = brute_force_enumerate(dom, ctx);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t j = 0; j < fast.size(); ++j) CHECK(same_index(fast[j], slow[j]));
  }
}

TEST_CASE("enumerate_domain refuses degenerate point counts") {
  DomainSpec dom = DomainSpec::box(vec2(-2, -2), vec2(2, 2));
  GridContext ctx = GridContext::make(1e-4, vec2(0, 0));
  CHECK_THROWS_AS(enumerate_domain(dom, ctx), ResourceError);
}

TEST_CASE("order_bounds finds box corners and rejects L-shapes") {
  DomainSpec box = DomainSpec::box(vec2(-1, -1), vec2(1, 1));
  GridContext ctx = GridContext::make(0.5, vec2(0.1, -0.2));
  auto points = enumerate_domain(box, ctx);
  OrderBounds ob = order_bounds(points);
  REQUIRE(ob.found());
  for (const LatticeIndex& z : points) {
    CHECK(cw_leq(*ob.least, z));
    CHECK(cw_leq(z, *ob.greatest));
  }

  // L-shape ([0,2]x[0,1]) union ([0,1]x[0,2]): the join of (1.5,0.5) and
  // (0.5,1.5) would be (1.5,1.5), which is not a member.
  DomainSpec ell = DomainSpec::restricted(
      vec2(0, 0), vec2(2, 2),
      [](const Vector& x) { return !(x[0] > 1.0 && x[1] > 1.0); }, "L-shape");
  GridContext ectx = GridContext::make(1.0, vec2(0.5, 0.5));
  auto epoints = enumerate_domain(ell, ectx);
  REQUIRE(epoints.size() == 3);
  OrderBounds eob = order_bounds(epoints);
  CHECK(eob.least.has_value());
  CHECK(!eob.greatest.has_value());
  CHECK(!eob.found());
  REQUIRE(eob.witness.has_value());
  CHECK(eob.witness->upper);
  CHECK(same_index(eob.witness->corner, idx2(1, 1)));

  // The witness re-validates: the corner is genuinely absent from the set.
  std::unordered_set<LatticeIndex, LatticeIndexHash, LatticeIndexEq> members(
      epoints.begin(), epoints.end());
  CHECK(members.count(eob.witness->corner) == 0);
  CHECK(members.count(eob.witness->a) == 1);
  CHECK(members.count(eob.witness->b) == 1);

  LatticeIndex solo = idx2(3, 4);
  OrderBounds single = order_bounds(std::span<const LatticeIndex>(&solo, 1));
  REQUIRE(single.found());
  CHECK(same_index(*single.least, solo));
  CHECK(same_index(*single.greatest, solo));

  CHECK_THROWS_AS(order_bounds(std::span<const LatticeIndex>()), ArgumentError);
}

TEST_CASE("compute_extent pins the side-count examples") {
  GridContext unit = GridContext::make(1.0, vec1(0.0));
  ExtentReport a = compute_extent(DomainSpec::box(vec1(-2), vec1(2)), unit);
  CHECK(a.l[0] == 4.0);
  CHECK(a.L_per_axis[0] == 5);
  CHECK(a.L == 5);

  GridContext ctx04 = GridContext::make(0.4, vec2(0.0, 0.0));
  ExtentReport b = compute_extent(DomainSpec::box(vec2(0, 0), vec2(1, 1)), ctx04);
  CHECK(b.L_per_axis[0] == 3);
  CHECK(b.L_per_axis[1] == 3);
  CHECK(b.L == 9);

  ExtentReport c = compute_extent(DomainSpec::box(vec1(0), vec1(0.3)), unit);
  CHECK(c.L == 1);

  // Exact-multiple recognition must survive an inexact division: 2.4/0.4
  // is not representable exactly, yet L_1 must be 7, not drift to 6 or 8.
  GridContext fine = GridContext::make(0.4, vec1(0.0));
  ExtentReport d = compute_extent(DomainSpec::box(vec1(0), vec1(2.4)), fine);
  CHECK(d.L_per_axis[0] == 7);
}

TEST_CASE("no offset places more than L lattice points in the box") {
  SubstreamRng rng(15, stream_domain::kSystemGeneration, 4);
  for (int i = 0; i < 300; ++i) {
    double h = dyadic_spacing(rng);
    Vector lo = vec2(rng.closed_open(-2.0, 0.0), rng.closed_open(-2.0, 0.0));
    Vector hi = vec2(lo[0] + rng.closed_open(0.1, 3.0), lo[1] + rng.closed_open(0.1, 3.0));
    DomainSpec dom = DomainSpec::box(lo, hi);
    GridContext ctx = GridContext::make(h, vec2(dyadic_offset(rng, h), dyadic_offset(rng, h)));
    ExtentReport extent = compute_extent(dom, ctx);
    auto points = enumerate_domain(dom, ctx);
    CHECK(static_cast<Index>(points.size()) <= extent.L);
  }
}
