#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helmnodal/conditions.hpp"

using namespace helmnodal;

namespace {
const Perturbation& canonical() {
  static Perturbation p = solve_perturbation(select_waveset(6));
  return p;
}
}  // namespace

TEST_CASE("saddle check: unperturbed hessian is exactly diag(-1,3)") {
  REQUIRE(check_saddle_z0(0.0, canonical()) > 0);
  // a huge eps destroys the diag(-1,3) proximity
  REQUIRE(check_saddle_z0(10.0, canonical()) <= 0);
}

TEST_CASE("z1 rectangle fails at eps = 0 (degenerate corner)") {
  RectResult r = check_rect_z1(0.0, canonical());
  REQUIRE(r.margin <= 0);
}

TEST_CASE("z2 rectangle fails at eps = 0") {
  RectResult r = check_rect_z2(0.0, canonical());
  REQUIRE(r.margin <= 0);
}

TEST_CASE("psit anchors at the degenerate corners") {
  // psit(0,0) = psi_x(0,0) = -1 exactly; at z2 the fast path carries the
  // ~1e12 mode cancellation, so the anchor holds to ~1e-7 absolute (the
  // epsilon factor in g makes that noise irrelevant downstream)
  DerivativeJet a = eval_psit(0, 0, canonical());
  REQUIRE(a.value == Catch::Approx(-1.0).epsilon(1e-9));
  DerivativeJet b = eval_psit(0, kTopY, canonical());
  REQUIRE(b.value == Catch::Approx(1.0).epsilon(1e-5));
  REQUIRE(b.dy == Catch::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("epsilon search returns a passing report") {
  auto [eps, rep] = select_epsilon(canonical());
  REQUIRE(rep.pass);
  REQUIRE(eps > 0);
  for (const auto& [name, m] : rep.margins) {
    INFO(name << " margin " << m);
    REQUIRE(m > 0);
  }
  // eps = 1 must not be admissible for the canonical waveset
  REQUIRE(eps < 1.0);

  SECTION("soundness: re-running the checks at the returned eps passes") {
    ConditionReport again = certify_epsilon(eps, canonical());
    REQUIRE(again.pass);
  }
  SECTION("monotonicity spot check: eps/2 also passes") {
    ConditionReport half = certify_epsilon(eps / 2, canonical());
    REQUIRE(half.pass);
  }
  SECTION("region containments") {
    const ConditionRegions& r = rep.regions;
    REQUIRE(r.alpha > 0);
    REQUIRE(r.alpha < kPi);
    REQUIRE(r.beta > 0);
    REQUIRE(r.beta < kC1);
    REQUIRE(r.gamma > 0);
    REQUIRE(r.delta > 0);
    REQUIRE(r.r > 0);
    REQUIRE_NOTHROW(r.validate());
    // the s-root bracket sits inside the z2 rectangle depth
    REQUIRE(std::sqrt(2 * eps / 3) < r.delta);
  }
}

TEST_CASE("certify_epsilon rejects nonpositive eps") {
  REQUIRE_THROWS_AS(certify_epsilon(0.0, canonical()), std::invalid_argument);
  REQUIRE_THROWS_AS(certify_epsilon(-1e-3, canonical()), std::invalid_argument);
}

TEST_CASE("eps = 1 fails at least one condition") {
  ConditionReport rep = certify_epsilon(1.0, canonical());
  REQUIRE_FALSE(rep.pass);
}
