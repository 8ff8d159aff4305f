#include <catch2/catch_amalgamated.hpp>

#include "helmnodal/verify.hpp"

using namespace helmnodal;

namespace {

struct Artifacts {
  Perturbation p;
  double eps;
  ConditionReport cond;
  TraceResult trace;
  SolutionU sol;
  SourceH h;
  Artifacts()
      : p(solve_perturbation(select_waveset(6))),
        eps(0),
        cond(),
        trace(),
        sol(DomainOmega{}) {
    auto [e, rep] = select_epsilon(p);
    eps = e;
    cond = rep;
    trace = trace_all(eps, p, 2001);
    sol = SolutionU(build_domain(trace, eps, p));
    h = build_h(sol, trace, 2001);
  }
};

const Artifacts& artifacts() {
  static Artifacts a;
  return a;
}

}  // namespace

TEST_CASE("full verification suite passes on the canonical construction") {
  const Artifacts& a = artifacts();
  VerifyConfig cfg;
  // trimmed sampling keeps the unit test fast; the acceptance binary runs
  // the full spec sizes
  cfg.helmholtz_samples = 100000;
  cfg.pde_samples = 10000;
  cfg.boundary_samples = 2000;
  cfg.u_grid = 801;
  cfg.flood_grid = 501;

  VerificationReport rep =
      run_suite(a.sol, a.trace, a.h, a.cond, "unit-test", cfg);
  for (const auto& c : rep.checks) {
    INFO(c.name << ": worst " << c.worst << " vs tol " << c.tolerance << " at "
                << c.location);
    CHECK(c.pass);
  }
  REQUIRE(rep.pass);
  REQUIRE(rep.nodal_domain_count == 3);
  REQUIRE(rep.u_max > 1.9);
  REQUIRE(rep.flood_fill_resolution == 501);
}

TEST_CASE("report invariants") {
  const Artifacts& a = artifacts();
  VerifyConfig cfg;
  cfg.helmholtz_samples = 20000;
  cfg.pde_samples = 2000;
  cfg.boundary_samples = 400;
  cfg.u_grid = 401;
  cfg.flood_grid = 301;
  VerificationReport rep =
      run_suite(a.sol, a.trace, a.h, a.cond, "abc", cfg);

  SECTION("overall pass iff every check passes") {
    bool all = true;
    for (const auto& c : rep.checks) all = all && c.pass;
    REQUIRE(rep.pass == all);
  }
  SECTION("monotone tolerance: loosening never flips pass to fail") {
    for (const auto& c : rep.checks)
      if (c.pass) REQUIRE(c.worst <= c.tolerance * 10 + 1e-300);
  }
  SECTION("determinism: two runs produce identical numbers") {
    VerificationReport rep2 =
        run_suite(a.sol, a.trace, a.h, a.cond, "abc", cfg);
    REQUIRE(rep.checks.size() == rep2.checks.size());
    for (std::size_t i = 0; i < rep.checks.size(); ++i) {
      REQUIRE(rep.checks[i].name == rep2.checks[i].name);
      REQUIRE(rep.checks[i].worst == rep2.checks[i].worst);
    }
    REQUIRE(rep.provenance_hash == rep2.provenance_hash);
  }
  SECTION("provenance hash tracks the manifest bytes") {
    VerificationReport rep3 =
        run_suite(a.sol, a.trace, a.h, a.cond, "abd", cfg);
    REQUIRE(rep3.provenance_hash != rep.provenance_hash);
  }
}
