#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helmnodal/perturbation.hpp"
#include "helmnodal/waveset.hpp"

using namespace helmnodal;

namespace {

// solved coefficients for k = (6,8,10,12,14), frozen from an independent
// 60-digit solve of the constraint system
constexpr double kFrozenD[5] = {
    -1.04840310741090081290401672836288573,
    0.0490448901585792518117745633746759456,
    -0.000642533179704714884180406407921122248,
    7.50669737003215785621954785571924021e-7,
    -2.37710727239363050558654662722749422e-10,
};

}  // namespace

TEST_CASE("waveset validation") {
  REQUIRE_THROWS_AS(select_waveset(5), std::invalid_argument);   // odd
  REQUIRE_THROWS_AS(select_waveset(4), std::invalid_argument);   // not > 4
  REQUIRE_THROWS_AS(WaveSet::from_k({6, 8, 8, 12, 14}), std::invalid_argument);
  REQUIRE_THROWS_AS(WaveSet::from_k({6, 7, 10, 12, 14}), std::invalid_argument);
  WaveSet ws = WaveSet::from_k({6, 8, 10, 12, 14});
  REQUIRE(ws.nu[0] == Catch::Approx(std::sqrt(32.0)).epsilon(1e-15));
  REQUIRE(ws.nu[4] == Catch::Approx(std::sqrt(192.0)).epsilon(1e-15));
}

TEST_CASE("canonical waveset is the first five even numbers above 4") {
  WaveSet ws = select_waveset(6);
  REQUIRE(ws.k == std::array<int, 5>{6, 8, 10, 12, 14});
  for (int m = 1; m <= 5; ++m)
    REQUIRE(std::fabs(scaled_minor_det(ws, m)) > kMinorDetFloor);
  // first minor of the unscaled matrix is the bare entry 1
  ConstraintMatrix cm = assemble_matrix(ws);
  REQUIRE(cm.entries[0][0] == 1.0);
  REQUIRE(scaled_minor_det(ws, 1) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("alternative start points select strictly increasing even sets") {
  WaveSet ws8 = select_waveset(8);
  REQUIRE(ws8.k[0] == 8);
  for (int j = 1; j < 5; ++j) {
    REQUIRE(ws8.k[j] > ws8.k[j - 1]);
    REQUIRE(ws8.k[j] % 2 == 0);
  }
}

TEST_CASE("matrix rows match the constraint system") {
  WaveSet ws = select_waveset(6);
  ConstraintMatrix cm = assemble_matrix(ws);
  for (int j = 0; j < 5; ++j) REQUIRE(cm.entries[0][j] == 1.0);
  // entry (2,1) = cosh(pi sqrt(32)/sqrt 3), frozen from a 45-digit evaluation
  REQUIRE(cm.entries[1][0] ==
          Catch::Approx(14289.0881989877998544).epsilon(1e-14));
  // rows 3 and 5 carry the nu sinh factors
  const double nu0 = std::sqrt(32.0);
  const double c1 = static_cast<double>(c1_q());
  REQUIRE(cm.entries[2][0] ==
          Catch::Approx(nu0 * std::sinh(c1 * nu0)).epsilon(1e-13));
  REQUIRE(cm.entries[4][0] ==
          Catch::Approx(nu0 * std::sinh(2 * c1 * nu0)).epsilon(1e-13));
}

TEST_CASE("column equilibration normalizes every column") {
  WaveSet ws = select_waveset(6);
  ConstraintMatrix cm = assemble_matrix(ws);
  for (int j = 0; j < 5; ++j) {
    double mx = 0;
    for (int i = 0; i < 5; ++i)
      mx = std::max(mx, std::fabs(cm.entries[i][j] * cm.col_scales[j]));
    REQUIRE(mx == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("perturbation solve reproduces the frozen coefficients") {
  Perturbation p = solve_perturbation(select_waveset(6));
  for (int j = 0; j < 5; ++j)
    REQUIRE(p.d_dbl(j) == Catch::Approx(kFrozenD[j]).epsilon(1e-10));
  for (double r : p.residuals) REQUIRE(std::fabs(r) <= 1e-9);
}

TEST_CASE("solve-then-evaluate closure at the constraint points") {
  Perturbation p = solve_perturbation(select_waveset(6));
  const qreal c1 = c1_q();
  QJet a = psi_jet_q(0, 0, p);
  QJet b = psi_jet_q(pi_q(), c1, p);
  QJet c = psi_jet_q(0, 2 * c1, p);
  REQUIRE(std::fabs((double)(a.dx + 1)) <= 1e-9);
  REQUIRE(std::fabs((double)b.dx) <= 1e-9);
  REQUIRE(std::fabs((double)b.dxy) <= 1e-9);
  REQUIRE(std::fabs((double)(c.dx - 1)) <= 1e-9);
  REQUIRE(std::fabs((double)(c.dxy - 1)) <= 1e-9);
  // full degeneracy at z0
  for (qreal v : {b.value, b.dx, b.dy, b.dxx, b.dxy, b.dyy})
    REQUIRE(std::fabs((double)v) <= 1e-9);
}

TEST_CASE("scaling invariance of the solve") {
  WaveSet ws = select_waveset(6);
  auto scaled = detail::solve_constraint_system(ws.k, true);
  auto raw = detail::solve_constraint_system(ws.k, false);
  for (int j = 0; j < 5; ++j) {
    double rel = std::fabs((double)((scaled[j] - raw[j]) / scaled[j]));
    REQUIRE(rel <= 1e-6);
  }
}

TEST_CASE("determinant robustness under wavenumber bumps") {
  // bumping any k_j to the next admissible even value and re-running the
  // greedy continuation for the tail still yields a solvable system
  WaveSet ws = select_waveset(6);
  for (int j = 0; j < 5; ++j) {
    std::array<int, 5> k = ws.k;
    k[j] += 2;
    while (std::fabs(detail::scaled_minor_det(k.data(), j + 1)) <= kMinorDetFloor)
      k[j] += 2;
    for (int i = j + 1; i < 5; ++i) {
      k[i] = k[i - 1] + 2;
      while (std::fabs(detail::scaled_minor_det(k.data(), i + 1)) <= kMinorDetFloor)
        k[i] += 2;
    }
    Perturbation p = solve_perturbation(WaveSet::from_k(k));
    for (double r : p.residuals) REQUIRE(std::fabs(r) <= 1e-9);
  }
}

TEST_CASE("w-condition report passes for the canonical perturbation") {
  Perturbation p = solve_perturbation(select_waveset(6));
  WConditionReport rep = verify_w_conditions(p);
  for (const auto& [name, m] : rep.margins) {
    INFO(name << " margin " << m);
    REQUIRE(m > 0);
  }
  REQUIRE(rep.pass);
  // (W5) anchors: psi_x(0,0) = -1 gives unit slack
  REQUIRE(rep.margins.at("W5_psix_z1_neg") == Catch::Approx(1.0).epsilon(1e-9));
  REQUIRE(rep.margins.at("W5_psix_z2_pos") == Catch::Approx(1.0).epsilon(1e-9));
  REQUIRE(rep.margins.at("W5_psixy_z2_pos") == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("overflow cap rejects runaway wavenumbers") {
  REQUIRE_THROWS_AS(assemble_matrix(WaveSet::from_k({6, 8, 10, 12, 200})),
                    std::overflow_error);
}
