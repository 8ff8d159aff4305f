#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helmnodal/trace.hpp"

using namespace helmnodal;

namespace {
const Perturbation& canonical() {
  static Perturbation p = solve_perturbation(select_waveset(6));
  return p;
}
double canonical_eps() {
  static double eps = select_epsilon(canonical()).first;
  return eps;
}
const TraceResult& canonical_trace() {
  static TraceResult tr = trace_all(canonical_eps(), canonical(), 2001);
  return tr;
}
}  // namespace

TEST_CASE("find_s brackets and converges") {
  const double eps = canonical_eps();
  const double s = find_s(eps, canonical());
  REQUIRE(s > kC1);
  REQUIRE(s < kTopY);
  REQUIRE(std::fabs(eval_g(0, s, eps, canonical()).value) <= 1e-12);
  // bracket endpoint identities: g(0, pi/sqrt3) = -2, g(0, top) = eps
  REQUIRE(eval_g(0, kC1, eps, canonical()).value == Catch::Approx(-2.0).epsilon(1e-12));
  REQUIRE(eval_g(0, kTopY, eps, canonical()).value ==
          Catch::Approx(eps).epsilon(1e-5));
  // the corner sits at scale sqrt(2 eps / 3) below the top
  const double tstar = std::sqrt(2 * eps / 3);
  REQUIRE(kTopY - s > 0.3 * tstar);
  REQUIRE(kTopY - s < 3.0 * tstar);
}

TEST_CASE("find_s requires a positive eps") {
  REQUIRE_THROWS_AS(find_s(0.0, canonical()), std::invalid_argument);
}

TEST_CASE("traced mu: endpoints, monotonicity, residuals") {
  const TraceResult& tr = canonical_trace();
  const double eps = canonical_eps();

  REQUIRE(tr.mu.samples.front()[0] == 0.0);
  REQUIRE(tr.mu.samples.back()[0] == tr.s);
  REQUIRE(tr.mu.samples.back()[1] == 0.0);

  bool saw_c1 = false;
  for (const auto& sm : tr.mu.samples)
    if (sm[0] == kC1) {
      saw_c1 = true;
      REQUIRE(std::fabs(sm[1] - kPi) <= 1e-9);
    }
  REQUIRE(saw_c1);

  for (std::size_t i = 1; i < tr.mu.samples.size(); ++i)
    REQUIRE(tr.mu.samples[i][1] < tr.mu.samples[i - 1][1]);

  REQUIRE(tr.mu.max_residual(eps, canonical()) <= kCurveResidualTol);

  // mu(0) just below 2 pi at the sqrt(2 eps) corner scale
  const double gap = 2 * kPi - tr.mu.samples.front()[1];
  REQUIRE(gap > 0);
  REQUIRE(gap == Catch::Approx(std::sqrt(2 * eps)).epsilon(0.05));
}

TEST_CASE("mu converges to the unperturbed rhombus line as eps -> 0") {
  // deviation profile at eps = 2^-20 frozen from direct root solves: the
  // corner gap sqrt(2 eps) dominates near y = 0
  const double e20 = std::ldexp(1.0, -20);
  NodalCurve mu20 = trace_mu(e20, canonical(), 512, find_s(e20, canonical()));
  double dev0 = 0;
  for (const auto& sm : mu20.samples)
    if (sm[0] == 0.0) dev0 = std::fabs(sm[1] - 2 * kPi);
  REQUIRE(dev0 == Catch::Approx(std::sqrt(2 * e20)).epsilon(0.01));

  // away from the corners the curve deviation is eps psit / |grad w| to
  // first order, so quartering eps four times over shrinks it ~16x; the
  // curve is measured by direct root solves (at these large eps the full
  // tracer may legitimately reject the wiggling upper part)
  std::vector<double> devs;
  for (int m : {20, 24, 28}) {
    const double e = std::ldexp(1.0, -m);
    double dev = 0;
    for (int i = 0; i <= 200; ++i) {
      const double y = 0.02 + (2.0 - 0.02) * i / 200;
      if (std::fabs(y - kC1) < 0.3) continue;  // lines collide at the saddle
      const double line = 2 * kPi - kSqrt3d * y;
      detail::RootFn f{e, &canonical(), y};
      double lo = line - 0.4, hi = std::min(line + 0.4, 2 * kPi - 1e-9);
      double flo = f(lo), fhi = f(hi);
      REQUIRE(((flo > 0) != (fhi > 0)));
      const double x = detail::newton_bisect(
          f, [&](double t) { return f.deriv(t); }, lo, hi, flo, fhi, line);
      dev = std::max(dev, std::fabs(x - line));
    }
    devs.push_back(dev);
  }
  REQUIRE(devs[0] / devs[1] > 8.0);
  REQUIRE(devs[1] / devs[2] > 8.0);
  REQUIRE(devs[2] < 2e-4);
}

TEST_CASE("tangent at z0 is parallel to (sqrt3, -1)") {
  const TraceResult& tr = canonical_trace();
  for (std::size_t i = 0; i < tr.mu.samples.size(); ++i)
    if (tr.mu.samples[i][0] == kC1) {
      // stored tangent points toward increasing y: (-sqrt3, 1)/2
      REQUIRE(tr.mu.tangents[i][0] == Catch::Approx(-kSqrt3d / 2).margin(1e-12));
      REQUIRE(tr.mu.tangents[i][1] == Catch::Approx(0.5).margin(1e-12));
    }
  // measured secant slope through the saddle agrees with -sqrt3
  std::vector<std::array<double, 2>> near;
  for (const auto& sm : tr.mu.samples)
    if (std::fabs(sm[0] - kC1) < 2e-3 && sm[0] != kC1) near.push_back(sm);
  REQUIRE(near.size() >= 2);
  const auto& a = near.front();
  const auto& b = near.back();
  const double slope = (b[1] - a[1]) / (b[0] - a[0]);
  REQUIRE(slope == Catch::Approx(-kSqrt3d).epsilon(1e-4));
}

TEST_CASE("interior curve is the reflection through x = pi") {
  const TraceResult& tr = canonical_trace();
  const double eps = canonical_eps();
  REQUIRE(tr.interior.samples.front()[0] == Catch::Approx(-kC1));
  REQUIRE(tr.interior.samples.back()[0] == Catch::Approx(kC1));
  // endpoint lands on z0
  REQUIRE(tr.interior.samples.back()[1] == Catch::Approx(kPi));
  // evenness in y
  const auto& s = tr.interior.samples;
  for (std::size_t i = 0, j = s.size() - 1; i < j; ++i, --j) {
    REQUIRE(s[i][0] == Catch::Approx(-s[j][0]).margin(1e-15));
    REQUIRE(s[i][1] == Catch::Approx(s[j][1]).margin(1e-12));
  }
  REQUIRE(tr.interior.max_residual(eps, canonical()) <= kCurveResidualTol);
  // the midpoint sits strictly inside the domain
  double mid_x = 0, mu0 = tr.mu.samples.front()[1];
  for (const auto& sm : s)
    if (sm[0] == 0.0) mid_x = sm[1];
  REQUIRE(mid_x > 0);
  REQUIRE(mid_x < mu0);
}

TEST_CASE("local graphs xi and eta match the traced boundary") {
  const Perturbation& p = canonical();
  const double eps = canonical_eps();
  auto [e, rep] = select_epsilon(p);
  auto [xi, eta] = local_xi_eta(eps, p, rep.regions);

  // 2pi - xi(y) coincides with mu(y) for small y
  const TraceResult& tr = canonical_trace();
  for (const auto& sm : xi.samples) {
    const double y = sm[0];
    if (y > rep.regions.beta) continue;
    // solve mu directly at this height for comparison
    double lo = 2 * kPi - 1.0, hi = 2 * kPi;
    for (int it = 0; it < 90; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (eval_g(mid, y, eps, p).value > 0) lo = mid;
      else hi = mid;
    }
    REQUIRE(std::fabs((2 * kPi - sm[1]) - 0.5 * (lo + hi)) <= 1e-9);
  }

  // eta is the graph the boundary follows near the top: eta(mu(y)) = y
  for (const auto& sm : tr.mu.samples) {
    const double y = sm[0], x = sm[1];
    if (!(x > 0 && x < rep.regions.gamma * 0.98)) continue;
    // interpolate eta at x
    for (std::size_t i = 1; i < eta.samples.size(); ++i) {
      if (eta.samples[i - 1][0] <= x && x <= eta.samples[i][0]) {
        const double t = (x - eta.samples[i - 1][0]) /
                         (eta.samples[i][0] - eta.samples[i - 1][0]);
        const double yi =
            (1 - t) * eta.samples[i - 1][1] + t * eta.samples[i][1];
        REQUIRE(std::fabs(yi - y) <= 1e-8);
      }
    }
  }

  // evenness of xi by uniqueness: xi(-y) = xi(y); verified via direct solve
  const double yprobe = rep.regions.beta / 3;
  detail::RootFn f{eps, &p, -yprobe};
  double flo = f(1e-14), fhi = f(rep.regions.alpha);
  const double xneg = detail::newton_bisect(
      f, [&](double t) { return f.deriv(t); }, 1e-14, rep.regions.alpha, flo,
      fhi, std::sqrt(2 * eps));
  detail::RootFn fp{eps, &p, yprobe};
  flo = fp(1e-14); fhi = fp(rep.regions.alpha);
  const double xpos = detail::newton_bisect(
      fp, [&](double t) { return fp.deriv(t); }, 1e-14, rep.regions.alpha, flo,
      fhi, std::sqrt(2 * eps));
  REQUIRE(xneg == Catch::Approx(xpos).margin(1e-13));
}

TEST_CASE("grid refinement leaves mu unchanged at common heights") {
  const Perturbation& p = canonical();
  const double eps = canonical_eps();
  const double s = find_s(eps, p);
  NodalCurve a = trace_mu(eps, p, 1001, s);
  NodalCurve b = trace_mu(eps, p, 2002, s);
  // compare at exactly shared parameters (pinned points at least)
  for (const auto& sa : a.samples)
    for (const auto& sb : b.samples)
      if (sa[0] == sb[0]) REQUIRE(std::fabs(sa[1] - sb[1]) < 1e-9);
}

TEST_CASE("endpoint limit: mu mu' stays finite and settles near s") {
  const TraceResult& tr = canonical_trace();
  const auto& s = tr.mu.samples;
  std::vector<double> prods;
  for (std::size_t i = s.size() - 12; i + 1 < s.size(); ++i) {
    const double dmu = (s[i + 1][1] - s[i][1]) / (s[i + 1][0] - s[i][0]);
    prods.push_back(s[i][1] * dmu);
  }
  for (double v : prods) {
    REQUIRE(std::isfinite(v));
    REQUIRE(v < 0);
    REQUIRE(std::fabs(v) < 0.05);  // the limit is -3 t* ~ 1e-6 at this eps
  }
  // differences shrink toward the endpoint
  REQUIRE(std::fabs(prods.back()) < std::fabs(prods.front()));
}
