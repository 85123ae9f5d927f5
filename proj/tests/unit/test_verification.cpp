#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "lmcf/verification.hpp"
#include "support/fixtures.hpp"

namespace lmcf {
namespace {

std::vector<TimeSample> decaying_series(int n = 20) {
  std::vector<TimeSample> s(n);
  for (int k = 0; k < n; ++k) {
    s[k].t = 0.1 * k;
    s[k].sup_ut = 0.5 * std::exp(-s[k].t);
    s[k].sup_du2 = 0.1;
    s[k].osc_vs_reference = 0.3 * std::exp(-12.0 * s[k].t);
    s[k].abs_diff_max = 0.3;
    s[k].u_max = -0.4 * s[k].t + 0.05;
    s[k].u_min = -0.4 * s[k].t - 0.05;
  }
  return s;
}

TEST(SpaceLikeBound, Examples) {
  EXPECT_NEAR(space_like_bound(1.0, 1.0), 0.6180340, 1e-7);
  EXPECT_EQ(space_like_bound(0.0, 1.0), 0.0);
  EXPECT_THROW(space_like_bound(1.0, 0.0), ScenarioError);
  // exact root of kappa0^2 c1^2 + c2^2 c1 - c2^2 = 0
  for (double c2 : {1e-6, 0.1, 1.0, 30.0}) {
    for (double k : {0.25, 1.0, 4.0}) {
      const double c1 = space_like_bound(c2, k);
      EXPECT_GT(c1, 0.0);
      EXPECT_LT(c1, 1.0);
      EXPECT_NEAR(k * k * c1 * c1 + c2 * c2 * c1 - c2 * c2, 0.0, 1e-12 * (1 + c2 * c2));
    }
  }
}

TEST(SpaceLikeBound, MonotoneInItsArguments) {
  double prev = 0.0;
  for (double c2 = 0.01; c2 < 10.0; c2 *= 1.3) {
    const double c1 = space_like_bound(c2, 1.0);
    EXPECT_GT(c1, prev);
    prev = c1;
  }
  prev = 1.0;
  for (double k = 0.1; k < 10.0; k *= 1.3) {
    const double c1 = space_like_bound(0.5, k);
    EXPECT_LT(c1, prev);
    prev = c1;
  }
}

TEST(MonitorConstants, FromInitialData) {
  const GridPtr g = test::disk_grid(16);
  const MeanCurvatureOperator flat(g, test::constant_phi(0.0));
  const MonitorConstants zero = monitor_constants(GridFunction(g, 0.0), flat);
  EXPECT_EQ(zero.c0, 0.0);
  EXPECT_EQ(zero.c2, 0.0);
  EXPECT_EQ(zero.c1, 0.0);
  EXPECT_NEAR(zero.kappa0, 1.0, 1e-12);
  const MeanCurvatureOperator wave(g, test::fourier_phi(0.1, {0.2}));
  const MonitorConstants mc = monitor_constants(GridFunction(g, 0.0), wave);
  EXPECT_GT(mc.c0, 0.0);
  EXPECT_NEAR(mc.phi0, -0.1, 1e-12);
  EXPECT_NEAR(mc.phi1, 0.3, 1e-12);
  EXPECT_NEAR(mc.c2, 0.3 * std::sqrt(mc.c0) + 3 * mc.phi2, 1e-14);
  EXPECT_TRUE(std::isnan(mc.c8));
}

TEST(UtMaxPrinciple, PassesAndFails) {
  auto s = decaying_series();
  EXPECT_TRUE(check_ut_max_principle(s).pass);
  s[7].sup_ut = s[6].sup_ut * 1.01;  // injected increase
  const CheckReport r = check_ut_max_principle(s);
  EXPECT_FALSE(r.pass);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front(), 7u);
  // an incompatible start may overshoot at row 0 only when it is skipped
  auto t = decaying_series();
  t[0].sup_ut = 0.01;
  EXPECT_FALSE(check_ut_max_principle(t).pass);
  EXPECT_TRUE(check_ut_max_principle(t, true).pass);
  EXPECT_FALSE(check_ut_max_principle({}).pass);
}

TEST(SpacelikeBoundCheck, PassesAndFails) {
  MonitorConstants mc;
  mc.c1 = 0.05;
  auto s = decaying_series();
  EXPECT_TRUE(check_spacelike_bound(s, mc, 0.1, 0.01, 1e-3).pass);
  s[3].sup_du2 = 0.2;
  EXPECT_FALSE(check_spacelike_bound(s, mc, 0.1, 0.01, 1e-3).pass);
  s[3].sup_du2 = 1.0;
  EXPECT_FALSE(check_spacelike_bound(s, mc, 1.0, 0.01, 1e-3).pass);
}

TEST(OscDecay, PassesFailsAndThrows) {
  auto s = decaying_series();
  EXPECT_TRUE(check_osc_decay(s, true).pass);
  // a constant shift u0_b = u0_a + 3 has zero oscillation for all time
  auto shifted = decaying_series();
  for (auto& r : shifted) {
    r.osc_vs_reference = 0.0;
    r.abs_diff_max = 3.0;
  }
  EXPECT_TRUE(check_osc_decay(shifted, true).pass);
  // time-reversed series grows
  std::vector<TimeSample> rev(s.rbegin(), s.rend());
  EXPECT_FALSE(check_osc_decay(rev, true).pass);
  // slow decay fails the final ratio
  auto slow = decaying_series();
  for (auto& r : slow) r.osc_vs_reference = 0.3 * std::exp(-r.t);
  EXPECT_FALSE(check_osc_decay(slow, true).pass);
  EXPECT_THROW(check_osc_decay(s, false), ScenarioError);
}

TEST(SpacelikeRefinement, OrderOfTheExcess) {
  // excess 0.04 h^2 / h0^2 : order 2
  std::vector<SpacelikeLevel> second{{0.1, 0.54, 0.5}, {0.05, 0.51, 0.5}, {0.025, 0.5025, 0.5}};
  EXPECT_TRUE(check_spacelike_refinement(second).pass);
  std::vector<SpacelikeLevel> first{{0.1, 0.54, 0.5}, {0.05, 0.52, 0.5}, {0.025, 0.51, 0.5}};
  EXPECT_FALSE(check_spacelike_refinement(first).pass);
  std::vector<SpacelikeLevel> none{{0.1, 0.54, 0.5}, {0.05, 0.49, 0.5}};
  EXPECT_TRUE(check_spacelike_refinement(none).pass);
  EXPECT_THROW(check_spacelike_refinement({{0.1, 0.5, 0.5}}), ScenarioError);
}

TEST(TranslatorAgreement, PassesAndFails) {
  const int n = 40;
  Eigen::VectorXd profile = Eigen::VectorXd::LinSpaced(n, -0.05, 0.05);
  FlowSummary f;
  f.speed_estimate = -0.4;
  f.t_final = 1.9;
  f.u_final = profile.array() - 0.4 * f.t_final + 0.123;
  f.series = decaying_series();
  MonitorConstants mc;
  const CheckReport ok = check_translator_agreement(f, -0.4, profile, 0.01, &mc);
  EXPECT_TRUE(ok.pass) << ok.detail;
  EXPECT_NEAR(mc.c8, 0.05, 1e-12);
  EXPECT_FALSE(check_translator_agreement(f, -0.39, profile, 0.01).pass);
  FlowSummary bent = f;
  bent.u_final[3] += 0.01;
  EXPECT_FALSE(check_translator_agreement(bent, -0.4, profile, 0.01).pass);
  FlowSummary drifting = f;
  for (auto& r : drifting.series) r.u_max += 0.1 * r.t;
  EXPECT_FALSE(check_translator_agreement(drifting, -0.4, profile, 0.01).pass);
}

TEST(MaximalLimit, EnergyIdentityAndCurvature) {
  std::vector<TimeSample> s(10);
  for (int k = 0; k < 10; ++k) {
    s[k].t = 0.1 * k;
    s[k].dissipation = std::exp(-s[k].t);
    s[k].energy = k == 0 ? 1.0 : s[k - 1].energy + 0.1 * s[k].dissipation;
    s[k].max_H = 1e-3 * std::exp(-s[k].t);
  }
  EXPECT_TRUE(check_maximal_limit(s, 0.0, 0.01).pass);
  auto tampered = s;
  tampered[5].energy += 0.1;
  const CheckReport bad = check_maximal_limit(tampered, 0.0, 0.01);
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.trace.empty());
  // a skipped start-up window hides early residuals only
  tampered = s;
  tampered[1].energy += 0.1;
  for (std::size_t k = 2; k < tampered.size(); ++k) tampered[k].energy += 0.1;
  EXPECT_TRUE(check_maximal_limit(tampered, 0.0, 0.01, 0.15).pass);
  auto curved = s;
  curved.back().max_H = 0.01;
  EXPECT_FALSE(check_maximal_limit(curved, 0.0, 0.01).pass);
  EXPECT_THROW(check_maximal_limit(s, 0.2, 0.01), ScenarioError);
  EXPECT_DOUBLE_EQ(incompatible_transient_window(0.1), 0.25);
}

TEST(EvoDuStudyCheck, PicksTheConvergingConvention) {
  std::vector<EvoDuStudy> studies;
  for (double h : {0.1, 0.05, 0.025}) {
    EvoDuStudy s;
    s.h = h;
    s.residual = {{"as_printed", 0.3}, {"as_printed_2K", 0.2}, {"rederived", 10 * h * h}, {"rederived_1K", 0.1 + h * h}};
    studies.push_back(s);
  }
  const EvoDuVerdict v = check_evo_du_residual(studies);
  EXPECT_TRUE(v.report.pass);
  ASSERT_EQ(v.converging.size(), 1u);
  EXPECT_EQ(v.converging.front(), "rederived");
  EXPECT_NEAR(v.observed_order.at("rederived"), 2.0, 1e-12);
  for (auto& s : studies) s.residual["rederived"] = 0.3;
  EXPECT_FALSE(check_evo_du_residual(studies).report.pass);
  EXPECT_THROW(check_evo_du_residual({studies.front()}), ScenarioError);
}

TEST(EvoDuStudyCheck, ResidualsNeedSnapshots) {
  const GridPtr g = test::disk_grid(16);
  const MeanCurvatureOperator op(g, test::constant_phi(0.0));
  EXPECT_THROW(evo_du_residuals(op, {}), ScenarioError);
  // a stationary constant state has zero residual in every convention
  const GridFunction c(g, 1.0);
  const EvoDuStudy s = evo_du_residuals(op, {DenseSnapshot{0.1, 0.01, 0.01, c, c, c}});
  for (const auto& [name, r] : s.residual) EXPECT_EQ(r, 0.0) << name;
}

}  // namespace
}  // namespace lmcf
