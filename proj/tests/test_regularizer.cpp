#include <gtest/gtest.h>

#include "sl2lab/regularizer.hpp"

using namespace sl2lab;

namespace {
const BaseSystem fp = BaseSystem::fixed_point();

PhiQuery constant_query(double v, double w, double eps) {
  return PhiQuery::make(fp, Potential::constant(fp, v), Potential::constant(fp, w), eps);
}
}  // namespace

TEST(Weight, IntegralAndSymmetry) {
  QuadratureOptions o;
  o.abs_tol = 1e-13;
  EXPECT_NEAR(integrate_adaptive(weight, -1.0, 1.0, o).value, weight_integral, 1e-12);
  EXPECT_EQ(weight(0.0), 1.0);
  EXPECT_EQ(weight(1.0), 0.0);
  EXPECT_EQ(weight(0.3), weight(-0.3));
}

TEST(Conformal, MapsAndPsiCenter) {
  EXPECT_LT(std::abs(conformal_phi(1.0)), 1e-15);
  EXPECT_LT(std::abs(conformal_phi(cplx(0.0, 1.0)) - 1.0), 1e-15);
  EXPECT_LT(std::abs(conformal_psi(0.0) - cplx(0.0, std::sqrt(2.0) - 1.0)), 1e-15);
  for (int k = 1; k < 32; ++k) {
    const cplx z = conformal_psi(std::polar(1.0, 2.0 * pi * k / 32.0));
    EXPECT_LE(std::abs(z), 1.0 + 1e-12);
    EXPECT_GE(z.imag(), -1e-12);
  }
}

TEST(Phi, ConstantPotentialOracle) {
  const auto r = phi(constant_query(-3.0, 0.0, 0.1));
  EXPECT_NEAR(r.value, 0.755769350270655445, 1e-8);
  EXPECT_EQ(r.domain, DomainFlag::in_ball);
}

TEST(Phi, DomainFlag) {
  EXPECT_EQ(constant_query(-3.0, 0.3, 0.1).domain(), DomainFlag::in_ball);
  EXPECT_EQ(constant_query(-3.0, 0.4, 0.1).domain(), DomainFlag::out_of_ball);
}

TEST(Phi, Validation) {
  EXPECT_THROW(phi(constant_query(-3.0, 0.0, 0.0)), Failure);
  PhiQuery q = constant_query(-3.0, 0.0, 0.1);
  q.v0 = Potential::constant(fp, -1.0);
  EXPECT_THROW(phi(q), Failure);
  q = constant_query(-3.0, 0.0, 0.1);
  q.v = Potential::constant(fp, cplx(0.0, 1.0));
  EXPECT_THROW(phi(q), Failure);
}

TEST(Phi, InjectedExponent) {
  const auto q = constant_query(0.0, 0.0, 0.5);
  const auto r = phi_with(q, [](const Potential&) { return Noisy{1.0, 0.0}; });
  EXPECT_NEAR(r.value, pi / 4.0, 1e-8);
}

TEST(PhiBoundary, AgreesWithDirectIntegral) {
  const auto base = BaseSystem::single_orbit(2);
  const PhiQuery q = PhiQuery::make(base, Potential::table(std::vector<double>{1.2, -0.7}),
                                    Potential::table(std::vector<double>{0.2, -0.1}), 0.2);
  const auto a = phi(q);
  const auto b = phi_boundary(q);
  EXPECT_LE(std::abs(a.value - b.value), 2.0 * (a.quad_error + b.quad_error) + 1e-9);
}

TEST(Poisson, CenterOracleAndDefect) {
  const auto c = poisson_check(constant_query(-5.0, 0.0, 0.1));
  EXPECT_NEAR(c.center, 1.566843806035866380, 1e-10);
  EXPECT_LT(std::abs(c.defect()), 1e-6);
}

TEST(PhiGeneral, DiagonalRotationGeneratorOracle) {
  const Cocycle a = Cocycle::constant(fp, Mat2::diag(2.0, 0.5));
  QuadratureOptions o;
  o.abs_tol = 1e-10;
  const auto r = phi_general(a, Sl2Element::rotation_generator(), Sl2Element{}, 0.3, o);
  EXPECT_NEAR(r.value, 0.537773806448285604, 1e-8);
}

TEST(PhiGeneral, EtaValidationAcceptsDefault) {
  const auto v = validate_eta_gen();
  EXPECT_GT(v.eta, 0.0);
  EXPECT_LE(v.eta, default_eta_gen);
}

TEST(Analyticity, ChebyshevFitOfPolynomialIsExact) {
  const auto s = chebyshev_grid(41);
  ASSERT_EQ(s.size(), 41u);
  std::vector<PhiResult> vals;
  for (double x : s) vals.push_back({1.0 + 2.0 * x - 3.0 * x * x * x, 0.0, DomainFlag::in_ball, 0});
  const auto fit = chebyshev_fit(s, vals, 4);
  EXPECT_LT(fit.residual, 1e-12);
  EXPECT_THROW(chebyshev_fit(s, vals, 41), Failure);
}

TEST(Analyticity, ProbeResidualDecays) {
  PhiQuery q = constant_query(-3.0, 0.3, 0.5);
  q.quad.abs_tol = 1e-12;
  const auto fits = analyticity_probe(q, chebyshev_grid(41), {4, 12});
  ASSERT_EQ(fits.size(), 2u);
  EXPECT_LT(fits[1].residual, 1e-9);
  EXPECT_LE(fits[1].residual, fits[0].residual);
}
