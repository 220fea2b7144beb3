#include <gtest/gtest.h>

#include "sl2lab/uh.hpp"

using namespace sl2lab;

namespace {
const BaseSystem fp = BaseSystem::fixed_point();
const double golden_ratio = (1.0 + std::sqrt(5.0)) / 2.0;

Cocycle imaginary_constant() { return Cocycle::of_potential(fp, Potential::constant(fp, cplx(0.0, 1.0))); }
}  // namespace

TEST(Cone, HemisphereGeometry) {
  const auto upper = ConeField::upper_hemisphere().cones()[0];
  EXPECT_NEAR(upper.radius, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(upper.contains(ProjPoint(cplx(0.3, 0.2), 1.0)));
  EXPECT_FALSE(upper.contains(ProjPoint(cplx(0.3, -0.2), 1.0)));
  for (int k = 0; k < 16; ++k) {
    const ProjPoint m = upper.boundary(2.0 * pi * k / 16.0);
    EXPECT_NEAR((m.x() * std::conj(m.y())).imag(), 0.0, 1e-12);
    EXPECT_NEAR(spherical_dist(m, upper.center), upper.radius, 1e-12);
  }
  EXPECT_THROW(ConeField::constant({ProjPoint::horizontal(), 1.5}), Failure);
}

TEST(Certify, ImaginaryConstantCertifiedAtTwo) {
  const auto cert = certify_uh(imaginary_constant(), ConeField::upper_hemisphere(), 2);
  EXPECT_EQ(cert.n, 2);
  EXPECT_GT(cert.margin, 0.0);
  EXPECT_GT(cert.lambda_lower, 0.0);
  EXPECT_FALSE(cert.note.empty());
}

TEST(Certify, ZeroPotentialRejectedByBothHemispheres) {
  const Cocycle c = Cocycle::schrodinger(fp, Potential::constant(fp, 0.0), 0.0);
  for (const auto& cone : {ConeField::upper_hemisphere(), ConeField::lower_hemisphere()}) {
    try {
      certify_uh(c, cone, 16);
      ADD_FAILURE() << "elliptic cocycle certified";
    } catch (const Failure& f) {
      EXPECT_EQ(f.kind(), FailureKind::no_contraction);
    }
  }
}

TEST(Certify, DiagonalSmallConeMargin) {
  const Cocycle c = Cocycle::constant(fp, Mat2::diag(2.0, 0.5));
  const auto cert = certify_uh(c, ConeField::constant({ProjPoint::horizontal(), 0.3}), 1);
  EXPECT_EQ(cert.n, 1);
  EXPECT_NEAR(cert.margin, 0.221620508359025376, 1e-9);
}

TEST(Directions, ImaginaryConstantEigenvectors) {
  const Cocycle c = imaginary_constant();
  const BasePoint x = OrbitPoint{};
  const auto u = converged_direction(unstable_direction, c, x, 1e-12);
  const auto s = converged_direction(stable_direction, c, x, 1e-12);
  EXPECT_LT(spherical_dist(u.direction, ProjPoint(cplx(0.0, golden_ratio), 1.0)), 1e-10);
  EXPECT_LT(spherical_dist(s.direction, ProjPoint(cplx(0.0, 1.0 - golden_ratio), 1.0)), 1e-10);
  EXPECT_NEAR(expansion_coeff(c(x), u.direction), std::log(golden_ratio), 1e-10);
}

TEST(Directions, StableDirectionEnergyThree) {
  const Cocycle c = Cocycle::schrodinger(fp, Potential::constant(fp, 0.0), 3.0);
  const auto s = converged_direction(stable_direction, c, BasePoint{OrbitPoint{}}, 1e-12);
  EXPECT_LT(spherical_dist(s.direction, ProjPoint((3.0 - std::sqrt(5.0)) / 2.0, 1.0)), 1e-10);
}

TEST(UhExact, PeriodicAgreesWithExact) {
  const Cocycle c = Cocycle::of_potential(
      BaseSystem::single_orbit(3), Potential::table(std::vector<cplx>{{0.5, 0.8}, {-1.0, 0.6}, {0.2, 1.1}}));
  const auto cert = certify_uh(c, ConeField::upper_hemisphere(), 8);
  const auto ux = lyapunov_uh_exact(c, cert);
  EXPECT_NEAR(ux.estimate.value, lyapunov_periodic_exact(c).value, 1e-10);
  EXPECT_LT(ux.discrepancy, 1e-10);
  EXPECT_NEAR(lyapunov_uh_exact(imaginary_constant(), certify_uh(imaginary_constant(), ConeField::upper_hemisphere(), 2))
                  .estimate.value,
              0.481211825059603447, 1e-12);
}

TEST(UhExact, InvarianceAndPointwiseDualityOnRotation) {
  TrigPolynomial tp;
  tp.constant = cplx(0.0, 1.0);
  tp.cos = {0.3};
  const Cocycle c = Cocycle::of_potential(BaseSystem::golden_rotation(), Potential(tp));
  CertifyOptions co;
  co.probes = 32;
  const auto cert = certify_uh(c, ConeField::upper_hemisphere(), 8, co);
  for (const auto& d : cert.directions) {
    const BasePoint y = step(c.base(), d.point);
    const auto uy = converged_direction(unstable_direction, c, y, 1e-10).direction;
    const auto sy = converged_direction(stable_direction, c, y, 1e-10).direction;
    const Mat2 a = c(d.point);
    EXPECT_LT(spherical_dist(mobius_act(a, d.u), uy), 1e-8);
    EXPECT_LT(spherical_dist(mobius_act(a, d.s), sy), 1e-8);
    const double cob = std::log(spherical_dist(d.u, d.s)) - std::log(spherical_dist(uy, sy));
    EXPECT_NEAR(expansion_coeff(a, d.u) + expansion_coeff(a, d.s), cob, 1e-8);
  }
  const auto ux = lyapunov_uh_exact(c, cert);
  const auto birk = lyapunov_birkhoff(c, 8192, 8, 1);
  EXPECT_NEAR(ux.estimate.value, birk.value, 1e-3);
}

TEST(Harmonicity, UhDiskHarmonicCrossingDiskSubharmonic) {
  auto family = [](cplx z) { return Cocycle::of_potential(fp, Potential::constant(fp, z)); };
  const auto h = harmonicity_probe(family, cplx(0.0, 2.0), 1.0, 256);
  EXPECT_LT(std::abs(h.defect), 1e-6);
  const auto s = harmonicity_probe(family, 0.0, 1.0, 256);
  EXPECT_GT(s.defect, 0.1);
}
