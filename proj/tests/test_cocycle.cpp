#include <gtest/gtest.h>

#include "sl2lab/cocycle.hpp"

using namespace sl2lab;

namespace {
const BaseSystem fp = BaseSystem::fixed_point();
}

TEST(Cocycle, RejectsNonUnimodularFiber) {
  EXPECT_THROW(Cocycle::constant(fp, Mat2::diag(2.0, 1.0)), Failure);
  EXPECT_THROW(Cocycle(fp, [](const BasePoint&) { return Mat2::diag(1.0, 1.1); }, true), Failure);
  EXPECT_NO_THROW(Cocycle(fp, [](const BasePoint&) { return Mat2::rotation(0.3); }, true));
}

TEST(Cocycle, PotentialMustMatchBase) {
  EXPECT_THROW(Cocycle::schrodinger(BaseSystem::golden_rotation(), Potential::table(std::vector<double>{1.0}), 0.0), Failure);
}

TEST(Iterate, RenormalizedProductMatchesDirectProduct) {
  const auto base = BaseSystem::single_orbit(3);
  const Cocycle c = Cocycle::schrodinger(base, Potential::table(std::vector<double>{0.3, -1.2, 2.0}), 0.7);
  const BasePoint x = OrbitPoint{0, 1};
  Mat2 direct = Mat2::identity();
  BasePoint y = x;
  for (int k = 0; k < 7; ++k) {
    direct = c(y) * direct;
    advance(base, y, 1);
  }
  const auto r = iterate_renormalized(c, x, 7);
  EXPECT_LT((std::exp(r.log_norm) * r.m - direct).frobenius(), 1e-12 * direct.frobenius());
  EXPECT_EQ(std::get<OrbitPoint>(r.end).phase, std::get<OrbitPoint>(y).phase);
  EXPECT_THROW(iterate_renormalized(c, x, 0), Failure);
}

TEST(Iterate, NoOverflowAtLargeN) {
  const Cocycle c = Cocycle::constant(fp, Mat2::diag(10.0, 0.1));
  const auto r = iterate_renormalized(c, BasePoint{OrbitPoint{}}, 100000);
  EXPECT_NEAR(r.log_operator_norm() / 100000.0, std::log(10.0), 1e-12);
}

TEST(Lyapunov, ConstantRotationIsZero) {
  const Cocycle c = Cocycle::constant(BaseSystem::golden_rotation(), Mat2::rotation(0.7));
  EXPECT_LT(std::abs(lyapunov_birkhoff(c, 10000, 4, 1).value), 1e-3);
  EXPECT_EQ(lyapunov_periodic_exact(Cocycle::constant(fp, Mat2::rotation(0.7))).value, 0.0);
}

TEST(Lyapunov, SchrodingerEnergyThree) {
  const Cocycle c = Cocycle::schrodinger(fp, Potential::constant(fp, 0.0), 3.0);
  EXPECT_NEAR(lyapunov_periodic_exact(c).value, 0.962423650119206895, 1e-12);
  EXPECT_NEAR(lyapunov_birkhoff(c, 10000, 4, 1).value, 0.962423650119206895, 1e-3);
}

TEST(Lyapunov, ImaginaryConstantGivesLogGoldenRatio) {
  const Cocycle c = Cocycle::of_potential(fp, Potential::constant(fp, cplx(0.0, 1.0)));
  const auto l = lyapunov(c);
  EXPECT_EQ(l.method, LyapunovMethod::periodic_exact);
  EXPECT_NEAR(l.value, 0.481211825059603447, 1e-13);
}

TEST(Lyapunov, PeriodicExactAgreesWithBirkhoff) {
  const auto base = BaseSystem::periodic({{2, 0.4}, {3, 0.6}});
  const Cocycle c =
      Cocycle::schrodinger(base, Potential::table(std::vector<double>{3.0, -1.0, 0.5, 2.5, -2.0}), 0.1);
  const auto exact = lyapunov_periodic_exact(c);
  EXPECT_EQ(exact.std_error, 0.0);
  double sum = 0.0;
  const double w[] = {0.4, 0.6};
  for (std::size_t j = 0; j < 2; ++j) sum += w[j] * iterate_renormalized(c, BasePoint{OrbitPoint{j, 0}}, 60000).log_operator_norm() / 60000.0;
  EXPECT_NEAR(exact.value, sum, 1e-3);
}

TEST(Lyapunov, BirkhoffThreadInvariant) {
  TrigPolynomial tp;
  tp.cos = {2.5};
  const Cocycle c = Cocycle::schrodinger(BaseSystem::golden_rotation(), Potential(tp), 0.0);
  set_thread_count(1);
  const auto a = lyapunov_birkhoff(c, 4096, 8, 3);
  set_thread_count(4);
  const auto b = lyapunov_birkhoff(c, 4096, 8, 3);
  set_thread_count(1);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Lyapunov, AlmostMathieuOnSpectrum) {
  TrigPolynomial tp;
  tp.cos = {2.5};  // 2 lambda cos with lambda = 1.25
  const Cocycle c = Cocycle::schrodinger(BaseSystem::golden_rotation(), Potential(tp), 0.0);
  const auto l = lyapunov_birkhoff(c, 16384, 8, 1);
  EXPECT_NEAR(l.value, std::log(1.25), 0.01);
}

TEST(Lyapunov, FubiniDiagonalTerms) {
  const Cocycle c = Cocycle::constant(fp, Mat2::diag(2.0, 0.5));
  const auto f = lyapunov_fubini(c, 6);
  ASSERT_EQ(f.size(), 7u);
  for (int m = 0; m <= 6; ++m) {
    const double n = std::ldexp(1.0, m);
    const double expect = 0.5 * std::log(std::pow(4.0, n) + std::pow(4.0, -n)) / n;
    EXPECT_NEAR(f[static_cast<std::size_t>(m)], expect, 1e-13);
    if (m > 0) EXPECT_LE(f[static_cast<std::size_t>(m)], f[static_cast<std::size_t>(m - 1)] + 1e-15);
    EXPECT_GE(f[static_cast<std::size_t>(m)], std::log(2.0));
  }
  EXPECT_THROW(lyapunov_fubini(c, 21), Failure);
}

TEST(AbCheck, DiagonalAverage) {
  const Cocycle c = Cocycle::constant(fp, Mat2::diag(2.0, 0.5));
  const auto r = ab_average_check(c, 8192);
  EXPECT_NEAR(r.rhs, 0.223143551314209755766, 1e-14);
  EXPECT_NEAR(r.lhs, 0.223143551314209755766, 1e-5);
  EXPECT_THROW(ab_average_check(Cocycle::constant(fp, Mat2::diag(cplx(0.0, 2.0), cplx(0.0, -0.5))), 64), Failure);
  EXPECT_THROW(ab_average_check(c, 8), Failure);
}

TEST(Perturb, ExpPerturbedAtZeroIsIdentity) {
  const Cocycle c = Cocycle::schrodinger(fp, Potential::constant(fp, 0.0), 3.0);
  const Cocycle p = Cocycle::exp_perturbed(c, Sl2Field::constant(fp, Sl2Element::rotation_generator()), 0.0);
  EXPECT_LT((p(BasePoint{OrbitPoint{}}) - c(BasePoint{OrbitPoint{}})).frobenius(), 1e-15);
}
