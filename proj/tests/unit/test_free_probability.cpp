#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "samp/error.hpp"
#include "samp/free_probability.hpp"
#include "samp/rng.hpp"

using namespace samp;

TEST(Stieltjes, SmallSpectra) {
  const auto g = stieltjes(EmpiricalSpectrum::dirac(2.0), std::complex<double>(0.0, 1.0));
  EXPECT_NEAR(g.real(), 0.4, 1e-15);
  EXPECT_NEAR(g.imag(), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(stieltjes(EmpiricalSpectrum::dirac(4.0), 0.0), 0.25);
  EXPECT_NEAR(stieltjes(EmpiricalSpectrum({1.0, 3.0}, {1.0, 1.0}), 0.0), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(stieltjes(EmpiricalSpectrum::dirac(1.0), 1.0), DomainError);
}

TEST(Stieltjes, UpperHalfPlaneMapsUp) {
  const EmpiricalSpectrum s({0.5, 1.0, 4.0}, {1.0, 2.0, 1.0});
  for (double re : {-2.0, 0.7, 5.0})
    EXPECT_GT(stieltjes(s, std::complex<double>(re, 0.1)).imag(), 0.0);
}

TEST(Spectrum, MergesAndNormalises) {
  const EmpiricalSpectrum s({3.0, 1.0, 1.0}, {1.0, 1.0, 2.0});
  ASSERT_EQ(s.atoms().size(), 2u);
  EXPECT_EQ(s.atoms()[0], 1.0);
  EXPECT_NEAR(s.weights()[0], 0.75, 1e-15);
  EXPECT_EQ(s.support_max(), 3.0);
  EXPECT_THROW(EmpiricalSpectrum({1.0}, {0.0}), DomainError);
  EXPECT_THROW(EmpiricalSpectrum({1.0, 2.0}, {1.0}), DimensionError);
  EXPECT_DOUBLE_EQ(remark1_q(EmpiricalSpectrum::dirac(1.0)),
                   remark1_q(EmpiricalSpectrum({1.0, 1.0}, {0.5, 0.5})));
}

TEST(RTransform, Dirac) {
  for (double w : {-10.0, -0.5, 0.0, 0.5, 10.0})
    EXPECT_NEAR(r_transform_real(EmpiricalSpectrum::dirac(2.0), w), 2.0, 1e-12);
  EXPECT_NEAR(r_transform_real(EmpiricalSpectrum::dirac(3.0), -0.2), 3.0, 1e-12);
}

TEST(RTransform, TwoAtomQuadratic) {
  // 1/2 (1/(1-s) + 1/(3-s)) = 1/4 with s < 1 gives s^2 = 5, so R = 4 - sqrt(5).
  const EmpiricalSpectrum s({1.0, 3.0}, {1.0, 1.0});
  EXPECT_NEAR(r_transform_real(s, -0.25), 4.0 - std::sqrt(5.0), 1e-12);
  const auto q = r_transform_query(s, -0.25);
  EXPECT_TRUE(q.converged);
  EXPECT_NEAR(q.stieltjes_point, -std::sqrt(5.0), 1e-12);
  EXPECT_DOUBLE_EQ(r_transform_real(s, 0.0), 2.0);
}

TEST(RTransform, RemarkOne) {
  EXPECT_DOUBLE_EQ(remark1_q(EmpiricalSpectrum::dirac(4.0)), 0.25);
  const EmpiricalSpectrum s({1.0, 2.0}, {1.0, 1.0});
  const double q = remark1_q(s);
  EXPECT_DOUBLE_EQ(q, 0.75);
  EXPECT_NEAR(r_transform_real(s, -q), 4.0 / 3.0, 1e-12);
  EXPECT_THROW(remark1_q(EmpiricalSpectrum({0.0, 1.0}, {1.0, 1.0})), DomainError);
}

TEST(RTransform, ScalingLaw) {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd ev(50);
    for (auto& v : ev) v = 0.1 + 4.0 * rng.uniform();
    const EmpiricalSpectrum x(ev);
    for (double c : {0.5, 2.0})
      for (double w : {-2.0, -0.5, -0.05, 0.05, 0.3}) {
        const double rhs = c * r_transform_real(x, c * w);
        EXPECT_NEAR(r_transform_real(x.scaled(c), w), rhs, 1e-9 * std::abs(rhs));
      }
  }
}

TEST(RTransform, ExtremeArgumentsStayConverged) {
  Rng rng(3);
  Eigen::VectorXd ev(300);
  for (auto& v : ev) v = 1e-3 + rng.uniform();
  const EmpiricalSpectrum x(ev);
  for (double w : {-3e8, -1e4, -1e-9, 1e-9, 1e4}) {
    const auto q = r_transform_query(x, w);
    EXPECT_TRUE(q.converged) << w;
    EXPECT_TRUE(std::isfinite(q.value)) << w;
  }
  EXPECT_THROW(r_transform_real(x, std::nan("")), DomainError);
}

TEST(Adf, ClosedCases) {
  // R(-q) = 1/(1+q) with Lx = 1: q = 1/(1 + 1/(1+q)) solves q^2 + q - 1 = 0.
  const auto golden = solve_adf_fixed_point(Eigen::VectorXd::Ones(10),
                                            [](double w) { return 1.0 / (1.0 - w); }, 1.0);
  EXPECT_NEAR(golden.q, (std::sqrt(5.0) - 1.0) / 2.0, 1e-9);

  const Eigen::Vector3d lx(1.0, 2.0, 4.0);
  const auto zero = solve_adf_fixed_point(lx, [](double) { return 0.0; }, 3.0);
  EXPECT_DOUBLE_EQ(zero.q, (1.0 + 0.5 + 0.25) / 3.0);
  EXPECT_EQ(zero.iterations, 1);

  const auto dirac = solve_adf_fixed_point(Eigen::VectorXd::Ones(4), [](double) { return 1.0; }, 1.0);
  EXPECT_DOUBLE_EQ(dirac.q, 0.5);
  EXPECT_THROW(solve_adf_fixed_point(lx, [](double) { return -10.0; }, 1.0), DomainError);
}

TEST(ClosedForms, MarchenkoPastur) {
  EXPECT_NEAR(r_mp_jz(Eigen::VectorXd::Ones(5), 2.0, -1.0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r_mp_jz(Eigen::VectorXd::Ones(5), 2.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(r_mp_jz(Eigen::Vector2d(1.0, 2.0), 1.0, -1.0), 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(r_mp_jx(Eigen::VectorXd::Ones(5), 2.0, -1.0), 0.25, 1e-15);
  EXPECT_NEAR(r_mp_jx(Eigen::VectorXd::Ones(5), 1.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(r_mp_jx(Eigen::Vector2d(1.0, 3.0), 0.5, -1.0), 0.75, 1e-15);
  EXPECT_THROW(r_mp_jz(Eigen::VectorXd::Ones(2), 1.0, 2.0), DomainError);
  EXPECT_THROW(r_mp_jx(Eigen::VectorXd::Ones(2), 1.0, 1.0), DomainError);
}

TEST(Spectrum, OfSymmetric) {
  const auto id = spectrum_of_symmetric(Eigen::Matrix3d::Identity());
  EXPECT_EQ(id.atoms().size(), 1u);
  const auto d = spectrum_of_symmetric(Eigen::Vector3d(3, 1, 2).asDiagonal().toDenseMatrix());
  EXPECT_EQ(d.atoms(), (std::vector<double>{1, 2, 3}));
  EXPECT_NEAR(d.weights()[1], 1.0 / 3.0, 1e-15);
  Eigen::Matrix2d ns;
  ns << 1, 2, 0, 1;
  EXPECT_THROW(spectrum_of_symmetric(ns), DomainError);

  std::ostringstream os;
  write_spectrum_csv(os, d);
  EXPECT_EQ(os.str().substr(0, 12), "atom,weight\n");
}
