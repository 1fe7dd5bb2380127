#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace vsq;

namespace {

/// Lowest `half` x `half` block of an operator identity residual, evaluated from exponentials in a
/// space of n_max + 1 states and grown until the block is converged.
template <class Make>
double residual_on_block(Make make, int n_max, int half) {
  return max_abs(converged_operator_block(make, half, n_max + 1 - half));
}

}  // namespace

TEST(Displacement, ZeroIsIdentity) {
  const TruncatedFockBasis basis{15};
  EXPECT_EQ(displacement_matrix(0.0, basis), Matrix::Identity(16, 16));
  EXPECT_EQ(squeeze_matrix(0.0, basis), Matrix::Identity(16, 16));
}

TEST(Displacement, FirstColumnIsCoherentState) {
  const double z = 0.7;
  const Matrix D = displacement_matrix(z, TruncatedFockBasis{20});
  double fact = 1.0;
  for (int n = 0; n <= 20; ++n) {
    if (n) fact *= n;
    EXPECT_NEAR(D(n, 0), std::exp(-0.5 * z * z) * std::pow(z, n) / std::sqrt(fact), 1e-13) << n;
  }
}

TEST(Displacement, ShiftsTheLadderOperator) {
  const double z = 1.3;
  const double res = residual_on_block(
      [z](int d) {
        const Matrix D = raw_displacement(z, d), b = annihilation(d);
        return Matrix(D.transpose() * b * D - b - z * Matrix::Identity(d, d));
      },
      40, 20);
  EXPECT_LT(res, 1e-8);
}

TEST(Squeeze, VacuumAmplitude) {
  for (double r : {-0.8, -0.2, 0.3, 0.7, 1.2}) {
    const Matrix S = squeeze_matrix(r, TruncatedFockBasis{30});
    EXPECT_NEAR(S(0, 0), 1.0 / std::sqrt(std::cosh(r)), 1e-12) << r;
  }
  EXPECT_NEAR(squeeze_matrix(0.7, TruncatedFockBasis{30})(0, 0), test::oracle("squeeze_vacuum_amplitude_r07"), 1e-12);
}

TEST(Squeeze, BogoliubovAction) {
  const double r = 0.4;
  const double res = residual_on_block(
      [r](int d) {
        const Matrix S = raw_squeeze(r, d), b = annihilation(d);
        return Matrix(S.transpose() * b * S - std::cosh(r) * b + std::sinh(r) * b.transpose());
      },
      40, 20);
  EXPECT_LT(res, 1e-8);
}

TEST(Squeeze, CapIsEnforced) {
  EXPECT_THROW(squeeze_matrix(5.5, TruncatedFockBasis{10}), ValidationError);
  EXPECT_THROW(squeeze_matrix(1.5, TruncatedFockBasis{10}, 1.0), ValidationError);
  EXPECT_THROW(squeeze_matrix(std::nan(""), TruncatedFockBasis{10}), ValidationError);
  EXPECT_THROW(displacement_matrix(1.0, TruncatedFockBasis{0}), ValidationError);
}

TEST(Truncation, UnconvergedRepresentationIsAnError) {
  EXPECT_THROW(displacement_matrix(40.0, TruncatedFockBasis{10}), TruncationError);
}

TEST(Unitarity, RandomParametersOnLowerBlock) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uz(-2.0, 2.0), ur(-1.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    const double z = uz(rng), r = ur(rng);
    const TruncatedFockBasis basis{40};
    const Matrix D = displacement_matrix(z, basis), S = squeeze_matrix(r, basis);
    // Converged entries: the rows of the lowest columns are those of the untruncated operator.
    const double dz = residual_on_block(
        [&](int d) {
          const Matrix Dd = raw_displacement(z, d);
          return Matrix(Dd.transpose() * Dd - Matrix::Identity(d, d));
        },
        40, 20);
    const double sr = residual_on_block(
        [&](int d) {
          const Matrix Sd = raw_squeeze(r, d);
          return Matrix(Sd.transpose() * Sd - Matrix::Identity(d, d));
        },
        40, 20);
    EXPECT_LT(dz, 1e-8) << z;
    EXPECT_LT(sr, 1e-8) << r;
    EXPECT_LT(max_abs(D.topLeftCorner(20, 20) - raw_displacement(z, 200).topLeftCorner(20, 20)), 1e-10);
    EXPECT_LT(max_abs(S.topLeftCorner(20, 20) - raw_squeeze(r, 300).topLeftCorner(20, 20)), 1e-10);
  }
}

TEST(Rotation, SqueezeThenDisplaceEqualsRescaledDisplacement) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uz(-1.5, 1.5), ur(-0.8, 0.8);
  for (int k = 0; k < 6; ++k) {
    const double z = uz(rng), r = ur(rng);
    const auto diff = [z, r](int d) {
      return Matrix(raw_squeeze(r, d) * raw_displacement(z, d) - raw_displacement(std::exp(-r) * z, d) * raw_squeeze(r, d));
    };
    EXPECT_LT(max_abs(converged_operator_block(diff, 20)), 1e-8) << z << " " << r;
  }
}

TEST(Overlap, Examples) {
  const SqueezedCoherentState a{0.4, 0.2}, b{0.4, 0.2};
  EXPECT_NEAR(overlap_squeezed_coherent(a, b), 1.0, 1e-12);
  EXPECT_NEAR(overlap_squeezed_coherent({0.0, 0.0}, {1.0, 0.0}), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(std::exp(-0.5), 0.60653, 1e-5);
}

TEST(Overlap, SqueezedDualRoute) {
  const SqueezedCoherentState a{0.0, 0.3, Ordering::DS}, b{1.0, 0.3, Ordering::DS};
  EXPECT_NEAR(overlap_squeezed_coherent(a, b), overlap_closed_form(a, b), 1e-8);
  EXPECT_NEAR(overlap_squeezed_coherent(a, b), test::oracle("overlap_ds_r03_z0_z1"), 1e-10);
  const SqueezedCoherentState c{0.0, 0.3, Ordering::SD}, d{1.0, 0.3, Ordering::SD};
  EXPECT_NEAR(overlap_squeezed_coherent(c, d), test::oracle("overlap_sd_r03_z0_z1"), 1e-10);
}

TEST(Overlap, RandomStatesMatchClosedForm) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uz(-1.5, 1.5), ur(-0.6, 0.6);
  for (int k = 0; k < 10; ++k) {
    const double r = ur(rng);
    const Ordering o = k % 2 ? Ordering::SD : Ordering::DS;
    const SqueezedCoherentState a{uz(rng), r, o}, b{uz(rng), r, o};
    EXPECT_NEAR(overlap_squeezed_coherent(a, b), overlap_closed_form(a, b), 1e-10);
  }
}

TEST(Overlap, MismatchedSqueezeIsRejected) {
  EXPECT_THROW(overlap_squeezed_coherent({0.0, 0.1}, {0.0, 0.2}), ValidationError);
  EXPECT_THROW(overlap_closed_form({0.0, 0.1, Ordering::DS}, {0.0, 0.1, Ordering::SD}), ValidationError);
}

TEST(FockAmplitudes, NormAndLoss) {
  const auto v = fock_amplitudes({1.0, 0.5}, TruncatedFockBasis{60});
  EXPECT_NEAR(v.amplitudes.norm(), 1.0, 1e-12);
  EXPECT_LT(v.truncation_loss, 1e-12);
  const auto w = fock_amplitudes({2.5, 0.0}, TruncatedFockBasis{3});
  EXPECT_GT(w.truncation_loss, 0.1);
}

TEST(FranckCondon, TrivialLimits) {
  EXPECT_DOUBLE_EQ(franck_condon_one_body(0.3, -0.7, 0.0, 0.4, 1.2), 1.0);
  EXPECT_DOUBLE_EQ(franck_condon_one_body(0.3, 0.3, 0.8, 0.4, 1.2), 1.0);
  EXPECT_DOUBLE_EQ(franck_condon_two_body(0.5, 0.5, 0.5, 0.5, 0.9, 0.1, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(franck_condon_two_body(1.0, 2.0, 2.0, 1.0, 0.9, 0.1, 0.7), 1.0);
  EXPECT_THROW(franck_condon_one_body(1.0, 0.0, 1.0, 0.0, 0.0), ValidationError);
  EXPECT_THROW(franck_condon_two_body(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0), ValidationError);
}

TEST(FranckCondon, MatchesMatrixExponentialOracle) {
  EXPECT_NEAR(franck_condon_one_body(1.0, 0.0, 1.0, 0.0, 1.0), test::oracle("fc_one_body_dxi1_f1_r0_w1"), 1e-10);
  EXPECT_NEAR(franck_condon_two_body(1.0, 0.0, 0.0, 0.0, 0.7, 0.2, 1.0), test::oracle("fc_two_body_1000_f07_r02_w1"),
              1e-10);
}

TEST(FranckCondon, MatchesVacuumExpectationOfDressedOperators) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ue(-1.0, 1.0), uf(0.0, 1.0), ur(-0.3, 0.3), uw(0.5, 2.0);
  for (int k = 0; k < 10; ++k) {
    const double ep = ue(rng), eq = ue(rng), f = uf(rng), r = ur(rng), w = uw(rng);
    const auto X = [&](double eta) {
      return displacement_matrix(-f * std::exp(r) * eta / std::sqrt(2.0 * w), TruncatedFockBasis{40});
    };
    const Matrix G = X(ep).transpose() * X(eq);
    EXPECT_NEAR(franck_condon_one_body(ep, eq, f, r, w), G(0, 0), 1e-10);
  }
}

TEST(FranckCondon, BoundsAndMonotonicity) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const double xi = 2.0 * u(rng), f = u(rng), r = 0.5 * u(rng), w = 0.2 + u(rng);
    const double g = franck_condon_one_body(xi, 0.0, f, r, w);
    EXPECT_GT(g, 0.0);
    EXPECT_LE(g, 1.0);
    EXPECT_LE(franck_condon_one_body(xi * 1.1, 0.0, f, r, w), g);
    EXPECT_LE(franck_condon_one_body(xi, 0.0, f * 1.1, r, w), g);
    EXPECT_LE(franck_condon_one_body(xi, 0.0, f, r + 0.05, w), g);
  }
}
