#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace vsq;

namespace {

MeanFieldPolaritonState branches(std::vector<PolaritonBranch> b, double r = 0.0) {
  MeanFieldPolaritonState s;
  s.r = r;
  s.branches = std::move(b);
  return s;
}

double mixture_entropy(const std::vector<double>& lambda) {
  double s = 0.0;
  for (double l : lambda)
    if (l > 0.0) s -= l * std::log(l);
  return s;
}

}  // namespace

TEST(Wavefunction, UndisplacedSolutionIsOneBranch) {
  const auto fr = DipoleFrame::from(test::two_site(1.0, 1.0));
  SCFOptions opt;
  opt.freeze_f = true;
  opt.initial = uniform_params(fr, AnsatzKind::VT, 0.0, 0.0, 0.0);
  const auto res = scf_solve(fr, AnsatzKind::VT, opt);
  ASSERT_TRUE(res.converged);
  const auto st = mean_field_wavefunction(res, fr);
  ASSERT_EQ(st.branches.size(), 1u);
  EXPECT_EQ(st.branches[0].z, 0.0);
  EXPECT_NEAR(st.branches[0].weight, 1.0, 1e-15);
  EXPECT_EQ(mean_field_entanglement(res, fr).entropy[0], 0.0);
}

TEST(Wavefunction, CoherentStateIsOneBranch) {
  const auto sys = build_hubbard_holstein(hubbard_holstein_fixture());
  const auto fr = DipoleFrame::from(sys);
  const auto res = scf_solve(fr, AnsatzKind::CS);
  const auto e = mean_field_entanglement(res, fr);
  for (int a = 0; a < fr.n_modes(); ++a) {
    EXPECT_EQ(e.branches[a], 1);
    EXPECT_EQ(e.entropy[a], 0.0);
  }
}

TEST(Wavefunction, TwoElectronsOnTwoSitesGiveThreeBranches) {
  const auto fr = DipoleFrame::from(test::two_site(1.0, 1.0));
  const auto res = scf_solve(fr, AnsatzKind::VT);
  ASSERT_TRUE(res.converged);
  ASSERT_GT(res.params.f[0], 0.1);
  const auto st = mean_field_wavefunction(res, fr);
  ASSERT_EQ(st.branches.size(), 3u);
  EXPECT_NEAR(st.branches[0].weight, 0.25, 1e-10);
  EXPECT_NEAR(st.branches[1].weight, 0.5, 1e-10);
  EXPECT_NEAR(st.branches[2].weight, 0.25, 1e-10);
  EXPECT_NEAR(st.branches[1].z, 0.5 * (st.branches[0].z + st.branches[2].z), 1e-12);
  EXPECT_EQ(st.branch_of.size(), 4u);
}

TEST(Wavefunction, LatticeWeightsAreComplete) {
  const auto fr = DipoleFrame::from(build_hubbard_holstein(hubbard_holstein_fixture()));
  const auto res = scf_solve(fr, AnsatzKind::GSS);
  for (int a = 0; a < fr.n_modes(); ++a) {
    const auto st = mean_field_wavefunction(res, fr, a);
    double w = 0.0;
    for (const auto& b : st.branches) w += b.weight;
    EXPECT_NEAR(w, 1.0, 1e-12);
    EXPECT_LT(st.discarded_weight, 1e-8);
    for (std::size_t i = 1; i < st.branches.size(); ++i) EXPECT_LT(st.branches[i - 1].z, st.branches[i].z);
    EXPECT_EQ(st.r, res.params.r[a]);
  }
}

TEST(Wavefunction, RejectsUnconvergedOrMismatchedInput) {
  const auto fr = DipoleFrame::from(test::two_site(1.0, 1.0));
  SCFResult bad;
  EXPECT_THROW(mean_field_wavefunction(bad, fr), ConvergenceError);
  const auto res = scf_solve(fr, AnsatzKind::VT);
  EXPECT_THROW(mean_field_wavefunction(res, fr, 1), ValidationError);
}

TEST(PhotonRdm, SingleBranchIsPure) {
  const auto st = branches({{1.0, 0.8}}, 0.2);
  const Matrix rho = photon_rdm(st, 40);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-14);
  EXPECT_NEAR(von_neumann_entropy(rho), 0.0, 1e-10);
  EXPECT_EQ(fock_route_entropy(st), 0.0);
  EXPECT_EQ(gram_route_entropy(st), 0.0);
}

TEST(PhotonRdm, DistantBranchesGiveLogTwo) {
  const auto st = branches({{0.5, -5.0}, {0.5, 5.0}});
  EXPECT_NEAR(fock_route_entropy(st), std::log(2.0), 1e-10);
  EXPECT_NEAR(gram_route_entropy(st), std::log(2.0), 1e-12);
}

TEST(PhotonRdm, TwoBranchClosedForm) {
  const auto st = branches({{0.5, 0.0}, {0.5, 1.0}});
  const double s = std::exp(-0.5);
  const double expected = mixture_entropy({0.5 * (1.0 + s), 0.5 * (1.0 - s)});
  EXPECT_NEAR(gram_route_entropy(st), expected, 1e-12);
  EXPECT_NEAR(fock_route_entropy(st), expected, 1e-10);
}

TEST(PhotonRdm, TruncationIsReported) {
  const auto st = branches({{0.5, 0.0}, {0.5, 4.0}});
  EXPECT_THROW(photon_rdm(st, 5), TruncationError);
  EXPECT_THROW(photon_rdm(branches({}), 5), ValidationError);
}

TEST(VonNeumann, ReferenceStates) {
  EXPECT_NEAR(von_neumann_entropy(0.5 * Matrix::Identity(2, 2)), std::log(2.0), 1e-15);
  Matrix p = Matrix::Zero(3, 3);
  p(1, 1) = 1.0;
  EXPECT_EQ(von_neumann_entropy(p), 0.0);
  Vector v(3);
  v << 0.6, 0.0, 0.8;
  EXPECT_NEAR(von_neumann_entropy(v * v.transpose()), 0.0, 1e-14);
  EXPECT_THROW(von_neumann_entropy(Matrix::Identity(2, 2)), ValidationError);
}

TEST(VonNeumann, GramSpectrumEqualsRdmSpectrum) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uz(-1.5, 1.5), uw(0.1, 1.0), ur(-0.4, 0.4);
  for (int t = 0; t < 5; ++t) {
    std::vector<PolaritonBranch> b;
    double total = 0.0;
    for (int i = 0; i < 5; ++i) {
      b.push_back({uw(rng), uz(rng)});
      total += b.back().weight;
    }
    for (auto& x : b) x.weight /= total;
    const auto st = branches(b, ur(rng));
    const Vector rdm = symmetric_eigen(photon_rdm(st, photon_rdm_cutoff(st))).values.tail(5);
    const Vector gram = symmetric_eigen(branch_gram_matrix(st)).values;
    EXPECT_LT((rdm - gram).cwiseAbs().maxCoeff(), 1e-10) << t;
  }
}

TEST(Routes, AgreeOnRandomBranchSets) {
  const auto c = check_entropy_routes(50, 43);
  EXPECT_TRUE(c.pass) << c.measured;
}

TEST(Routes, EntropyIsBoundedByBranchCount) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 100; ++t) {
    const auto st = random_branch_set(rng);
    const double s = gram_route_entropy(st);
    EXPECT_GE(s, -1e-14);
    EXPECT_LE(s, std::log(static_cast<double>(st.branches.size())) + 1e-12);
  }
}

TEST(MeanFieldEntanglement, VanishesWithoutCoupling) {
  const auto sys = molecular_fixture("h2_sto3g", 0.0, 0.5);
  const auto fr = DipoleFrame::from(sys);
  const auto res = scf_solve(fr, AnsatzKind::GSS);
  EXPECT_EQ(mean_field_entanglement(res, fr).mean_entropy, 0.0);
}

TEST(MeanFieldEntanglement, LatticeRoutesAgree) {
  const auto fr = DipoleFrame::from(build_hubbard_holstein(hubbard_holstein_fixture()));
  for (auto kind : {AnsatzKind::VT, AnsatzKind::GSS}) {
    const auto e = mean_field_entanglement(scf_solve(fr, kind), fr);
    EXPECT_LT(e.max_route_gap, 1e-8);
    EXPECT_GT(e.mean_entropy, 0.0);
    EXPECT_LE(e.mean_entropy, std::log(5.0));
  }
}
