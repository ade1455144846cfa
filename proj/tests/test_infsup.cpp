#include <gtest/gtest.h>

#include <sstream>

#include "fsi/infsup.hpp"
#include "oracle.hpp"

using namespace fsi;

TEST(InfSup, PositiveAndStableOnCoarseLevels) {
  const InfSupEntry a = compute_discrete_infsup(4);
  const InfSupEntry b = compute_discrete_infsup(8);
  EXPECT_GT(a.beta, 0.05);
  EXPECT_GT(b.beta, 0.05);
  EXPECT_GE(b.beta, 0.9 * a.beta);
  EXPECT_LE(std::abs(b.beta - a.beta), 0.1 * a.beta);
  EXPECT_EQ(a.pressure_dofs, 24);
  EXPECT_EQ(a.velocity_dofs, 2 * 7 * 7);
}

TEST(InfSup, MatchesSvdOracle) {
  for (int n : {3, 4, 6}) {
    const InfSupBlocks blk = infsup_blocks(build_fluid_mesh(n));
    const double beta = infsup_from_blocks(blk.a, blk.b, blk.q, blk.mean);
    EXPECT_NEAR(beta, oracle::infsup_svd(blk.a, blk.b, blk.q, blk.mean), 1e-10);
  }
}

TEST(InfSup, ConstantsInKernelWithoutMeanFreeRestriction) {
  const InfSupBlocks blk = infsup_blocks(build_fluid_mesh(4));
  EXPECT_LT((blk.b.transpose() * Eigen::VectorXd::Ones(blk.b.rows())).norm(), 1e-13);
  EXPECT_LT(compute_discrete_infsup(4, false).beta, 1e-6);
}

TEST(InfSup, BlocksSymmetricPositive) {
  const InfSupBlocks blk = infsup_blocks(build_fluid_mesh(3));
  EXPECT_LT((blk.a - blk.a.transpose()).norm(), 1e-13);
  EXPECT_LT((blk.q - blk.q.transpose()).norm(), 1e-15);
  EXPECT_NEAR(blk.q.sum(), 1.0, 1e-14);
  EXPECT_NEAR(blk.mean.sum(), 1.0, 1e-14);
}

TEST(InfSup, DegenerateInputRejected) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_THROW(infsup_from_blocks(one, one, one, Eigen::VectorXd::Ones(1)), DimensionError);
  EXPECT_THROW(infsup_from_blocks(Eigen::MatrixXd(), Eigen::MatrixXd(), Eigen::MatrixXd(),
                                  Eigen::VectorXd()),
               DimensionError);
  EXPECT_THROW(infsup_from_blocks(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Ones(2, 4),
                                  Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd()),
               DimensionError);
  const Eigen::MatrixXd indefinite = -Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(infsup_from_blocks(indefinite, Eigen::MatrixXd::Ones(2, 2),
                                  Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd()),
               SolverFailureError);
  EXPECT_THROW(compute_discrete_infsup(1), InvalidMeshError);
  EXPECT_THROW(compute_discrete_infsup(kMaxInfSupLevel + 1), CapabilityError);
}

TEST(InfSup, TableOutput) {
  const InfSupResult r = compute_discrete_infsup(std::vector<int>{2, 4});
  ASSERT_EQ(r.entries.size(), 2u);
  std::ostringstream os;
  r.write_text(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_NE(header.find("beta_h"), std::string::npos);
  int n = 0;
  double h = 0.0, beta = 0.0;
  is >> n >> h >> beta;
  EXPECT_EQ(n, 2);
  EXPECT_DOUBLE_EQ(h, 0.5);
  EXPECT_NEAR(beta, r.entries[0].beta, 1e-8);
}
