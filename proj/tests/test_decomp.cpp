#include "amdc/decomp.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

#include "amdc/markov.hpp"
#include "amdc/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace amdc;
using testutil::set_of;

namespace {

/// Centered data matrix of n random sequences over m states.
DataMatrix random_centered(int m, int n, int l, std::uint64_t seed) {
  std::vector<std::string> labels;
  for (int s = 0; s < m; ++s) labels.emplace_back(1, static_cast<char>('A' + s));
  const Alphabet ab(labels);
  Rng rng(seed);
  std::vector<Sequence> seqs;
  for (int i = 0; i < n; ++i) {
    seqs.push_back(testutil::random_seq(ab, l, rng, "s" + std::to_string(i + 1)));
  }
  return center(assemble(SequenceSet(ab, std::move(seqs))));
}

/// Hand-built centered matrix, for shapes real sequences cannot produce.
DataMatrix direct_centered(const Eigen::MatrixXd& M, int m, int l) {
  DataMatrix dm;
  dm.M = M;
  dm.centered = true;
  dm.m = m;
  dm.n = static_cast<int>(M.cols());
  dm.l = l;
  return dm;
}

double largest_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::VectorXd cosines = oracle::svd(A.transpose() * B).S;
  const double c = std::min(1.0, cosines.minCoeff());
  return std::acos(c);
}

}  // namespace

TEST_SUITE("decomp") {

TEST_CASE("reconstruction and orthonormality on a random centered matrix") {
  const DataMatrix dm = random_centered(4, 50, 40, 21);
  const SvdFactors f = decompose(dm);
  REQUIRE(f.S.size() == 16);
  const Eigen::MatrixXd recon = f.U * f.S.asDiagonal() * f.V.transpose();
  CHECK((dm.M - recon).norm() / std::max(1.0, dm.M.norm()) <= 1e-10);
  const Eigen::MatrixXd iu = f.U.transpose() * f.U;
  const Eigen::MatrixXd iv = f.V.transpose() * f.V;
  CHECK((iu - Eigen::MatrixXd::Identity(16, 16)).norm() <= 1e-10);
  CHECK((iv - Eigen::MatrixXd::Identity(16, 16)).norm() <= 1e-10);
  for (int k = 1; k < f.S.size(); ++k) CHECK(f.S(k) <= f.S(k - 1));
  CHECK(f.S.minCoeff() >= 0.0);
}

TEST_CASE("decompose refuses an uncentered matrix") {
  const Alphabet ab({"A", "B"});
  const DataMatrix dm = assemble(set_of({"AABB", "ABAB"}, ab));
  CHECK_THROWS(decompose(dm));
}

TEST_CASE("rank-1 matrix has one nonzero singular value") {
  Eigen::MatrixXd M(4, 6);
  Eigen::VectorXd u(4), w(6);
  u << 1.0, -2.0, 0.5, 3.0;
  w << 0.2, 1.0, -0.7, 2.0, 0.1, -1.5;
  M = u * w.transpose();
  const SvdFactors f = decompose(direct_centered(M, 2, 10));
  CHECK(f.rank == 1);
  CHECK(f.S(0) > 0.0);
  for (int k = 1; k < f.S.size(); ++k) CHECK(f.S(k) <= 1e-12 * f.S(0));
}

TEST_CASE("identical sequences get identical embedding rows") {
  const Alphabet ab({"A", "B", "C"});
  const SequenceSet set = set_of({"AABBCC", "ABCABC", "AABBCC", "CCCAAB"}, ab);
  const SvdFactors f = decompose(center(assemble(set)));
  const Eigen::MatrixXd emb = embed(f, f.rank);
  CHECK((emb.row(0) - emb.row(2)).norm() <= 1e-12);
}

TEST_CASE("embedding dimensions and bounds") {
  const DataMatrix dm = random_centered(3, 5, 20, 22);
  const SvdFactors f = decompose(dm);
  CHECK(embed(f, 2).rows() == 5);
  CHECK(embed(f, 2).cols() == 2);
  const int r = static_cast<int>(f.S.size());
  CHECK(embed(f, r) == f.V);
  CHECK_THROWS(embed(f, 0));
  CHECK_THROWS(embed(f, r + 1));
}

TEST_CASE("sign convention pins the largest entry of each u_k positive") {
  const DataMatrix dm = random_centered(4, 30, 25, 23);
  const SvdFactors f = decompose(dm);
  for (int k = 0; k < f.rank; ++k) {
    double best = 0.0;
    for (int i = 0; i < f.U.rows(); ++i) {
      if (std::abs(f.U(i, k)) > std::abs(best)) best = f.U(i, k);
    }
    CHECK(best > 0.0);
  }
  const SvdFactors again = decompose(dm);
  CHECK(f.U == again.U);
  CHECK(f.V == again.V);
  CHECK(f.S == again.S);
}

TEST_CASE("permuting sequences permutes V rows and leaves S alone") {
  const DataMatrix dm = random_centered(3, 12, 30, 24);
  DataMatrix perm = dm;
  const std::vector<int> order = {5, 0, 7, 2, 11, 4, 9, 1, 10, 3, 8, 6};
  for (int i = 0; i < 12; ++i) perm.M.col(i) = dm.M.col(order[static_cast<std::size_t>(i)]);
  const SvdFactors f1 = decompose(dm);
  const SvdFactors f2 = decompose(perm);
  CHECK((f1.S - f2.S).cwiseAbs().maxCoeff() <= 1e-9);
  for (int i = 0; i < 12; ++i) {
    CHECK((f2.V.row(i).head(f1.rank) -
           f1.V.row(order[static_cast<std::size_t>(i)]).head(f1.rank))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
  }
}

TEST_CASE("duplicating a sequence leaves the nonzero left subspace in place") {
  const DataMatrix dm = random_centered(3, 5, 25, 25);
  DataMatrix dup = dm;
  dup.n = 6;
  dup.M.conservativeResize(Eigen::NoChange, 6);
  dup.M.col(5) = dm.M.col(2);
  const SvdFactors f1 = decompose(dm);
  const SvdFactors f2 = decompose(dup);
  REQUIRE(f1.rank == f2.rank);
  CHECK(largest_principal_angle(f1.U.leftCols(f1.rank), f2.U.leftCols(f2.rank)) <= 1e-6);
}

TEST_CASE("projecting the training columns reproduces the embedding") {
  const DataMatrix dm = random_centered(4, 20, 30, 26);
  const SvdFactors f = decompose(dm);
  const int h = std::min(4, f.rank);
  const Eigen::MatrixXd emb = embed(f, h);
  for (int i = 0; i < dm.n; ++i) {
    const Eigen::VectorXd p = project(f, dm.M.col(i), h);
    CHECK((p.transpose() - emb.row(i)).cwiseAbs().maxCoeff() <= 1e-9);
  }
  CHECK_THROWS(project(f, dm.M.col(0), f.rank + 1));
  CHECK_THROWS(project(f, Eigen::VectorXd::Zero(7), h));
}

TEST_CASE("contribution columns sum to 100") {
  const DataMatrix dm = random_centered(4, 40, 35, 27);
  const SvdFactors f = decompose(dm);
  const ContributionMatrix c = contributions(dm, f);
  REQUIRE(c.C.cols() == static_cast<Eigen::Index>(c.columns.size()));
  REQUIRE(c.C.cols() == f.rank);
  for (Eigen::Index k = 0; k < c.C.cols(); ++k) {
    CHECK(c.C.col(k).sum() == doctest::Approx(100.0).epsilon(1e-8));
    CHECK(c.C.col(k).minCoeff() >= 0.0);
  }
}

TEST_CASE("contributions drop zero singular directions") {
  Eigen::MatrixXd M(4, 6);
  Eigen::VectorXd u(4), w(6);
  u << 1.0, -2.0, 0.5, 3.0;
  w << 0.2, 1.0, -0.7, 2.0, 0.1, -1.5;
  M = u * w.transpose();
  const DataMatrix dm = direct_centered(M, 2, 10);
  const ContributionMatrix c = contributions(dm, decompose(dm));
  CHECK(c.columns == std::vector<int>{0});
}

TEST_CASE("a single varying entry owns the first direction") {
  // Only vector entry 0 carries any signal: its contribution to the single
  // surviving direction must be the whole 100 percent.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(16, 8);
  for (int i = 0; i < 8; ++i) M(0, i) = static_cast<double>(i) - 3.5;
  const DataMatrix dm = direct_centered(M, 4, 33);
  const SvdFactors f = decompose(dm);
  const ContributionMatrix c = contributions(dm, f);
  REQUIRE(c.columns.size() == 1);
  CHECK(c.C(0, 0) == doctest::Approx(100.0).epsilon(1e-8));
}

TEST_CASE("contributions are invariant to singular-vector signs") {
  const DataMatrix dm = random_centered(3, 15, 25, 28);
  SvdFactors f = decompose(dm);
  const ContributionMatrix before = contributions(dm, f);
  f.U.col(0) = -f.U.col(0);  // squaring must erase the flip
  f.V.col(0) = -f.V.col(0);
  const ContributionMatrix after = contributions(dm, f);
  CHECK((before.C - after.C).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("home-duration entry dominates the first direction") {
  // Two groups separated almost purely by how long home bouts last; the
  // remaining time alternates rapidly through W/T/O so its variance spreads
  // over many cells. The H->H cell then carries nearly all of direction 1.
  const Alphabet ab({"H", "W", "T", "O"});
  MarkovSpec spec;
  spec.order = 1;
  spec.states = {0, 1, 2, 3};
  spec.initial = {0.25, 0.25, 0.25, 0.25};
  std::vector<Sequence> seqs;
  int id = 0;
  for (double home_self : {0.95, 0.70}) {
    spec.rows = {
        {home_self, (1 - home_self) / 3, (1 - home_self) / 3, (1 - home_self) / 3},
        {0.3, 0.1, 0.3, 0.3},
        {0.3, 0.3, 0.1, 0.3},
        {0.3, 0.3, 0.3, 0.1},
    };
    for (int i = 0; i < 25; ++i) {
      Sequence s = simulate(spec, 288, mix_seed(404, static_cast<std::uint64_t>(id)));
      s.id = "s" + std::to_string(++id);
      s.group_id = s.id;
      seqs.push_back(std::move(s));
    }
  }
  const DataMatrix dm = center(assemble(SequenceSet(ab, std::move(seqs))));
  const ContributionMatrix c = contributions(dm, decompose(dm));
  CHECK(c.C(0, 0) >= 90.0);
}

}  // TEST_SUITE
