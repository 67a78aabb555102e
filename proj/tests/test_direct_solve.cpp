#include <gtest/gtest.h>

#include "cgsolve/direct_solve.hpp"
#include "cgsolve/generators.hpp"

using namespace cgsolve;

TEST(DirectSolve, Identity) {
  EXPECT_EQ(direct_solve({DenseMatrix::identity(2), Vector{5, 6}}), (Vector{5, 6}));
}

TEST(DirectSolve, Diagonal) {
  EXPECT_EQ(direct_solve({DenseMatrix{{2, 0}, {0, 4}}, Vector{2, 4}}), (Vector{1, 1}));
}

TEST(DirectSolve, TwoByTwoAdjugate) {
  // inverse = adj / 11 = [[3,-1],[-1,4]] / 11; times (1,2) = (1/11, 7/11)
  const auto x = direct_solve({DenseMatrix{{4, 1}, {1, 3}}, Vector{1, 2}});
  EXPECT_NEAR(x[0], 1.0 / 11.0, 1e-15);
  EXPECT_NEAR(x[1], 7.0 / 11.0, 1e-15);
}

TEST(DirectSolve, NeedsPivoting) {
  // Zero leading pivot.
  const auto x = direct_solve({DenseMatrix{{0, 1}, {1, 0}}, Vector{3, 4}});
  EXPECT_EQ(x, (Vector{4, 3}));
}

TEST(DirectSolve, SingularThrows) {
  EXPECT_THROW(direct_solve({DenseMatrix{{1, 2}, {2, 4}}, Vector{1, 1}}), SingularMatrix);
  EXPECT_THROW(direct_solve({DenseMatrix(3), Vector{1, 1, 1}}), SingularMatrix);
}

TEST(DirectSolve, AcceptsCsr) {
  const auto x = direct_solve({generate_laplacian_1d(3), Vector{1, 0, 1}});
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(DirectSolve, ResidualBoundOnGeneratedInstances) {
  for (std::size_t n : {1u, 2u, 7u, 32u, 64u, 128u}) {
    for (double cond : {1.0, 1e2, 1e4, 1e6}) {
      const std::uint64_t seed = n * 31 + static_cast<std::uint64_t>(std::log10(cond));
      const auto a = generate_random_spd(n, seed, cond);
      const auto b = generate_random_vector(n, seed + 5);
      const LinearSystem system(a, b);
      const auto x = direct_solve(system);
      const double residual = norm2(subtract(matvec(a, x), b));
      EXPECT_LE(residual, 1e-10 * norm2(b)) << "n=" << n << " cond=" << cond;
    }
  }
}
