#include <gtest/gtest.h>

#include <cmath>

#include "fdran/barrier.hpp"

using namespace fdran;

namespace {

// Box [lo, hi]^n as A x <= b.
void box(int n, double lo, double hi, Eigen::MatrixXd& A, Eigen::VectorXd& b) {
  A = Eigen::MatrixXd::Zero(2 * n, n);
  b = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 1.0;
    b[i] = hi;
    A(n + i, i) = -1.0;
    b[n + i] = -lo;
  }
}

struct Quadratic {
  Eigen::VectorXd target;
  double value(const Eigen::VectorXd& x) const { return -(x - target).squaredNorm(); }
  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    g = -2.0 * (x - target);
    h = -2.0 * Eigen::MatrixXd::Identity(x.size(), x.size());
  }
};

struct LogSum {
  double value(const Eigen::VectorXd& x) const {
    if ((x.array() <= -1.0).any()) return -INFINITY;
    return (1.0 + x.array()).log().sum();
  }
  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    g = (1.0 + x.array()).inverse().matrix();
    h = (-(1.0 + x.array()).square().inverse()).matrix().asDiagonal();
  }
};

}  // namespace

TEST(Barrier, LinearProgramVertex) {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  box(2, 0.0, 1.0, A, b);
  A.conservativeResize(5, 2);
  b.conservativeResize(5);
  A.row(4) << 1.0, 1.0;
  b[4] = 1.5;
  Eigen::VectorXd c(2);
  c << 1.0, 2.0;
  const auto r = maximize_linear(c, A, b, Eigen::VectorXd::Constant(2, 0.25));
  EXPECT_TRUE(r.converged);
  // Optimum at the vertex (0.5, 1).
  EXPECT_NEAR(r.x[0], 0.5, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_NEAR(r.value, 2.5, 1e-7);
}

TEST(Barrier, QuadraticClampedToBox) {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  box(2, 0.0, 1.0, A, b);
  Quadratic q{Eigen::Vector2d(2.0, 0.3)};
  const auto r = maximize_concave(q, A, b, Eigen::VectorXd::Constant(2, 0.5));
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 0.3, 1e-6);
}

TEST(Barrier, WaterFillingOracle) {
  // max sum log(1 + x_i) s.t. sum x = 2, x >= 0 (equality as two inequalities is degenerate, so use <=).
  const int n = 3;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  for (int i = 0; i < n; ++i) A(i, i) = -1.0;
  A.row(n).setOnes();
  b[n] = 2.0;
  const auto r = maximize_concave(LogSum{}, A, b, Eigen::VectorXd::Constant(n, 0.1));
  for (int i = 0; i < n; ++i) EXPECT_NEAR(r.x[i], 2.0 / 3.0, 1e-6);
}

TEST(Barrier, RejectsInfeasibleStart) {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  box(1, 0.0, 1.0, A, b);
  EXPECT_THROW(maximize_linear(Eigen::VectorXd::Ones(1), A, b, Eigen::VectorXd::Constant(1, 2.0)), Error);
}

TEST(Chebyshev, CenterOfRectangle) {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  box(2, 0.0, 2.0, A, b);
  b[1] = 6.0;  // y <= 6
  const auto c = chebyshev_center(A, b, Eigen::Vector2d(5.0, -3.0), 10.0);
  EXPECT_NEAR(c.radius, 1.0, 1e-6);
  EXPECT_NEAR(c.x[0], 1.0, 1e-5);
  EXPECT_GT(c.x[1], 1.0 - 1e-6);
  EXPECT_LT(c.x[1], 5.0 + 1e-6);
}

TEST(Chebyshev, EmptyInteriorHasNonpositiveRadius) {
  Eigen::MatrixXd A(2, 1);
  Eigen::VectorXd b(2);
  A << 1.0, -1.0;
  b << 0.0, -1.0;  // x <= 0 and x >= 1
  const auto c = chebyshev_center(A, b, Eigen::VectorXd::Zero(1), 1.0);
  EXPECT_LE(c.radius, 1e-9);
}
