#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spg/spg.hpp"
#include "support.hpp"

using namespace spg;

namespace {

MultiProblem random_multi(gen::Source& src, Index N, Index J, Index K, bool graph) {
  MultiProblem p;
  p.X = src.matrix(N, J);
  p.Y = p.X * src.matrix(J, K) + 0.5 * src.matrix(N, K);
  p.penalty = graph ? PenaltySpec(src.graph_spec(K)) : PenaltySpec(src.group_spec(K));
  p.lambda = src.uniform(0.05, 1.0);
  return p;
}

}  // namespace

TEST(MultiPenalty, Examples) {
  GroupPenaltySpec g;
  g.groups = {{0, 1}};
  MultiProblem p;
  p.X = Matrix::Identity(2, 2);
  p.Y = Matrix::Zero(2, 2);
  p.penalty = g;
  Matrix B(2, 2);
  B << 3, 4, 0, 0;
  EXPECT_DOUBLE_EQ(multi_penalty_value(p, B), 5.0);
  EXPECT_EQ(multi_penalty_value(p, Matrix::Zero(2, 2)), 0.0);
  EXPECT_THROW(multi_penalty_value(p, Matrix::Zero(3, 2)), DimensionError);

  GroupPenaltySpec one;
  one.groups = {{0}};
  one.gamma = 1.5;
  MultiProblem q;
  q.X = Matrix::Identity(3, 3);
  q.Y = Matrix::Zero(3, 1);
  q.penalty = one;
  Matrix b(3, 1);
  b << 1, -2, 0.5;
  EXPECT_DOUBLE_EQ(multi_penalty_value(q, b), penalty_value(singleton_groups(3, 1.5), b.col(0)));
}

TEST(MultiPenalty, GraphRowwise) {
  gen::Source src(61);
  for (int trial = 0; trial < 30; ++trial) {
    const Index J = src.integer(1, 5), K = src.integer(2, 6);
    const auto gr = src.graph_spec(K);
    MultiProblem p;
    p.X = src.matrix(4, J);
    p.Y = src.matrix(4, K);
    p.penalty = gr;
    const Matrix B = src.matrix(J, K);
    double direct = 0;
    for (Index j = 0; j < J; ++j)
      for (const auto& e : gr.edges) direct += gr.gamma * std::abs(e.r) * std::abs(B(j, e.m) - oracle::sgn(e.r) * B(j, e.l));
    EXPECT_NEAR(multi_penalty_value(p, B), direct, 1e-12 * (1 + direct));
  }
}

TEST(MultiAlphaStar, ColumnsMatchUnivariateAndZeroAtOrigin) {
  gen::Source src(62);
  for (int trial = 0; trial < 30; ++trial) {
    const Index J = src.integer(1, 5), K = src.integer(2, 6);
    MultiProblem p = random_multi(src, 6, J, K, trial % 2);
    const double mu = src.uniform(0.05, 2);
    const Matrix B = src.matrix(J, K);
    const Matrix A = multi_alpha_star(p, mu, B);
    const auto s = make_smoothing(*p.penalty, K, mu);
    ASSERT_EQ(A.cols(), J);
    for (Index j = 0; j < J; ++j) EXPECT_TRUE(A.col(j).isApprox(alpha_star(s, B.row(j).transpose()), 1e-14));
    EXPECT_EQ(multi_alpha_star(p, mu, Matrix::Zero(J, K)), Matrix::Zero(A.rows(), J));
  }
}

TEST(MultiSmoothing, GradientMatchesFiniteDifferences) {
  gen::Source src(63);
  for (int trial = 0; trial < 40; ++trial) {
    MultiProblem p = random_multi(src, 5, 3, 2, trial % 2);
    if (trial % 2) {
      GraphPenaltySpec g;
      g.num_nodes = 2;
      g.gamma = src.uniform(0.5, 2);
      g.edges = {{0, 1, src.uniform(-1, 1)}};
      p.penalty = g;
    }
    const double mu = src.uniform(0.2, 2);
    const Matrix B = src.matrix(3, 2);
    const Matrix fd =
        oracle::central_difference([&](const Matrix& x) { return multi_smooth_penalty_value(p, mu, x); }, B);
    const Matrix g = multi_smooth_penalty_gradient(p, mu, B);
    EXPECT_LE((fd - g).norm(), 1e-5 * std::max(g.norm(), 1e-3)) << "trial " << trial;
  }
}

TEST(MultiSmoothing, SandwichWithReplicatedDomainBound) {
  gen::Source src(64);
  for (int trial = 0; trial < 100; ++trial) {
    const Index J = src.integer(1, 5), K = src.integer(2, 6);
    MultiProblem p = random_multi(src, 4, J, K, trial % 2);
    const double mu = std::pow(10.0, src.uniform(-5, 0));
    const Matrix B = src.matrix(J, K);
    const double f0 = multi_penalty_value(p, B), fmu = multi_smooth_penalty_value(p, mu, B);
    const double D = multi_dual_domain_bound(p);
    EXPECT_DOUBLE_EQ(D, J * dual_domain_bound(*p.penalty));
    EXPECT_LE(fmu, f0 + 1e-10);
    EXPECT_GE(fmu, f0 - mu * D - 1e-10);
  }
}

TEST(MultiSmoothing, DomainBoundIsAttained) {
  // max over Q of 0.5 ||A||_F^2: every replicated block at a unit vector / box corner.
  gen::Source src(65);
  for (int trial = 0; trial < 20; ++trial) {
    const Index J = src.integer(1, 4), K = src.integer(2, 5);
    MultiProblem p = random_multi(src, 3, J, K, trial % 2);
    const auto C = build_coupling(*p.penalty, K);
    double max_half_sq = 0;
    if (std::holds_alternative<GroupPenaltySpec>(*p.penalty))
      max_half_sq = 0.5 * J * static_cast<double>(C.row_blocks.size());
    else
      max_half_sq = 0.5 * J * static_cast<double>(C.rows());
    EXPECT_DOUBLE_EQ(multi_dual_domain_bound(p), max_half_sq);
  }
}

TEST(SolveMultivariate, SingleOutputEqualsUnivariate) {
  gen::Source src(66);
  for (int trial = 0; trial < 10; ++trial) {
    const Index N = src.integer(10, 40), J = src.integer(2, 12);
    const double gamma = src.uniform(0.1, 2);
    MultiProblem m;
    m.X = src.matrix(N, J);
    m.Y = src.matrix(N, 1);
    GroupPenaltySpec out;
    out.groups = {{0}};
    out.gamma = gamma;
    m.penalty = out;
    m.lambda = src.uniform(0.05, 1);
    Problem u{Dataset{m.X, m.Y.col(0)}, LossKind::squared, PenaltySpec(singleton_groups(J, gamma)), m.lambda};
    const auto rm = solve_multivariate(m);
    const auto ru = solve(u);
    EXPECT_EQ(rm.trace.iterations, ru.trace.iterations);
    EXPECT_LE((rm.beta.col(0) - ru.beta).lpNorm<Eigen::Infinity>(), 1e-12) << "trial " << trial;
  }
}

TEST(SolveMultivariate, UnregularizedReachesLeastSquares) {
  gen::Source src(67);
  MultiProblem p = random_multi(src, 40, 5, 3, true);
  p.lambda = 0;
  p.penalty = with_gamma(*p.penalty, 0.0);
  MultiSolverConfig cfg;
  cfg.base.stop.rel_tol = 0;
  cfg.base.stop.max_iter = 5000;
  const auto r = solve_multivariate(p, cfg);
  const Matrix ls = (p.X.transpose() * p.X).ldlt().solve(p.X.transpose() * p.Y);
  EXPECT_LE((r.beta - ls).norm(), 1e-8 * ls.norm());
}

TEST(SolveMultivariate, ExactZerosAndObjective) {
  gen::Source src(68);
  MultiProblem p = random_multi(src, 30, 8, 4, false);
  p.lambda = 8.0;
  const auto r = solve_multivariate(p);
  EXPECT_GT((r.beta.array() == 0.0).count(), 0);
  EXPECT_NEAR(r.trace.objective, multi_objective_value(p, r.beta), 1e-9 * r.trace.objective);
  EXPECT_EQ(r.trace.nnz, count_nonzeros(r.beta));
}

TEST(SolveMultivariate, MatchesAdmmOnVectorizedProblem) {
  // vec(B) row-major: beta = (B_1., B_2., ...); the penalty acts on each row.
  gen::Source src(69);
  for (int trial = 0; trial < 4; ++trial) {
    const Index N = 20, J = 3, K = 3;
    MultiProblem p = random_multi(src, N, J, K, trial % 2);
    const auto C = build_coupling(*p.penalty, K);
    const Matrix Ck(C.matrix);
    Matrix Xbig = Matrix::Zero(N * K, J * K);
    Vector ybig(N * K);
    for (Index k = 0; k < K; ++k) {
      for (Index j = 0; j < J; ++j) Xbig.block(k * N, j * K + k, N, 1) = p.X.col(j);
      ybig.segment(k * N, N) = p.Y.col(k);
    }
    Matrix Cbig = Matrix::Zero(J * Ck.rows(), J * K);
    std::vector<std::pair<Index, Index>> blocks;
    const bool group = std::holds_alternative<GroupPenaltySpec>(*p.penalty);
    for (Index j = 0; j < J; ++j) {
      Cbig.block(j * Ck.rows(), j * K, Ck.rows(), K) = Ck;
      if (group)
        for (const auto& b : C.row_blocks) blocks.push_back({j * Ck.rows() + b.offset, b.size});
    }
    if (!group) blocks = gen::unit_blocks(Cbig.rows());
    const Vector star = oracle::admm(Xbig, ybig, Cbig, blocks, p.lambda);
    Matrix Bstar(J, K);
    for (Index j = 0; j < J; ++j) Bstar.row(j) = star.segment(j * K, K).transpose();
    const double f_star = multi_objective_value(p, Bstar);
    MultiSolverConfig cfg;
    cfg.base.mu = 1e-6;
    cfg.base.stop.rel_tol = 0;
    cfg.base.stop.max_iter = 200000;
    cfg.base.stop.record_trace = false;
    const auto r = solve_multivariate(p, cfg);
    EXPECT_NEAR(r.trace.objective, f_star, 1e-4 * f_star) << "trial " << trial;
  }
}

TEST(SolveMultivariate, Errors) {
  MultiProblem p;
  p.X = Matrix::Identity(3, 3);
  p.Y = Matrix::Zero(2, 2);
  EXPECT_THROW(solve_multivariate(p), DimensionError);
  p.Y = Matrix::Zero(3, 2);
  GraphPenaltySpec g;
  g.num_nodes = 3;
  g.edges = {{0, 1, 1.0}};
  p.penalty = g;
  EXPECT_THROW(solve_multivariate(p), DimensionError);
  g.num_nodes = 2;
  p.penalty = g;
  MultiSolverConfig cfg;
  cfg.B0 = Matrix::Zero(2, 2);
  EXPECT_THROW(solve_multivariate(p, cfg), DimensionError);
}
