#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qirka/analysis.hpp"
#include "qirka/benchmarks.hpp"
#include "qirka/engine.hpp"

using namespace qirka;

namespace {

std::vector<Index> direction_indices(Index m, Index L) { return tangential_directions(m, L).index; }

}  // namespace

TEST(Tangential, CyclicCanonicalDirections) {
  EXPECT_EQ(direction_indices(1, 2), (std::vector<Index>{0, 1}));
  EXPECT_EQ(direction_indices(1, 3), (std::vector<Index>{0, 1, 0}));
  EXPECT_EQ(direction_indices(2, 4), (std::vector<Index>{0, 1, 2, 3}));
  const TangentialPool p = tangential_directions(1, 3);
  Matrix expected(2, 3);
  expected << 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(p.directions, expected);
}

TEST(CandidatePool, RealShiftDiagonalResolvent) {
  const Matrix A = -Matrix::Identity(4, 4);
  Matrix B = Matrix::Zero(4, 2);
  B(0, 0) = 1.0;
  const StateSpaceModel model(A, B, Matrix::Zero(2, 4), Matrix::Identity(2, 2));
  const CandidatePool pool =
      candidate_pool(model, ShiftSet::canonical({Complex(1.0, 0.0)}), tangential_directions(1, 1));
  ASSERT_EQ(pool.size(), 1);
  EXPECT_EQ(Vector(pool.columns.col(0)), -0.5 * Vector::Unit(4, 0));
  EXPECT_FALSE(pool.tags[0].imaginary);
}

TEST(CandidatePool, ComplexShiftSplitsIntoRealColumns) {
  oracle::Gen gen(51);
  const StateSpaceModel model = gen.pr_model(4, 1);
  const Complex s(0.0, 1.0);
  const CandidatePool pool =
      candidate_pool(model, ShiftSet::canonical({s}), tangential_directions(1, 2));
  ASSERT_EQ(pool.size(), 4);
  EXPECT_FALSE(pool.tags[0].imaginary);
  EXPECT_TRUE(pool.tags[1].imaginary);
  EXPECT_EQ(pool.tags[2].direction, 1);
  CMatrix M = model.A().cast<Complex>();
  M.diagonal().array() -= s;
  const CVector z = M.partialPivLu().solve(model.B().col(0).cast<Complex>());
  EXPECT_LE((pool.columns.col(0) - z.real()).norm(), 1e-12);
  EXPECT_LE((pool.columns.col(1) - z.imag()).norm(), 1e-12);
}

TEST(CandidatePool, OrderIsShiftMajor) {
  oracle::Gen gen(52);
  const StateSpaceModel model = gen.pr_model(4, 1);
  const ShiftSet shifts = ShiftSet::canonical({Complex(0.5, 0.0), Complex(1.0, 2.0)});
  const CandidatePool pool = candidate_pool(model, shifts, tangential_directions(1, 2));
  ASSERT_EQ(pool.size(), 6);
  const std::vector<std::tuple<Index, Index, bool>> expected{
      {0, 0, false}, {0, 1, false}, {1, 0, false}, {1, 0, true}, {1, 1, false}, {1, 1, true}};
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_EQ(pool.tags[k].shift, std::get<0>(expected[k]));
    EXPECT_EQ(pool.tags[k].direction, std::get<1>(expected[k]));
    EXPECT_EQ(pool.tags[k].imaginary, std::get<2>(expected[k]));
  }
}

TEST(CandidatePool, EmptyDirections) {
  oracle::Gen gen(53);
  const StateSpaceModel model = gen.pr_model(3, 1);
  EXPECT_EQ(candidate_pool(model, ShiftSet::canonical({Complex(1, 0)}), tangential_directions(1, 0))
                .size(),
            0);
}

TEST(CandidatePool, ShiftCollisionNamesIndex) {
  Matrix A(2, 2);
  A << -1, 0, 0, -2;
  const StateSpaceModel model(A, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                              Matrix::Identity(2, 2));
  try {
    candidate_pool(model, ShiftSet::canonical({Complex(3, 0), Complex(-2, 0)}),
                   tangential_directions(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shift_collision);
    EXPECT_EQ(e.value(), 0.0);  // -2 sorts first
  }
}

TEST(SelectShifts, MirroredUpperRepresentatives) {
  Matrix Ar = Matrix::Zero(4, 4);
  Ar.block(0, 0, 2, 2) << -3, 4, -4, -3;
  Ar.block(2, 2, 2, 2) << -1, 2, -2, -1;
  const ShiftSet s = select_shifts(Ar);
  ASSERT_EQ(s.size(), 2);
  EXPECT_LE(std::abs(s.sigma[0] - Complex(1, 2)), 1e-12);
  EXPECT_LE(std::abs(s.sigma[1] - Complex(3, 4)), 1e-12);
}

TEST(SelectShifts, DoubleRealPole) {
  const ShiftSet s = select_shifts(-Matrix::Identity(2, 2));
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(s.sigma[0], Complex(1.0, 0.0));
}

TEST(SelectShifts, HurwitzGivesRightHalfPlane) {
  oracle::Gen gen(54);
  for (int trial = 0; trial < 30; ++trial) {
    const Index r = gen.integer(1, 6);
    const ShiftSet s = select_shifts(gen.hurwitz(2 * r));
    ASSERT_EQ(s.size(), r);
    for (std::size_t i = 0; i < s.sigma.size(); ++i) {
      EXPECT_GT(s.sigma[i].real(), 0.0);
      EXPECT_GE(s.sigma[i].imag(), 0.0);
      if (i > 0) EXPECT_FALSE(canonical_less(s.sigma[i], s.sigma[i - 1]));
    }
  }
}

TEST(RelativeChange, Examples) {
  const ShiftSet a = ShiftSet::canonical({Complex(3, 4)});
  EXPECT_EQ(relative_change(a, a), 0.0);
  EXPECT_EQ(relative_change(ShiftSet::canonical({Complex(1, 0)}), ShiftSet::canonical({Complex(0, 0)})),
            1.0);
  EXPECT_NEAR(relative_change(ShiftSet::canonical({Complex(3.05, 4)}), a), 0.01, 1e-15);
  EXPECT_THROW(relative_change(a, ShiftSet::canonical({Complex(1, 0), Complex(2, 0)})), Error);
}

TEST(InitialShifts, LogSpacing) {
  const ShiftSet one = log_spaced_shifts(0.1, 10.0, 1);
  EXPECT_NEAR(one.sigma[0].real(), 1.0, 1e-15);
  const ShiftSet three = log_spaced_shifts(0.1, 10.0, 3);
  EXPECT_NEAR(three.sigma[0].real(), 0.1, 1e-15);
  EXPECT_NEAR(three.sigma[1].real(), 1.0, 1e-15);
  EXPECT_NEAR(three.sigma[2].real(), 10.0, 1e-14);
  EXPECT_THROW(log_spaced_shifts(0.0, 1.0, 2), Error);
  EXPECT_THROW(log_spaced_shifts(2.0, 1.0, 2), Error);
}

TEST(InitialShifts, UserProvidedIsReordered) {
  oracle::Gen gen(55);
  const StateSpaceModel model = gen.pr_model(3, 1);
  const ShiftSet s = initial_shifts(model, 3, InitStrategy::user_provided,
                                    {Complex(2, 1), Complex(5, 0), Complex(1, 1)});
  EXPECT_EQ(s.sigma, (std::vector<Complex>{Complex(5, 0), Complex(1, 1), Complex(2, 1)}));
  EXPECT_THROW(initial_shifts(model, 2, InitStrategy::user_provided, {Complex(1, 0)}), Error);
}

TEST(InitialShifts, RowSumBounds) {
  Matrix A = -Matrix::Identity(2, 2);
  A(0, 1) = 1.0;  // max row sum 2
  const StateSpaceModel model(A, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                              Matrix::Identity(2, 2));
  const ShiftSet s = initial_shifts(model, 2, InitStrategy::log_spaced_real);
  EXPECT_NEAR(s.sigma[0].real(), 0.02, 1e-15);
  EXPECT_NEAR(s.sigma[1].real(), 20.0, 1e-13);
}

TEST(Config, Validation) {
  QirkaConfig c;
  EXPECT_NO_THROW(c.validate());
  c.r = 0;
  EXPECT_THROW(c.validate(), Error);
  c = QirkaConfig{};
  c.L = 0;
  EXPECT_THROW(c.validate(), Error);
  c = QirkaConfig{};
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = QirkaConfig{};
  c.max_iter = 0;
  EXPECT_THROW(c.validate(), Error);
}

// --- full iteration ----------------------------------------------------------

TEST(Run, StructureHoldsAtEveryIteration) {
  oracle::Gen gen(56);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = gen.integer(3, 8);
    const Index m = gen.integer(1, 2);
    const StateSpaceModel model = gen.pr_model(n, m);
    QirkaConfig cfg;
    cfg.r = gen.integer(1, n - 1);
    cfg.max_iter = 30;
    const QirkaResult res = run(model, cfg);
    ASSERT_FALSE(res.trace.records.empty());
    EXPECT_LE(static_cast<int>(res.trace.records.size()), cfg.max_iter);
    for (const auto& rec : res.trace.records) {
      EXPECT_LE(rec.defects.symp, 1e-10);
      EXPECT_LE(rec.defects.left, 1e-10);
      EXPECT_LE(rec.defects.pr1, 1e-10);
      EXPECT_LE(rec.defects.pr2, 1e-10);
      EXPECT_GE(rec.relchg, 0.0);
      EXPECT_EQ(static_cast<Index>(rec.poles.size()), 2 * cfg.r);
      for (const Complex s : rec.next_shifts.sigma) EXPECT_GT(s.real(), 0.0);
    }
    EXPECT_EQ(res.reduced.D(), model.D());
  }
}

TEST(Run, HugeEpsilonStopsAfterOneIteration) {
  oracle::Gen gen(57);
  const StateSpaceModel model = gen.pr_model(5, 1);
  QirkaConfig cfg;
  cfg.r = 2;
  cfg.epsilon = 1e99;
  const QirkaResult res = run(model, cfg);
  EXPECT_EQ(res.trace.records.size(), 1u);
  EXPECT_TRUE(res.converged);
}

TEST(Run, FullOrderIsExact) {
  oracle::Gen gen(58);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = gen.integer(2, 6);
    const StateSpaceModel model = gen.pr_model(n, 1);
    QirkaConfig cfg;
    cfg.r = n;
    cfg.max_iter = 5;
    const QirkaResult res = run(model, cfg);
    EXPECT_LE(h2_error(model, res.reduced, res.pair.V).relative, 1e-8);
  }
}

TEST(Run, Deterministic) {
  oracle::Gen gen(59);
  const StateSpaceModel model = gen.pr_model(6, 2);
  QirkaConfig cfg;
  cfg.r = 3;
  const QirkaResult a = run(model, cfg);
  const QirkaResult b = run(model, cfg);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    EXPECT_EQ(a.trace.records[k].relchg, b.trace.records[k].relchg);
    EXPECT_EQ(a.trace.records[k].next_shifts.sigma, b.trace.records[k].next_shifts.sigma);
  }
  EXPECT_EQ(a.reduced.A(), b.reduced.A());
}

TEST(Run, NonConvergenceReturnsBestIterate) {
  oracle::Gen gen(60);
  const StateSpaceModel model = gen.pr_model(6, 1);
  QirkaConfig cfg;
  cfg.r = 2;
  cfg.epsilon = 1e-300;
  cfg.max_iter = 4;
  const QirkaResult res = run(model, cfg);
  EXPECT_FALSE(res.converged);
  ASSERT_EQ(res.trace.records.size(), 4u);
  double best = res.trace.records[0].relchg;
  for (const auto& rec : res.trace.records) best = std::min(best, rec.relchg);
  EXPECT_EQ(res.trace.records[static_cast<std::size_t>(res.best_iteration)].relchg, best);
}

TEST(Run, RejectsUnstableModel) {
  const Matrix A = Matrix::Identity(2, 2);
  const StateSpaceModel model(A, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                              Matrix::Identity(2, 2));
  try {
    run(model, QirkaConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::instability);
  }
}

TEST(Run, WarnsOnNonPRInput) {
  oracle::Gen gen(61);
  const StateSpaceModel pr = gen.pr_model(4, 1);
  const StateSpaceModel model(pr.A(), pr.B(), pr.C() * 1.5, pr.D());
  QirkaConfig cfg;
  cfg.r = 2;
  const QirkaResult res = run(model, cfg);
  ASSERT_FALSE(res.warnings.empty());
  EXPECT_NE(res.warnings.front().find("not PR"), std::string::npos);
}

TEST(Run, InsufficientPoolAdvisesL) {
  // The second mode is unreachable from B, so every candidate lies in the
  // first mode's plane and only one conjugate pair can be accepted.
  Matrix A = Matrix::Zero(4, 4);
  A.block(0, 0, 2, 2) << -0.5, 1, -1, -0.5;
  A.block(2, 2, 2, 2) << -0.5, 2, -2, -0.5;
  Matrix B = Matrix::Zero(4, 2);
  B(0, 0) = B(1, 1) = 1.0;
  const StateSpaceModel model(A, B, canonical_right(canonical_left(Matrix(B.transpose()))),
                              Matrix::Identity(2, 2));
  QirkaConfig cfg;
  cfg.r = 2;
  try {
    run(model, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_pool);
    EXPECT_NE(std::string(e.what()).find("increase L"), std::string::npos);
  }
}

TEST(Run, FullPortDiagnostics) {
  const BenchmarkPair p = build_chain(ChainConfig::defaults(12, 2, Variant::homogeneous));
  QirkaConfig cfg;
  cfg.r = 3;
  const QirkaResult res = run(p.external, cfg, &p.full_port);
  ASSERT_TRUE(res.reduced_full_port.has_value());
  EXPECT_EQ(res.reduced_full_port->A(), res.reduced.A());
  for (const auto& rec : res.trace.records) {
    EXPECT_LE(rec.defects.pr1, 1e-10);
    EXPECT_LE(rec.defects.pr2, 1e-10);
  }
}
