#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qirka/model_core.hpp"

using namespace qirka;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected qirka::Error";
  return ErrorCode::io_error;
}

}  // namespace

TEST(CanonicalMatrix, SingleBlock) {
  Matrix expected(2, 2);
  expected << 0, 1, -1, 0;
  EXPECT_EQ(canonical_matrix(1).J, expected);
}

TEST(CanonicalMatrix, ExactIdentities) {
  for (Index k = 1; k <= 6; ++k) {
    const Matrix J = canonical_matrix(k).J;
    EXPECT_EQ(J * J.transpose(), Matrix::Identity(2 * k, 2 * k));
    EXPECT_EQ(J.transpose(), -J);
    EXPECT_EQ(J * J, -Matrix::Identity(2 * k, 2 * k));
    for (Index i = 0; i < J.size(); ++i) {
      const double v = J.data()[i];
      EXPECT_TRUE(v == 0.0 || v == 1.0 || v == -1.0);
    }
  }
}

TEST(CanonicalMatrix, RejectsZero) {
  EXPECT_EQ(code_of([] { canonical_matrix(0); }), ErrorCode::invalid_dimension);
}

TEST(CanonicalMatrix, StructuredProductsMatchDense) {
  oracle::Gen gen(11);
  const Matrix M = gen.matrix(6, 4);
  const Matrix J = canonical_matrix(3).J;
  EXPECT_EQ(canonical_left(M), J * M);
  EXPECT_EQ(canonical_transpose_left(M), J.transpose() * M);
  const Matrix N = gen.matrix(5, 6);
  EXPECT_EQ(canonical_right(N), N * J);
}

TEST(HamiltonianMatrix, RejectsAsymmetric) {
  Matrix R = Matrix::Identity(2, 2);
  R(0, 1) = 1e-15;
  EXPECT_EQ(code_of([&] { HamiltonianMatrix h(R); }), ErrorCode::contract_violation);
}

TEST(StateSpaceModel, DimensionChecks) {
  const Matrix A = -Matrix::Identity(4, 4);
  EXPECT_NO_THROW(StateSpaceModel(A, Matrix::Zero(4, 2), Matrix::Zero(2, 4), Matrix::Zero(2, 2)));
  EXPECT_EQ(code_of([&] { StateSpaceModel(A, Matrix::Zero(3, 2), Matrix::Zero(2, 4),
                                          Matrix::Zero(2, 2)); }),
            ErrorCode::invalid_dimension);
  EXPECT_EQ(code_of([&] { StateSpaceModel(A, Matrix::Zero(4, 2), Matrix::Zero(2, 3),
                                          Matrix::Zero(2, 2)); }),
            ErrorCode::invalid_dimension);
  EXPECT_EQ(code_of([&] { StateSpaceModel(A, Matrix::Zero(4, 2), Matrix::Zero(2, 4),
                                          Matrix::Zero(3, 3)); }),
            ErrorCode::invalid_dimension);
  EXPECT_EQ(code_of([&] { StateSpaceModel(Matrix::Zero(3, 3), Matrix::Zero(3, 2),
                                          Matrix::Zero(2, 3), Matrix::Zero(2, 2)); }),
            ErrorCode::invalid_dimension);
}

TEST(PRResiduals, TemplateModelsVanish) {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = gen.integer(1, 8);
    const Index m = gen.integer(1, 3);
    Matrix R = gen.matrix(2 * n, 2 * n);
    R = (R + R.transpose()).eval();
    const Matrix B = gen.matrix(2 * n, 2 * m);
    const StateSpaceModel model = pr_from_template(HamiltonianMatrix(R), B);
    const PRResiduals res = pr_residuals(model);
    const double scale = 1.0 + model.A().norm() + B.squaredNorm();
    EXPECT_LE(res.r1_norm, 1e-12 * scale);
    EXPECT_LE(res.r2_norm, 1e-12 * scale);
    EXPECT_EQ(res.r3_norm, 0.0);
    // r1 is skew-symmetric
    EXPECT_LE((res.r1 + res.r1.transpose()).norm(), 1e-12 * res.r1.norm() + 1e-14);
  }
}

TEST(PRResiduals, DampedSingleMode) {
  const double gamma = 0.7;
  const auto model =
      pr_from_template(HamiltonianMatrix(Matrix::Identity(2, 2)), std::sqrt(gamma) * Matrix::Identity(2, 2));
  const PRResiduals res = pr_residuals(model);
  EXPECT_LE(res.r1_norm, 1e-14);
  EXPECT_LE(res.r2_norm, 1e-14);
  EXPECT_LE(res.r3_norm, 1e-14);
  // A = J - gamma/2 I
  Matrix A(2, 2);
  A << -gamma / 2, 1, -1, -gamma / 2;
  EXPECT_LE((model.A() - A).norm(), 1e-15);
}

TEST(PRResiduals, ShiftsOfA) {
  oracle::Gen gen(13);
  const StateSpaceModel model = gen.pr_model(3, 1);
  const Matrix J = canonical_matrix(3).J;
  // (A + cI) J + J (A + cI)^T adds 2cJ; a shift along J cancels
  const StateSpaceModel scalar(model.A() + 0.37 * Matrix::Identity(6, 6), model.B(), model.C(),
                               model.D());
  EXPECT_LE((pr_residuals(scalar).r1 - pr_residuals(model).r1 - 0.74 * J).norm(), 1e-14);
  const StateSpaceModel skew(model.A() + 0.37 * J, model.B(), model.C(), model.D());
  EXPECT_LE((pr_residuals(skew).r1 - pr_residuals(model).r1).norm(), 1e-14);
}

TEST(PRResiduals, R2IsAffineInC) {
  oracle::Gen gen(14);
  const StateSpaceModel model = gen.pr_model(3, 2);
  const Matrix E1 = gen.matrix(4, 6);
  const Matrix E2 = gen.matrix(4, 6);
  auto r2 = [&](const Matrix& dC) {
    return pr_residuals(StateSpaceModel(model.A(), model.B(), model.C() + dC, model.D())).r2;
  };
  const Matrix base = r2(Matrix::Zero(4, 6));
  EXPECT_LE(((r2(E1 + E2) - base) - (r2(E1) - base) - (r2(E2) - base)).norm(), 1e-12);
}

TEST(PRTemplate, ZeroCoupling) {
  oracle::Gen gen(15);
  const Matrix R = gen.spd(4);
  const auto model = pr_from_template(HamiltonianMatrix(R), Matrix::Zero(4, 2));
  EXPECT_EQ(model.A(), canonical_matrix(2).J * R);
  EXPECT_TRUE(model.C().isZero(0.0));
  EXPECT_EQ(model.D(), Matrix::Identity(2, 2));
}

TEST(TransferEval, HandComputedResolvent) {
  const Matrix I = Matrix::Identity(2, 2);
  const StateSpaceModel model(-I, I, I, I);
  const CMatrix H = transfer_eval(model, Complex(1.0, 0.0));
  EXPECT_LE((H - 1.5 * CMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(TransferEval, LargeSApproachesD) {
  oracle::Gen gen(16);
  const StateSpaceModel model = gen.pr_model(4, 1);
  const CMatrix H = transfer_eval(model, Complex(1e12, 0.0));
  EXPECT_LE((H - model.D().cast<Complex>()).norm(), 1e-6);
}

TEST(TransferEval, ConjugateSymmetry) {
  oracle::Gen gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpaceModel model = gen.pr_model(gen.integer(1, 6), gen.integer(1, 2));
    const Complex s(gen.uniform(-1, 1), gen.uniform(-3, 3));
    const CMatrix a = transfer_eval(model, s);
    const CMatrix b = transfer_eval(model, std::conj(s));
    EXPECT_LE((a - b.conjugate()).norm(), 1e-12 * a.norm());
  }
}

TEST(TransferEval, MatchesDenseInverseOnImaginaryAxis) {
  oracle::Gen gen(18);
  const StateSpaceModel model = gen.pr_model(5, 2);
  for (double w : {0.0, 0.3, 1.7, 12.0}) {
    const CMatrix H = transfer_eval(model, Complex(0.0, w));
    const double ref = oracle::strictly_proper_sq(model, w);
    EXPECT_NEAR((H - model.D().cast<Complex>()).squaredNorm(), ref, 1e-10 * (1.0 + ref));
  }
}

TEST(TransferEval, NearPoleIsReported) {
  Matrix A(2, 2);
  A << -1, 0, 0, -2;
  const StateSpaceModel model(A, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                              Matrix::Zero(2, 2));
  EXPECT_EQ(code_of([&] { transfer_eval(model, Complex(-1.0, 0.0)); }), ErrorCode::near_pole);
}

TEST(Hurwitz, SpectralAbscissa) {
  Matrix A(2, 2);
  A << -0.5, 3, -3, -0.5;
  EXPECT_NEAR(spectral_abscissa(A), -0.5, 1e-14);
  const StateSpaceModel model(A, Matrix::Zero(2, 2), Matrix::Zero(2, 2), Matrix::Zero(2, 2));
  EXPECT_TRUE(is_hurwitz(model));
}
