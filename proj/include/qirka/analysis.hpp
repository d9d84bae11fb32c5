#pragma once

// Gramians, Hankel singular values, H2 norms and errors, transmission zeros
// and first-order interpolation diagnostics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qirka/model_core.hpp"

namespace qirka {

struct GramianPair {
  Matrix Wc;
  Matrix Wo;
};

struct HankelSpectrum {
  Vector sigma;  // nonincreasing
};

struct H2Error {
  double absolute = 0.0;
  double relative = 0.0;
};

struct InterpolationEntry {
  Complex pole;
  double right = 0.0;       // ||(H - Hr)(-conj(l)) b||
  double left = 0.0;        // ||c^* (H - Hr)(-conj(l))||
  double derivative = 0.0;  // |c^* (H' - Hr')(-conj(l)) b|
};

struct InterpolationDiagnostics {
  std::vector<InterpolationEntry> entries;
  bool reliable = true;              // false for near-defective A_r
  double eigenvector_condition = 0;  // ||X||_F ||X^{-1}||_F
};

// ---------------------------------------------------------------------------
// Lyapunov
// ---------------------------------------------------------------------------

/// Solves A X + X A^T + Q = 0 by Bartels-Stewart on the complex Schur form
/// A = Z T Z^*: the transformed equation T Y + Y T^* = -Z^* Q Z is solved
/// column by column from the last, each column a shifted triangular solve.
inline Matrix lyapunov_solve(const Matrix& A, const Matrix& Q) {
  const Index N = A.rows();
  if (A.cols() != N || Q.rows() != N || Q.cols() != N || N == 0) {
    throw Error(ErrorCode::invalid_dimension, "lyapunov_solve needs square A and Q of equal size");
  }
  if ((Q - Q.transpose()).norm() > 1e-12 * Q.norm()) {
    throw Error(ErrorCode::contract_violation, "Lyapunov right-hand side is not symmetric");
  }

  Eigen::ComplexSchur<CMatrix> schur(A.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "complex Schur decomposition failed");
  }
  const CMatrix& T = schur.matrixT();
  const CMatrix& Z = schur.matrixU();
  const double abscissa = T.diagonal().real().maxCoeff();
  if (!(abscissa < 0.0)) {
    throw Error(ErrorCode::instability,
                "Lyapunov solve requires Hurwitz A (max Re = " + std::to_string(abscissa) + ")",
                abscissa);
  }

  const CMatrix F = -(Z.adjoint() * Q.cast<Complex>() * Z);
  CMatrix Y = CMatrix::Zero(N, N);
  CVector rhs(N);
  for (Index j = N - 1; j >= 0; --j) {
    const Index tail = N - 1 - j;
    rhs = F.col(j);
    if (tail > 0) rhs.noalias() -= Y.rightCols(tail) * T.row(j).tail(tail).adjoint();
    const Complex shift = std::conj(T(j, j));
    // (T + conj(t_jj) I) y = rhs, upper triangular, column-oriented
    for (Index i = N - 1; i >= 0; --i) {
      const Complex yi = rhs(i) / (T(i, i) + shift);
      Y(i, j) = yi;
      if (i > 0) rhs.head(i) -= T.col(i).head(i) * yi;
    }
  }
  const Matrix X = (Z * Y * Z.adjoint()).real();
  return 0.5 * (X + X.transpose());
}

inline GramianPair gramians(const StateSpaceModel& model) {
  const Matrix& A = model.A();
  return {lyapunov_solve(A, model.B() * model.B().transpose()),
          lyapunov_solve(A.transpose(), model.C().transpose() * model.C())};
}

namespace detail {

// Eigenvalues of a symmetric PSD matrix, ascending, with roundoff negatives
// clipped to zero. Throws if the matrix is indefinite beyond `rel_tol`.
inline Eigen::SelfAdjointEigenSolver<Matrix> psd_eigen(const Matrix& M, double rel_tol,
                                                       const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, std::string("eigensolver failed on ") + what);
  }
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lowest = es.eigenvalues().minCoeff();
  if (lowest < -rel_tol * scale) {
    throw Error(ErrorCode::numerical_breakdown,
                std::string(what) + " is indefinite (min eigenvalue " + std::to_string(lowest) +
                    ")",
                lowest);
  }
  return es;
}

}  // namespace detail

/// Eigenvalues of a Gramian in nonincreasing order, negatives clipped to 0.
inline Vector gramian_spectrum(const Matrix& W) {
  const auto es = detail::psd_eigen(W, 1e-10, "Gramian");
  Vector ev = es.eigenvalues().cwiseMax(0.0).reverse();
  return ev;
}

/// sqrt(spec(Wc^{1/2} Wo Wc^{1/2})), nonincreasing.
inline HankelSpectrum hankel_singular_values(const GramianPair& g) {
  const auto ec = detail::psd_eigen(g.Wc, 1e-10, "controllability Gramian");
  detail::psd_eigen(g.Wo, 1e-10, "observability Gramian");
  const Vector root = ec.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix S = ec.eigenvectors() * root.asDiagonal() * ec.eigenvectors().transpose();
  Matrix M = S * g.Wo * S;
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "eigensolver failed on the Gramian product");
  }
  HankelSpectrum out;
  out.sigma = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
  return out;
}

// ---------------------------------------------------------------------------
// H2
// ---------------------------------------------------------------------------

/// ||Xi - D||_H2 = sqrt(trace(C Wc C^T)).
inline double h2_norm(const StateSpaceModel& model) {
  const Matrix Wc = lyapunov_solve(model.A(), model.B() * model.B().transpose());
  const double t = (model.C() * Wc * model.C().transpose()).trace();
  return std::sqrt(std::max(0.0, t));
}

/// H2 norm of Xi - Xi_r through the block error realization
/// (diag(A, A_r), [B; B_r], [C, -C_r], 0).
inline H2Error h2_error(const StateSpaceModel& full, const StateSpaceModel& reduced) {
  if (full.m() != reduced.m()) {
    throw Error(ErrorCode::invalid_dimension, "full and reduced models differ in channel count");
  }
  if (full.D() != reduced.D()) {
    throw Error(ErrorCode::contract_violation, "reduced feed-through must equal D");
  }
  const double abscissa = spectral_abscissa(reduced.A());
  if (!(abscissa < 0.0)) {
    throw Error(ErrorCode::instability, "reduced model is not Hurwitz", abscissa);
  }
  const Index nf = full.A().rows();
  const Index nr = reduced.A().rows();
  const Index io = full.B().cols();
  Matrix Ae = Matrix::Zero(nf + nr, nf + nr);
  Ae.topLeftCorner(nf, nf) = full.A();
  Ae.bottomRightCorner(nr, nr) = reduced.A();
  Matrix Be(nf + nr, io);
  Be << full.B(), reduced.B();
  Matrix Ce(io, nf + nr);
  Ce << full.C(), -reduced.C();
  const StateSpaceModel err(std::move(Ae), std::move(Be), std::move(Ce), Matrix::Zero(io, io));

  H2Error out;
  out.absolute = h2_norm(err);
  const double ref = h2_norm(full);
  out.relative = ref > 0.0 ? out.absolute / ref : 0.0;
  return out;
}

/// Same quantity for a reduced model obtained by projection onto V, computed
/// in the coordinates (x - V x_r, x_r):
///   A_e = [[A, A V - V A_r], [0, A_r]], B_e = [B - V B_r; B_r],
///   C_e = [C, C V - C_r].
/// For a projected model C V - C_r = 0, so the trace has no cancellation and
/// the error vanishes to roundoff when V is square.
inline H2Error h2_error(const StateSpaceModel& full, const StateSpaceModel& reduced,
                        const Matrix& V) {
  if (full.m() != reduced.m()) {
    throw Error(ErrorCode::invalid_dimension, "full and reduced models differ in channel count");
  }
  if (V.rows() != full.A().rows() || V.cols() != reduced.A().rows()) {
    throw Error(ErrorCode::invalid_dimension, "basis does not match the models");
  }
  if (full.D() != reduced.D()) {
    throw Error(ErrorCode::contract_violation, "reduced feed-through must equal D");
  }
  const double abscissa = spectral_abscissa(reduced.A());
  if (!(abscissa < 0.0)) {
    throw Error(ErrorCode::instability, "reduced model is not Hurwitz", abscissa);
  }
  const Index nf = full.A().rows();
  const Index nr = reduced.A().rows();
  const Index io = full.B().cols();
  Matrix Ae = Matrix::Zero(nf + nr, nf + nr);
  Ae.topLeftCorner(nf, nf) = full.A();
  Ae.topRightCorner(nf, nr) = full.A() * V - V * reduced.A();
  Ae.bottomRightCorner(nr, nr) = reduced.A();
  Matrix Be(nf + nr, io);
  Be << full.B() - V * reduced.B(), reduced.B();
  Matrix Ce(io, nf + nr);
  Ce << full.C(), full.C() * V - reduced.C();
  const StateSpaceModel err(std::move(Ae), std::move(Be), std::move(Ce), Matrix::Zero(io, io));

  H2Error out;
  out.absolute = h2_norm(err);
  const double ref = h2_norm(full);
  out.relative = ref > 0.0 ? out.absolute / ref : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Zeros and interpolation diagnostics
// ---------------------------------------------------------------------------

/// spec(A - B D^{-1} C), in canonical (Im, Re) order.
inline std::vector<Complex> transmission_zeros(const StateSpaceModel& model) {
  Eigen::FullPivLU<Matrix> lu(model.D());
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::contract_violation, "transmission zeros need an invertible D");
  }
  const Matrix Az = model.A() - model.B() * lu.solve(model.C());
  Eigen::EigenSolver<Matrix> es(Az, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "eigensolver failed on A - B D^{-1} C");
  }
  std::vector<Complex> z(es.eigenvalues().data(),
                         es.eigenvalues().data() + es.eigenvalues().size());
  std::stable_sort(z.begin(), z.end(), [](Complex a, Complex b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return z;
}

namespace detail {

struct ResolventValues {
  CMatrix H;      // C (sI - A)^{-1} B
  CMatrix Hdiff;  // -C (sI - A)^{-2} B
};

inline ResolventValues strictly_proper_values(const StateSpaceModel& model, Complex s) {
  CMatrix M = -model.A().cast<Complex>();
  M.diagonal().array() += s;
  Eigen::PartialPivLU<CMatrix> lu(M);
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > 1e-12 * model.A().norm())) {
    throw Error(ErrorCode::near_pole, "evaluation point too close to a pole", std::abs(s));
  }
  const CMatrix X1 = lu.solve(model.B().cast<Complex>());
  const CMatrix X2 = lu.solve(X1);
  const CMatrix Cc = model.C().cast<Complex>();
  return {Cc * X1, -(Cc * X2)};
}

}  // namespace detail

/// Residuals of the first-order H2 interpolation conditions at the mirrored
/// reduced poles. Diagnostic only.
inline InterpolationDiagnostics interpolation_residuals(const StateSpaceModel& full,
                                                        const StateSpaceModel& reduced) {
  if (full.m() != reduced.m()) {
    throw Error(ErrorCode::invalid_dimension, "full and reduced models differ in channel count");
  }
  Eigen::EigenSolver<Matrix> es(reduced.A(), true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "eigensolver failed on the reduced matrix");
  }
  const CMatrix X = es.eigenvectors();
  const CVector lambda = es.eigenvalues();
  Eigen::PartialPivLU<CMatrix> xlu(X);
  const CMatrix Xinv = xlu.inverse();

  InterpolationDiagnostics out;
  out.eigenvector_condition = X.norm() * Xinv.norm();
  const double spread = lambda.cwiseAbs().maxCoeff();
  double min_gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < lambda.size(); ++i) {
    for (Index j = i + 1; j < lambda.size(); ++j) {
      min_gap = std::min(min_gap, std::abs(lambda(i) - lambda(j)));
    }
  }
  out.reliable = std::isfinite(out.eigenvector_condition) && out.eigenvector_condition < 1e8 &&
                 min_gap > 1e-8 * std::max(1.0, spread);

  const CMatrix Cr = reduced.C().cast<Complex>();
  const CMatrix Br = reduced.B().cast<Complex>();
  for (Index i = 0; i < lambda.size(); ++i) {
    // residue C_r x_i w_i^* B_r, factored as c b^* by its best rank-1 part
    const CMatrix residue = (Cr * X.col(i)) * (Xinv.row(i) * Br);
    Eigen::JacobiSVD<CMatrix> svd(residue, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double s1 = svd.singularValues()(0);
    const CVector c = std::sqrt(s1) * svd.matrixU().col(0);
    const CVector b = std::sqrt(s1) * svd.matrixV().col(0);

    const Complex point = -std::conj(lambda(i));
    const auto hf = detail::strictly_proper_values(full, point);
    const auto hr = detail::strictly_proper_values(reduced, point);
    const CMatrix E = hf.H - hr.H;
    const CMatrix Ed = hf.Hdiff - hr.Hdiff;

    InterpolationEntry e;
    e.pole = lambda(i);
    e.right = (E * b).norm();
    e.left = (c.adjoint() * E).norm();
    e.derivative = std::abs((c.adjoint() * Ed * b)(0, 0));
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace qirka
