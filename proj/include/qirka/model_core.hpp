#pragma once

// Canonical symplectic structure, physically realizable (PR) state-space
// models in real quadrature form, PR residuals and transfer evaluation.

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qirka/errors.hpp"

namespace qirka {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Canonical structure J_k = I_k (x) [[0, 1], [-1, 0]]
// ---------------------------------------------------------------------------

struct CanonicalStructure {
  Index k = 0;  // number of mode pairs
  Matrix J;     // 2k x 2k
};

inline CanonicalStructure canonical_matrix(Index k) {
  if (k < 1) {
    throw Error(ErrorCode::invalid_dimension,
                "canonical_matrix requires k >= 1, got " + std::to_string(k));
  }
  CanonicalStructure out{k, Matrix::Zero(2 * k, 2 * k)};
  for (Index i = 0; i < k; ++i) {
    out.J(2 * i, 2 * i + 1) = 1.0;
    out.J(2 * i + 1, 2 * i) = -1.0;
  }
  return out;
}

// Structured products with J. These permute and negate entries only, so they
// are exact and cost O(size) instead of a dense multiply.

/// J * M
template <typename Derived>
typename Derived::PlainObject canonical_left(const Eigen::MatrixBase<Derived>& M) {
  typename Derived::PlainObject out(M.rows(), M.cols());
  for (Index i = 0; i < M.rows() / 2; ++i) {
    out.row(2 * i) = M.row(2 * i + 1);
    out.row(2 * i + 1) = -M.row(2 * i);
  }
  return out;
}

/// J^T * M
template <typename Derived>
typename Derived::PlainObject canonical_transpose_left(const Eigen::MatrixBase<Derived>& M) {
  typename Derived::PlainObject out(M.rows(), M.cols());
  for (Index i = 0; i < M.rows() / 2; ++i) {
    out.row(2 * i) = -M.row(2 * i + 1);
    out.row(2 * i + 1) = M.row(2 * i);
  }
  return out;
}

/// M * J
template <typename Derived>
typename Derived::PlainObject canonical_right(const Eigen::MatrixBase<Derived>& M) {
  typename Derived::PlainObject out(M.rows(), M.cols());
  for (Index i = 0; i < M.cols() / 2; ++i) {
    out.col(2 * i) = -M.col(2 * i + 1);
    out.col(2 * i + 1) = M.col(2 * i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Real symmetric Hamiltonian matrix R of H(x) = x^T R x / 2.
class HamiltonianMatrix {
 public:
  explicit HamiltonianMatrix(Matrix R) : R_(std::move(R)) {
    if (R_.rows() != R_.cols() || R_.rows() == 0 || R_.rows() % 2 != 0) {
      throw Error(ErrorCode::invalid_dimension, "Hamiltonian matrix must be square of even size");
    }
    if (R_ != R_.transpose()) {
      throw Error(ErrorCode::contract_violation, "Hamiltonian matrix is not symmetric",
                  (R_ - R_.transpose()).norm());
    }
  }

  const Matrix& matrix() const noexcept { return R_; }
  Index modes() const noexcept { return R_.rows() / 2; }

 private:
  Matrix R_;
};

/// Square linear quantum system (A, B, C, D) with 2n states and 2m field
/// quadratures on each side. Immutable after construction.
class StateSpaceModel {
 public:
  StateSpaceModel(Matrix A, Matrix B, Matrix C, Matrix D)
      : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)) {
    const Index ns = A_.rows();
    const Index nc = B_.cols();
    std::ostringstream msg;
    if (ns == 0 || A_.cols() != ns || ns % 2 != 0) {
      msg << "A must be square of even size, got " << A_.rows() << "x" << A_.cols();
    } else if (B_.rows() != ns || nc == 0 || nc % 2 != 0) {
      msg << "B must be " << ns << "x(2m), got " << B_.rows() << "x" << B_.cols();
    } else if (C_.rows() != nc || C_.cols() != ns) {
      msg << "C must be " << nc << "x" << ns << ", got " << C_.rows() << "x" << C_.cols();
    } else if (D_.rows() != nc || D_.cols() != nc) {
      msg << "D must be " << nc << "x" << nc << ", got " << D_.rows() << "x" << D_.cols();
    }
    if (!msg.str().empty()) throw Error(ErrorCode::invalid_dimension, msg.str());
  }

  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  const Matrix& C() const noexcept { return C_; }
  const Matrix& D() const noexcept { return D_; }

  /// Mode count n (state dimension 2n).
  Index n() const noexcept { return A_.rows() / 2; }
  /// Channel mode count m (input/output dimension 2m).
  Index m() const noexcept { return B_.cols() / 2; }

 private:
  Matrix A_, B_, C_, D_;
};

/// max Re(spec(A)) from a full eigensolve.
inline double spectral_abscissa(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "eigensolver failed in spectral_abscissa");
  }
  return es.eigenvalues().real().maxCoeff();
}

inline bool is_hurwitz(const StateSpaceModel& model) { return spectral_abscissa(model.A()) < 0.0; }

// ---------------------------------------------------------------------------
// PR residuals and template
// ---------------------------------------------------------------------------

struct PRResiduals {
  Matrix r1, r2, r3;
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  double r3_norm = 0.0;
};

/// R1 = A J + J A^T + B J_m B^T,  R2 = J C^T + B J_m D^T,  R3 = D J_m D^T - J_m.
inline PRResiduals pr_residuals(const StateSpaceModel& model) {
  const Matrix& A = model.A();
  const Matrix& B = model.B();
  const Matrix& C = model.C();
  const Matrix& D = model.D();
  const Matrix BJm = canonical_right(B);

  PRResiduals res;
  res.r1 = canonical_right(A) + canonical_left(Matrix(A.transpose())) + BJm * B.transpose();
  res.r2 = canonical_left(Matrix(C.transpose())) + BJm * D.transpose();
  res.r3 = canonical_right(D) * D.transpose() - canonical_matrix(model.m()).J;
  res.r1_norm = res.r1.norm();
  res.r2_norm = res.r2.norm();
  res.r3_norm = res.r3.norm();
  return res;
}

/// A = J R + B J_m B^T J / 2,  C = J_m B^T J,  D = I. PR by construction.
inline StateSpaceModel pr_from_template(const HamiltonianMatrix& R, const Matrix& B) {
  const Index ns = R.matrix().rows();
  if (B.rows() != ns || B.cols() == 0 || B.cols() % 2 != 0) {
    throw Error(ErrorCode::invalid_dimension, "coupling matrix B must be 2n x 2m");
  }
  const Matrix BJm = canonical_right(B);
  Matrix A = canonical_left(R.matrix()) + 0.5 * canonical_right(Matrix(BJm * B.transpose()));
  Matrix C = canonical_right(canonical_left(Matrix(B.transpose())));
  Matrix D = Matrix::Identity(B.cols(), B.cols());
  return StateSpaceModel(std::move(A), B, std::move(C), std::move(D));
}

// ---------------------------------------------------------------------------
// Shifted solves and transfer evaluation
// ---------------------------------------------------------------------------

/// Solves (A - s I) X = rhs by LU with partial pivoting. A pivot of magnitude
/// <= rel_tol * ||A||_F is reported as singular with the given error code.
inline CMatrix shifted_solve(const Matrix& A, Complex s, const CMatrix& rhs, double rel_tol,
                             ErrorCode on_singular) {
  const double scale = A.norm();
  auto singular = [&](double pivot) {
    std::ostringstream msg;
    msg << "shifted system singular at s = " << s.real() << (s.imag() < 0 ? "" : "+") << s.imag()
        << "i (pivot " << pivot << ")";
    throw Error(on_singular, msg.str(), std::abs(s));
  };
  if (s.imag() == 0.0) {
    Matrix M = A;
    M.diagonal().array() -= s.real();
    Eigen::PartialPivLU<Matrix> lu(M);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > rel_tol * scale)) singular(pivot);
    CMatrix X(rhs.rows(), rhs.cols());
    X.real() = lu.solve(Matrix(rhs.real()));
    X.imag() = lu.solve(Matrix(rhs.imag()));
    return X;
  }
  CMatrix M = A.cast<Complex>();
  M.diagonal().array() -= s;
  Eigen::PartialPivLU<CMatrix> lu(M);
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > rel_tol * scale)) singular(pivot);
  return lu.solve(rhs);
}

/// Xi(s) = C (sI - A)^{-1} B + D, one factorization and 2m right-hand sides.
inline CMatrix transfer_eval(const StateSpaceModel& model, Complex s) {
  // (sI - A)^{-1} B = -(A - sI)^{-1} B
  const CMatrix X = shifted_solve(model.A(), s, model.B().cast<Complex>(), 1e-12,
                                  ErrorCode::near_pole);
  return model.D().cast<Complex>() - model.C().cast<Complex>() * X;
}

}  // namespace qirka
