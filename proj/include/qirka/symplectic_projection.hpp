#pragma once

// Symplectic trial/test bases and PR-preserving Petrov-Galerkin projection.
//
// A trial basis V (2n x 2r) with V^T J_n V = J_r and the test basis
// U = J_r^{-1} V^T J_n give U V = I and V J_r = J_n^T U^T. Projecting a PR
// model with (U, V) yields a PR reduced model; everything here exists to
// build such a V from an arbitrary real candidate pool.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qirka/model_core.hpp"

namespace qirka {

struct ColumnTag {
  Index shift = 0;      // index of the interpolation point
  Index direction = 0;  // index of the tangential direction
  bool imaginary = false;
};

/// Ordered real candidate vectors, shift-major, direction-minor,
/// real part before imaginary part.
struct CandidatePool {
  Matrix columns;  // 2n x M
  std::vector<ColumnTag> tags;

  Index size() const noexcept { return columns.cols(); }
};

struct PairingMatrix {
  Matrix S;      // W^T J_n W, antisymmetrized
  Matrix Q;      // orthogonal, Q^T S Q block diagonal
  Vector alpha;  // positive block magnitudes after sign fixing
};

struct SymplecticNormalization {
  Matrix V;  // W T
  Matrix T;
};

struct ProjectionPair {
  Matrix V;  // 2n x 2r
  Matrix U;  // 2r x 2n
  Index r = 0;
  double symp_defect = 0.0;      // ||V^T J_n V - J_r||_F
  double left_defect = 0.0;      // ||U V - I||_F
  double identity_defect = 0.0;  // ||V J_r - J_n U^T||_F
};

struct StructuralDiagnostics {
  double symp = 0.0;
  double left = 0.0;
  double identity = 0.0;
  double pr1 = 0.0;
  double pr2 = 0.0;
  double pr3 = 0.0;
};

inline constexpr double kDefaultGramSchmidtTol = 1e-12;

// ---------------------------------------------------------------------------

/// Incremental symplectic Gram-Schmidt. Candidates are visited in pool order;
/// each J_n-orthogonal residual above `tau` is normalized and appended with
/// its conjugate J_n^T v, followed by one re-orthogonalization pass. Stops at
/// 2r columns.
inline Matrix symplectic_gram_schmidt(const CandidatePool& pool, const CanonicalStructure& Jn,
                                      Index r, double tau = kDefaultGramSchmidtTol) {
  const Index dim = 2 * Jn.k;
  if (pool.columns.rows() != dim && pool.size() > 0) {
    throw Error(ErrorCode::invalid_dimension, "pool vectors must have length 2n");
  }
  if (r < 1 || r > Jn.k) {
    throw Error(ErrorCode::invalid_dimension, "reduced order r must satisfy 1 <= r <= n");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::contract_violation, "tau must be positive");

  const Index target = 2 * r;
  Matrix W(dim, target);
  Matrix JW(dim, target);
  Index accepted = 0;
  Eigen::PartialPivLU<Matrix> pairing_lu;

  // w - W S^{-1} W^T J w over the accepted columns.
  auto residual = [&](const Vector& w) -> Vector {
    if (accepted == 0) return w;
    const Vector Jw = canonical_left(w);
    const Vector coeff = pairing_lu.solve(W.leftCols(accepted).transpose() * Jw);
    return w - W.leftCols(accepted) * coeff;
  };

  for (Index j = 0; j < pool.size() && accepted < target; ++j) {
    Vector w_hat = residual(pool.columns.col(j));
    const double nrm = w_hat.norm();
    if (!(nrm > tau)) continue;
    Vector v = w_hat / nrm;
    // re-orthogonalization pass
    v = residual(v);
    v.normalize();
    const Vector u = canonical_transpose_left(v);

    W.col(accepted) = v;
    W.col(accepted + 1) = u;
    JW.col(accepted) = canonical_left(v);
    JW.col(accepted + 1) = v;  // J J^T v
    accepted += 2;

    const Matrix S = W.leftCols(accepted).transpose() * JW.leftCols(accepted);
    pairing_lu.compute(S);
    const double pivot = pairing_lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > 1e-10)) {
      throw Error(ErrorCode::degenerate_pairing,
                  "pairing matrix singular during Gram-Schmidt (pivot " + std::to_string(pivot) +
                      ")",
                  pivot);
    }
  }

  if (accepted < target) {
    throw Error(ErrorCode::insufficient_pool,
                "candidate pool furnished " + std::to_string(accepted) + " of " +
                    std::to_string(target) + " columns",
                static_cast<double>(accepted));
  }
  return W;
}

/// S = W^T J_n W (antisymmetrized) and its skew real Schur form
/// Q^T S Q = blockdiag([[0, a_j], [-a_j, 0]]) with every a_j > 0.
inline PairingMatrix pairing(const Matrix& W, const CanonicalStructure& Jn) {
  if (W.rows() != 2 * Jn.k || W.cols() == 0 || W.cols() % 2 != 0) {
    throw Error(ErrorCode::invalid_dimension, "W must be 2n x 2r");
  }
  PairingMatrix out;
  const Matrix raw = W.transpose() * canonical_left(W);
  out.S = 0.5 * (raw - raw.transpose());

  Eigen::RealSchur<Matrix> schur(out.S);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "real Schur decomposition of pairing failed");
  }
  out.Q = schur.matrixU();
  const Matrix& T = schur.matrixT();
  const Index r = W.cols() / 2;
  out.alpha.resize(r);
  for (Index j = 0; j < r; ++j) {
    double a = 0.5 * (T(2 * j, 2 * j + 1) - T(2 * j + 1, 2 * j));
    if (a < 0.0) {
      // Swapping the two Schur vectors of a block flips the sign of its entry.
      out.Q.col(2 * j).swap(out.Q.col(2 * j + 1));
      a = -a;
    }
    out.alpha(j) = a;
  }
  return out;
}

/// V = W T with T = Q blockdiag(a_j^{-1/2} I_2), so that V^T J_n V = J_r.
inline SymplecticNormalization symplectic_normalize(const Matrix& W, const PairingMatrix& S) {
  if (S.S.rows() != W.cols() || S.alpha.size() * 2 != W.cols()) {
    throw Error(ErrorCode::invalid_dimension, "pairing does not match W");
  }
  const double amax = S.alpha.maxCoeff();
  const double amin = S.alpha.minCoeff();
  if (!(amax > 0.0) || !(amin > 1e-10 * amax)) {
    throw Error(ErrorCode::degenerate_pairing,
                "pairing matrix rank deficient (smallest alpha " + std::to_string(amin) + ")",
                amin);
  }
  Vector scale(W.cols());
  for (Index j = 0; j < S.alpha.size(); ++j) {
    scale(2 * j) = scale(2 * j + 1) = 1.0 / std::sqrt(S.alpha(j));
  }
  SymplecticNormalization out;
  out.T = S.Q * scale.asDiagonal();
  out.V = W * out.T;
  return out;
}

namespace detail {

// J_r^T V^T J_n without a precondition check.
inline Matrix test_basis_unchecked(const Matrix& V) {
  return canonical_transpose_left(Matrix(canonical_transpose_left(V).transpose()));
}

}  // namespace detail

/// U = J_r^{-1} V^T J_n, with J_r^{-1} = J_r^T applied exactly.
inline Matrix test_basis(const Matrix& V, const CanonicalStructure& Jn,
                         const CanonicalStructure& Jr) {
  if (V.rows() != 2 * Jn.k || V.cols() != 2 * Jr.k) {
    throw Error(ErrorCode::invalid_dimension, "V must be 2n x 2r");
  }
  const double defect = (V.transpose() * canonical_left(V) - Jr.J).norm();
  if (!(defect <= 1e-8)) {
    throw Error(ErrorCode::non_symplectic_basis,
                "trial basis violates V^T J V = J (defect " + std::to_string(defect) + ")",
                defect);
  }
  return detail::test_basis_unchecked(V);
}

/// Builds U from V and records the three structural defects. Does not
/// reject a defective V; see project() for the checked path.
inline ProjectionPair make_projection_pair(const Matrix& V) {
  if (V.rows() == 0 || V.rows() % 2 != 0 || V.cols() == 0 || V.cols() % 2 != 0 ||
      V.cols() > V.rows()) {
    throw Error(ErrorCode::invalid_dimension, "V must be 2n x 2r with r <= n");
  }
  ProjectionPair p;
  p.V = V;
  p.r = V.cols() / 2;
  p.U = detail::test_basis_unchecked(V);
  const Index k = 2 * p.r;
  p.symp_defect = (V.transpose() * canonical_left(V) - canonical_matrix(p.r).J).norm();
  p.left_defect = (p.U * V - Matrix::Identity(k, k)).norm();
  // U^T = J_n^T V J_r, so V J_r = J_n U^T (the J_n^T form is off by a sign).
  p.identity_defect = (canonical_right(V) - canonical_left(Matrix(p.U.transpose()))).norm();
  return p;
}

/// A_r = U A V, B_r = U B, C_r = C V, D_r = D.
inline StateSpaceModel project(const StateSpaceModel& model, const ProjectionPair& pair) {
  if (pair.V.rows() != model.A().rows()) {
    throw Error(ErrorCode::invalid_dimension, "projection basis does not match the model");
  }
  if (!(pair.symp_defect <= 1e-8) || !(pair.left_defect <= 1e-8)) {
    throw Error(ErrorCode::non_symplectic_basis, "projection pair defects exceed 1e-8",
                std::max(pair.symp_defect, pair.left_defect));
  }
  return StateSpaceModel(pair.U * model.A() * pair.V, pair.U * model.B(), model.C() * pair.V,
                         model.D());
}

inline StructuralDiagnostics structural_diagnostics(const ProjectionPair& pair,
                                                    const StateSpaceModel& reduced) {
  const PRResiduals res = pr_residuals(reduced);
  return {pair.symp_defect, pair.left_defect, pair.identity_defect,
          res.r1_norm,      res.r2_norm,      res.r3_norm};
}

}  // namespace qirka
