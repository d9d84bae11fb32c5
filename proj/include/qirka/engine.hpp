#pragma once

// Q-IRKA: the structure-preserving IRKA fixed-point iteration.
//
// Each iteration builds a real tangential rational Krylov pool from shifted
// solves, extracts a symplectic basis, projects, and mirrors the reduced
// poles into the next shift set. The reduced matrices are only ever formed
// by projection, so PR holds at every iterate up to roundoff.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qirka/model_core.hpp"
#include "qirka/symplectic_projection.hpp"

namespace qirka {

// ---------------------------------------------------------------------------
// Shift sets
// ---------------------------------------------------------------------------

/// Increasing imaginary part, ties broken by increasing real part.
inline bool canonical_less(Complex a, Complex b) {
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

struct ShiftSet {
  std::vector<Complex> sigma;

  static ShiftSet canonical(std::vector<Complex> values) {
    std::stable_sort(values.begin(), values.end(), canonical_less);
    return ShiftSet{std::move(values)};
  }

  Index size() const noexcept { return static_cast<Index>(sigma.size()); }
  CVector as_vector() const {
    return Eigen::Map<const CVector>(sigma.data(), static_cast<Index>(sigma.size()));
  }
};

struct TangentialPool {
  Index m = 0;
  std::vector<Index> index;  // zero-based canonical basis index per direction
  Matrix directions;         // 2m x L, column l = e_{index[l]}
};

enum class InitStrategy { log_spaced_real, user_provided };

struct QirkaConfig {
  Index r = 1;
  std::optional<Index> L;  // directions per shift; defaults to r
  double epsilon = 1e-6;
  int max_iter = 100;
  double tau = kDefaultGramSchmidtTol;
  InitStrategy init = InitStrategy::log_spaced_real;
  std::vector<Complex> user_shifts;

  Index per_shift() const { return L.value_or(r); }

  void validate() const {
    if (r < 1) throw Error(ErrorCode::config_error, "r must be >= 1");
    if (per_shift() < 1) throw Error(ErrorCode::config_error, "L must be >= 1");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::config_error, "epsilon must be > 0");
    if (max_iter < 1) throw Error(ErrorCode::config_error, "max_iter must be >= 1");
    if (!(tau > 0.0)) throw Error(ErrorCode::config_error, "tau must be > 0");
    if (init == InitStrategy::user_provided && static_cast<Index>(user_shifts.size()) != r) {
      throw Error(ErrorCode::config_error, "user-provided shifts must number exactly r");
    }
  }
};

struct IterationRecord {
  int iteration = 0;
  double relchg = 0.0;
  StructuralDiagnostics defects;
  std::vector<Complex> poles;  // spec(A_r), 2r values
  ShiftSet shifts;             // shifts used to build this iterate
  ShiftSet next_shifts;
  double seconds = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

struct QirkaResult {
  StateSpaceModel reduced;
  ProjectionPair pair;
  IterationTrace trace;
  bool converged = false;
  int best_iteration = 0;  // index into trace.records of the returned iterate
  double loop_seconds = 0.0;
  std::optional<StateSpaceModel> reduced_full_port;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------

/// Direction l (zero-based) is e_{l mod 2m}.
inline TangentialPool tangential_directions(Index m, Index L) {
  if (m < 1 || L < 0) throw Error(ErrorCode::invalid_dimension, "need m >= 1 and L >= 0");
  TangentialPool pool;
  pool.m = m;
  pool.directions = Matrix::Zero(2 * m, L);
  for (Index l = 0; l < L; ++l) {
    const Index nu = l % (2 * m);
    pool.index.push_back(nu);
    pool.directions(nu, l) = 1.0;
  }
  return pool;
}

/// Real candidate pool: per shift, per direction, (A - s I)^{-1} B t, or its
/// real and imaginary parts when s is not real.
inline CandidatePool candidate_pool(const StateSpaceModel& model, const ShiftSet& shifts,
                                    const TangentialPool& dirs) {
  if (dirs.directions.rows() != model.B().cols()) {
    throw Error(ErrorCode::invalid_dimension, "tangential directions must have length 2m");
  }
  const Index L = dirs.directions.cols();
  Index count = 0;
  for (const Complex& s : shifts.sigma) count += (s.imag() == 0.0 ? L : 2 * L);

  CandidatePool pool;
  pool.columns.resize(model.A().rows(), count);
  pool.tags.reserve(static_cast<std::size_t>(count));
  if (L == 0) return pool;

  const CMatrix rhs = (model.B() * dirs.directions).cast<Complex>();
  Index col = 0;
  for (Index i = 0; i < shifts.size(); ++i) {
    const Complex s = shifts.sigma[static_cast<std::size_t>(i)];
    CMatrix Z;
    try {
      Z = shifted_solve(model.A(), s, rhs, 1e-10, ErrorCode::shift_collision);
    } catch (const Error& e) {
      throw Error(ErrorCode::shift_collision,
                  std::string(e.what()) + " (shift index " + std::to_string(i) + ")",
                  static_cast<double>(i));
    }
    for (Index l = 0; l < L; ++l) {
      pool.columns.col(col++) = Z.col(l).real();
      pool.tags.push_back({i, l, false});
      if (s.imag() != 0.0) {
        pool.columns.col(col++) = Z.col(l).imag();
        pool.tags.push_back({i, l, true});
      }
    }
  }
  return pool;
}

/// One representative per conjugate pair (Im >= 0), canonical order, first r,
/// mirrored to sigma = -conj(lambda).
inline ShiftSet select_shifts(const Matrix& Ar) {
  if (Ar.rows() != Ar.cols() || Ar.rows() == 0 || Ar.rows() % 2 != 0) {
    throw Error(ErrorCode::invalid_dimension, "reduced matrix must be square of even size");
  }
  const Index r = Ar.rows() / 2;
  Eigen::EigenSolver<Matrix> es(Ar, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "eigensolver failed on the reduced matrix");
  }
  std::vector<Complex> upper;
  std::vector<Complex> reals;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (lam.imag() >= 0.0) upper.push_back(lam);
    if (lam.imag() == 0.0) reals.push_back(lam);
  }
  std::stable_sort(upper.begin(), upper.end(), canonical_less);
  if (static_cast<Index>(upper.size()) > r) upper.resize(static_cast<std::size_t>(r));
  if (static_cast<Index>(upper.size()) < r) {
    // Only reachable with defective pair counting: pad with the real poles of
    // largest magnitude, cycling if needed.
    std::stable_sort(reals.begin(), reals.end(),
                     [](Complex a, Complex b) { return std::abs(a.real()) > std::abs(b.real()); });
    if (reals.empty()) reals = upper;
    if (reals.empty()) {
      throw Error(ErrorCode::numerical_breakdown, "no eigenvalues available for shift selection");
    }
    for (std::size_t k = 0; static_cast<Index>(upper.size()) < r; ++k) {
      upper.push_back(reals[k % reals.size()]);
    }
  }
  std::vector<Complex> sigma;
  sigma.reserve(upper.size());
  for (const Complex& lam : upper) sigma.push_back(-std::conj(lam));
  return ShiftSet::canonical(std::move(sigma));
}

/// ||new - old||_2 / max(1, ||old||_2)
inline double relative_change(const ShiftSet& next, const ShiftSet& old) {
  if (next.size() != old.size()) {
    throw Error(ErrorCode::contract_violation, "shift sets differ in length");
  }
  const CVector a = next.as_vector();
  const CVector b = old.as_vector();
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// r positive reals, logarithmically spaced in [lo, hi].
inline ShiftSet log_spaced_shifts(double lo, double hi, Index r) {
  if (!(lo > 0.0) || !(hi > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::config_error, "log-spaced shift bounds must satisfy 0 < lo <= hi");
  }
  if (r < 1) throw Error(ErrorCode::config_error, "r must be >= 1");
  std::vector<Complex> s;
  if (r == 1) {
    s.emplace_back(std::sqrt(lo * hi), 0.0);
  } else {
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (Index i = 0; i < r; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(r - 1);
      s.emplace_back(std::pow(10.0, a + t * (b - a)), 0.0);
    }
  }
  return ShiftSet::canonical(std::move(s));
}

/// Log-spaced strategy: [max(1e-3, 0.01 g), 10 g] with g the max row-sum
/// norm of A. The user-provided strategy only reorders.
inline ShiftSet initial_shifts(const StateSpaceModel& model, Index r, InitStrategy strategy,
                               const std::vector<Complex>& user = {}) {
  if (strategy == InitStrategy::user_provided) {
    if (static_cast<Index>(user.size()) != r) {
      throw Error(ErrorCode::config_error, "user-provided shifts must number exactly r");
    }
    return ShiftSet::canonical(user);
  }
  const double g = model.A().cwiseAbs().rowwise().sum().maxCoeff();
  return log_spaced_shifts(std::max(1e-3, 0.01 * g), 10.0 * g, r);
}

namespace detail {

inline std::vector<Complex> eigenvalues_of(const Matrix& M) {
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_breakdown, "eigensolver failed");
  }
  std::vector<Complex> out(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  std::stable_sort(out.begin(), out.end(), canonical_less);
  return out;
}

struct Iterate {
  StateSpaceModel reduced;
  ProjectionPair pair;
  std::optional<StateSpaceModel> full_port;
};

}  // namespace detail

/// Runs Q-IRKA on `model`. When `full_port` is given (a PR dilation sharing
/// the state matrix A), the same projection is applied to it and the PR
/// diagnostics in the trace are taken from the reduced full-port model.
inline QirkaResult run(const StateSpaceModel& model, const QirkaConfig& config,
                       const StateSpaceModel* full_port = nullptr) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  const Index n = model.n();
  const Index r = config.r;
  if (r > n) throw Error(ErrorCode::config_error, "r must not exceed n");
  if (full_port && full_port->A() != model.A()) {
    throw Error(ErrorCode::contract_violation, "full-port model must share the state matrix A");
  }

  std::vector<std::string> warnings;
  {
    const PRResiduals pr = pr_residuals(full_port ? *full_port : model);
    const double worst = std::max({pr.r1_norm, pr.r2_norm, pr.r3_norm});
    if (worst > 1e-8) {
      warnings.push_back("input model is not PR (largest residual " + std::to_string(worst) + ")");
    }
  }
  const double abscissa = spectral_abscissa(model.A());
  if (!(abscissa < 0.0)) {
    throw Error(ErrorCode::instability, "state matrix is not Hurwitz", abscissa);
  }

  const CanonicalStructure Jn = canonical_matrix(n);
  const TangentialPool dirs = tangential_directions(model.m(), config.per_shift());
  ShiftSet sigma = initial_shifts(model, r, config.init, config.user_shifts);

  QirkaResult result{model, ProjectionPair{}, IterationTrace{}};
  std::optional<detail::Iterate> best;
  double best_relchg = std::numeric_limits<double>::infinity();
  const auto loop_start = Clock::now();

  for (int k = 0; k < config.max_iter; ++k) {
    const auto t0 = Clock::now();

    CandidatePool pool;
    try {
      pool = candidate_pool(model, sigma, dirs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::shift_collision) throw;
      const auto idx = static_cast<std::size_t>(e.value());
      Complex& s = sigma.sigma[idx];
      s += Complex(1e-6 * (1.0 + std::abs(s)), 0.0);
      warnings.push_back("iteration " + std::to_string(k) + ": perturbed colliding shift " +
                         std::to_string(idx));
      pool = candidate_pool(model, sigma, dirs);  // second collision is fatal
    }

    Matrix W;
    try {
      W = symplectic_gram_schmidt(pool, Jn, r, config.tau);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_pool) throw;
      throw Error(e.code(), std::string(e.what()) + "; increase L (directions per shift)",
                  e.value());
    }
    const PairingMatrix S = pairing(W, Jn);
    const SymplecticNormalization normalized = symplectic_normalize(W, S);
    ProjectionPair pair = make_projection_pair(normalized.V);
    StateSpaceModel reduced = project(model, pair);
    std::optional<StateSpaceModel> reduced_fp;
    if (full_port) reduced_fp = project(*full_port, pair);

    IterationRecord rec;
    rec.iteration = k;
    rec.defects = structural_diagnostics(pair, reduced_fp ? *reduced_fp : reduced);
    rec.poles = detail::eigenvalues_of(reduced.A());
    rec.shifts = sigma;

    ShiftSet next = select_shifts(reduced.A());
    bool reflected = false;
    for (Complex& s : next.sigma) {
      if (s.real() < 0.0) {
        s = Complex(-s.real(), s.imag());
        reflected = true;
      }
    }
    if (reflected) {
      next = ShiftSet::canonical(std::move(next.sigma));
      warnings.push_back("iteration " + std::to_string(k) +
                         ": unstable reduced poles, shifts reflected to the right half-plane");
    }
    rec.next_shifts = next;
    rec.relchg = relative_change(next, sigma);
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    const bool done = rec.relchg < config.epsilon;
    if (rec.relchg < best_relchg || done) {
      best_relchg = rec.relchg;
      best = detail::Iterate{reduced, pair, reduced_fp};
      result.best_iteration = k;
    }
    result.trace.records.push_back(std::move(rec));
    sigma = std::move(next);
    if (done) {
      result.converged = true;
      break;
    }
  }

  result.loop_seconds = std::chrono::duration<double>(Clock::now() - loop_start).count();
  result.reduced = std::move(best->reduced);
  result.pair = std::move(best->pair);
  result.reduced_full_port = std::move(best->full_port);
  result.warnings = std::move(warnings);
  return result;
}

}  // namespace qirka
