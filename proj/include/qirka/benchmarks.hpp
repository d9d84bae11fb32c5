#pragma once

// Deterministic benchmark generators: the low-channel port-Hamiltonian
// oscillator chain, the bosonic Kitaev chain (BKC) and the single-channel
// bus model. Chain generators return the full-port PR dilation (external
// channels plus one damping channel per site) and the external-port model;
// both share A.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qirka/model_core.hpp"

namespace qirka {

enum class Variant { homogeneous, heterogeneous };

inline std::string to_string(Variant v) {
  return v == Variant::homogeneous ? "homogeneous" : "heterogeneous";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "homogeneous" || s == "hom") return Variant::homogeneous;
  if (s == "heterogeneous" || s == "het") return Variant::heterogeneous;
  throw Error(ErrorCode::config_error, "unknown variant '" + s + "'");
}

struct BenchmarkPair {
  StateSpaceModel full_port;
  StateSpaceModel external;
};

/// n x m attachment: channel 1 at site 1, channel 2 at site n, channels
/// 3..m at sites round(j n / (m - 1)), j = 1..m-2 (one-based sites).
inline Matrix endpoint_attachment(Index n, Index m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::config_error, "need n >= 1 and m >= 1");
  if (m > n) throw Error(ErrorCode::config_error, "m must not exceed n", static_cast<double>(m));
  Matrix S = Matrix::Zero(n, m);
  S(0, 0) = 1.0;
  if (m > 1) S(n - 1, 1) = 1.0;
  for (Index j = 1; j + 1 < m; ++j) {
    const auto site = static_cast<Index>(
        std::lround(static_cast<double>(j * n) / static_cast<double>(m - 1)));
    S(site - 1, j + 1) = 1.0;
  }
  return S;
}

// ---------------------------------------------------------------------------
// Oscillator chain
// ---------------------------------------------------------------------------

struct ChainConfig {
  Index n = 0;
  Index m = 0;
  Variant variant = Variant::homogeneous;
  Vector kappa_ch;    // m
  Vector kappa_site;  // n
  Matrix attachment;  // n x m
  Vector omega;       // n on-site frequencies
  Matrix coupling;    // 2 x 2 block below the diagonal of R (transpose above)

  /// Defaults calibrated to margins -1e-1 (homogeneous) and -1e-2
  /// (heterogeneous).
  static ChainConfig defaults(Index n, Index m, Variant variant) {
    ChainConfig c;
    c.n = n;
    c.m = m;
    c.variant = variant;
    c.attachment = endpoint_attachment(n, m);
    c.kappa_ch = Vector::Ones(m);
    c.omega.resize(n);
    c.kappa_site.resize(n);
    for (Index j = 1; j <= n; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(n);
      if (variant == Variant::homogeneous) {
        c.omega(j - 1) = 1.0;
        c.kappa_site(j - 1) = 0.2;
      } else {
        c.omega(j - 1) = 1.0 + 0.5 * t;
        c.kappa_site(j - 1) = 0.02 * (1.0 + t);
      }
    }
    c.coupling = 0.05 * Matrix::Identity(2, 2);
    return c;
  }
};

namespace detail {

inline void require_positive(const Vector& v, Index expected, const char* name) {
  if (v.size() != expected) {
    throw Error(ErrorCode::config_error, std::string(name) + " must have " +
                                             std::to_string(expected) + " entries");
  }
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0)) {
      throw Error(ErrorCode::config_error,
                  std::string(name) + "[" + std::to_string(i) + "] must be positive", v(i));
    }
  }
}

/// Block tridiagonal R with diagonal blocks omega_j I_2, R1 below, R1^T above.
inline Matrix chain_hamiltonian(const Vector& omega, const Matrix& R1) {
  const Index n = omega.size();
  Matrix R = Matrix::Zero(2 * n, 2 * n);
  for (Index j = 0; j < n; ++j) {
    R.block(2 * j, 2 * j, 2, 2) = omega(j) * Matrix::Identity(2, 2);
    if (j + 1 < n) {
      R.block(2 * j + 2, 2 * j, 2, 2) = R1;
      R.block(2 * j, 2 * j + 2, 2, 2) = R1.transpose();
    }
  }
  return R;
}

/// Full-port dilation B_tot = [(S diag sqrt(k_ch)) (x) I2, diag sqrt(k_site) (x) I2]
/// and the external model on the first 2m channels.
inline BenchmarkPair dilate(const Matrix& R, const Matrix& attachment, const Vector& kappa_ch,
                            const Vector& kappa_site) {
  const Index n = attachment.rows();
  const Index m = attachment.cols();
  Matrix B = Matrix::Zero(2 * n, 2 * (m + n));
  for (Index j = 0; j < n; ++j) {
    for (Index l = 0; l < m; ++l) {
      const double s = attachment(j, l) * std::sqrt(kappa_ch(l));
      B(2 * j, 2 * l) = s;
      B(2 * j + 1, 2 * l + 1) = s;
    }
    const double d = std::sqrt(kappa_site(j));
    B(2 * j, 2 * (m + j)) = d;
    B(2 * j + 1, 2 * (m + j) + 1) = d;
  }
  StateSpaceModel full = pr_from_template(HamiltonianMatrix(R), B);

  const double margin = spectral_abscissa(full.A());
  if (!(margin < 0.0)) {
    throw Error(ErrorCode::instability,
                "benchmark config rejected: A is not Hurwitz (max Re = " +
                    std::to_string(margin) + ")",
                margin);
  }
  StateSpaceModel external(full.A(), full.B().leftCols(2 * m), full.C().topRows(2 * m),
                           Matrix::Identity(2 * m, 2 * m));
  return {std::move(full), std::move(external)};
}

}  // namespace detail

inline BenchmarkPair build_chain(const ChainConfig& c) {
  if (c.n < 1 || c.m < 1) throw Error(ErrorCode::config_error, "need n >= 1 and m >= 1");
  if (c.m > c.n) throw Error(ErrorCode::config_error, "m must not exceed n");
  detail::require_positive(c.kappa_ch, c.m, "kappa_ch");
  detail::require_positive(c.kappa_site, c.n, "kappa_site");
  if (c.omega.size() != c.n) throw Error(ErrorCode::config_error, "omega must have n entries");
  if (c.attachment.rows() != c.n || c.attachment.cols() != c.m) {
    throw Error(ErrorCode::config_error, "attachment must be n x m");
  }
  for (Index l = 0; l < c.m; ++l) {
    if (c.attachment.col(l).isZero(0.0)) {
      throw Error(ErrorCode::config_error, "attachment column " + std::to_string(l) + " is zero");
    }
  }
  if (c.coupling.rows() != 2 || c.coupling.cols() != 2) {
    throw Error(ErrorCode::config_error, "coupling block must be 2 x 2");
  }
  return detail::dilate(detail::chain_hamiltonian(c.omega, c.coupling), c.attachment, c.kappa_ch,
                        c.kappa_site);
}

// ---------------------------------------------------------------------------
// Bosonic Kitaev chain
// ---------------------------------------------------------------------------

struct BKCConfig {
  Index n = 0;
  Index m = 0;
  Variant variant = Variant::homogeneous;
  Vector omega;  // n
  double J_mag = 0.045;
  double lambda_mag = 0.05;
  Vector kappa_ch;
  Vector kappa_site;

  double alpha() const { return lambda_mag - J_mag; }
  double beta() const { return lambda_mag + J_mag; }

  /// R1 = [[0, beta], [alpha, 0]]
  Matrix coupling_block() const {
    Matrix R1(2, 2);
    R1 << 0.0, beta(), alpha(), 0.0;
    return R1;
  }

  /// Defaults calibrated to margins -1.25e-1 (homogeneous) and -1.5e-2
  /// (heterogeneous).
  static BKCConfig defaults(Index n, Index m, Variant variant) {
    BKCConfig c;
    c.n = n;
    c.m = m;
    c.variant = variant;
    c.kappa_ch = Vector::Ones(std::max<Index>(m, 0));
    c.omega.resize(std::max<Index>(n, 0));
    c.kappa_site.resize(std::max<Index>(n, 0));
    for (Index j = 1; j <= n; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(n);
      if (variant == Variant::homogeneous) {
        c.omega(j - 1) = 1.0;
        c.kappa_site(j - 1) = 0.25;
      } else {
        c.omega(j - 1) = 1.0 + 0.5 * t;
        c.kappa_site(j - 1) = 0.028 * (1.0 + t);
      }
    }
    return c;
  }
};

inline BenchmarkPair build_bkc(const BKCConfig& c) {
  if (c.n < 1 || c.m < 1) throw Error(ErrorCode::config_error, "need n >= 1 and m >= 1");
  if (c.m > c.n) {
    throw Error(ErrorCode::config_error, "m must not exceed n", static_cast<double>(c.m));
  }
  if (!(c.J_mag >= 0.0) || !(c.lambda_mag >= 0.0)) {
    throw Error(ErrorCode::config_error, "|J| and |lambda| must be nonnegative");
  }
  detail::require_positive(c.kappa_ch, c.m, "kappa_ch");
  detail::require_positive(c.kappa_site, c.n, "kappa_site");
  if (c.omega.size() != c.n) throw Error(ErrorCode::config_error, "omega must have n entries");
  return detail::dilate(detail::chain_hamiltonian(c.omega, c.coupling_block()),
                        endpoint_attachment(c.n, c.m), c.kappa_ch, c.kappa_site);
}

// ---------------------------------------------------------------------------
// Bus model
// ---------------------------------------------------------------------------

enum class BusCoupling {
  exchange,  // kappa_j (x0 xj + p0 pj)
  position,  // kappa_j x0 xj
};

struct BusConfig {
  double gamma = 2.2;
  double omega0 = 1.0;
  std::vector<double> omega{4.18, 3.28, 2.42, 2.28, 1.75, 1.61, 1.55, 1.40, 1.20};
  std::vector<double> kappa{0.95, 0.78, 0.66, 0.58, 0.44, 0.31, 0.22, 0.14, 0.08};
  BusCoupling coupling = BusCoupling::exchange;
};

namespace detail {

// Validated bus realization without the Hurwitz gate.
inline StateSpaceModel bus_model(const BusConfig& c) {
  if (!(c.gamma > 0.0) || !(c.omega0 > 0.0)) {
    throw Error(ErrorCode::config_error, "gamma and omega0 must be positive");
  }
  if (c.omega.size() != 9 || c.kappa.size() != 9) {
    throw Error(ErrorCode::config_error, "bus model needs 9 ancilla frequencies and couplings");
  }
  for (std::size_t j = 0; j < 9; ++j) {
    if (!(c.omega[j] > 0.0)) throw Error(ErrorCode::config_error, "ancilla frequency must be > 0");
    if (!(c.kappa[j] >= 0.0)) throw Error(ErrorCode::config_error, "coupling must be >= 0");
  }
  const Index modes = 10;
  Matrix R = Matrix::Zero(2 * modes, 2 * modes);
  R.topLeftCorner(2, 2) = c.omega0 * Matrix::Identity(2, 2);
  for (Index j = 0; j < 9; ++j) {
    const Index a = 2 * (j + 1);
    const double k = c.kappa[static_cast<std::size_t>(j)];
    R.block(a, a, 2, 2) = c.omega[static_cast<std::size_t>(j)] * Matrix::Identity(2, 2);
    R(0, a) = R(a, 0) = k;
    if (c.coupling == BusCoupling::exchange) R(1, a + 1) = R(a + 1, 1) = k;
  }
  Matrix B = Matrix::Zero(2 * modes, 2);
  B(0, 0) = B(1, 1) = std::sqrt(c.gamma);
  return pr_from_template(HamiltonianMatrix(std::move(R)), B);
}

}  // namespace detail

/// Main mode damped through the single channel, nine undamped ancillas
/// star-coupled to it. 20 states, 2 quadratures in and out.
inline StateSpaceModel build_bus(const BusConfig& c) {
  StateSpaceModel model = detail::bus_model(c);
  const double margin = spectral_abscissa(model.A());
  if (!(margin < 0.0)) {
    throw Error(ErrorCode::instability,
                "bus config rejected: A is not Hurwitz (max Re = " + std::to_string(margin) + ")",
                margin);
  }
  return model;
}

}  // namespace qirka
