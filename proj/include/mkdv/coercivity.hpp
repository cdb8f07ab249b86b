#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/lyapunov.hpp"
#include "mkdv/profiles.hpp"

namespace mkdv {

/// Discrete quadratic forms on a grid: the second variation A of H_j around a
/// profile, the weighted H^2 form B, and the mass-pairing vector p = P sqrt(Phi).
/// Each pairs as h * w^T M w.
struct QuadraticForms {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd p;
  double h = 0.0;
};

namespace detail {

// Matrix of the spectral derivative of the given order, column by column.
inline Eigen::MatrixXd differentiation_matrix(const Grid& g, int order) {
  const std::size_t n = g.size();
  Eigen::MatrixXd D(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    const auto col = derivative_values(e, g, order);
    for (std::size_t r = 0; r < n; ++r) D(r, c) = col[r];
    e[c] = 0.0;
  }
  return D;
}

inline double smallest_generalized(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigensolveFailure("generalized eigensolve did not converge");
  return es.eigenvalues()(0);
}

}  // namespace detail

/// Forms for H_j around `profile` with weight Phi (values on the grid).
inline QuadraticForms assemble_forms(const Field& profile, std::span<const double> weight, const ShapePair& s) {
  const auto& g = profile.grid();
  const std::size_t n = g.size();
  const auto d = derivative_stack(profile, 2);
  const Eigen::MatrixXd D1 = detail::differentiation_matrix(g, 1);
  const Eigen::MatrixXd D2 = detail::differentiation_matrix(g, 2);
  const double diff = s.b * s.b - s.a * s.a;
  const double sum = s.a * s.a + s.b * s.b;

  Eigen::VectorXd W(n), c1(n), c0(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double P = d[0][i], Px = d[1][i], Pxx = d[2][i];
    const double P2 = P * P;
    W(i) = weight[i];
    c1(i) = weight[i] * (-2.5 * P2 + diff);
    c0(i) = weight[i] * (2.5 * Px * Px + 5.0 * P * Pxx + 3.75 * P2 * P2 - 3.0 * diff * P2 + 0.5 * sum * sum);
    p(i) = P * std::sqrt(std::max(0.0, weight[i]));
  }
  QuadraticForms f;
  f.h = g.spacing();
  f.A = 0.5 * D2.transpose() * W.asDiagonal() * D2 + D1.transpose() * c1.asDiagonal() * D1;
  f.A.diagonal() += c0;
  f.B = D2.transpose() * W.asDiagonal() * D2 + D1.transpose() * W.asDiagonal() * D1;
  f.B.diagonal() += W;
  // symmetrise against round-off in the products
  f.A = 0.5 * (f.A + f.A.transpose()).eval();
  f.B = 0.5 * (f.B + f.B.transpose()).eval();
  f.p = std::move(p);
  return f;
}

/// Orthonormal basis of the complement of span(directions) in R^n.
inline Eigen::MatrixXd complement_basis(const std::vector<std::vector<double>>& directions, std::size_t n) {
  if (directions.empty()) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd D(n, directions.size());
  for (std::size_t k = 0; k < directions.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) D(i, k) = directions[k][i];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(D);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return Q.rightCols(n - directions.size());
}

/// Minimum of w^T A w / w^T B w over w in range(Z).
inline double min_rayleigh(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Z) {
  return detail::smallest_generalized(Z.transpose() * A * Z, Z.transpose() * B * Z);
}

struct CoercivityReport {
  /// Largest mu with H_j(w) + (1/mu) (int w P Phi)^2 >= mu ||w||^2_{H^2_Phi}
  /// on the complement of the modulation directions; 0 if none was found.
  double mu = 0.0;
  /// lambda_min of the pair (A, B) on the whole space.
  double unconstrained_min = 0.0;
  /// lambda_min on the complement, without the mass penalty.
  double constrained_min = 0.0;
  std::size_t grid_points = 0;
  bool succeeded() const { return mu > 0.0; }
};

struct CoercivityOptions {
  /// Larger grids are resampled onto this many points with the same L.
  std::size_t max_points = 1024;
  int bisection_steps = 50;
  double mu_floor = 1e-8;
};

/// Coercivity of the quadratic form of H_j around a single object at time t.
inline CoercivityReport coercivity_check(const WaveObject& o, const LyapunovParams& p, std::size_t j, const Grid& grid,
                                         double t = 0.0, const CoercivityOptions& opt = {}) {
  p.fam.check_index(j);
  const Grid g = grid.size() > opt.max_points ? Grid(grid.half_length(), opt.max_points) : grid;
  const std::size_t n = g.size();
  const Field profile = sample(o, t, g);
  const auto weight = p.fam.weight_values(j, t, g);
  const auto forms = assemble_forms(profile, weight, p.shape(j));

  std::vector<std::vector<double>> dirs(translation_count(o), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto grad = translation_gradient(o, t, g.node(i));
    for (std::size_t k = 0; k < dirs.size(); ++k) dirs[k][i] = grad[k];
  }
  const Eigen::MatrixXd Z = complement_basis(dirs, n);
  const Eigen::MatrixXd Ar = Z.transpose() * forms.A * Z;
  const Eigen::MatrixXd Br = Z.transpose() * forms.B * Z;
  const Eigen::VectorXd pr = Z.transpose() * forms.p;

  CoercivityReport r;
  r.grid_points = n;
  r.unconstrained_min = detail::smallest_generalized(forms.A, forms.B);
  r.constrained_min = detail::smallest_generalized(Ar, Br);

  // reduce to a standard problem once: C = L^{-1} Ar L^{-T}, q = L^{-1} pr
  Eigen::LLT<Eigen::MatrixXd> llt(Br);
  if (llt.info() != Eigen::Success) throw EigensolveFailure("weighted H2 form is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(Ar);
  C = L.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
  C = 0.5 * (C + C.transpose()).eval();
  const Eigen::VectorXd q = L.triangularView<Eigen::Lower>().solve(pr);

  // lambda_min(C + rho q q^T) from one eigendecomposition of C: the rank-one
  // update keeps eigenvalues whose eigenvector misses q and moves the rest
  // to roots of 1 + rho sum z_i^2 / (lambda_i - x).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw EigensolveFailure("reduced eigensolve did not converge");
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::VectorXd z = es.eigenvectors().transpose() * q;
  const double znorm2 = z.squaredNorm();
  const double ztol = 1e-24 * std::max(1.0, znorm2);
  auto lambda_min = [&](double mu) {
    const double rho = forms.h / mu;
    double deflated = std::numeric_limits<double>::infinity();
    std::ptrdiff_t first = -1, second = -1;
    for (std::ptrdiff_t i = 0; i < lam.size(); ++i) {
      if (z(i) * z(i) <= ztol) {
        deflated = std::min(deflated, lam(i));
      } else if (first < 0) {
        first = i;
      } else if (second < 0) {
        second = i;
      }
    }
    if (first < 0) return deflated;
    double lo = lam(first);
    double hi = second >= 0 ? lam(second) : lam(first) + rho * znorm2;
    auto secular = [&](double x) {
      double f = 1.0;
      for (std::ptrdiff_t i = 0; i < lam.size(); ++i)
        if (z(i) * z(i) > ztol) f += rho * z(i) * z(i) / (lam(i) - x);
      return f;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (secular(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::min(deflated, 0.5 * (lo + hi));
  };

  // lambda_min(mu) - mu is decreasing in mu
  double lo = opt.mu_floor;
  const double at_lo = lambda_min(lo);
  if (at_lo < lo) return r;
  double hi = at_lo;
  if (lambda_min(hi) >= hi) {
    r.mu = hi;
    return r;
  }
  for (int it = 0; it < opt.bisection_steps; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lambda_min(mid) >= mid ? lo : hi) = mid;
  }
  r.mu = lo;
  return r;
}

}  // namespace mkdv
