#pragma once

// Lanczos ground-state solver for large sparse real-symmetric operators,
// accessed through a matvec callback.  Full reorthogonalization keeps the
// Krylov basis numerically orthogonal, which the downstream physics needs:
// eigenvector components enter reduced density matrices quadratically.

#include <qcorr/linalg.hpp>
#include <qcorr/rng.hpp>

#include <stdexcept>
#include <vector>

namespace qcorr::lanczos {

struct LanczosOptions {
  int max_iter = 300;
  double tol = 1e-10;     // residual tolerance, scaled by max(1, |eigenvalue|)
  int restarts = 1;       // extra passes seeded with the current Ritz vector
  std::uint64_t seed = 12345;
  int check_every = 5;
};

struct LanczosResult {
  double value = 0;
  RealVector vector;
  int iterations = 0;
  double residual = 0;
  bool converged = false;
};

namespace detail {

// smallest eigenpair of the symmetric tridiagonal (alpha, beta)
inline void tridiag_ground(const std::vector<double>& alpha,
                           const std::vector<double>& beta, double& theta,
                           RealVector& s) {
  const Eigen::Index k = static_cast<Eigen::Index>(alpha.size());
  RealMatrix t = RealMatrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < k)
      t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(t);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("lanczos: tridiagonal eigensolver failed");
  theta = es.eigenvalues()(0);
  s = es.eigenvectors().col(0);
}

}  // namespace detail

// Lowest eigenpair of the operator defined by apply(x, y) with y = A x.
// A single restart from the best Ritz vector recovers the cases where the
// Krylov space stagnates before reaching the requested residual.
template <class MatVec>
LanczosResult lowest_eigenpair(Eigen::Index dim, const MatVec& apply,
                               const LanczosOptions& opt = LanczosOptions{},
                               const RealVector* start = nullptr) {
  if (dim <= 0) throw std::invalid_argument("lanczos: empty space");
  LanczosResult res;

  RealVector v(dim);
  if (start && start->size() == dim && start->norm() > 0) {
    v = *start / start->norm();
  } else {
    Rng rng(opt.seed);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
    v /= v.norm();
  }

  for (int pass = 0; pass <= opt.restarts; ++pass) {
    std::vector<RealVector> basis;
    std::vector<double> alpha, beta;
    basis.push_back(v);
    RealVector w(dim);
    double theta = 0;
    RealVector s;

    const int kmax = static_cast<int>(std::min<Eigen::Index>(opt.max_iter, dim));
    for (int k = 0; k < kmax; ++k) {
      apply(basis.back(), w);
      const double a = basis.back().dot(w);
      alpha.push_back(a);
      w -= a * basis.back();
      if (k > 0) w -= beta.back() * basis[basis.size() - 2];
      // two rounds of Gram-Schmidt against the whole basis
      for (int round = 0; round < 2; ++round)
        for (const auto& q : basis) w -= q.dot(w) * q;

      const bool last = (k + 1 == kmax);
      if (last || (k + 1) % opt.check_every == 0 || w.norm() < 1e-14) {
        detail::tridiag_ground(alpha, beta, theta, s);
        const double resid_est =
            (w.norm() < 1e-14) ? 0.0 : w.norm() * std::abs(s(s.size() - 1));
        res.iterations += k + 1;
        if (resid_est <= opt.tol * std::max(1.0, std::abs(theta)) || last ||
            w.norm() < 1e-14) {
          break;
        }
      }
      const double b = w.norm();
      if (b < 1e-14) break;  // exact invariant subspace
      beta.push_back(b);
      basis.push_back(w / b);
    }

    if (alpha.empty()) throw std::runtime_error("lanczos: no iterations ran");
    if (s.size() == 0) detail::tridiag_ground(alpha, beta, theta, s);
    RealVector ritz = RealVector::Zero(dim);
    for (Eigen::Index j = 0; j < s.size(); ++j)
      ritz += s(j) * basis[static_cast<std::size_t>(j)];
    ritz /= ritz.norm();

    apply(ritz, w);
    res.value = ritz.dot(w);
    res.residual = (w - res.value * ritz).norm();
    res.vector = ritz;
    res.converged = res.residual <= opt.tol * std::max(1.0, std::abs(res.value));
    if (res.converged) break;
    v = ritz;  // restart from the best available approximation
  }
  return res;
}

}  // namespace qcorr::lanczos
