#pragma once

// Correlated (cumulant) reduced density matrices.  The order-q correlated
// RDM subtracts from rho_q every factorized combination of lower-order
// correlated RDMs, one term per partition of the q sites into at least two
// blocks; what remains is traceless, Hermitian, and vanishes identically on
// product states.

#include <qcorr/linalg.hpp>
#include <qcorr/rng.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace qcorr::cumulants {

using SiteTuple = std::vector<int>;  // strictly ascending physical labels

inline void check_site_tuple(const SiteTuple& sites, const char* where) {
  if (sites.empty())
    throw std::invalid_argument(std::string(where) + ": empty site tuple");
  for (std::size_t j = 0; j + 1 < sites.size(); ++j)
    if (sites[j] >= sites[j + 1])
      throw std::invalid_argument(std::string(where) +
                                  ": site tuple must ascend strictly");
}

struct CorrelatedRDM {
  Matrix matrix;                    // traceless, Hermitian
  SiteTuple sites;                  // physical labels
  std::vector<Eigen::Index> dims;   // local dimension per tuple slot
};

// Marginals keyed by bitmask over tuple positions (bit j = position j).
using MarginalMap = std::map<unsigned, Matrix>;

namespace detail {

inline std::vector<int> mask_positions(unsigned mask) {
  std::vector<int> pos;
  for (int j = 0; mask >> j; ++j)
    if (mask & (1u << j)) pos.push_back(j);
  return pos;
}

// all partitions of `mask` into nonempty blocks
inline std::vector<std::vector<unsigned>> partitions_of(unsigned mask) {
  if (mask == 0) return {{}};
  const unsigned low = mask & (0u - mask);
  const unsigned rest = mask & ~low;
  std::vector<std::vector<unsigned>> out;
  // block containing the lowest element = low | s for every submask s of rest
  for (unsigned s = rest;; s = (s - 1) & rest) {
    const unsigned block = low | s;
    for (auto tail : partitions_of(mask & ~block)) {
      tail.insert(tail.begin(), block);
      out.push_back(std::move(tail));
    }
    if (s == 0) break;
  }
  return out;
}

}  // namespace detail

// Cumulant of the marginal family at the full mask.  Positions are tuple
// slots; marginals must contain every nonempty submask, each consistent with
// the full marginal under partial trace within consistency_tol.
inline CorrelatedRDM correlated_rdm(const MarginalMap& marginals,
                                    const SiteTuple& sites,
                                    const std::vector<Eigen::Index>& dims,
                                    double consistency_tol = 1e-8) {
  check_site_tuple(sites, "correlated_rdm");
  const int q = static_cast<int>(sites.size());
  if (static_cast<int>(dims.size()) != q)
    throw std::invalid_argument("correlated_rdm: dims/sites length mismatch");
  const unsigned full = (1u << q) - 1u;

  // validate presence, shape, hermiticity, and partial-trace consistency
  const auto it_full = marginals.find(full);
  if (it_full == marginals.end())
    throw std::invalid_argument("correlated_rdm: missing full marginal");
  for (unsigned m = 1; m <= full; ++m) {
    const auto it = marginals.find(m);
    if (it == marginals.end())
      throw std::invalid_argument("correlated_rdm: missing subset marginal");
    Eigen::Index d = 1;
    for (int p : detail::mask_positions(m)) d *= dims[p];
    if (it->second.rows() != d || it->second.cols() != d)
      throw std::invalid_argument("correlated_rdm: marginal dimension mismatch");
    check_hermitian(it->second, "correlated_rdm");
    if (m != full) {
      const Matrix traced =
          partial_trace(it_full->second, dims, detail::mask_positions(m));
      if ((traced - it->second).cwiseAbs().maxCoeff() > consistency_tol)
        throw std::invalid_argument(
            "correlated_rdm: marginals inconsistent under partial trace");
    }
  }

  // cumulants for every submask, in increasing popcount order
  std::map<unsigned, Matrix> kappa;
  std::vector<unsigned> order;
  for (unsigned m = 1; m <= full; ++m) order.push_back(m);
  std::sort(order.begin(), order.end(), [](unsigned a, unsigned b) {
    const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (unsigned m : order) {
    Matrix k = marginals.at(m);
    if (__builtin_popcount(m) > 1) {
      const auto pos = detail::mask_positions(m);
      // local dims and local slot of each global position within mask m
      std::vector<Eigen::Index> sub_dims;
      std::map<int, int> slot;
      for (std::size_t j = 0; j < pos.size(); ++j) {
        sub_dims.push_back(dims[pos[j]]);
        slot[pos[j]] = static_cast<int>(j);
      }
      for (const auto& part : detail::partitions_of(m)) {
        if (part.size() < 2) continue;
        std::vector<std::pair<const Matrix*, std::vector<int>>> factors;
        for (unsigned b : part) {
          std::vector<int> local;
          for (int p : detail::mask_positions(b)) local.push_back(slot[p]);
          factors.emplace_back(&kappa.at(b), std::move(local));
        }
        k -= embed_product(factors, sub_dims);
      }
    }
    kappa.emplace(m, std::move(k));
  }

  CorrelatedRDM out{std::move(kappa.at(full)), sites, dims};
  // cumulants of Hermitian inputs are Hermitian; symmetrize away roundoff
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

// Convenience: build all marginals of a joint density matrix, then take the
// cumulant at the full tuple.
inline MarginalMap marginals_from_joint(const Matrix& joint,
                                        const std::vector<Eigen::Index>& dims) {
  const int q = static_cast<int>(dims.size());
  const unsigned full = (1u << q) - 1u;
  MarginalMap out;
  for (unsigned m = 1; m <= full; ++m) {
    if (m == full)
      out.emplace(m, joint);
    else
      out.emplace(m, partial_trace(joint, dims, detail::mask_positions(m)));
  }
  return out;
}

inline CorrelatedRDM correlated_rdm(const Matrix& joint, const SiteTuple& sites,
                                    const std::vector<Eigen::Index>& dims,
                                    double consistency_tol = 1e-8) {
  return correlated_rdm(marginals_from_joint(joint, dims), sites, dims,
                        consistency_tol);
}

inline double corr_norm(const CorrelatedRDM& c, double p) {
  return schatten_norm(c.matrix, p);
}

inline Spectrum corr_spectrum(const CorrelatedRDM& c) { return eigh(c.matrix); }

// ---- rank-2 truncation ----

enum class TruncationScheme {
  absolute,      // weights (p1, 1 - p1)
  renormalized,  // weights (p1, p2) / (p1 + p2)
};

struct Rank2Approx {
  double p1 = 1;             // weight of the dominant eigenvector
  Vector psi1, psi2;         // two dominant eigenvectors, orthonormal
  bool degenerate = false;   // second eigenvalue below rank tolerance
  double lambda1 = 1, lambda2 = 0;
  double subdominant_sum = 0;  // trace minus the two dominant eigenvalues
};

inline Rank2Approx rank2_truncate(const Matrix& rho, TruncationScheme scheme) {
  if (rho.rows() < 2)
    throw std::invalid_argument("rank2_truncate: need dimension >= 2");
  const Spectrum s = eigh(rho);
  const Eigen::Index n = rho.rows();
  Rank2Approx out;
  out.lambda1 = s.values(n - 1);
  out.lambda2 = s.values(n - 2);
  out.psi1 = s.vectors.col(n - 1);
  out.psi2 = s.vectors.col(n - 2);
  out.subdominant_sum = rho.trace().real() - out.lambda1 - out.lambda2;
  if (out.lambda2 < 1e-14) {
    out.degenerate = true;  // effectively pure input
    out.p1 = 1.0;
    return out;
  }
  switch (scheme) {
    case TruncationScheme::absolute:
      out.p1 = out.lambda1;
      break;
    case TruncationScheme::renormalized:
      out.p1 = out.lambda1 / (out.lambda1 + out.lambda2);
      break;
  }
  return out;
}

inline Matrix rank2_matrix(const Rank2Approx& a) {
  return a.p1 * (a.psi1 * a.psi1.adjoint()) +
         (1.0 - a.p1) * (a.psi2 * a.psi2.adjoint());
}

// ---- correlation bound ----

struct BoundCheckResult {
  double bound = 0;         // ||rho_corr||_1
  double max_abs_corr = 0;  // largest sampled |<A_1 x ... x A_q>_corr|
  int trials = 0;
  bool violated = false;    // any sample above bound + 1e-10
};

namespace detail {

// Haar-random SU(2) via unit quaternion
inline Matrix haar_su2(Rng& rng) {
  double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
  const double n = std::sqrt(a * a + b * b + c * c + d * d);
  a /= n; b /= n; c /= n; d /= n;
  Matrix u(2, 2);
  u << cplx(a, b), cplx(c, d), cplx(-c, d), cplx(a, -b);
  return u;
}

// random Hermitian with unit operator norm
inline Matrix random_contraction(Eigen::Index dim, Rng& rng) {
  if (dim == 2) {
    const Matrix u = haar_su2(rng);
    return u * sigma_z() * u.adjoint();
  }
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  Matrix h = 0.5 * (g + g.adjoint());
  const double top = schatten_norm(h, std::numeric_limits<double>::infinity());
  return h / top;
}

}  // namespace detail

// Sample products of unit-norm single-site observables and compare the
// correlated expectation |tr(rho_corr A_1 x ... x A_q)| against the trace
// norm, which bounds it from above.
inline BoundCheckResult correlation_bound_check(const CorrelatedRDM& c,
                                                int trials,
                                                std::uint64_t seed) {
  BoundCheckResult res;
  res.bound = corr_norm(c, 1.0);
  res.trials = trials;
  Rng rng(seed);
  const int q = static_cast<int>(c.dims.size());
  for (int t = 0; t < trials; ++t) {
    std::vector<Matrix> ops;
    ops.reserve(q);
    for (int j = 0; j < q; ++j)
      ops.push_back(detail::random_contraction(c.dims[j], rng));
    const Matrix obs = kron_all(ops);
    const double val = std::abs((c.matrix * obs).trace().real());
    res.max_abs_corr = std::max(res.max_abs_corr, val);
  }
  res.violated = res.max_abs_corr > res.bound + 1e-10;
  return res;
}

}  // namespace qcorr::cumulants
