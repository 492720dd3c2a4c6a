#pragma once

// Dense linear-algebra kernels shared by every simulation module: Hermitian
// eigendecomposition with a fixed phase convention, Pfaffians of
// antisymmetric matrices, partial traces, operator embedding and Schatten
// norms.  All operators act on tensor-product spaces whose site ordering is
// big-endian: site 0 owns the most significant digit of a basis index.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcorr {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double hermiticity_tol = 1e-12;

// ---- basic constructions ----

inline Matrix ident(Eigen::Index d) { return Matrix::Identity(d, d); }

inline Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

inline Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// axis: 0 -> identity, 1 -> x, 2 -> y, 3 -> z
inline Matrix pauli(int axis) {
  switch (axis) {
    case 0: return ident(2);
    case 1: return sigma_x();
    case 2: return sigma_y();
    case 3: return sigma_z();
    default: throw std::invalid_argument("pauli: axis must be 0..3");
  }
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix kron_all(const std::vector<Matrix>& ops) {
  if (ops.empty()) return Matrix::Identity(1, 1);
  Matrix out = ops.front();
  for (std::size_t k = 1; k < ops.size(); ++k) out = kron(out, ops[k]);
  return out;
}

// ---- validation ----

inline void check_hermitian(const Matrix& m, const char* where,
                            double tol = hermiticity_tol) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(where) + ": matrix not square");
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (dev > tol * scale)
    throw std::invalid_argument(std::string(where) +
                                ": matrix not Hermitian within tolerance");
}

inline Eigen::Index checked_total_dim(const std::vector<Eigen::Index>& dims,
                                      const char* where) {
  Eigen::Index total = 1;
  for (Eigen::Index d : dims) {
    if (d < 1) throw std::invalid_argument(std::string(where) + ": bad local dimension");
    total *= d;
  }
  return total;
}

// ---- Hermitian eigendecomposition ----

struct Spectrum {
  RealVector values;  // ascending
  Matrix vectors;     // columns, orthonormal, phase-fixed
};

// Eigenpairs of a Hermitian matrix.  Eigenvalues ascend; each eigenvector is
// rescaled so that its first component of magnitude > phase_tol is real and
// positive, which pins the phase (and the sign for real input) deterministically.
inline Spectrum eigh(const Matrix& m, double tol = hermiticity_tol) {
  check_hermitian(m, "eigh", tol);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigh: eigensolver failed to converge");
  Spectrum s{solver.eigenvalues(), solver.eigenvectors()};
  constexpr double phase_tol = 1e-8;
  for (Eigen::Index c = 0; c < s.vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < s.vectors.rows(); ++r) {
      const cplx v = s.vectors(r, c);
      if (std::abs(v) > phase_tol) {
        s.vectors.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return s;
}

// ---- Pfaffian ----

namespace detail {

template <class Scalar, class Mat>
Scalar pfaffian_impl(Mat a) {
  const Eigen::Index n = a.rows();
  Scalar pf(1);
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // partial pivoting on column k below the diagonal
    Eigen::Index kp = k + 1;
    double big = std::abs(a(kp, k));
    for (Eigen::Index i = k + 2; i < n; ++i)
      if (std::abs(a(i, k)) > big) { big = std::abs(a(i, k)); kp = i; }
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    if (a(k + 1, k) == Scalar(0)) return Scalar(0);
    pf *= a(k, k + 1);
    for (Eigen::Index i = k + 2; i < n; ++i) {
      const Scalar f = a(i, k) / a(k + 1, k);
      a.row(i) -= f * a.row(k + 1);
      a.col(i) -= f * a.col(k + 1);
    }
  }
  return pf;
}

template <class Mat>
void check_antisymmetric(const Mat& a, const char* where) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(where) + ": matrix not square");
  if (a.rows() % 2 != 0)
    throw std::invalid_argument(std::string(where) +
                                ": Pfaffian undefined for odd dimension");
  if (a.rows() == 0) return;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double dev = (a + a.transpose()).cwiseAbs().maxCoeff();
  if (dev > 1e-12 * scale)
    throw std::invalid_argument(std::string(where) + ": matrix not antisymmetric");
}

}  // namespace detail

// Pfaffian via Parlett-Reid tridiagonalization with partial pivoting.
// pf(A)^2 = det(A); the empty matrix has Pfaffian 1.
inline double pfaffian(const RealMatrix& a) {
  detail::check_antisymmetric(a, "pfaffian");
  if (a.rows() == 0) return 1.0;
  return detail::pfaffian_impl<double>(RealMatrix(a));
}

inline cplx pfaffian(const Matrix& a) {
  detail::check_antisymmetric(a, "pfaffian");
  if (a.rows() == 0) return cplx(1.0);
  return detail::pfaffian_impl<cplx>(Matrix(a));
}

// ---- index bookkeeping on product spaces ----

namespace detail {

inline std::vector<Eigen::Index> strides_of(const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> stride(dims.size(), 1);
  for (int j = static_cast<int>(dims.size()) - 2; j >= 0; --j)
    stride[j] = stride[j + 1] * dims[j + 1];
  return stride;
}

// offsets of every multi-index over `sites` (in the given site order) within
// the full space
inline std::vector<Eigen::Index> subspace_offsets(
    const std::vector<Eigen::Index>& dims, const std::vector<Eigen::Index>& stride,
    const std::vector<int>& sites) {
  Eigen::Index sub = 1;
  for (int s : sites) sub *= dims[s];
  std::vector<Eigen::Index> offs(sub, 0);
  for (Eigen::Index idx = 0; idx < sub; ++idx) {
    Eigen::Index rem = idx, off = 0;
    for (int j = static_cast<int>(sites.size()) - 1; j >= 0; --j) {
      const Eigen::Index d = dims[sites[j]];
      off += (rem % d) * stride[sites[j]];
      rem /= d;
    }
    offs[idx] = off;
  }
  return offs;
}

inline void check_sites(const std::vector<int>& sites,
                        const std::vector<Eigen::Index>& dims, const char* where) {
  std::vector<int> seen;
  for (int s : sites) {
    if (s < 0 || s >= static_cast<int>(dims.size()))
      throw std::out_of_range(std::string(where) + ": site index out of range");
    if (std::find(seen.begin(), seen.end(), s) != seen.end())
      throw std::invalid_argument(std::string(where) + ": repeated site index");
    seen.push_back(s);
  }
}

inline std::vector<int> complement_sites(const std::vector<int>& sites,
                                         std::size_t n) {
  std::vector<int> env;
  for (int s = 0; s < static_cast<int>(n); ++s)
    if (std::find(sites.begin(), sites.end(), s) == sites.end()) env.push_back(s);
  return env;
}

}  // namespace detail

// ---- partial trace ----

// Reduced operator on `keep` (result indexed in the order of `keep`), tracing
// out every other site of a density operator over local dimensions `dims`.
inline Matrix partial_trace(const Matrix& rho, const std::vector<Eigen::Index>& dims,
                            const std::vector<int>& keep) {
  const Eigen::Index total = checked_total_dim(dims, "partial_trace");
  if (rho.rows() != total || rho.cols() != total)
    throw std::invalid_argument("partial_trace: dimension mismatch");
  detail::check_sites(keep, dims, "partial_trace");
  const auto stride = detail::strides_of(dims);
  const auto env = detail::complement_sites(keep, dims.size());
  const auto koff = detail::subspace_offsets(dims, stride, keep);
  const auto eoff = detail::subspace_offsets(dims, stride, env);
  const Eigen::Index dk = static_cast<Eigen::Index>(koff.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      cplx acc(0);
      for (Eigen::Index e : eoff) acc += rho(koff[a] + e, koff[b] + e);
      out(a, b) = acc;
    }
  return out;
}

// Reduced density matrix of a pure state without forming |psi><psi|.
inline Matrix partial_trace_pure(const Vector& psi,
                                 const std::vector<Eigen::Index>& dims,
                                 const std::vector<int>& keep) {
  const Eigen::Index total = checked_total_dim(dims, "partial_trace_pure");
  if (psi.size() != total)
    throw std::invalid_argument("partial_trace_pure: dimension mismatch");
  detail::check_sites(keep, dims, "partial_trace_pure");
  const auto stride = detail::strides_of(dims);
  const auto env = detail::complement_sites(keep, dims.size());
  const auto koff = detail::subspace_offsets(dims, stride, keep);
  const auto eoff = detail::subspace_offsets(dims, stride, env);
  const Eigen::Index dk = static_cast<Eigen::Index>(koff.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index e : eoff)
    for (Eigen::Index a = 0; a < dk; ++a) {
      const cplx va = psi(koff[a] + e);
      if (va == cplx(0)) continue;
      for (Eigen::Index b = 0; b < dk; ++b)
        out(a, b) += va * std::conj(psi(koff[b] + e));
    }
  return out;
}

// ---- embedding ----

// Embed an operator acting on `sites` (in the given order) into the full
// product space over `dims`, identity elsewhere.
inline Matrix embed(const Matrix& op, const std::vector<int>& sites,
                    const std::vector<Eigen::Index>& dims) {
  const Eigen::Index total = checked_total_dim(dims, "embed");
  detail::check_sites(sites, dims, "embed");
  Eigen::Index dop = 1;
  for (int s : sites) dop *= dims[s];
  if (op.rows() != dop || op.cols() != dop)
    throw std::invalid_argument("embed: operator does not match site dimensions");
  const auto stride = detail::strides_of(dims);
  const auto env = detail::complement_sites(sites, dims.size());
  const auto soff = detail::subspace_offsets(dims, stride, sites);
  const auto eoff = detail::subspace_offsets(dims, stride, env);
  Matrix out = Matrix::Zero(total, total);
  for (Eigen::Index r = 0; r < dop; ++r)
    for (Eigen::Index c = 0; c < dop; ++c) {
      const cplx v = op(r, c);
      if (v == cplx(0)) continue;
      for (Eigen::Index e : eoff) out(soff[r] + e, soff[c] + e) = v;
    }
  return out;
}

// Product of operators supported on disjoint site sets that exactly cover the
// space; equals the matrix product of the individual embeddings.
inline Matrix embed_product(
    const std::vector<std::pair<const Matrix*, std::vector<int>>>& factors,
    const std::vector<Eigen::Index>& dims) {
  const Eigen::Index total = checked_total_dim(dims, "embed_product");
  std::vector<int> covered;
  for (const auto& [op, sites] : factors) {
    detail::check_sites(sites, dims, "embed_product");
    for (int s : sites) covered.push_back(s);
  }
  std::sort(covered.begin(), covered.end());
  for (std::size_t j = 0; j + 1 < covered.size(); ++j)
    if (covered[j] == covered[j + 1])
      throw std::invalid_argument("embed_product: overlapping supports");
  if (covered.size() != dims.size())
    throw std::invalid_argument("embed_product: factors must cover all sites");

  const auto stride = detail::strides_of(dims);
  Matrix out = Matrix::Zero(total, total);
  // digit buffers per factor
  std::vector<std::vector<Eigen::Index>> offs;
  std::vector<Eigen::Index> dsub;
  offs.reserve(factors.size());
  for (const auto& [op, sites] : factors) {
    offs.push_back(detail::subspace_offsets(dims, stride, sites));
    dsub.push_back(op->rows());
  }
  std::vector<Eigen::Index> row_idx(factors.size(), 0), col_idx(factors.size(), 0);
  const auto advance = [&](std::vector<Eigen::Index>& idx) {
    for (int j = static_cast<int>(idx.size()) - 1; j >= 0; --j) {
      if (++idx[j] < dsub[j]) return true;
      idx[j] = 0;
    }
    return false;
  };
  do {
    Eigen::Index roff = 0;
    for (std::size_t j = 0; j < factors.size(); ++j) roff += offs[j][row_idx[j]];
    std::fill(col_idx.begin(), col_idx.end(), 0);
    do {
      cplx v(1);
      Eigen::Index coff = 0;
      for (std::size_t j = 0; j < factors.size(); ++j) {
        v *= (*factors[j].first)(row_idx[j], col_idx[j]);
        coff += offs[j][col_idx[j]];
      }
      out(roff, coff) = v;
    } while (advance(col_idx));
  } while (advance(row_idx));
  return out;
}

// ---- Schatten norms ----

// (sum_i |lambda_i|^p)^(1/p) over the eigenvalues of a Hermitian matrix;
// p = infinity gives the spectral norm.  p < 1 is not a norm and is rejected.
inline double schatten_norm(const Matrix& m, double p,
                            double tol = hermiticity_tol) {
  check_hermitian(m, "schatten_norm", tol);
  if (std::isnan(p) || p < 1.0)
    throw std::invalid_argument("schatten_norm: requires p >= 1");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("schatten_norm: eigensolver failed");
  const RealVector ev = solver.eigenvalues();
  if (std::isinf(p)) return ev.cwiseAbs().maxCoeff();
  double acc = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    acc += std::pow(std::abs(ev(i)), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace qcorr
