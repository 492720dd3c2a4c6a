#pragma once

// Entanglement measures for small spin systems: the two-qubit concurrence,
// the three-tangle, polynomial four-tangles, and a convex-roof evaluator for
// rank-2 mixed states built from characteristic curves over the Bloch-like
// family  Z(w, phi) = sqrt(w) psi1 + e^{i phi} sqrt(1-w) psi2.

#include <qcorr/cumulants.hpp>
#include <qcorr/linalg.hpp>
#include <qcorr/rng.hpp>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcorr::tangles {

// ---- pure-state polynomial measures ----

// |<psi*| sigma_y^(x n) |psi>| for even n; degree 2 in the amplitudes.
// Equals the concurrence for n = 2 and measures GHZ-type entanglement for
// n = 4, where it vanishes on products and on W states.
inline double spin_flip_overlap(const Vector& psi, int n_qubits) {
  if (n_qubits % 2 != 0)
    throw std::invalid_argument("spin_flip_overlap: needs an even qubit count");
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  if (psi.size() != dim)
    throw std::invalid_argument("spin_flip_overlap: dimension mismatch");
  cplx acc(0);
  const Eigen::Index mask = dim - 1;
  for (Eigen::Index a = 0; a < dim; ++a) {
    const int sign = (__builtin_popcountll(a) & 1) ? -1 : 1;
    acc += double(sign) * psi(a) * psi(~a & mask);
  }
  // sigma_y^(x n) phases multiply to i^n = +-1; drop the modulus-invariant sign
  return std::abs(acc);
}

inline double concurrence_pure(const Vector& psi4) {
  return spin_flip_overlap(psi4, 2);
}

// Three-tangle 4|d1 - 2 d2 + 4 d3| (the 2x2x2 hyperdeterminant, scaled);
// degree 4 in the amplitudes.  1 on GHZ, 0 on W and on products.
inline double tau3_pure(const Vector& p) {
  if (p.size() != 8) throw std::invalid_argument("tau3_pure: need 8 amplitudes");
  const cplx d1 = p(0) * p(0) * p(7) * p(7) + p(1) * p(1) * p(6) * p(6) +
                  p(2) * p(2) * p(5) * p(5) + p(4) * p(4) * p(3) * p(3);
  const cplx d2 = p(0) * p(7) * (p(3) * p(4) + p(5) * p(2) + p(6) * p(1)) +
                  p(3) * p(4) * (p(5) * p(2) + p(6) * p(1)) +
                  p(5) * p(2) * p(6) * p(1);
  const cplx d3 = p(0) * p(6) * p(5) * p(3) + p(7) * p(1) * p(2) * p(4);
  return 4.0 * std::abs(d1 - 2.0 * d2 + 4.0 * d3);
}

// ---- four-tangle family ----

enum class FourTangle {
  h_invariant,  // |<psi*| sigma_y^(x4) |psi>|, degree 2
  det_12_34,    // |det| of the 4x4 reshape along the (12|34) bipartition
  det_13_24,
  det_14_23,
  filter_f1,    // degree-6 filter invariant; not transcribed
  filter_f2,    // degree-8 filter invariant; not transcribed
  filter_f3,    // degree-12 filter invariant; not transcribed
};

inline bool four_tangle_available(FourTangle w) {
  return w == FourTangle::h_invariant || w == FourTangle::det_12_34 ||
         w == FourTangle::det_13_24 || w == FourTangle::det_14_23;
}

// amplitude degree of the polynomial underlying each measure
inline int four_tangle_degree(FourTangle w) {
  switch (w) {
    case FourTangle::h_invariant: return 2;
    case FourTangle::det_12_34:
    case FourTangle::det_13_24:
    case FourTangle::det_14_23: return 4;
    case FourTangle::filter_f1: return 6;
    case FourTangle::filter_f2: return 8;
    case FourTangle::filter_f3: return 12;
  }
  throw std::invalid_argument("four_tangle_degree: unknown measure");
}

namespace detail {

inline double reshape_det(const Vector& p, int row_hi_bit, int row_lo_bit) {
  // row bits (b_row_hi, b_row_lo), remaining two bits form the column
  Eigen::Matrix4cd m;
  for (Eigen::Index a = 0; a < 16; ++a) {
    int bits[4] = {int(a >> 3) & 1, int(a >> 2) & 1, int(a >> 1) & 1,
                   int(a) & 1};
    const int r = (bits[row_hi_bit] << 1) | bits[row_lo_bit];
    int cb[2], k = 0;
    for (int q = 0; q < 4; ++q)
      if (q != row_hi_bit && q != row_lo_bit) cb[k++] = bits[q];
    const int c = (cb[0] << 1) | cb[1];
    m(r, c) = p(a);
  }
  return std::abs(m.determinant());
}

}  // namespace detail

// Polynomial four-qubit measures, evaluated on raw amplitudes (homogeneous,
// so they may be fed unnormalized vectors when testing invariance).  The
// filter invariants F1-F3 have not been transcribed; requesting one is an
// explicit error rather than a silent zero.
inline double tau4_pure(const Vector& p,
                        FourTangle which = FourTangle::h_invariant) {
  if (p.size() != 16) throw std::invalid_argument("tau4_pure: need 16 amplitudes");
  switch (which) {
    case FourTangle::h_invariant: return spin_flip_overlap(p, 4);
    case FourTangle::det_12_34: return detail::reshape_det(p, 0, 1);
    case FourTangle::det_13_24: return detail::reshape_det(p, 0, 2);
    case FourTangle::det_14_23: return detail::reshape_det(p, 0, 3);
    default:
      throw std::runtime_error(
          "tau4_pure: filter invariant coefficients not transcribed; "
          "use h_invariant or a bipartition determinant");
  }
}

// ---- Wootters concurrence ----

// max(0, l1 - l2 - l3 - l4) over the decreasing square roots of the
// eigenvalues of rho (sy x sy) rho* (sy x sy); the exact two-qubit roof.
inline double concurrence(const Matrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("concurrence: need a two-qubit density matrix");
  check_hermitian(rho, "concurrence");
  const Matrix yy = kron(sigma_y(), sigma_y());
  const Matrix r = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Matrix> ces(r, false);
  if (ces.info() != Eigen::Success)
    throw std::runtime_error("concurrence: eigensolver failed");
  std::vector<double> l;
  for (Eigen::Index i = 0; i < 4; ++i)
    l.push_back(std::sqrt(std::max(0.0, ces.eigenvalues()(i).real())));
  std::sort(l.begin(), l.end(), std::greater<double>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

// Largest correlation over unit-norm product observables |tr(k A x B)| for a
// two-qubit correlated RDM.  Both single-site marginals of a cumulant vanish,
// so only the traceless parts of A and B contribute and the maximum is the
// largest singular value of the 3x3 Pauli correlation matrix.  Equals the
// concurrence on pure states and bounds it from above on mixed ones; the
// trace norm of the cumulant bounds this maximum in turn.
inline double max_product_correlation(const cumulants::CorrelatedRDM& c) {
  if (c.dims.size() != 2 || c.dims[0] != 2 || c.dims[1] != 2)
    throw std::invalid_argument("max_product_correlation: needs two qubits");
  Eigen::Matrix3d k;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      k(a - 1, b - 1) = (c.matrix * kron(pauli(a), pauli(b))).trace().real();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(k);
  return svd.singularValues()(0);
}

// ---- rank-2 convex roof ----

struct RoofOptions {
  int w_points = 201;
  int phi_coarse = 64;
  double phi_tol = 1e-12;
  double gap_tol = 1e-6;
};

struct RoofResult {
  double value = 0;  // the roof estimate (upper construction)
  double lower = 0;  // convex hull of the minimal characteristic curve
  double upper = 0;  // convex hull of the antipodal-pair curve
  double gap = 0;
  bool certified = false;  // gap within gap_tol
};

namespace detail {

template <class F>
double golden_min(const F& f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498948482;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

// coarse scan then golden-section refinement of a periodic function
template <class F>
double periodic_min(const F& f, double period, int coarse, double tol) {
  double best = f(0.0);
  int best_k = 0;
  for (int k = 1; k < coarse; ++k) {
    const double v = f(period * k / coarse);
    if (v < best) { best = v; best_k = k; }
  }
  const double lo = period * (best_k - 1) / coarse;
  const double hi = period * (best_k + 1) / coarse;
  return std::min(best, golden_min(f, lo, hi, tol));
}

struct HullPoint { double x, y; };

inline double cross(const HullPoint& o, const HullPoint& a, const HullPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// lower convex envelope of points with ascending x, evaluated at x0
inline double lower_hull_at(const std::vector<HullPoint>& pts, double x0) {
  std::vector<HullPoint> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], hull[hull.size() - 1], p) <= 0)
      hull.pop_back();
    hull.push_back(p);
  }
  if (x0 <= hull.front().x) return hull.front().y;
  if (x0 >= hull.back().x) return hull.back().y;
  for (std::size_t j = 1; j < hull.size(); ++j) {
    if (x0 <= hull[j].x) {
      const auto &a = hull[j - 1], &b = hull[j];
      const double t = (x0 - a.x) / (b.x - a.x);
      return a.y + t * (b.y - a.y);
    }
  }
  return hull.back().y;
}

}  // namespace detail

// Convex roof of a pure-state measure over the range of a rank-2 state.
// g(w) = min_phi t(Z(w,phi)) convexified gives a lower bound; antipodal pairs
// {Z(w,phi), Z(w,phi+pi)} average to the w-mixture exactly, so the convex
// hull of h(w) = min_phi [t(Z) + t(Z-antipodal)]/2 evaluated at p1 is an
// achievable decomposition average, i.e. an upper bound and the reported value.
inline RoofResult rank2_convex_roof(
    const cumulants::Rank2Approx& approx,
    const std::function<double(const Vector&)>& measure,
    const RoofOptions& opt = RoofOptions{}) {
  RoofResult res;
  if (approx.degenerate) {
    res.value = res.lower = res.upper = measure(approx.psi1);
    res.certified = true;
    return res;
  }
  const double two_pi = 6.283185307179586476925286766559;
  std::vector<detail::HullPoint> gpts, hpts;
  gpts.reserve(opt.w_points);
  hpts.reserve(opt.w_points);
  for (int i = 0; i < opt.w_points; ++i) {
    const double w = double(i) / (opt.w_points - 1);
    const double sw = std::sqrt(w), cw = std::sqrt(1.0 - w);
    const auto state = [&](double phi) -> Vector {
      return sw * approx.psi1 +
             cplx(std::cos(phi), std::sin(phi)) * cw * approx.psi2;
    };
    const auto g = [&](double phi) { return measure(state(phi)); };
    const auto h = [&](double phi) {
      return 0.5 * (measure(state(phi)) + measure(state(phi + 0.5 * two_pi)));
    };
    gpts.push_back({w, detail::periodic_min(g, two_pi, opt.phi_coarse, opt.phi_tol)});
    hpts.push_back({w, detail::periodic_min(h, 0.5 * two_pi, opt.phi_coarse, opt.phi_tol)});
  }
  res.lower = std::max(0.0, detail::lower_hull_at(gpts, approx.p1));
  res.upper = std::max(0.0, detail::lower_hull_at(hpts, approx.p1));
  res.value = res.upper;
  res.gap = res.upper - res.lower;
  res.certified = res.gap <= opt.gap_tol;
  return res;
}

// ---- random pure states ----

// Haar-uniform state on n qubits
inline Vector haar_state(int n_qubits, Rng& rng) {
  const Eigen::Index dim = Eigen::Index(1) << n_qubits;
  Vector psi(dim);
  for (Eigen::Index a = 0; a < dim; ++a) psi(a) = rng.complex_normal();
  psi /= psi.norm();
  return psi;
}

// canonical-form three-qubit state: l0|000> + l1 e^{i phi}|100> + l2|101>
// + l3|110> + l4|111>, squared weights uniform on the simplex
inline Vector acin3_state(Rng& rng) {
  double w[5];
  double tot = 0;
  for (double& x : w) { x = rng.exponential(); tot += x; }
  const double phi = rng.uniform(0.0, 6.283185307179586476925286766559);
  Vector psi = Vector::Zero(8);
  psi(0) = std::sqrt(w[0] / tot);
  psi(4) = std::sqrt(w[1] / tot) * cplx(std::cos(phi), std::sin(phi));
  psi(5) = std::sqrt(w[2] / tot);
  psi(6) = std::sqrt(w[3] / tot);
  psi(7) = std::sqrt(w[4] / tot);
  return psi;
}

// ---- scatter datasets ----

enum class SampleMethod { haar, acin3 };

struct ScatterRow {
  long sample_id;
  double tangle;      // sqrt(tau3) for 3 qubits, tau4 (h_invariant) for 4
  double corr_norm1;  // trace norm of the full-tuple correlated RDM
};

inline ScatterRow scatter_point(int n_qubits, const Vector& psi, long id) {
  const std::vector<Eigen::Index> dims(n_qubits, 2);
  cumulants::SiteTuple sites(n_qubits);
  for (int j = 0; j < n_qubits; ++j) sites[j] = j;
  const Matrix rho = psi * psi.adjoint();
  const auto corr = cumulants::correlated_rdm(rho, sites, dims);
  double tangle = 0;
  if (n_qubits == 3)
    tangle = std::sqrt(std::max(0.0, tau3_pure(psi)));
  else if (n_qubits == 4)
    tangle = tau4_pure(psi, FourTangle::h_invariant);
  else
    throw std::invalid_argument("scatter_point: supports 3 or 4 qubits");
  return {id, tangle, cumulants::corr_norm(corr, 1.0)};
}

// Random-state scatter of (tangle, correlation norm); sample i draws from an
// independently derived stream so the dataset is order-independent.
inline std::vector<ScatterRow> scatter_dataset(
    int n_qubits, long samples, std::uint64_t seed,
    SampleMethod method = SampleMethod::haar) {
  if (n_qubits != 3 && n_qubits != 4)
    throw std::invalid_argument("scatter_dataset: supports 3 or 4 qubits");
  if (method == SampleMethod::acin3 && n_qubits != 3)
    throw std::invalid_argument("scatter_dataset: acin3 sampling is 3-qubit");
  std::vector<ScatterRow> rows;
  rows.reserve(samples);
  for (long i = 0; i < samples; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const Vector psi = method == SampleMethod::acin3 ? acin3_state(rng)
                                                     : haar_state(n_qubits, rng);
    rows.push_back(scatter_point(n_qubits, psi, i));
  }
  return rows;
}

struct FamilyRow {
  double alpha;
  double tangle;
  double corr_norm1;
  std::string family;
};

/// Analytic one-parameter families overlaid on the three-qubit scatter:
// (a) alpha|000> + beta|111>, (b) alpha|000> + beta|W>.
inline std::vector<FamilyRow> family_curves(int points = 201) {
  std::vector<FamilyRow> rows;
  const double inv_sqrt3 = 0.57735026918962576451;
  for (int i = 0; i < points; ++i) {
    const double alpha = double(i) / (points - 1);
    const double beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
    Vector two = Vector::Zero(8);
    two(0) = alpha;
    two(7) = beta;
    Vector wmix = Vector::Zero(8);
    wmix(0) = alpha;
    wmix(4) = wmix(2) = wmix(1) = beta * inv_sqrt3;
    const auto a = scatter_point(3, two, i);
    const auto b = scatter_point(3, wmix, i);
    rows.push_back({alpha, a.tangle, a.corr_norm1, "two_component"});
    rows.push_back({alpha, b.tangle, b.corr_norm1, "w_component"});
  }
  return rows;
}

// ---- invariance gate ----

struct SlGateResult {
  double max_rel_change = 0;
  int trials = 0;
  bool passed = false;
};

namespace detail {

inline Matrix random_sl2(Rng& rng) {
  while (true) {
    Matrix a(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a(i, j) = rng.complex_normal();
    const cplx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    if (std::abs(det) < 0.05) continue;  // avoid ill-conditioned draws
    return a / std::sqrt(det);
  }
}

}  // namespace detail

// Verifies that a homogeneous polynomial measure is invariant under random
// determinant-1 local operations, evaluated on the unnormalized transformed
// vector.  Gate for any measure before it is used as a tangle.
inline SlGateResult sl_invariance_gate(
    const std::function<double(const Vector&)>& measure, int n_qubits,
    int trials, std::uint64_t seed, double tol = 1e-7) {
  SlGateResult res;
  res.trials = trials;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Vector psi = haar_state(n_qubits, rng);
    std::vector<Matrix> ops;
    for (int j = 0; j < n_qubits; ++j) ops.push_back(detail::random_sl2(rng));
    const Vector transformed = kron_all(ops) * psi;
    const double before = measure(psi);
    const double after = measure(transformed);
    const double rel = std::abs(after - before) / std::max(before, 1e-12);
    res.max_rel_change = std::max(res.max_rel_change, rel);
  }
  res.passed = res.max_rel_change < tol;
  return res;
}

}  // namespace qcorr::tangles
