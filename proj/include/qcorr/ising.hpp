#pragma once

// Ground-state correlations of the transverse-field XY chain.
//
// Internal convention (the "xy" basis):
//   H = -J sum_l [ (1+g)/2 sx_l sx_{l+1} + (1-g)/2 sy_l sy_{l+1} ] - sum_l sz_l
// mapped by Jordan-Wigner (spin up = fermion vacuum, sz = 1 - 2 c†c) onto
// free fermions in the even-parity (antiperiodic) sector:
//   eps_k = 2 - 2 J cos k,  del_k = 2 J g sin k,  om_k = sqrt(eps^2 + del^2),
//   k = (2m-1) pi / L, m = 1..L/2.
// The g = 1 main-text convention (z couplings, x field) is the same model
// after a Hadamard rotation on every site; expectation values are mapped by
// relabeling Pauli letters (X <-> Z, Y -> -Y) instead of rotating matrices.
//
// Any Pauli-string expectation reduces by Wick's theorem to the Pfaffian of
// a submatrix of the Majorana contraction matrix M, <a_mu a_nu> = delta + iM.

#include <qcorr/cumulants.hpp>
#include <qcorr/lanczos.hpp>
#include <qcorr/linalg.hpp>
#include <qcorr/parallel.hpp>
#include <qcorr/sweep_io.hpp>
#include <qcorr/tangles.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcorr::ising {

enum class Basis {
  main_text,  // z-z coupling, transverse x field (published curves)
  xy,         // x/y coupling, z field (internal fermion convention)
};

struct XYParams {
  double j = 1.0;
  double gamma = 1.0;
  Eigen::Index length = 0;  // 0 = thermodynamic limit via surrogate length
  Basis basis = Basis::main_text;
};

// surrogate chain length for thermodynamic-limit momentum sums; finer near
// the critical point where correlation lengths diverge
inline Eigen::Index surrogate_length(const XYParams& p) {
  if (p.length > 0) {
    if (p.length % 2 != 0)
      throw std::invalid_argument("surrogate_length: chain length must be even");
    return p.length;
  }
  return std::abs(p.j - 1.0) < 0.05 ? 65536 : 8192;
}

// Momentum-sum engine for one parameter set.  Caches the particle-hole and
// anomalous correlators C(x) = <c†_l c_{l+x}>, F(x) = <c_l c_{l-x}> up to a
// maximal separation.
class FreeFermion {
 public:
  FreeFermion(const XYParams& params, long max_sep = 16)
      : params_(params), max_sep_(max_sep), c_(max_sep + 1, 0.0),
        f_(max_sep + 1, 0.0) {
    if (params.j < 0) throw std::invalid_argument("FreeFermion: J must be >= 0");
    if (params.gamma <= 0 || params.gamma > 1)
      throw std::invalid_argument("FreeFermion: gamma in (0,1]");
    const Eigen::Index l = surrogate_length(params);
    const double pi = 3.14159265358979323846;
    energy_ = 0;
    for (Eigen::Index m = 1; m <= l / 2; ++m) {
      const double k = (2.0 * m - 1.0) * pi / double(l);
      const double eps = 2.0 - 2.0 * params.j * std::cos(k);
      const double del = 2.0 * params.j * params.gamma * std::sin(k);
      const double om = std::hypot(eps, del);
      energy_ -= om;
      const double cth = eps / om, sth = del / om;
      for (long x = 0; x <= max_sep_; ++x) {
        c_[static_cast<std::size_t>(x)] += std::cos(k * x) * (1.0 - cth);
        f_[static_cast<std::size_t>(x)] += std::sin(k * x) * sth;
      }
    }
    for (long x = 0; x <= max_sep_; ++x) {
      c_[static_cast<std::size_t>(x)] /= double(l);
      f_[static_cast<std::size_t>(x)] /= double(l);
    }
  }

  const XYParams& params() const { return params_; }
  long max_separation() const { return max_sep_; }

  // ground energy of the even-parity sector at the surrogate length
  double ground_energy() const { return energy_; }

  double c_corr(long x) const { return c_[static_cast<std::size_t>(std::labs(x))]; }
  double f_corr(long x) const {
    const double v = f_[static_cast<std::size_t>(std::labs(x))];
    return x >= 0 ? v : -v;  // F is odd in the separation
  }

  // G(l,m) with <A_l B_m> = i G(l,m) for Majoranas A = c + c†, B = -i(c - c†)
  double g_corr(long l, long m) const {
    return (l == m ? 1.0 : 0.0) - 2.0 * c_corr(m - l) - 2.0 * f_corr(l - m);
  }

  // Contraction matrix over sites 0..n-1 (Majorana index 2l for A_l,
  // 2l+1 for B_l): <a_mu a_nu> = delta_mu,nu + i M_mu,nu.
  RealMatrix majorana_correlations(long n_sites) const {
    if (n_sites < 1 || n_sites - 1 > max_sep_)
      throw std::invalid_argument("majorana_correlations: span exceeds cache");
    RealMatrix m = RealMatrix::Zero(2 * n_sites, 2 * n_sites);
    for (long l = 0; l < n_sites; ++l)
      for (long r = 0; r < n_sites; ++r) {
        const double g = g_corr(l, r);
        m(2 * l, 2 * r + 1) = g;
        m(2 * r + 1, 2 * l) = -g;
      }
    return m;
  }

  // <S> in the internal xy basis for letters over {I,X,Y,Z} on ascending
  // sites.  Strings with an odd number of X/Y letters vanish by spin-flip
  // symmetry before any Pfaffian is touched.
  double expectation_xy(const std::vector<long>& sites,
                        const std::string& letters) const {
    if (sites.size() != letters.size())
      throw std::invalid_argument("expectation_xy: sites/letters mismatch");
    std::vector<long> pos;
    std::vector<char> let;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (i > 0 && sites[i] <= sites[i - 1])
        throw std::invalid_argument("expectation_xy: sites must be ascending");
      const char c = letters[i];
      if (c == 'I') continue;
      if (c != 'X' && c != 'Y' && c != 'Z')
        throw std::invalid_argument("expectation_xy: letters are I,X,Y,Z");
      pos.push_back(sites[i]);
      let.push_back(c);
    }
    if (pos.empty()) return 1.0;
    const long base = pos.front();
    for (long& p : pos) p -= base;
    if (pos.back() > max_sep_)
      throw std::invalid_argument("expectation_xy: span exceeds cache");

    int xy_count = 0;
    for (char c : let)
      if (c != 'Z') ++xy_count;
    if (xy_count % 2 != 0) return 0.0;

    // site-ascending Majorana monomial; each X/Y letter beyond a site flips
    // that site's Jordan-Wigner string, contributing a -i A B pair
    std::vector<long> idx;
    cplx phase(1.0, 0.0);
    const cplx minus_i(0.0, -1.0);
    std::size_t cursor = 0;
    int suffix_xy = xy_count;
    for (long m = 0; m <= pos.back(); ++m) {
      char c = 'I';
      if (cursor < pos.size() && pos[cursor] == m) c = let[cursor++];
      if (c == 'X' || c == 'Y') --suffix_xy;
      if (c == 'X') idx.push_back(2 * m);
      if (c == 'Y') idx.push_back(2 * m + 1);
      if (c == 'Z') {
        idx.push_back(2 * m);
        idx.push_back(2 * m + 1);
        phase *= minus_i;
      }
      if (suffix_xy % 2 != 0) {
        idx.push_back(2 * m);
        idx.push_back(2 * m + 1);
        phase *= minus_i;
      }
    }

    // normal order: bubble sort tracking the permutation sign, then cancel
    // equal adjacent pairs (a^2 = 1)
    double sign = 1.0;
    for (std::size_t i = 1; i < idx.size(); ++i)
      for (std::size_t k = i; k > 0 && idx[k] < idx[k - 1]; --k) {
        std::swap(idx[k], idx[k - 1]);
        sign = -sign;
      }
    std::vector<long> kept;
    for (long v : idx) {
      if (!kept.empty() && kept.back() == v)
        kept.pop_back();
      else
        kept.push_back(v);
    }
    phase *= sign;

    cplx value;
    if (kept.empty()) {
      value = phase;
    } else {
      const Eigen::Index d = static_cast<Eigen::Index>(kept.size());
      RealMatrix sub(d, d);
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
          sub(a, b) = a == b ? 0.0
                             : majorana_entry(kept[static_cast<std::size_t>(a)],
                                              kept[static_cast<std::size_t>(b)]);
      // Wick: <a_1 ... a_2s> = pf(i M_sub) = i^s pf(M_sub)
      cplx ipow(1.0, 0.0);
      for (Eigen::Index s = 0; s < d / 2; ++s) ipow *= cplx(0.0, 1.0);
      value = phase * ipow * pfaffian(sub);
    }
    if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real())))
      throw std::runtime_error("expectation_xy: non-real expectation value");
    return value.real();
  }

  // <S> in the requested basis; main-text letters are mapped through the
  // sitewise Hadamard rotation X <-> Z, Y -> -Y
  double expectation(const std::vector<long>& sites, const std::string& letters,
                     Basis basis) const {
    if (basis == Basis::xy) return expectation_xy(sites, letters);
    std::string mapped = letters;
    double sign = 1.0;
    for (char& c : mapped) {
      if (c == 'X')
        c = 'Z';
      else if (c == 'Z')
        c = 'X';
      else if (c == 'Y')
        sign = -sign;
    }
    return sign * expectation_xy(sites, mapped);
  }

 private:
  double majorana_entry(long mu, long nu) const {
    const bool mu_a = (mu % 2 == 0), nu_a = (nu % 2 == 0);
    if (mu_a == nu_a) return 0.0;  // AA and BB contractions vanish
    if (mu_a) return g_corr(mu / 2, (nu - 1) / 2);
    return -g_corr(nu / 2, (mu - 1) / 2);
  }

  XYParams params_;
  long max_sep_;
  std::vector<double> c_, f_;
  double energy_;
};

namespace detail {

inline void check_tuple(const cumulants::SiteTuple& sites) {
  if (sites.empty() || sites.size() > 4)
    throw std::invalid_argument("reduced_dm: tuple size must be 1..4");
  cumulants::check_site_tuple(sites, "reduced_dm");
}

}  // namespace detail

// rho_q = 2^-q sum_S <S> S over all 4^q Pauli strings on the tuple.
// Validated Hermitian, unit trace, and positive semidefinite to -1e-10.
inline Matrix reduced_dm(const FreeFermion& engine,
                         const cumulants::SiteTuple& sites, Basis basis) {
  detail::check_tuple(sites);
  const int q = static_cast<int>(sites.size());
  const Eigen::Index dim = Eigen::Index(1) << q;
  std::vector<long> lsites(sites.begin(), sites.end());
  Matrix rho = Matrix::Zero(dim, dim);
  const char axis_letter[4] = {'I', 'X', 'Y', 'Z'};
  std::string letters(static_cast<std::size_t>(q), 'I');
  const long n_strings = 1l << (2 * q);
  for (long code = 0; code < n_strings; ++code) {
    long c = code;
    std::vector<Matrix> factors;
    factors.reserve(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) {
      const int axis = static_cast<int>(c & 3);
      c >>= 2;
      letters[static_cast<std::size_t>(i)] = axis_letter[axis];
      factors.push_back(pauli(axis));
    }
    const double ev = engine.expectation(lsites, letters, basis);
    if (ev != 0.0) rho += ev * kron_all(factors);
  }
  rho /= double(dim);
  check_hermitian(rho, "reduced_dm");
  if (std::abs(rho.trace().real() - 1.0) > 1e-12)
    throw std::runtime_error("reduced_dm: trace deviates from one");
  const auto spec = eigh(rho);
  if (spec.values.minCoeff() < -1e-10)
    throw std::runtime_error("reduced_dm: negative eigenvalue beyond tolerance");
  return rho;
}

inline Matrix reduced_dm(const XYParams& params, const cumulants::SiteTuple& sites) {
  detail::check_tuple(sites);
  const FreeFermion engine(params, sites.back() - sites.front() + 2);
  return reduced_dm(engine, sites, params.basis);
}

// ---- exact-diagonalization oracle ----

namespace ed {

struct GroundState {
  RealVector amplitudes;  // full 2^L vector, big-endian site order
  double energy = 0;
  int length = 0;
  double residual = 0;
};

// Ground state of the internal xy Hamiltonian in the even spin-flip sector
// (matching the fermionic antiperiodic sector), bit 0 meaning spin up.
inline GroundState ground_state(double j, double gamma, int length,
                                std::uint64_t seed = 777) {
  if (length < 2 || length > 16)
    throw std::invalid_argument("ed::ground_state: length must be in [2,16]");
  if (length % 2 != 0)
    throw std::invalid_argument("ed::ground_state: length must be even");
  const long dim = 1l << length;
  std::vector<Eigen::Index> sector_index(static_cast<std::size_t>(dim), -1);
  std::vector<long> sector_states;
  sector_states.reserve(static_cast<std::size_t>(dim / 2));
  for (long x = 0; x < dim; ++x)
    if (__builtin_popcountll(static_cast<unsigned long long>(x)) % 2 == 0) {
      sector_index[static_cast<std::size_t>(x)] =
          static_cast<Eigen::Index>(sector_states.size());
      sector_states.push_back(x);
    }
  const Eigen::Index sdim = static_cast<Eigen::Index>(sector_states.size());

  const auto bit = [length](long x, int site) {
    return (x >> (length - 1 - site)) & 1l;
  };
  const auto apply = [&](const RealVector& v, RealVector& out) {
    out.setZero();
    for (Eigen::Index is = 0; is < sdim; ++is) {
      const long x = sector_states[static_cast<std::size_t>(is)];
      const int pop = __builtin_popcountll(static_cast<unsigned long long>(x));
      out(is) += -(length - 2.0 * pop) * v(is);
      for (int l = 0; l < length; ++l) {
        const int m = (l + 1) % length;
        const long bl = bit(x, l), bm = bit(x, m);
        const long y = x ^ ((1l << (length - 1 - l)) | (1l << (length - 1 - m)));
        const double coeff = -(bl == bm ? gamma : 1.0) * j;
        out(sector_index[static_cast<std::size_t>(y)]) += coeff * v(is);
      }
    }
  };

  lanczos::LanczosOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 300;
  opt.restarts = 2;
  opt.seed = seed;
  const auto res = lanczos::lowest_eigenpair(sdim, apply, opt);
  if (!res.converged)
    throw std::runtime_error("ed::ground_state: Lanczos did not converge");

  GroundState gs;
  gs.length = length;
  gs.energy = res.value;
  gs.residual = res.residual;
  gs.amplitudes = RealVector::Zero(dim);
  for (Eigen::Index is = 0; is < sdim; ++is)
    gs.amplitudes(sector_states[static_cast<std::size_t>(is)]) = res.vector(is);
  // deterministic overall sign: largest-magnitude amplitude positive
  Eigen::Index imax = 0;
  gs.amplitudes.cwiseAbs().maxCoeff(&imax);
  if (gs.amplitudes(imax) < 0) gs.amplitudes = -gs.amplitudes;
  return gs;
}

inline Matrix reduced_dm(const GroundState& gs, const cumulants::SiteTuple& sites,
                         Basis basis) {
  detail::check_tuple(sites);
  const std::vector<Eigen::Index> dims(static_cast<std::size_t>(gs.length), 2);
  const Vector psi = gs.amplitudes.cast<cplx>();
  Matrix rho = partial_trace_pure(psi, dims, sites);
  if (basis == Basis::main_text) {
    Matrix had(2, 2);
    had << 1, 1, 1, -1;
    had /= std::sqrt(2.0);
    std::vector<Matrix> hs(sites.size(), had);
    const Matrix rot = kron_all(hs);
    rho = rot * rho * rot;
  }
  return rho;
}

}  // namespace ed

// ---- sweep drivers ----

struct TangleRow {
  double j = 0;
  double c2 = 0, c2_lower = 0, c2_upper = 0;              // roof on rank-2 rho2
  double sqrt_tau3 = 0, sqrt_tau3_lower = 0, sqrt_tau3_upper = 0;
  double tau4 = 0, tau4_lower = 0, tau4_upper = 0;
  double c2_exact = 0;                                    // Wootters, full rho2
  double subdominant2 = 0, subdominant3 = 0, subdominant4 = 0;
  bool roofs_certified = true;
};

/// Entanglement measures of adjacent-site RDMs across a coupling grid:
// exact concurrence plus rank-2 convex-roof values for C2, tau3 (reported
// square-rooted), and the spin-flip four-tangle.
inline std::vector<TangleRow> tangle_sweep(
    const std::vector<double>& grid,
    cumulants::TruncationScheme scheme = cumulants::TruncationScheme::absolute,
    double gamma = 1.0, int threads = 0) {
  std::vector<TangleRow> rows(grid.size());
  parallel::parallel_for(
      static_cast<long>(grid.size()),
      [&](long gi) {
        const double j = grid[static_cast<std::size_t>(gi)];
        XYParams params{j, gamma, 0, Basis::main_text};
        const FreeFermion engine(params, 6);
        TangleRow row;
        row.j = j;

        const Matrix rho2 = reduced_dm(engine, {0, 1}, params.basis);
        const Matrix rho3 = reduced_dm(engine, {0, 1, 2}, params.basis);
        const Matrix rho4 = reduced_dm(engine, {0, 1, 2, 3}, params.basis);
        row.c2_exact = tangles::concurrence(rho2);

        const auto a2 = cumulants::rank2_truncate(rho2, scheme);
        const auto a3 = cumulants::rank2_truncate(rho3, scheme);
        const auto a4 = cumulants::rank2_truncate(rho4, scheme);
        row.subdominant2 = a2.subdominant_sum;
        row.subdominant3 = a3.subdominant_sum;
        row.subdominant4 = a4.subdominant_sum;

        const auto roof2 = tangles::rank2_convex_roof(
            a2, [](const Vector& v) { return tangles::concurrence_pure(v); });
        const auto roof3 = tangles::rank2_convex_roof(
            a3, [](const Vector& v) { return tangles::tau3_pure(v); });
        const auto roof4 = tangles::rank2_convex_roof(a4, [](const Vector& v) {
          return tangles::tau4_pure(v, tangles::FourTangle::h_invariant);
        });
        row.c2 = roof2.value;
        row.c2_lower = roof2.lower;
        row.c2_upper = roof2.upper;
        const auto root = [](double x) { return std::sqrt(std::max(0.0, x)); };
        row.sqrt_tau3 = root(roof3.value);
        row.sqrt_tau3_lower = root(roof3.lower);
        row.sqrt_tau3_upper = root(roof3.upper);
        row.tau4 = roof4.value;
        row.tau4_lower = roof4.lower;
        row.tau4_upper = roof4.upper;
        row.roofs_certified =
            roof2.certified && roof3.certified && roof4.certified;
        rows[static_cast<std::size_t>(gi)] = row;
      },
      threads);
  return rows;
}

struct NormRow {
  double j = 0;
  std::string quantity;
  int q = 0;
  std::array<int, 3> d{0, 0, 0};
  double value = 0;
};

struct NormSweepOptions {
  std::vector<double> grid;
  double gamma = 1.0;
  std::vector<cumulants::SiteTuple> tuples = {
      {0, 1}, {0, 1, 2}, {0, 1, 2, 3}};
  std::vector<double> p_values = {1.0, 2.0};
  bool spectra = false;
  bool concurrence = false;  // exact vs rank-2 rows for q=2 tuples
  int threads = 0;
};

namespace detail {

inline std::array<int, 3> tuple_distances(const cumulants::SiteTuple& t) {
  std::array<int, 3> d{0, 0, 0};
  for (std::size_t i = 1; i < t.size() && i <= 3; ++i)
    d[i - 1] = t[i] - t[i - 1];
  return d;
}

}  // namespace detail

// Long-format norm/spectrum rows of the correlated RDMs across the grid.
inline std::vector<NormRow> norm_sweep(const NormSweepOptions& opt) {
  long max_sep = 4;
  for (const auto& t : opt.tuples)
    max_sep = std::max<long>(max_sep, t.back() - t.front() + 2);
  std::vector<std::vector<NormRow>> buckets(opt.grid.size());
  parallel::parallel_for(
      static_cast<long>(opt.grid.size()),
      [&](long gi) {
        const double j = opt.grid[static_cast<std::size_t>(gi)];
        XYParams params{j, opt.gamma, 0, Basis::main_text};
        const FreeFermion engine(params, max_sep);
        auto& out = buckets[static_cast<std::size_t>(gi)];
        for (const auto& tuple : opt.tuples) {
          const int q = static_cast<int>(tuple.size());
          const auto d = detail::tuple_distances(tuple);
          const Matrix rho = reduced_dm(engine, tuple, params.basis);
          const std::vector<Eigen::Index> dims(tuple.size(), 2);
          const auto corr = cumulants::correlated_rdm(rho, tuple, dims);
          for (double p : opt.p_values) {
            NormRow row{j, "norm_p" + io::fmt_g(p), q, d,
                        cumulants::corr_norm(corr, p)};
            out.push_back(row);
          }
          if (opt.spectra) {
            const auto spec = cumulants::corr_spectrum(corr);
            for (Eigen::Index i = spec.values.size() - 1; i >= 0; --i) {
              NormRow row{j,
                          "eig_" + std::to_string(spec.values.size() - 1 - i),
                          q, d, spec.values(i)};
              out.push_back(row);
            }
          }
          if (q >= 2) {
            const auto approx = cumulants::rank2_truncate(
                rho, cumulants::TruncationScheme::absolute);
            out.push_back({j, "subdominant_sum", q, d, approx.subdominant_sum});
          }
          if (opt.concurrence && q == 2) {
            out.push_back({j, "C2_exact", q, d, tangles::concurrence(rho)});
            for (auto scheme : {cumulants::TruncationScheme::absolute,
                                cumulants::TruncationScheme::renormalized}) {
              const auto approx = cumulants::rank2_truncate(rho, scheme);
              const auto roof = tangles::rank2_convex_roof(
                  approx,
                  [](const Vector& v) { return tangles::concurrence_pure(v); });
              const std::string tag =
                  scheme == cumulants::TruncationScheme::absolute
                      ? "C2_rank2_absolute"
                      : "C2_rank2_renormalized";
              out.push_back({j, tag, q, d, roof.value});
            }
          }
        }
      },
      opt.threads);
  std::vector<NormRow> rows;
  for (auto& b : buckets)
    for (auto& r : b) rows.push_back(std::move(r));
  return rows;
}

}  // namespace qcorr::ising
