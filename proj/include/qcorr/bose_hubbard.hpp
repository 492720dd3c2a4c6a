#pragma once

// Bose-Hubbard chain H = -J sum_i (b†_i b_{i+1} + h.c.) + 1/2 sum_i n_i(n_i-1)
// with periodic boundary, diagonalized exactly in the zero-momentum sector.
// Reduced density matrices are block-diagonal in the local particle number
// n_B, so RDMs, cumulants, norms, and spectra all work blockwise and never
// materialize the (N+1)^q dense operator.  Strong-coupling and ideal-gas
// closed forms provide independent small-J and large-J anchors.

#include <qcorr/cumulants.hpp>
#include <qcorr/lanczos.hpp>
#include <qcorr/linalg.hpp>
#include <qcorr/parallel.hpp>
#include <qcorr/sweep_io.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcorr::bose {

struct BoseParams {
  int n = 9;  // bosons
  int l = 9;  // sites
  double j = 0.1;
};

inline constexpr long basis_guard = 10'000'000;

// ---- packed occupation states ----
// Site i lives in nibble 15-i, so numeric order equals lexicographic order
// and cyclic translations are nibble rotations.  Requires n <= 15, l <= 16.

namespace detail {

inline int site_occ(std::uint64_t s, int i) {
  return static_cast<int>((s >> (4 * (15 - i))) & 0xFull);
}

inline std::uint64_t with_site(std::uint64_t s, int i, int occ) {
  const int sh = 4 * (15 - i);
  return (s & ~(0xFull << sh)) | (std::uint64_t(occ) << sh);
}

// translation |n_0 .. n_{l-1}> -> |n_1 .. n_{l-1} n_0>
inline std::uint64_t rotate_left(std::uint64_t s, int l) {
  const std::uint64_t head = (s >> 60) & 0xFull;
  const std::uint64_t mask = ~0ull << (4 * (16 - l));
  return ((s << 4) & mask) | (head << (4 * (16 - l)));
}

inline std::uint64_t orbit_rep(std::uint64_t s, int l, int& orbit_size) {
  std::uint64_t rep = s, cur = s;
  int period = l;
  for (int r = 1; r <= l; ++r) {
    cur = rotate_left(cur, l);
    if (cur == s && r < period) period = r;
    if (cur < rep) rep = cur;
  }
  orbit_size = period;
  return rep;
}

inline unsigned long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned long long>(n - k + i) / i;
  return r;
}

}  // namespace detail

struct FockBasis {
  int n = 0, l = 0;
  std::vector<std::uint64_t> states;  // all occupation states, lex ascending
  std::vector<std::uint64_t> reps;    // zero-momentum orbit reps, lex ascending
  std::vector<int> orbit_sizes;       // parallel to reps

  long full_dim() const { return static_cast<long>(states.size()); }
  long sector_dim() const { return static_cast<long>(reps.size()); }

  long state_index(std::uint64_t s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s)
      throw std::logic_error("FockBasis: state not in basis");
    return static_cast<long>(it - states.begin());
  }
  long rep_index(std::uint64_t s) const {
    const auto it = std::lower_bound(reps.begin(), reps.end(), s);
    if (it == reps.end() || *it != s)
      throw std::logic_error("FockBasis: representative not in sector");
    return static_cast<long>(it - reps.begin());
  }
};

// Full Fock enumeration plus zero-momentum orbit representatives.  The
// dimension guard protects against accidental exponential requests.
inline FockBasis build_basis(int n, int l) {
  if (n < 1 || l < 1) throw std::invalid_argument("build_basis: N, L positive");
  if (n > 15 || l > 16)
    throw std::invalid_argument("build_basis: supports N <= 15, L <= 16");
  const unsigned long long dim = detail::binomial(n + l - 1, n);
  if (dim > static_cast<unsigned long long>(basis_guard))
    throw std::invalid_argument("build_basis: dimension " + std::to_string(dim) +
                                " exceeds guard " + std::to_string(basis_guard));
  FockBasis basis;
  basis.n = n;
  basis.l = l;
  basis.states.reserve(dim);

  // lexicographic enumeration of compositions of n into l parts
  std::vector<int> occ(static_cast<std::size_t>(l), 0);
  const auto emit = [&](const auto& self, int site, int remaining) -> void {
    if (site == l - 1) {
      if (remaining > 15) return;  // cannot happen for n <= 15
      occ[static_cast<std::size_t>(site)] = remaining;
      std::uint64_t s = 0;
      for (int i = 0; i < l; ++i)
        s = detail::with_site(s, i, occ[static_cast<std::size_t>(i)]);
      basis.states.push_back(s);
      return;
    }
    for (int k = 0; k <= std::min(remaining, 15); ++k) {
      occ[static_cast<std::size_t>(site)] = k;
      self(self, site + 1, remaining - k);
    }
  };
  emit(emit, 0, n);

  for (std::uint64_t s : basis.states) {
    int size = 0;
    if (detail::orbit_rep(s, l, size) == s) {
      basis.reps.push_back(s);
      basis.orbit_sizes.push_back(size);
    }
  }
  return basis;
}

// Zero-momentum Hamiltonian in compressed sparse rows.  Hopping amplitudes
// exclude the -J factor so one structure serves the whole sweep; diagonal is
// the interaction 1/2 sum n(n-1).
struct SectorHamiltonian {
  std::vector<double> diag;
  std::vector<long> row_ptr;
  std::vector<long> col;
  std::vector<double> amp;

  void apply(double j, const RealVector& v, RealVector& out) const {
    const long dim = static_cast<long>(diag.size());
    for (long t = 0; t < dim; ++t) {
      double acc = diag[static_cast<std::size_t>(t)] * v(t);
      for (long e = row_ptr[static_cast<std::size_t>(t)];
           e < row_ptr[static_cast<std::size_t>(t) + 1]; ++e)
        acc -= j * amp[static_cast<std::size_t>(e)] * v(col[static_cast<std::size_t>(e)]);
      out(t) = acc;
    }
  }
};

inline SectorHamiltonian build_hamiltonian(const FockBasis& basis) {
  const int l = basis.l;
  SectorHamiltonian h;
  const long dim = basis.sector_dim();
  h.diag.resize(static_cast<std::size_t>(dim));
  h.row_ptr.assign(static_cast<std::size_t>(dim) + 1, 0);
  // per-row assembly; moves from one representative, folded with sqrt(R_s/R_t)
  std::vector<std::pair<long, double>> row;
  for (long s = 0; s < dim; ++s) {
    const std::uint64_t st = basis.reps[static_cast<std::size_t>(s)];
    double inter = 0;
    for (int i = 0; i < l; ++i) {
      const double ni = detail::site_occ(st, i);
      inter += 0.5 * ni * (ni - 1.0);
    }
    h.diag[static_cast<std::size_t>(s)] = inter;

    row.clear();
    const double rs = basis.orbit_sizes[static_cast<std::size_t>(s)];
    for (int i = 0; i < l; ++i) {
      const int ip = (i + 1) % l;
      const int ni = detail::site_occ(st, i), np = detail::site_occ(st, ip);
      // b†_{i+1} b_i
      if (ni > 0 && np < 15) {
        const std::uint64_t u =
            detail::with_site(detail::with_site(st, i, ni - 1), ip, np + 1);
        int rt_size = 0;
        const std::uint64_t rep = detail::orbit_rep(u, l, rt_size);
        row.emplace_back(basis.rep_index(rep),
                         std::sqrt(double(ni) * (np + 1.0)) *
                             std::sqrt(rs / double(rt_size)));
      }
      // b†_i b_{i+1}
      if (np > 0 && ni < 15) {
        const std::uint64_t u =
            detail::with_site(detail::with_site(st, i, ni + 1), ip, np - 1);
        int rt_size = 0;
        const std::uint64_t rep = detail::orbit_rep(u, l, rt_size);
        row.emplace_back(basis.rep_index(rep),
                         std::sqrt(double(np) * (ni + 1.0)) *
                             std::sqrt(rs / double(rt_size)));
      }
    }
    std::sort(row.begin(), row.end());
    // merge duplicate columns
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0 && row[k].first == row[k - 1].first) {
        h.amp.back() += row[k].second;
      } else {
        h.col.push_back(row[k].first);
        h.amp.push_back(row[k].second);
      }
    }
    h.row_ptr[static_cast<std::size_t>(s) + 1] = static_cast<long>(h.col.size());
  }
  return h;
}

struct BoseGround {
  RealVector full;  // expansion over FockBasis::states
  double energy = 0;
  double residual = 0;
};

// Lanczos ground state on the zero-momentum sector, expanded back to the
// full Fock basis with the deterministic sign convention.
inline BoseGround ground_state(const BoseParams& params, const FockBasis& basis,
                               const SectorHamiltonian& h,
                               const RealVector* warm_start = nullptr,
                               std::uint64_t seed = 4242) {
  if (params.j < 0) throw std::invalid_argument("ground_state: J >= 0");
  const long dim = basis.sector_dim();
  lanczos::LanczosOptions opt;
  opt.tol = 1e-12;
  opt.max_iter = 300;
  opt.restarts = 2;
  opt.seed = seed;
  const auto apply = [&](const RealVector& v, RealVector& out) {
    h.apply(params.j, v, out);
  };
  const auto res = lanczos::lowest_eigenpair(dim, apply, opt, warm_start);
  if (res.residual > 1e-10)
    throw std::runtime_error("ground_state: Lanczos residual " +
                             std::to_string(res.residual) + " exceeds 1e-10");

  BoseGround gs;
  gs.energy = res.value;
  gs.residual = res.residual;
  gs.full = RealVector::Zero(basis.full_dim());
  RealVector sector = res.vector;
  Eigen::Index imax = 0;
  sector.cwiseAbs().maxCoeff(&imax);
  if (sector(imax) < 0) sector = -sector;
  for (long s = 0; s < dim; ++s) {
    const int size = basis.orbit_sizes[static_cast<std::size_t>(s)];
    const double a = sector(s) / std::sqrt(double(size));
    std::uint64_t cur = basis.reps[static_cast<std::size_t>(s)];
    for (int r = 0; r < size; ++r) {
      gs.full(basis.state_index(cur)) = a;
      cur = detail::rotate_left(cur, basis.l);
    }
  }
  return gs;
}

inline BoseGround ground_state(const BoseParams& params) {
  const FockBasis basis = build_basis(params.n, params.l);
  const SectorHamiltonian h = build_hamiltonian(basis);
  return ground_state(params, basis, h);
}

// ---- blockwise reduced density matrices ----

// local configurations of q bosonic sites grouped by particle number
struct LocalConfigs {
  int q = 0, nmax = 0;
  std::vector<std::vector<std::array<int, 4>>> configs;  // per n_b, lex order
  std::vector<int> block_of, offset_of;                  // by packed key

  int key(const std::array<int, 4>& c) const {
    int k = 0;
    for (int i = 0; i < q; ++i) k = k * (nmax + 1) + c[static_cast<std::size_t>(i)];
    return k;
  }
};

inline LocalConfigs make_local_configs(int q, int nmax) {
  if (q < 1 || q > 4) throw std::invalid_argument("make_local_configs: q in 1..4");
  LocalConfigs lc;
  lc.q = q;
  lc.nmax = nmax;
  // cumulants have support beyond total occupation nmax (products of
  // marginals reach q * nmax), so the whole (nmax+1)^q space is indexed
  lc.configs.resize(static_cast<std::size_t>(q) * static_cast<std::size_t>(nmax) + 1);
  int span = 1;
  for (int i = 0; i < q; ++i) span *= nmax + 1;
  lc.block_of.assign(static_cast<std::size_t>(span), -1);
  lc.offset_of.assign(static_cast<std::size_t>(span), -1);
  std::array<int, 4> c{0, 0, 0, 0};
  const auto emit = [&](const auto& self, int site, int remaining) -> void {
    if (site == q - 1) {
      if (remaining > nmax) return;
      c[static_cast<std::size_t>(site)] = remaining;
      const int nb = remaining + [&] {
        int t = 0;
        for (int i = 0; i < q - 1; ++i) t += c[static_cast<std::size_t>(i)];
        return t;
      }();
      auto& blk = lc.configs[static_cast<std::size_t>(nb)];
      lc.block_of[static_cast<std::size_t>(lc.key(c))] = nb;
      lc.offset_of[static_cast<std::size_t>(lc.key(c))] =
          static_cast<int>(blk.size());
      blk.push_back(c);
      return;
    }
    for (int k = 0; k <= std::min(remaining, nmax); ++k) {
      c[static_cast<std::size_t>(site)] = k;
      self(self, site + 1, remaining - k);
    }
  };
  for (int nb = 0; nb <= q * nmax; ++nb) emit(emit, 0, nb);
  return lc;
}

// Block-diagonal operator on a site tuple; blocks labeled by the local
// particle number n_B = 0..q*nmax.  Density matrices only populate
// n_B <= nmax; cumulant parts carry weight in the higher blocks too.
struct BoseRDM {
  cumulants::SiteTuple sites;
  int q = 0;
  int nmax = 0;  // total particle number N
  std::vector<RealMatrix> blocks;

  double trace() const {
    double t = 0;
    for (const auto& b : blocks) t += b.trace();
    return t;
  }
};

inline BoseRDM zero_like(const cumulants::SiteTuple& sites, int q, int nmax) {
  BoseRDM op;
  op.sites = sites;
  op.q = q;
  op.nmax = nmax;
  const LocalConfigs lc = make_local_configs(q, nmax);
  op.blocks.reserve(lc.configs.size());
  for (const auto& cfgs : lc.configs) {
    const auto d = static_cast<Eigen::Index>(cfgs.size());
    op.blocks.push_back(RealMatrix::Zero(d, d));
  }
  return op;
}

// Partial trace of the pure ground state over all sites outside the tuple,
// assembled per environment configuration so only same-block pairs meet.
inline BoseRDM bose_rdm(const RealVector& full, const FockBasis& basis,
                        const cumulants::SiteTuple& sites) {
  cumulants::check_site_tuple(sites, "bose_rdm");
  const int q = static_cast<int>(sites.size());
  if (q > 4) throw std::invalid_argument("bose_rdm: q <= 4");
  for (int s : sites)
    if (s < 0 || s >= basis.l)
      throw std::out_of_range("bose_rdm: site outside chain");
  if (full.size() != basis.full_dim())
    throw std::invalid_argument("bose_rdm: state/basis mismatch");

  std::vector<int> env_sites;
  for (int i = 0; i < basis.l; ++i)
    if (std::find(sites.begin(), sites.end(), i) == sites.end())
      env_sites.push_back(i);

  struct Entry {
    std::uint64_t env;
    int loc;
    double amp;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(basis.full_dim()));
  const LocalConfigs lc = make_local_configs(q, basis.n);
  for (long i = 0; i < basis.full_dim(); ++i) {
    const double a = full(i);
    if (a == 0.0) continue;
    const std::uint64_t st = basis.states[static_cast<std::size_t>(i)];
    std::array<int, 4> c{0, 0, 0, 0};
    for (int k = 0; k < q; ++k) c[static_cast<std::size_t>(k)] = detail::site_occ(st, sites[static_cast<std::size_t>(k)]);
    std::uint64_t env = 0;
    for (std::size_t k = 0; k < env_sites.size(); ++k)
      env = detail::with_site(env, static_cast<int>(k),
                              detail::site_occ(st, env_sites[k]));
    entries.push_back({env, lc.key(c), a});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.env != b.env ? a.env < b.env : a.loc < b.loc;
  });

  BoseRDM rho = zero_like(sites, q, basis.n);
  std::size_t lo = 0;
  while (lo < entries.size()) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].env == entries[lo].env) ++hi;
    for (std::size_t a = lo; a < hi; ++a) {
      const int nb = lc.block_of[static_cast<std::size_t>(entries[a].loc)];
      const int ia = lc.offset_of[static_cast<std::size_t>(entries[a].loc)];
      for (std::size_t b = lo; b < hi; ++b) {
        // same environment implies the same local particle number
        const int ib = lc.offset_of[static_cast<std::size_t>(entries[b].loc)];
        rho.blocks[static_cast<std::size_t>(nb)](ia, ib) +=
            entries[a].amp * entries[b].amp;
      }
    }
    lo = hi;
  }
  if (std::abs(rho.trace() - 1.0) > 1e-12)
    throw std::runtime_error("bose_rdm: trace deviates from one");
  return rho;
}

// partial trace within the tuple: keep the given positions (ascending)
inline BoseRDM bose_partial_trace(const BoseRDM& op, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("bose_partial_trace: keep empty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= op.q)
      throw std::out_of_range("bose_partial_trace: position out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw std::invalid_argument("bose_partial_trace: keep must ascend");
  }
  const int qk = static_cast<int>(keep.size());
  cumulants::SiteTuple new_sites;
  for (int p : keep) new_sites.push_back(op.sites[static_cast<std::size_t>(p)]);
  std::vector<int> traced;
  for (int p = 0; p < op.q; ++p)
    if (std::find(keep.begin(), keep.end(), p) == keep.end()) traced.push_back(p);

  const LocalConfigs lc_in = make_local_configs(op.q, op.nmax);
  const LocalConfigs lc_out = make_local_configs(qk, op.nmax);
  BoseRDM res = zero_like(new_sites, qk, op.nmax);
  for (int nb = 0; nb < static_cast<int>(op.blocks.size()); ++nb) {
    const auto& cfgs = lc_in.configs[static_cast<std::size_t>(nb)];
    const auto& blk = op.blocks[static_cast<std::size_t>(nb)];
    for (std::size_t a = 0; a < cfgs.size(); ++a)
      for (std::size_t b = 0; b < cfgs.size(); ++b) {
        const double v = blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v == 0.0) continue;
        bool same_env = true;
        for (int t : traced)
          if (cfgs[a][static_cast<std::size_t>(t)] != cfgs[b][static_cast<std::size_t>(t)]) {
            same_env = false;
            break;
          }
        if (!same_env) continue;
        std::array<int, 4> ca{0, 0, 0, 0}, cb{0, 0, 0, 0};
        for (int i = 0; i < qk; ++i) {
          ca[static_cast<std::size_t>(i)] = cfgs[a][static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];
          cb[static_cast<std::size_t>(i)] = cfgs[b][static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];
        }
        const int ka = lc_out.key(ca), kb = lc_out.key(cb);
        res.blocks[static_cast<std::size_t>(lc_out.block_of[static_cast<std::size_t>(ka)])](
            lc_out.offset_of[static_cast<std::size_t>(ka)],
            lc_out.offset_of[static_cast<std::size_t>(kb)]) += v;
      }
  }
  return res;
}

namespace detail {

// product of cumulant factors on disjoint position blocks, embedded on the
// full tuple, evaluated blockwise
inline void subtract_partition_product(const std::vector<BoseRDM>& kappa_by_mask,
                                       const std::vector<unsigned>& partition,
                                       const LocalConfigs& lc, BoseRDM& target) {
  const int q = target.q;
  std::vector<std::vector<int>> block_positions;
  std::vector<LocalConfigs> block_lc;
  for (unsigned bm : partition) {
    std::vector<int> pos;
    for (int p = 0; p < q; ++p)
      if (bm & (1u << p)) pos.push_back(p);
    block_lc.push_back(make_local_configs(static_cast<int>(pos.size()), target.nmax));
    block_positions.push_back(std::move(pos));
  }
  for (int nb = 0; nb < static_cast<int>(target.blocks.size()); ++nb) {
    const auto& cfgs = lc.configs[static_cast<std::size_t>(nb)];
    auto& out = target.blocks[static_cast<std::size_t>(nb)];
    for (std::size_t a = 0; a < cfgs.size(); ++a)
      for (std::size_t b = 0; b < cfgs.size(); ++b) {
        double prod = 1.0;
        for (std::size_t bi = 0; bi < partition.size() && prod != 0.0; ++bi) {
          const auto& pos = block_positions[bi];
          const auto& factor = kappa_by_mask[partition[bi]];
          const LocalConfigs& flc = block_lc[bi];
          std::array<int, 4> ca{0, 0, 0, 0}, cb{0, 0, 0, 0};
          int na = 0, nbb = 0;
          for (std::size_t i = 0; i < pos.size(); ++i) {
            ca[i] = cfgs[a][static_cast<std::size_t>(pos[i])];
            cb[i] = cfgs[b][static_cast<std::size_t>(pos[i])];
            na += ca[i];
            nbb += cb[i];
          }
          if (na != nbb) {
            prod = 0.0;
            break;
          }
          prod *= factor.blocks[static_cast<std::size_t>(na)](
              flc.offset_of[static_cast<std::size_t>(flc.key(ca))],
              flc.offset_of[static_cast<std::size_t>(flc.key(cb))]);
        }
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -= prod;
      }
  }
}

}  // namespace detail

// Correlated (cumulant) part of a joint BoseRDM: the blockwise analogue of
// the qubit engine, recursing over set partitions of the tuple positions.
inline BoseRDM bose_cumulant(const BoseRDM& joint) {
  const int q = joint.q;
  const unsigned full = (1u << q) - 1;
  std::vector<BoseRDM> kappa(static_cast<std::size_t>(full) + 1);
  std::vector<unsigned> masks;
  for (unsigned m = 1; m <= full; ++m) masks.push_back(m);
  std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (unsigned mask : masks) {
    std::vector<int> pos;
    for (int p = 0; p < q; ++p)
      if (mask & (1u << p)) pos.push_back(p);
    BoseRDM marg = (mask == full) ? joint : bose_partial_trace(joint, pos);
    const LocalConfigs lc = make_local_configs(static_cast<int>(pos.size()), joint.nmax);
    for (const auto& partition : cumulants::detail::partitions_of(mask)) {
      if (partition.size() < 2) continue;
      // remap partition blocks to positions within this mask
      std::vector<unsigned> local_partition;
      for (unsigned bm : partition) {
        unsigned lm = 0;
        int li = 0;
        for (int p = 0; p < q; ++p) {
          if (!(mask & (1u << p))) continue;
          if (bm & (1u << p)) lm |= (1u << li);
          ++li;
        }
        local_partition.push_back(lm);
      }
      // factors indexed by masks local to this tuple subset
      std::vector<BoseRDM> by_local(static_cast<std::size_t>(1u << pos.size()));
      for (std::size_t bi = 0; bi < partition.size(); ++bi)
        by_local[local_partition[bi]] = kappa[partition[bi]];
      detail::subtract_partition_product(by_local, local_partition, lc, marg);
    }
    kappa[mask] = std::move(marg);
  }
  BoseRDM& result = kappa[full];
  // blockwise symmetrization mirrors the qubit engine
  for (auto& b : result.blocks) b = 0.5 * (b + b.transpose()).eval();
  if (std::abs(result.trace()) > 1e-10)
    throw std::runtime_error("bose_cumulant: trace failed to cancel");
  return result;
}

inline std::vector<double> bose_spectrum(const BoseRDM& op) {
  std::vector<double> evs;
  for (const auto& b : op.blocks) {
    if (b.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(b, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("bose_spectrum: eigensolver failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      evs.push_back(es.eigenvalues()(i));
  }
  std::sort(evs.begin(), evs.end(), std::greater<double>());
  return evs;
}

inline double bose_norm(const BoseRDM& op, double p) {
  if (std::isnan(p) || p < 1.0)
    throw std::invalid_argument("bose_norm: p must be >= 1");
  const auto evs = bose_spectrum(op);
  if (std::isinf(p)) {
    double m = 0;
    for (double e : evs) m = std::max(m, std::abs(e));
    return m;
  }
  double acc = 0;
  for (double e : evs) acc += std::pow(std::abs(e), p);
  return std::pow(acc, 1.0 / p);
}

// dense embedding on the (nmax+1)^q product space, for oracle comparisons
inline Matrix blocks_to_dense(const BoseRDM& op) {
  const LocalConfigs lc = make_local_configs(op.q, op.nmax);
  Eigen::Index span = 1;
  for (int i = 0; i < op.q; ++i) span *= op.nmax + 1;
  Matrix dense = Matrix::Zero(span, span);
  for (int nb = 0; nb < static_cast<int>(op.blocks.size()); ++nb) {
    const auto& cfgs = lc.configs[static_cast<std::size_t>(nb)];
    const auto& blk = op.blocks[static_cast<std::size_t>(nb)];
    for (std::size_t a = 0; a < cfgs.size(); ++a)
      for (std::size_t b = 0; b < cfgs.size(); ++b)
        dense(lc.key(cfgs[a]), lc.key(cfgs[b])) =
            blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return dense;
}

// ---- analytic anchors ----

enum class ScWhich { q2_d1, q2_d2, q3_d11 };

// Leading-order cumulant eigenvalues from the strong-coupling expansion at
// integer filling n.  The nominally duplicated second pair for q=2, d=2 is
// a genuine pair of distinct eigenvalue pairs with equal magnitude.
inline std::vector<double> strong_coupling_eigs(int n, double j, ScWhich which) {
  if (n < 1) throw std::invalid_argument("strong_coupling_eigs: n >= 1");
  const double nn = double(n) * (n + 1.0);
  switch (which) {
    case ScWhich::q2_d1: {
      const double a = std::sqrt(2.0 * nn) * j;
      return {a, -a};
    }
    case ScWhich::q2_d2: {
      const double a = nn * j * j;
      const double b = (2.0 * n + 1.0) * std::sqrt(2.0 * nn) * j * j;
      return {a, -a, a, -a, b, -b};
    }
    case ScWhich::q3_d11: {
      const double a = 2.0 * nn * j * j;
      const double b = nn * j * j;
      const double c =
          (2.0 / 3.0) * std::sqrt(nn * (2.0 * n * n + 2.0 * n - 1.0)) * j * j;
      return {a, -a, b, -b, b, -b, c, -c};
    }
  }
  throw std::invalid_argument("strong_coupling_eigs: unknown selector");
}

// Leading-order norms; supported combinations follow the eigenvalue list.
inline double strong_coupling_norm(int n, double j, int q, double p, int d = 1) {
  if (n < 1) throw std::invalid_argument("strong_coupling_norm: n >= 1");
  const double nn = double(n) * (n + 1.0);
  if (q == 2 && d == 1 && p == 1.0) return 2.0 * std::sqrt(2.0 * nn) * j;
  if (q == 2 && d == 1 && p == 2.0) return 2.0 * std::sqrt(nn) * j;
  if (q == 2 && d == 2 && p == 1.0)
    return 2.0 * (2.0 * nn + (2.0 * n + 1.0) * std::sqrt(2.0 * nn)) * j * j;
  if (q == 2 && d == 2 && p == 2.0)
    return 2.0 * std::sqrt(nn * (5.0 * n * n + 5.0 * n + 1.0)) * j * j;
  if (q == 3 && d == 1 && p == 1.0)
    return (8.0 * nn +
            (4.0 / 3.0) * std::sqrt(nn * (2.0 * n * n + 2.0 * n - 1.0))) *
           j * j;
  if (q == 3 && d == 1 && p == 2.0)
    return (2.0 / 3.0) * std::sqrt(nn * (31.0 * nn - 2.0)) * j * j;
  throw std::invalid_argument("strong_coupling_norm: unsupported (q,p,d)");
}

// J -> infinity reduced density matrix at finite N, L; entries depend only
// on q, not on the distances.
inline BoseRDM ideal_gas_rdm(int n, int l, int q) {
  if (q < 1 || q > 4) throw std::invalid_argument("ideal_gas_rdm: q in 1..4");
  if (n < 1 || l < q) throw std::invalid_argument("ideal_gas_rdm: bad N or L");
  cumulants::SiteTuple sites;
  for (int i = 0; i < q; ++i) sites.push_back(i);
  BoseRDM rho = zero_like(sites, q, n);
  const LocalConfigs lc = make_local_configs(q, n);
  const auto fact = [](int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  for (int nb = 0; nb <= n; ++nb) {
    const auto& cfgs = lc.configs[static_cast<std::size_t>(nb)];
    const double shell = double(detail::binomial(n, nb)) *
                         std::pow(1.0 - double(q) / l, double(n - nb)) *
                         std::pow(1.0 / l, double(nb));
    for (std::size_t a = 0; a < cfgs.size(); ++a) {
      double wa = fact(nb);
      for (int i = 0; i < q; ++i) wa /= fact(cfgs[a][static_cast<std::size_t>(i)]);
      for (std::size_t b = 0; b < cfgs.size(); ++b) {
        double wb = fact(nb);
        for (int i = 0; i < q; ++i) wb /= fact(cfgs[b][static_cast<std::size_t>(i)]);
        rho.blocks[static_cast<std::size_t>(nb)](static_cast<Eigen::Index>(a),
                                                 static_cast<Eigen::Index>(b)) =
            shell * std::sqrt(wa * wb);
      }
    }
  }
  return rho;
}

// thermodynamic-limit 2-norms of the ideal-gas cumulants at filling nbar
inline double ideal_gas_norm2_thermo(double nbar, int q) {
  if (nbar <= 0) throw std::invalid_argument("ideal_gas_norm2_thermo: nbar > 0");
  const double i2 = std::cyl_bessel_i(0.0, 2.0 * nbar);
  if (q == 2) {
    const double i4 = std::cyl_bessel_i(0.0, 4.0 * nbar);
    return std::sqrt(i4 - i2 * i2) * std::exp(-2.0 * nbar);
  }
  if (q == 3) {
    const double i4 = std::cyl_bessel_i(0.0, 4.0 * nbar);
    const double i6 = std::cyl_bessel_i(0.0, 6.0 * nbar);
    return std::sqrt(i6 - 3.0 * i2 * i4 + 2.0 * i2 * i2 * i2) *
           std::exp(-3.0 * nbar);
  }
  throw std::invalid_argument("ideal_gas_norm2_thermo: q in {2,3}");
}

// ---- sweep driver ----

struct BoseSweepOptions {
  int n = 9, l = 9;
  std::vector<double> grid;
  std::vector<cumulants::SiteTuple> tuples = {
      {0, 1}, {0, 2}, {0, 3}, {0, 1, 2}, {0, 1, 2, 3}};
  std::vector<double> p_values = {1.0, 2.0};
  bool spectra = false;
  bool overlays = true;
  int spectrum_rows = 8;  // leading positive and negative eigenvalues each
};

struct BoseNormRow {
  double j = 0;
  std::string quantity;
  int q = 0;
  std::array<int, 3> d{0, 0, 0};
  double value = 0;
  int n = 0, l = 0;
};

namespace detail {

inline std::array<int, 3> tuple_distances(const cumulants::SiteTuple& t) {
  std::array<int, 3> d{0, 0, 0};
  for (std::size_t i = 1; i < t.size() && i <= 3; ++i)
    d[i - 1] = t[i] - t[i - 1];
  return d;
}

}  // namespace detail

// Ground state, cumulant norms, and analytic overlays per grid point.  The
// loop is sequential so each Lanczos run warm-starts from the previous
// coupling; per-point results are deterministic either way.
inline std::vector<BoseNormRow> bose_sweep(const BoseSweepOptions& opt) {
  const FockBasis basis = build_basis(opt.n, opt.l);
  const SectorHamiltonian h = build_hamiltonian(basis);
  std::vector<BoseNormRow> rows;
  const int filling = (opt.n % opt.l == 0) ? opt.n / opt.l : 0;

  struct Overlay {
    int q;
    double p, value;
  };
  std::vector<Overlay> ibg_norms;
  if (opt.overlays) {
    for (int q : {2, 3, 4}) {
      const BoseRDM rho = ideal_gas_rdm(opt.n, opt.l, q);
      const BoseRDM corr = bose_cumulant(rho);
      for (double p : opt.p_values)
        ibg_norms.push_back({q, p, bose_norm(corr, p)});
    }
  }

  RealVector warm;
  const RealVector* warm_ptr = nullptr;
  for (double j : opt.grid) {
    const BoseParams params{opt.n, opt.l, j};
    const BoseGround gs = ground_state(params, basis, h, warm_ptr);
    // re-express in the sector for the next warm start
    warm = RealVector::Zero(basis.sector_dim());
    for (long s = 0; s < basis.sector_dim(); ++s)
      warm(s) = gs.full(basis.state_index(basis.reps[static_cast<std::size_t>(s)])) *
                std::sqrt(double(basis.orbit_sizes[static_cast<std::size_t>(s)]));
    warm_ptr = &warm;

    for (const auto& tuple : opt.tuples) {
      const int q = static_cast<int>(tuple.size());
      const auto d = detail::tuple_distances(tuple);
      const BoseRDM rho = bose_rdm(gs.full, basis, tuple);
      const BoseRDM corr = bose_cumulant(rho);
      for (double p : opt.p_values)
        rows.push_back({j, "norm_p" + io::fmt_g(p), q, d, bose_norm(corr, p),
                        opt.n, opt.l});
      if (opt.spectra) {
        const auto evs = bose_spectrum(corr);
        const int take = std::min<int>(opt.spectrum_rows,
                                       static_cast<int>(evs.size() / 2));
        for (int i = 0; i < take; ++i) {
          rows.push_back({j, "eig_" + std::to_string(i), q, d,
                          evs[static_cast<std::size_t>(i)], opt.n, opt.l});
          rows.push_back({j, "eig_neg_" + std::to_string(i), q, d,
                          evs[evs.size() - 1 - static_cast<std::size_t>(i)],
                          opt.n, opt.l});
        }
      }
      if (opt.overlays && filling >= 1) {
        const bool supported = (q == 2 && (d[0] == 1 || d[0] == 2)) ||
                               (q == 3 && d[0] == 1 && d[1] == 1);
        if (supported)
          for (double p : opt.p_values)
            rows.push_back({j, "sc_norm_p" + io::fmt_g(p), q, d,
                            strong_coupling_norm(filling, j, q, p, d[0]),
                            opt.n, opt.l});
      }
    }
    if (opt.overlays)
      for (const auto& o : ibg_norms)
        rows.push_back({j, "ibg_norm_p" + io::fmt_g(o.p), o.q,
                        {0, 0, 0}, o.value, opt.n, opt.l});
  }
  return rows;
}

}  // namespace qcorr::bose
