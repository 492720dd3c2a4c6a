// Command-line driver: coupling sweeps, random-state scatters, and the
// cross-engine verification suite.  Every output is deterministic for a
// fixed seed; CSV numbers carry 12 significant digits with LF endings.
#include <qcorr/bose_hubbard.hpp>
#include <qcorr/cumulants.hpp>
#include <qcorr/ising.hpp>
#include <qcorr/linalg.hpp>
#include <qcorr/rng.hpp>
#include <qcorr/sweep_io.hpp>
#include <qcorr/tangles.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace qcorr;

namespace {

// worker count from the named environment variable; 0 = all cores
int resolve_threads(const std::string& env_name) {
  const char* raw = std::getenv(env_name.c_str());
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v <= 0) {
    std::cerr << "warning: ignoring non-positive " << env_name << "='" << raw
              << "'\n";
    return 0;
  }
  return static_cast<int>(v);
}

// "1,2,1-1,1-1-1" -> site tuples {0,1}, {0,2}, {0,1,2}, {0,1,2,3}
std::vector<cumulants::SiteTuple> parse_distances(const std::string& text) {
  std::vector<cumulants::SiteTuple> tuples;
  std::stringstream list(text);
  std::string token;
  while (std::getline(list, token, ',')) {
    if (token.empty()) throw std::invalid_argument("empty distance token");
    cumulants::SiteTuple tuple{0};
    std::stringstream gaps(token);
    std::string gap;
    while (std::getline(gaps, gap, '-')) {
      std::size_t used = 0;
      const int d = std::stoi(gap, &used);
      if (used != gap.size() || d < 1)
        throw std::invalid_argument("distances must be positive integers: " +
                                    token);
      tuple.push_back(tuple.back() + d);
    }
    if (tuple.size() > 4)
      throw std::invalid_argument("tuples are limited to 4 sites: " + token);
    tuples.push_back(tuple);
  }
  if (tuples.empty()) throw std::invalid_argument("no distance specs given");
  return tuples;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

// series of `quantity` values for one (q, d) combination, in grid order
template <class Row>
std::vector<double> series_of(const std::vector<Row>& rows,
                              const std::string& quantity, int q,
                              const std::array<int, 3>& d) {
  std::vector<double> y;
  for (const auto& r : rows)
    if (r.quantity == quantity && r.q == q && r.d == d) y.push_back(r.value);
  return y;
}

void report_crossing(const std::vector<double>& grid, const std::string& pname,
                     int qa, const std::vector<double>& a, int qb,
                     const std::vector<double>& b) {
  if (a.size() != grid.size() || b.size() != grid.size()) return;
  const double up = io::locate_crossing(grid, a, b);
  const double down = io::locate_crossing(grid, b, a);
  if (std::isfinite(up))
    std::cout << pname << ": rho" << qa << " rises through rho" << qb
              << " at J = " << fmt(up) << "\n";
  else if (std::isfinite(down))
    std::cout << pname << ": rho" << qb << " rises through rho" << qa
              << " at J = " << fmt(down) << "\n";
  else
    std::cout << pname << ": rho" << qa << " and rho" << qb
              << " do not cross on the grid\n";
}

struct CommonFlags {
  double j_min = 0.0, j_max = 3.0;
  int steps = 600;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string threads_env = "QCORR_THREADS";
};

void add_common(CLI::App* cmd, CommonFlags& f, double j_max_default,
                int steps_default) {
  f.j_max = j_max_default;
  f.steps = steps_default;
  cmd->add_option("--j-min", f.j_min, "lower end of the coupling grid");
  cmd->add_option("--j-max", f.j_max, "upper end of the coupling grid");
  cmd->add_option("--steps", f.steps, "number of grid intervals");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "base seed recorded in the manifest");
  cmd->add_option("--threads-env", f.threads_env,
                  "environment variable naming the worker thread count");
}

void prepare_out(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

constexpr const char* tangle_header =
    "J,scheme,C2,C2_lower,C2_upper,sqrt_tau3,sqrt_tau3_lower,sqrt_tau3_upper,"
    "tau4,tau4_lower,tau4_upper,C2_exact,subdominant_2,subdominant_3,"
    "subdominant_4,certified";

void add_tangle_rows(io::CsvBuilder& csv, const std::vector<ising::TangleRow>& rows,
                     const std::string& scheme) {
  for (const auto& r : rows)
    csv.add_row({io::fmt_g(r.j), scheme, io::fmt_g(r.c2), io::fmt_g(r.c2_lower),
                 io::fmt_g(r.c2_upper), io::fmt_g(r.sqrt_tau3),
                 io::fmt_g(r.sqrt_tau3_lower), io::fmt_g(r.sqrt_tau3_upper),
                 io::fmt_g(r.tau4), io::fmt_g(r.tau4_lower),
                 io::fmt_g(r.tau4_upper), io::fmt_g(r.c2_exact),
                 io::fmt_g(r.subdominant2), io::fmt_g(r.subdominant3),
                 io::fmt_g(r.subdominant4), r.roofs_certified ? "1" : "0"});
}

void print_tangle_peaks(const std::vector<double>& grid,
                        const std::vector<ising::TangleRow>& rows,
                        const std::string& scheme) {
  std::vector<double> c2, t3, t4;
  for (const auto& r : rows) {
    c2.push_back(r.c2);
    t3.push_back(r.sqrt_tau3);
    t4.push_back(r.tau4);
  }
  const auto m2 = io::locate_max(grid, c2);
  const auto m3 = io::locate_max(grid, t3);
  const auto m4 = io::locate_max(grid, t4);
  const double onset = io::locate_onset(grid, t4, 1e-4);
  std::cout << scheme << ": J2_max = " << fmt(m2.x) << " (C2 = " << fmt(m2.y)
            << "), J3_max = " << fmt(m3.x) << " (sqrt_tau3 = " << fmt(m3.y)
            << "), J4_max = " << fmt(m4.x) << " (tau4 = " << fmt(m4.y)
            << "), tau4 onset J0 = " << fmt(onset) << "\n";
}

int run_ising_tangles(const CommonFlags& f, double gamma,
                      const std::string& scheme) {
  const int threads = resolve_threads(f.threads_env);
  const auto grid = io::make_grid(f.j_min, f.j_max, f.steps);
  prepare_out(f.out);

  io::CsvBuilder csv{tangle_header};
  const auto rows = ising::tangle_sweep(
      grid, cumulants::TruncationScheme::absolute, gamma, threads);
  add_tangle_rows(csv, rows, "absolute");
  print_tangle_peaks(grid, rows, "absolute");
  if (scheme == "renormalized") {
    const auto extra = ising::tangle_sweep(
        grid, cumulants::TruncationScheme::renormalized, gamma, threads);
    add_tangle_rows(csv, extra, "renormalized");
    print_tangle_peaks(grid, extra, "renormalized");
  }

  io::RunManifest manifest;
  manifest.command = "ising-tangles";
  manifest.seed = f.seed;
  manifest.params = {{"j_min", f.j_min}, {"j_max", f.j_max},
                     {"steps", f.steps}, {"gamma", gamma},
                     {"scheme", scheme}};
  io::emit_output(f.out, "ising_tangles.csv", csv.str(), manifest);
  io::emit_manifest(f.out, manifest);
  std::cout << "wrote " << f.out << "/ising_tangles.csv\n";
  return 0;
}

int run_ising_norms(const CommonFlags& f, double gamma,
                    const std::string& distances, std::vector<double> p_values,
                    bool spectra, bool concurrence) {
  ising::NormSweepOptions opt;
  opt.grid = io::make_grid(f.j_min, f.j_max, f.steps);
  opt.gamma = gamma;
  opt.tuples = parse_distances(distances);
  opt.p_values = std::move(p_values);
  opt.spectra = spectra;
  opt.concurrence = concurrence;
  opt.threads = resolve_threads(f.threads_env);
  prepare_out(f.out);

  const auto rows = ising::norm_sweep(opt);
  io::CsvBuilder csv{"J,quantity,q,d1,d2,d3,value"};
  for (const auto& r : rows)
    csv.add_row({io::fmt_g(r.j), r.quantity, std::to_string(r.q),
                 std::to_string(r.d[0]), std::to_string(r.d[1]),
                 std::to_string(r.d[2]), io::fmt_g(r.value)});

  for (double p : opt.p_values) {
    std::ostringstream qn;
    qn << "norm_p" << p;
    const auto q2 = series_of(rows, qn.str(), 2, {1, 0, 0});
    const auto q3 = series_of(rows, qn.str(), 3, {1, 1, 0});
    const auto q4 = series_of(rows, qn.str(), 4, {1, 1, 1});
    report_crossing(opt.grid, "p=" + io::fmt_g(p), 4, q4, 3, q3);
    report_crossing(opt.grid, "p=" + io::fmt_g(p), 4, q4, 2, q2);
    report_crossing(opt.grid, "p=" + io::fmt_g(p), 3, q3, 2, q2);
  }

  io::RunManifest manifest;
  manifest.command = "ising-norms";
  manifest.seed = f.seed;
  manifest.params = {{"j_min", f.j_min},     {"j_max", f.j_max},
                     {"steps", f.steps},     {"gamma", gamma},
                     {"distances", distances}, {"p", opt.p_values},
                     {"spectra", spectra},   {"concurrence", concurrence}};
  io::emit_output(f.out, "ising_norms.csv", csv.str(), manifest);
  io::emit_manifest(f.out, manifest);
  std::cout << "wrote " << f.out << "/ising_norms.csv\n";
  return 0;
}

int run_bh(const CommonFlags& f, int n, int l, const std::string& distances,
           std::vector<double> p_values, bool spectra, bool overlays) {
  bose::BoseSweepOptions opt;
  opt.n = n;
  opt.l = l;
  opt.grid = io::make_grid(f.j_min, f.j_max, f.steps);
  opt.tuples = parse_distances(distances);
  opt.p_values = std::move(p_values);
  opt.spectra = spectra;
  opt.overlays = overlays;
  prepare_out(f.out);

  const auto rows = bose::bose_sweep(opt);
  io::CsvBuilder csv{"J,quantity,q,d1,d2,d3,value,N,L"};
  for (const auto& r : rows)
    csv.add_row({io::fmt_g(r.j), r.quantity, std::to_string(r.q),
                 std::to_string(r.d[0]), std::to_string(r.d[1]),
                 std::to_string(r.d[2]), io::fmt_g(r.value),
                 std::to_string(r.n), std::to_string(r.l)});

  for (double p : opt.p_values) {
    std::ostringstream qn;
    qn << "norm_p" << p;
    const auto q2 = series_of(rows, qn.str(), 2, {1, 0, 0});
    const auto q3 = series_of(rows, qn.str(), 3, {1, 1, 0});
    const auto q4 = series_of(rows, qn.str(), 4, {1, 1, 1});
    report_crossing(opt.grid, "p=" + io::fmt_g(p), 4, q4, 3, q3);
    report_crossing(opt.grid, "p=" + io::fmt_g(p), 4, q4, 2, q2);
  }

  if (overlays) {
    double worst = 0;
    bool seen = false;
    for (const auto& r : rows) {
      if (r.quantity != "sc_norm_p1" || r.j <= 0 || r.j > 0.01) continue;
      for (const auto& s : rows)
        if (s.quantity == "norm_p1" && s.j == r.j && s.q == r.q && s.d == r.d) {
          worst = std::max(worst, std::abs(s.value / r.value - 1.0));
          seen = true;
        }
    }
    if (seen)
      std::cout << "strong-coupling overlay: max relative deviation "
                << fmt(worst, 3) << " for J <= 0.01 ("
                << (worst <= 0.02 ? "within" : "exceeds") << " 2%)\n";
  }

  io::RunManifest manifest;
  manifest.command = "bh";
  manifest.seed = f.seed;
  manifest.params = {{"n", n},
                     {"l", l},
                     {"j_min", f.j_min},
                     {"j_max", f.j_max},
                     {"steps", f.steps},
                     {"distances", distances},
                     {"p", opt.p_values},
                     {"spectra", spectra},
                     {"overlays", overlays}};
  io::emit_output(f.out, "bh_norms.csv", csv.str(), manifest);
  io::emit_manifest(f.out, manifest);
  std::cout << "wrote " << f.out << "/bh_norms.csv\n";
  return 0;
}

int run_scatter(const CommonFlags& f, int qubits, long samples,
                std::string method, int family_points) {
  if (method.empty()) method = qubits == 3 ? "acin3" : "haar";
  if (method == "acin3" && qubits != 3) {
    std::cerr << "error: acin3 sampling is defined for 3 qubits\n";
    return 2;
  }
  const auto sampler = method == "acin3" ? tangles::SampleMethod::acin3
                                         : tangles::SampleMethod::haar;
  prepare_out(f.out);

  const auto rows = tangles::scatter_dataset(qubits, samples, f.seed, sampler);
  io::CsvBuilder csv{"sample_id,tangle,corr_norm1"};
  long above = 0;
  for (const auto& r : rows) {
    csv.add_row({std::to_string(r.sample_id), io::fmt_g(r.tangle),
                 io::fmt_g(r.corr_norm1)});
    if (r.tangle > r.corr_norm1) ++above;
  }

  io::RunManifest manifest;
  manifest.command = "scatter";
  manifest.seed = f.seed;
  manifest.params = {{"qubits", qubits},
                     {"samples", samples},
                     {"method", method},
                     {"family_points", family_points}};
  io::emit_output(f.out, "scatter.csv", csv.str(), manifest);
  std::cout << "scatter digest " << io::fnv1a64_hex(csv.str()) << ", "
            << above << "/" << samples << " samples above the diagonal\n";

  if (qubits == 3) {
    io::CsvBuilder fam{"alpha,tangle,corr_norm1,family"};
    for (const auto& r : tangles::family_curves(family_points))
      fam.add_row({io::fmt_g(r.alpha), io::fmt_g(r.tangle),
                   io::fmt_g(r.corr_norm1), r.family});
    io::emit_output(f.out, "families.csv", fam.str(), manifest);
    std::cout << "families digest " << io::fnv1a64_hex(fam.str()) << "\n";
  }
  io::emit_manifest(f.out, manifest);
  std::cout << "wrote " << f.out << "/scatter.csv\n";
  return 0;
}

int run_verify(bool inject_fault, std::uint64_t seed) {
  bool all_ok = true;
  const auto report = [&](const std::string& name, bool ok,
                          const std::string& detail) {
    all_ok = all_ok && ok;
    std::cout << (ok ? "ok   " : "FAIL ") << name << ": " << detail << "\n";
  };
  Rng rng(seed);

  {
    double worst = 0;
    for (Eigen::Index dim : {2, 4, 6, 8, 10}) {
      RealMatrix g(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
      const RealMatrix m = g - g.transpose().eval();
      const double pf = pfaffian(m);
      const double det = m.determinant();
      worst = std::max(worst,
                       std::abs(pf * pf - det) / std::max(1.0, std::abs(det)));
    }
    report("pfaffian_det_consistency", worst < 1e-9,
           "max relative |pf^2 - det| = " + fmt(worst, 3));
  }

  {
    Matrix g(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i)
      for (Eigen::Index j = 0; j < 8; ++j) g(i, j) = rng.complex_normal();
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    const std::vector<Eigen::Index> dims{2, 2, 2};
    const auto k012 = cumulants::correlated_rdm(rho, {0, 1, 2}, dims);
    const Matrix r0 = partial_trace(rho, dims, {0});
    const Matrix r1 = partial_trace(rho, dims, {1});
    const Matrix r2 = partial_trace(rho, dims, {2});
    const auto k01 = cumulants::correlated_rdm(partial_trace(rho, dims, {0, 1}),
                                               {0, 1}, {2, 2});
    const auto k02 = cumulants::correlated_rdm(partial_trace(rho, dims, {0, 2}),
                                               {0, 2}, {2, 2});
    const auto k12 = cumulants::correlated_rdm(partial_trace(rho, dims, {1, 2}),
                                               {1, 2}, {2, 2});
    // sum over the five partitions of three sites rebuilds the moment
    const Matrix rebuilt =
        k012.matrix + kron_all({r0, r1, r2}) +
        embed_product({{&k01.matrix, {0, 1}}, {&r2, {2}}}, dims) +
        embed_product({{&k02.matrix, {0, 2}}, {&r1, {1}}}, dims) +
        embed_product({{&k12.matrix, {1, 2}}, {&r0, {0}}}, dims);
    const double dev = (rebuilt - rho).cwiseAbs().maxCoeff();
    report("cumulant_moment_inversion", dev < 1e-12,
           "partition-sum reconstruction deviates by " + fmt(dev, 3));
  }

  {
    double worst = 0;
    for (double j : {0.7, 1.0}) {
      const auto gs = ising::ed::ground_state(j, 1.0, 10);
      const ising::FreeFermion engine(
          ising::XYParams{j, 1.0, 10, ising::Basis::main_text}, 5);
      for (const cumulants::SiteTuple& tuple :
           {cumulants::SiteTuple{0, 1}, {0, 1, 2}}) {
        const Matrix a =
            ising::reduced_dm(engine, tuple, ising::Basis::main_text);
        const Matrix b =
            ising::ed::reduced_dm(gs, tuple, ising::Basis::main_text);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
    }
    report("free_fermion_vs_ed_rdm", worst < 1e-10,
           "max RDM entry deviation at length 10 = " + fmt(worst, 3));
  }

  {
    const ising::FreeFermion engine(
        ising::XYParams{0.9, 1.0, 0, ising::Basis::xy}, 4);
    RealMatrix m = engine.majorana_correlations(2);
    if (inject_fault) {
      m(0, 1) += 1e-6;
      m(1, 0) = -m(0, 1);
    }
    const Matrix rho = ising::reduced_dm(engine, {0, 1}, ising::Basis::xy);
    const Matrix zi = kron(sigma_z(), Matrix::Identity(2, 2));
    const Matrix xx = kron(sigma_x(), sigma_x());
    const double dev_z = std::abs((rho * zi).trace().real() - m(0, 1));
    const double dev_x = std::abs((rho * xx).trace().real() - m(1, 2));
    const double dev = std::max(dev_z, dev_x);
    report("wick_contraction_consistency", dev < 1e-10,
           "reduced density matrix vs contraction matrix: max deviation " +
               fmt(dev, 3) +
               (inject_fault ? " (fault injected into the contraction matrix)"
                             : ""));
  }

  {
    const auto t3 = tangles::sl_invariance_gate(
        [](const Vector& psi) { return tangles::tau3_pure(psi); }, 3, 40,
        seed + 1);
    const auto h4 = tangles::sl_invariance_gate(
        [](const Vector& psi) {
          return tangles::tau4_pure(psi, tangles::FourTangle::h_invariant);
        },
        4, 40, seed + 2);
    // |psi_0|^4 is homogeneous of the right degree but not SL-invariant
    const auto fake = tangles::sl_invariance_gate(
        [](const Vector& psi) { return std::pow(std::abs(psi(0)), 4.0); }, 3,
        40, seed + 3);
    const bool ok = t3.passed && h4.passed && !fake.passed;
    report("sl_invariance_gate", ok,
           "tau3 " + fmt(t3.max_rel_change, 3) + ", four-tangle " +
               fmt(h4.max_rel_change, 3) + ", counterfeit measure rejected: " +
               (fake.passed ? "no" : "yes"));
  }

  std::cout << (all_ok ? "verification passed" : "verification FAILED")
            << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlation cumulants and tangles for spin chains and lattice "
               "bosons"};
  app.require_subcommand(1);

  CommonFlags tangle_flags, norm_flags, bh_flags, scatter_flags;
  double tangle_gamma = 1.0, norm_gamma = 1.0;
  std::string tangle_scheme = "absolute";
  std::string norm_distances = "1,1-1,1-1-1";
  std::string bh_distances = "1,2,3,1-1,1-1-1";
  std::vector<double> norm_p{1.0, 2.0}, bh_p{1.0, 2.0};
  bool norm_spectra = false, norm_concurrence = false;
  bool bh_spectra = false, bh_no_overlays = false;
  int bh_n = 9, bh_l = 9;
  int scatter_qubits = 3, family_points = 201;
  long scatter_samples = 40000;
  std::string scatter_method;
  bool inject_fault = false;
  std::uint64_t verify_seed = 99;
  std::string verify_threads_env = "QCORR_THREADS";

  auto* tangles_cmd = app.add_subcommand(
      "ising-tangles", "sweep tangle roofs of adjacent spin blocks");
  add_common(tangles_cmd, tangle_flags, 3.0, 600);
  tangles_cmd->add_option("--gamma", tangle_gamma, "anisotropy in (0, 1]");
  tangles_cmd->add_option("--scheme", tangle_scheme,
                          "rank-2 weight scheme; renormalized adds a second "
                          "curve set")
      ->check(CLI::IsMember({"absolute", "renormalized"}));

  auto* norms_cmd = app.add_subcommand(
      "ising-norms", "sweep correlation norms of spin blocks");
  add_common(norms_cmd, norm_flags, 3.0, 600);
  norms_cmd->add_option("--gamma", norm_gamma, "anisotropy in (0, 1]");
  norms_cmd->add_option("--distances", norm_distances,
                        "comma list of dash-separated site gaps");
  norms_cmd->add_option("--p", norm_p, "Schatten orders");
  norms_cmd->add_flag("--spectra", norm_spectra, "emit eigenvalue rows");
  norms_cmd->add_flag("--concurrence", norm_concurrence,
                      "emit exact and rank-2 concurrence rows");

  auto* bh_cmd = app.add_subcommand(
      "bh", "sweep correlation norms of bosonic lattice blocks");
  add_common(bh_cmd, bh_flags, 0.3, 60);
  bh_cmd->add_option("--n", bh_n, "particle number");
  bh_cmd->add_option("--l", bh_l, "site count");
  bh_cmd->add_option("--distances", bh_distances,
                     "comma list of dash-separated site gaps");
  bh_cmd->add_option("--p", bh_p, "Schatten orders");
  bh_cmd->add_flag("--spectra", bh_spectra, "emit eigenvalue rows");
  bh_cmd->add_flag("--no-overlays", bh_no_overlays,
                   "skip strong-coupling and dilute-gas reference rows");

  auto* scatter_cmd = app.add_subcommand(
      "scatter", "random-state tangle vs correlation-norm dataset");
  scatter_cmd->add_option("--qubits", scatter_qubits, "3 or 4")
      ->check(CLI::IsMember({3, 4}));
  scatter_cmd->add_option("--samples", scatter_samples, "sample count")
      ->check(CLI::PositiveNumber);
  scatter_cmd->add_option("--method", scatter_method,
                          "state sampler (default acin3 for 3 qubits, haar "
                          "for 4)")
      ->check(CLI::IsMember({"acin3", "haar"}));
  scatter_cmd->add_option("--family-points", family_points,
                          "grid points per reference family")
      ->check(CLI::PositiveNumber);
  scatter_cmd->add_option("--out", scatter_flags.out, "output directory");
  scatter_cmd->add_option("--seed", scatter_flags.seed, "sampling seed");
  scatter_flags.seed = 12345;
  scatter_cmd->add_option("--threads-env", scatter_flags.threads_env,
                          "environment variable naming the worker thread "
                          "count");

  auto* verify_cmd = app.add_subcommand(
      "verify", "cross-engine consistency suite");
  verify_cmd->add_flag("--inject-fault", inject_fault,
                       "perturb the fermionic contraction matrix by 1e-6 to "
                       "demonstrate failure detection");
  verify_cmd->add_option("--seed", verify_seed, "suite seed");
  verify_cmd->add_option("--threads-env", verify_threads_env,
                         "environment variable naming the worker thread "
                         "count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*tangles_cmd) {
      if (tangle_flags.steps < 2 || tangle_flags.j_max <= tangle_flags.j_min) {
        std::cerr << "error: need j-max > j-min and steps >= 2\n";
        return 2;
      }
      return run_ising_tangles(tangle_flags, tangle_gamma, tangle_scheme);
    }
    if (*norms_cmd) {
      if (norm_flags.steps < 2 || norm_flags.j_max <= norm_flags.j_min) {
        std::cerr << "error: need j-max > j-min and steps >= 2\n";
        return 2;
      }
      for (double p : norm_p)
        if (p < 1.0) {
          std::cerr << "error: Schatten order p must be >= 1\n";
          return 2;
        }
      try {
        return run_ising_norms(norm_flags, norm_gamma, norm_distances, norm_p,
                               norm_spectra, norm_concurrence);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
    if (*bh_cmd) {
      if (bh_flags.steps < 2 || bh_flags.j_max <= bh_flags.j_min) {
        std::cerr << "error: need j-max > j-min and steps >= 2\n";
        return 2;
      }
      for (double p : bh_p)
        if (p < 1.0) {
          std::cerr << "error: Schatten order p must be >= 1\n";
          return 2;
        }
      std::vector<cumulants::SiteTuple> parsed;
      try {
        parsed = parse_distances(bh_distances);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      (void)parsed;
      return run_bh(bh_flags, bh_n, bh_l, bh_distances, bh_p, bh_spectra,
                    !bh_no_overlays);
    }
    if (*scatter_cmd)
      return run_scatter(scatter_flags, scatter_qubits, scatter_samples,
                         scatter_method, family_points);
    if (*verify_cmd) return run_verify(inject_fault, verify_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
