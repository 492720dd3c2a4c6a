#include <qcorr/ising.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace qcorr;
using ising::Basis;
using ising::FreeFermion;
using ising::XYParams;

namespace {

Matrix pauli_string(const std::string& letters) {
  std::vector<Matrix> f;
  for (char c : letters) {
    switch (c) {
      case 'I': f.push_back(pauli(0)); break;
      case 'X': f.push_back(pauli(1)); break;
      case 'Y': f.push_back(pauli(2)); break;
      default: f.push_back(pauli(3)); break;
    }
  }
  return kron_all(f);
}

}  // namespace

TEST_CASE("critical transverse magnetization equals 2/pi") {
  const FreeFermion engine(XYParams{1.0, 1.0, 0, Basis::main_text}, 4);
  const double ev = engine.expectation({0}, "X", Basis::main_text);
  REQUIRE(ev == Catch::Approx(2.0 / M_PI).margin(1e-9));
}

TEST_CASE("deep ferromagnet saturates the longitudinal correlator") {
  const FreeFermion engine(XYParams{50.0, 1.0, 0, Basis::main_text}, 4);
  REQUIRE(engine.expectation({0, 1}, "ZZ", Basis::main_text) > 0.999);
}

TEST_CASE("zero coupling gives the polarized product state") {
  const FreeFermion engine(XYParams{0.0, 1.0, 0, Basis::main_text}, 6);
  REQUIRE(engine.expectation({0}, "X", Basis::main_text) ==
          Catch::Approx(1.0).margin(1e-14));
  REQUIRE(engine.expectation({0, 1}, "ZZ", Basis::main_text) ==
          Catch::Approx(0.0).margin(1e-14));
  REQUIRE(engine.expectation({0, 3}, "XX", Basis::main_text) ==
          Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("strings with odd flip weight vanish identically") {
  const FreeFermion engine(XYParams{0.8, 1.0, 0, Basis::main_text}, 8);
  // odd Y+Z count maps to an odd Majorana monomial, exactly zero
  REQUIRE(engine.expectation({0}, "Z", Basis::main_text) == 0.0);
  REQUIRE(engine.expectation({0, 1}, "XZ", Basis::main_text) == 0.0);
  REQUIRE(engine.expectation({0, 1, 2}, "YYZ", Basis::main_text) == 0.0);
  REQUIRE(engine.expectation({0, 2, 5}, "ZZZ", Basis::main_text) == 0.0);
}

TEST_CASE("momentum-sum energy matches exact diagonalization") {
  for (double j : {0.3, 1.0, 1.7}) {
    const FreeFermion engine(XYParams{j, 1.0, 8, Basis::xy}, 2);
    const auto gs = ising::ed::ground_state(j, 1.0, 8);
    REQUIRE(engine.ground_energy() == Catch::Approx(gs.energy).margin(1e-10));
    REQUIRE(gs.residual < 1e-10);
  }
}

TEST_CASE("free-fermion rdms match exact diagonalization at length 12") {
  const std::vector<cumulants::SiteTuple> tuples = {
      {0, 1}, {0, 1, 2}, {0, 1, 2, 3}, {0, 2, 5}};
  for (double j : {0.3, 0.8, 1.0, 1.5}) {
    const auto gs = ising::ed::ground_state(j, 1.0, 12);
    const FreeFermion engine(XYParams{j, 1.0, 12, Basis::main_text}, 7);
    for (const auto& tuple : tuples) {
      const Matrix a = ising::reduced_dm(engine, tuple, Basis::main_text);
      const Matrix b = ising::ed::reduced_dm(gs, tuple, Basis::main_text);
      REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("every four-site pauli expectation matches the ed trace") {
  const double j = 0.5;
  const auto gs = ising::ed::ground_state(j, 1.0, 12);
  const Matrix rho = ising::ed::reduced_dm(gs, {0, 1, 2, 3}, Basis::main_text);
  const FreeFermion engine(XYParams{j, 1.0, 12, Basis::main_text}, 5);
  const char axis_letter[4] = {'I', 'X', 'Y', 'Z'};
  for (int code = 0; code < 256; ++code) {
    std::string letters(4, 'I');
    int c = code;
    for (int i = 0; i < 4; ++i) {
      letters[i] = axis_letter[c & 3];
      c >>= 2;
    }
    const double ff = engine.expectation({0, 1, 2, 3}, letters, Basis::main_text);
    const double ed = (rho * pauli_string(letters)).trace().real();
    INFO("letters " << letters);
    REQUIRE(ff == Catch::Approx(ed).margin(1e-10));
  }
}

TEST_CASE("surrogate length is converged") {
  const auto norm1_at = [](double j, Eigen::Index length) {
    const FreeFermion engine(XYParams{j, 1.0, length, Basis::main_text}, 3);
    const Matrix rho = ising::reduced_dm(engine, {0, 1}, Basis::main_text);
    const auto corr = cumulants::correlated_rdm(rho, {0, 1}, {2, 2});
    return cumulants::corr_norm(corr, 1.0);
  };
  REQUIRE(std::abs(norm1_at(0.5, 8192) - norm1_at(0.5, 16384)) < 1e-6);
  REQUIRE(std::abs(norm1_at(1.0, 65536) - norm1_at(1.0, 131072)) < 1e-4);
}

TEST_CASE("rdms share the hamiltonian's flip symmetry") {
  const FreeFermion engine(XYParams{1.2, 1.0, 0, Basis::main_text}, 5);
  for (const auto& tuple :
       std::vector<cumulants::SiteTuple>{{0, 1}, {0, 1, 2}, {0, 1, 2, 3}}) {
    const Matrix rho = ising::reduced_dm(engine, tuple, Basis::main_text);
    std::vector<Matrix> xs(tuple.size(), pauli(1));
    const Matrix flip = kron_all(xs);
    REQUIRE((rho * flip - flip * rho).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("tangle sweep peaks in the expected window") {
  std::vector<double> grid;
  for (double j = 0.5; j <= 1.2 + 1e-12; j += 0.02) grid.push_back(j);
  const auto rows = ising::tangle_sweep(grid);
  double best_j = 0, best_c2 = -1;
  for (const auto& row : rows) {
    if (row.c2 > best_c2) {
      best_c2 = row.c2;
      best_j = row.j;
    }
    REQUIRE(row.subdominant2 < 0.025);
    REQUIRE(row.subdominant3 < 0.05);
    REQUIRE(row.subdominant4 < 0.05);
  }
  REQUIRE(best_j > 0.72);
  REQUIRE(best_j < 0.88);
  REQUIRE(best_c2 > 0.1);
}

TEST_CASE("anisotropic distance-3 concurrence zero is tracked by the roof") {
  // gamma = 0.5: the distance-3 concurrence lives in a finite window and
  // dies at a nontrivial coupling; the rank-2 roof must locate that zero
  std::vector<double> grid;
  for (double j = 0.80; j <= 1.30 + 1e-12; j += 0.005) grid.push_back(j);
  std::vector<double> exact(grid.size()), roof(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FreeFermion engine(XYParams{grid[i], 0.5, 0, Basis::main_text}, 5);
    const Matrix rho = ising::reduced_dm(engine, {0, 3}, Basis::main_text);
    exact[i] = tangles::concurrence(rho);
    const auto approx =
        cumulants::rank2_truncate(rho, cumulants::TruncationScheme::absolute);
    roof[i] = tangles::rank2_convex_roof(approx, [](const Vector& v) {
                return tangles::concurrence_pure(v);
              }).value;
  }
  const auto upper_zero = [&](const std::vector<double>& y) {
    double peak = 0;
    for (double v : y) peak = std::max(peak, v);
    REQUIRE(peak > 5e-3);
    for (std::size_t i = 1; i < y.size(); ++i)
      if (y[i - 1] > 1e-3 && y[i] <= 1e-3) {
        const double t = (y[i - 1] - 1e-3) / (y[i - 1] - y[i]);
        return grid[i - 1] + t * (grid[i] - grid[i - 1]);
      }
    FAIL("no downward zero crossing found");
    return 0.0;
  };
  const double z_exact = upper_zero(exact);
  const double z_roof = upper_zero(roof);
  REQUIRE(std::abs(z_exact - z_roof) < 0.06);
}

TEST_CASE("correlation norms decay with distance") {
  const auto norm1 = [](double j, const cumulants::SiteTuple& tuple) {
    const FreeFermion engine(XYParams{j, 1.0, 0, Basis::main_text},
                             tuple.back() + 2);
    const Matrix rho = ising::reduced_dm(engine, tuple, Basis::main_text);
    const std::vector<Eigen::Index> dims(tuple.size(), 2);
    return cumulants::corr_norm(cumulants::correlated_rdm(rho, tuple, dims),
                                1.0);
  };
  REQUIRE(norm1(0.8, {0, 1}) > norm1(0.8, {0, 2}));
  REQUIRE(norm1(0.8, {0, 2}) > norm1(0.8, {0, 3}));
  REQUIRE(norm1(0.9, {0, 1, 2}) > norm1(0.9, {0, 2, 4}));
}

TEST_CASE("norm sweep emits zero rows at zero coupling") {
  ising::NormSweepOptions opt;
  opt.grid = {0.0};
  const auto rows = ising::norm_sweep(opt);
  REQUIRE_FALSE(rows.empty());
  for (const auto& row : rows)
    if (row.quantity.rfind("norm_p", 0) == 0) REQUIRE(row.value < 1e-14);
}

TEST_CASE("norm sweep long format carries distances and schemes") {
  ising::NormSweepOptions opt;
  opt.grid = {0.9};
  opt.tuples = {{0, 2}, {0, 1, 2}};
  opt.concurrence = true;
  opt.spectra = true;
  const auto rows = ising::norm_sweep(opt);
  bool saw_exact = false, saw_abs = false, saw_renorm = false, saw_eig = false;
  for (const auto& row : rows) {
    if (row.quantity == "C2_exact") {
      saw_exact = true;
      REQUIRE(row.d[0] == 2);
    }
    if (row.quantity == "C2_rank2_absolute") saw_abs = true;
    if (row.quantity == "C2_rank2_renormalized") saw_renorm = true;
    if (row.quantity == "eig_0") saw_eig = true;
    if (row.quantity == "norm_p2" && row.q == 3) {
      REQUIRE(row.d[0] == 1);
      REQUIRE(row.d[1] == 1);
    }
  }
  REQUIRE(saw_exact);
  REQUIRE(saw_abs);
  REQUIRE(saw_renorm);
  REQUIRE(saw_eig);
}
