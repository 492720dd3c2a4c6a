#include <qcorr/cumulants.hpp>
#include <qcorr/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <vector>

using namespace qcorr;
using cumulants::correlated_rdm;

namespace {

Matrix random_density(Eigen::Index dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

Vector random_state(Eigen::Index dim, Rng& rng) {
  Vector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) psi(i) = rng.complex_normal();
  psi /= psi.norm();
  return psi;
}

}  // namespace

TEST_CASE("cumulants vanish on product states") {
  Rng rng(7);
  const Matrix a = random_density(2, rng);
  const Matrix b = random_density(3, rng);
  const Matrix c = random_density(2, rng);

  const auto k2 = correlated_rdm(kron(a, b), {0, 1}, {2, 3});
  REQUIRE(k2.matrix.cwiseAbs().maxCoeff() < 1e-13);

  const auto k3 = correlated_rdm(kron_all({a, b, c}), {0, 1, 2}, {2, 3, 2});
  REQUIRE(k3.matrix.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cumulants vanish when any site factorizes") {
  Rng rng(17);
  const Matrix ab = random_density(4, rng);  // entangled pair
  const Matrix c = random_density(2, rng);
  const auto k3 = correlated_rdm(kron(ab, c), {0, 1, 2}, {2, 2, 2});
  REQUIRE(k3.matrix.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("moments reconstruct from cumulants over all partitions") {
  // independent inclusion-exclusion oracle with the five partitions of
  // three elements written out by hand
  Rng rng(27);
  const std::vector<Eigen::Index> dims{2, 2, 2};
  const Matrix rho = random_density(8, rng);

  const Matrix r0 = partial_trace(rho, dims, {0});
  const Matrix r1 = partial_trace(rho, dims, {1});
  const Matrix r2 = partial_trace(rho, dims, {2});
  const Matrix k01 = correlated_rdm(partial_trace(rho, dims, {0, 1}), {0, 1},
                                    {2, 2})
                         .matrix;
  const Matrix k02 = correlated_rdm(partial_trace(rho, dims, {0, 2}), {0, 2},
                                    {2, 2})
                         .matrix;
  const Matrix k12 = correlated_rdm(partial_trace(rho, dims, {1, 2}), {1, 2},
                                    {2, 2})
                         .matrix;
  const Matrix k012 = correlated_rdm(rho, {0, 1, 2}, dims).matrix;

  Matrix sum = k012;
  sum += kron_all({r0, r1, r2});
  sum += embed_product({{&k01, {0, 1}}, {&r2, {2}}}, dims);
  sum += embed_product({{&k02, {0, 2}}, {&r1, {1}}}, dims);
  sum += embed_product({{&k12, {1, 2}}, {&r0, {0}}}, dims);
  REQUIRE((sum - rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cumulants are traceless and annihilate under partial trace") {
  Rng rng(37);
  const std::vector<Eigen::Index> dims{2, 2, 2};
  const Matrix rho = random_density(8, rng);
  const auto k = correlated_rdm(rho, {0, 1, 2}, dims);
  REQUIRE(std::abs(k.matrix.trace()) < 1e-12);
  // tracing out any single site kills the full cumulant
  for (const std::vector<int>& keep : {std::vector<int>{0, 1}, {0, 2}, {1, 2}})
    REQUIRE(partial_trace(k.matrix, dims, keep).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("werner state cumulant spectrum is known in closed form") {
  // rho = p |singlet><singlet| + (1-p) I/4 has maximally mixed marginals,
  // so the cumulant is rho - I/4 with eigenvalues {3p/4, -p/4 x3}
  const double p = 0.7;
  Vector singlet = Vector::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  const Matrix rho =
      p * (singlet * singlet.adjoint()) + (1.0 - p) * 0.25 * ident(4);
  const auto k = correlated_rdm(rho, {0, 1}, {2, 2});
  REQUIRE(std::abs(cumulants::corr_norm(k, 1.0) - 1.5 * p) < 1e-12);
  REQUIRE(std::abs(cumulants::corr_norm(k, 2.0) - std::sqrt(0.75) * p) < 1e-12);
  const auto spec = cumulants::corr_spectrum(k);
  REQUIRE(std::abs(spec.values(3) - 0.75 * p) < 1e-12);
  REQUIRE(std::abs(spec.values(0) + 0.25 * p) < 1e-12);
}

TEST_CASE("symmetric two-component mixtures set the asymptotic norms") {
  // rho_q = (|0..0><0..0| + |1..1><1..1|)/2: classical symmetric +-1 bits,
  // whose cumulants have trace norms 1, 0, 2 for q = 2, 3, 4
  const double expected[3] = {1.0, 0.0, 2.0};
  for (int q = 2; q <= 4; ++q) {
    const Eigen::Index dim = Eigen::Index(1) << q;
    Matrix rho = Matrix::Zero(dim, dim);
    rho(0, 0) = 0.5;
    rho(dim - 1, dim - 1) = 0.5;
    cumulants::SiteTuple sites;
    for (int i = 0; i < q; ++i) sites.push_back(i);
    const auto k = correlated_rdm(rho, sites, std::vector<Eigen::Index>(q, 2));
    REQUIRE(std::abs(cumulants::corr_norm(k, 1.0) - expected[q - 2]) < 1e-12);
  }
}

TEST_CASE("marginal consistency is enforced") {
  Rng rng(47);
  const std::vector<Eigen::Index> dims{2, 2};
  const Matrix rho = random_density(4, rng);
  auto marginals = cumulants::marginals_from_joint(rho, dims);
  Matrix& m0 = marginals.at(1u);
  m0(0, 0) += 1e-3;
  m0(1, 1) -= 1e-3;
  REQUIRE_THROWS_AS(correlated_rdm(marginals, {0, 1}, dims),
                    std::invalid_argument);
}

TEST_CASE("rank-2 truncation extracts the dominant pair") {
  Rng rng(57);
  // orthonormal triple via eigh of a random Hermitian
  const Matrix h = random_density(4, rng);
  const Spectrum s = eigh(h);
  const Vector a = s.vectors.col(0), b = s.vectors.col(1), c = s.vectors.col(2);
  const Matrix rho = 0.6 * (a * a.adjoint()) + 0.3 * (b * b.adjoint()) +
                     0.1 * (c * c.adjoint());

  const auto abs_scheme =
      cumulants::rank2_truncate(rho, cumulants::TruncationScheme::absolute);
  REQUIRE(std::abs(abs_scheme.p1 - 0.6) < 1e-12);
  REQUIRE(std::abs(abs_scheme.lambda2 - 0.3) < 1e-12);
  REQUIRE(std::abs(abs_scheme.subdominant_sum - 0.1) < 1e-12);
  REQUIRE_FALSE(abs_scheme.degenerate);

  const auto renorm =
      cumulants::rank2_truncate(rho, cumulants::TruncationScheme::renormalized);
  REQUIRE(std::abs(renorm.p1 - 0.6 / 0.9) < 1e-12);

  const Matrix pure = a * a.adjoint();
  const auto deg =
      cumulants::rank2_truncate(pure, cumulants::TruncationScheme::absolute);
  REQUIRE(deg.degenerate);
  REQUIRE(deg.p1 == 1.0);
}

TEST_CASE("sampled product correlations never exceed the trace norm") {
  Rng rng(67);
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix rho = random_density(4, rng);
    const auto k = correlated_rdm(rho, {0, 1}, {2, 2});
    const auto check = cumulants::correlation_bound_check(k, 200, 1000 + trial);
    REQUIRE_FALSE(check.violated);
    REQUIRE(check.max_abs_corr <= check.bound + 1e-10);
  }
  const Vector ghz = [] {
    Vector v = Vector::Zero(8);
    v(0) = v(7) = 1.0 / std::sqrt(2.0);
    return v;
  }();
  const Matrix rho3 = ghz * ghz.adjoint();
  const auto k3 = correlated_rdm(rho3, {0, 1, 2}, {2, 2, 2});
  const auto check = cumulants::correlation_bound_check(k3, 200, 99);
  REQUIRE_FALSE(check.violated);
}

TEST_CASE("pure-state cumulant of a random pair is reproducible") {
  Rng rng(77);
  const Vector psi = random_state(4, rng);
  const Matrix rho = psi * psi.adjoint();
  const auto k1 = correlated_rdm(rho, {0, 1}, {2, 2});
  const auto k2 = correlated_rdm(rho, {0, 1}, {2, 2});
  REQUIRE((k1.matrix - k2.matrix).cwiseAbs().maxCoeff() == 0.0);
}
