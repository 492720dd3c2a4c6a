#include <qcorr/linalg.hpp>
#include <qcorr/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

using namespace qcorr;

namespace {

Matrix random_hermitian(Eigen::Index dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  return 0.5 * (g + g.adjoint());
}

RealMatrix random_antisymmetric(Eigen::Index dim, Rng& rng) {
  RealMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
  return 0.5 * (g - g.transpose());
}

Matrix random_antisymmetric_complex(Eigen::Index dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  return 0.5 * (g - g.transpose());
}

Vector random_state(Eigen::Index dim, Rng& rng) {
  Vector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) psi(i) = rng.complex_normal();
  psi /= psi.norm();
  return psi;
}

Matrix random_density(Eigen::Index dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("pauli matrices satisfy the su(2) algebra") {
  const cplx i(0, 1);
  REQUIRE((sigma_x() * sigma_y() - i * sigma_z()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((sigma_y() * sigma_z() - i * sigma_x()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((sigma_z() * sigma_x() - i * sigma_y()).cwiseAbs().maxCoeff() == 0.0);
  for (int axis = 1; axis <= 3; ++axis) {
    const Matrix p = pauli(axis);
    REQUIRE((p * p - ident(2)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(std::abs(p.trace()) == 0.0);
  }
  REQUIRE_THROWS_AS(pauli(4), std::invalid_argument);
}

TEST_CASE("kron uses big-endian site order") {
  // site 0 owns the most significant bit: diag of sz x I is (1,1,-1,-1)
  const Matrix zi = kron(sigma_z(), ident(2));
  REQUIRE(zi(0, 0) == cplx(1));
  REQUIRE(zi(1, 1) == cplx(1));
  REQUIRE(zi(2, 2) == cplx(-1));
  REQUIRE(zi(3, 3) == cplx(-1));

  Rng rng(11);
  const Matrix a = random_hermitian(2, rng), b = random_hermitian(3, rng),
               c = random_hermitian(2, rng);
  const Matrix nested = kron(kron(a, b), c);
  const Matrix all = kron_all({a, b, c});
  REQUIRE((nested - all).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(kron_all({}).rows() == 1);
}

TEST_CASE("eigh returns ascending phase-fixed eigenpairs") {
  Rng rng(21);
  const Matrix h = random_hermitian(6, rng);
  const Spectrum s = eigh(h);
  REQUIRE((h * s.vectors - s.vectors * s.values.asDiagonal().toDenseMatrix())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  REQUIRE((s.vectors.adjoint() * s.vectors - ident(6)).cwiseAbs().maxCoeff() <
          1e-12);
  for (Eigen::Index i = 1; i < 6; ++i) REQUIRE(s.values(i) >= s.values(i - 1));
  for (Eigen::Index c = 0; c < 6; ++c) {
    for (Eigen::Index r = 0; r < 6; ++r) {
      if (std::abs(s.vectors(r, c)) > 1e-8) {
        REQUIRE(s.vectors(r, c).imag() < 1e-12);
        REQUIRE(s.vectors(r, c).real() > 0.0);
        break;
      }
    }
  }

  Matrix bad = h;
  bad(0, 1) += cplx(0.5, 0.5);
  REQUIRE_THROWS_AS(eigh(bad), std::invalid_argument);
}

TEST_CASE("pfaffian reproduces closed forms") {
  RealMatrix j2(2, 2);
  j2 << 0, 1, -1, 0;
  REQUIRE(pfaffian(j2) == 1.0);

  // pf of a 4x4 antisymmetric matrix is a01 a23 - a02 a13 + a03 a12
  Rng rng(31);
  const RealMatrix a = random_antisymmetric(4, rng);
  const double expected =
      a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
  REQUIRE(std::abs(pfaffian(a) - expected) < 1e-12);

  REQUIRE(pfaffian(RealMatrix(0, 0)) == 1.0);
}

TEST_CASE("pfaffian squared equals the determinant") {
  Rng rng(41);
  for (Eigen::Index dim = 2; dim <= 12; dim += 2) {
    const RealMatrix a = random_antisymmetric(dim, rng);
    const double pf = pfaffian(a);
    REQUIRE(std::abs(pf * pf - a.determinant()) <
            1e-9 * std::max(1.0, std::abs(a.determinant())));

    const Matrix c = random_antisymmetric_complex(dim, rng);
    const cplx pfc = pfaffian(c);
    REQUIRE(std::abs(pfc * pfc - c.determinant()) <
            1e-9 * std::max(1.0, std::abs(c.determinant())));
  }
}

TEST_CASE("pfaffian validates its input") {
  Rng rng(51);
  REQUIRE_THROWS_AS(pfaffian(random_antisymmetric(3, rng)),
                    std::invalid_argument);
  RealMatrix m = random_antisymmetric(4, rng);
  m(0, 1) += 1e-6;
  REQUIRE_THROWS_AS(pfaffian(m), std::invalid_argument);
}

TEST_CASE("partial trace of a product state returns the factors") {
  Rng rng(61);
  const Matrix rho_a = random_density(2, rng);
  const Matrix rho_b = random_density(3, rng);
  const Matrix joint = kron(rho_a, rho_b);
  const std::vector<Eigen::Index> dims{2, 3};
  REQUIRE((partial_trace(joint, dims, {0}) - rho_a).cwiseAbs().maxCoeff() <
          1e-13);
  REQUIRE((partial_trace(joint, dims, {1}) - rho_b).cwiseAbs().maxCoeff() <
          1e-13);
  REQUIRE(std::abs(partial_trace(joint, dims, {0}).trace() - cplx(1)) < 1e-13);
}

TEST_CASE("partial trace of a pure state matches the projector route") {
  Rng rng(71);
  const std::vector<Eigen::Index> dims{2, 3, 2};
  const Vector psi = random_state(12, rng);
  const Matrix rho = psi * psi.adjoint();
  for (const std::vector<int>& keep :
       {std::vector<int>{0}, {1}, {2}, {0, 2}, {2, 0}, {1, 2}}) {
    const Matrix direct = partial_trace_pure(psi, dims, keep);
    const Matrix dense = partial_trace(rho, dims, keep);
    REQUIRE((direct - dense).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("keep order permutes the reduced operator") {
  Rng rng(81);
  const std::vector<Eigen::Index> dims{2, 2};
  const Matrix rho = random_density(4, rng);
  const Matrix fwd = partial_trace(rho, dims, {0, 1});
  const Matrix rev = partial_trace(rho, dims, {1, 0});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          REQUIRE(std::abs(rev(2 * b + a, 2 * d + c) - fwd(2 * a + b, 2 * c + d)) <
                  1e-14);
}

TEST_CASE("embed places operators on the selected sites") {
  const std::vector<Eigen::Index> dims{2, 2, 2};
  const Matrix direct = embed(sigma_x(), {1}, dims);
  const Matrix manual = kron_all({ident(2), sigma_x(), ident(2)});
  REQUIRE((direct - manual).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(91);
  const Matrix op = random_hermitian(4, rng);
  REQUIRE_THROWS_AS(embed(op, {0, 0}, dims), std::invalid_argument);
  REQUIRE_THROWS_AS(embed(op, {0, 3}, dims), std::out_of_range);
}

TEST_CASE("embed_product equals the product of embeddings") {
  Rng rng(101);
  const std::vector<Eigen::Index> dims{2, 2, 2};
  const Matrix ab = random_hermitian(4, rng);
  const Matrix c = random_hermitian(2, rng);
  const Matrix combined = embed_product({{&ab, {0, 2}}, {&c, {1}}}, dims);
  const Matrix factored = embed(ab, {0, 2}, dims) * embed(c, {1}, dims);
  REQUIRE((combined - factored).cwiseAbs().maxCoeff() < 1e-13);

  REQUIRE_THROWS_AS(embed_product({{&ab, {0, 1}}, {&c, {1}}}, dims),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(embed_product({{&ab, {0, 1}}}, dims), std::invalid_argument);
}

TEST_CASE("schatten norms match hand values") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -4;
  REQUIRE(std::abs(schatten_norm(d, 1.0) - 7.0) < 1e-13);
  REQUIRE(std::abs(schatten_norm(d, 2.0) - 5.0) < 1e-13);
  REQUIRE(std::abs(schatten_norm(d, std::numeric_limits<double>::infinity()) -
                   4.0) < 1e-13);
  REQUIRE_THROWS_AS(schatten_norm(d, 0.5), std::invalid_argument);

  Rng rng(111);
  const Matrix h = random_hermitian(5, rng);
  REQUIRE(std::abs(schatten_norm(h, 2.0) - h.norm()) < 1e-12);
}
