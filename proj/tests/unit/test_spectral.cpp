#include "doctest.h"

#include "lpcm/spectral.hpp"

#include "lpcm/admm.hpp"
#include "lpcm/shapes.hpp"

#include <cmath>
#include <sstream>

using namespace lpcm;

namespace {

Matrix coordinates(const TriMesh& m)
{
    Matrix X(m.num_vertices(), 3);
    for (int i = 0; i < m.num_vertices(); ++i) X.row(i) = m.vertex(i).transpose();
    return X;
}

} // namespace

TEST_CASE("sphere spectrum")
{
    const MeshOperators ops = assemble_operators(shapes::icosphere(8), MassLumping::Third);
    const EigenBasis b = mhb(ops, 9);
    REQUIRE(b.size() == 9);
    CHECK(std::abs(b.lambdas[0]) < 1e-9);
    // l(l+1) on the unit sphere: 2 (x3), 6 (x5)
    for (int k = 1; k < 4; ++k) CHECK(b.lambdas[k] == doctest::Approx(2.0).epsilon(0.01));
    for (int k = 4; k < 9; ++k) CHECK(b.lambdas[k] == doctest::Approx(6.0).epsilon(0.02));
    const Matrix G = b.Phi.transpose() * ops.mass.d.asDiagonal() * b.Phi;
    CHECK((G - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Lanczos and dense paths agree")
{
    const MeshOperators ops = assemble_operators(shapes::quadruped(8));
    const EigenBasis dense = mhb(ops, 6);
    const EigenBasis sparse = mhb(ops, 6, 0);
    for (int k = 0; k < 6; ++k) {
        CHECK(sparse.lambdas[k] == doctest::Approx(dense.lambdas[k]).epsilon(1e-8).scale(1.0));
    }
    const Vector angles = principal_angles(dense.Phi, sparse.Phi, ops.mass);
    CHECK(angles.maxCoeff() < 1e-6);
    CHECK_THROWS_AS(mhb(ops, 0), std::invalid_argument);
}

TEST_CASE("reconstruction")
{
    const TriMesh m = shapes::star(6, 5);
    const MeshOperators ops = assemble_operators(m);
    const Matrix X = coordinates(m);
    const EigenBasis full = mhb(ops, ops.dimension());
    CHECK(relative_error(X, reconstruct(full.Phi, ops.mass, X), ops.mass) < 1e-10);
    double previous = 1.0;
    for (int N : {4, 10, 25, 60}) {
        const EigenBasis b = mhb(ops, N);
        const double e = relative_error(X, reconstruct(b.Phi, ops.mass, X), ops.mass);
        CHECK(e < previous);
        previous = e;
    }
    CHECK(relative_error(X, reconstruct(Matrix(ops.dimension(), 0), ops.mass, X), ops.mass) ==
          doctest::Approx(1.0));
}

TEST_CASE("compressed modes approach the low harmonics as N grows")
{
    const MeshOperators ops = assemble_operators(shapes::icosphere(4));
    const EigenBasis low = mhb(ops, 4);
    SolverConfig cfg;
    cfg.mu = 8.0;
    cfg.rho = 10.0;
    auto angles = [&](int N) { return principal_angles(low.Phi, solve(ops, N, cfg).modes.Psi, ops.mass); };
    const Vector coarse = angles(4);
    const Vector fine = angles(16);
    int shrunk = 0;
    for (int k = 0; k < 4; ++k) shrunk += fine[k] < coarse[k];
    CHECK(shrunk >= 3);
}

TEST_CASE("principal angles")
{
    const MassDiag mass{Vector::Ones(4)};
    Matrix A(4, 1), B(4, 1);
    A << 1, 0, 0, 0;
    B << 1, 1, 0, 0;
    CHECK(principal_angles(A, B, mass)[0] == doctest::Approx(M_PI / 4));
    CHECK(principal_angles(A, A, mass)[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("reconstruction table")
{
    std::ostringstream out;
    write_reconstruction_csv(out, {{"mhb", 8, 0.5}, {"lpcm", 8, 0.25}});
    CHECK(out.str() == "basis,N,rel_error\nmhb,8,0.5\nlpcm,8,0.25\n");
}
