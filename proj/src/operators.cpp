#include "lpcm/operators.hpp"

#include "lpcm/simd/kernels.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lpcm {

SparseSymMatrix SparseSymMatrix::negated() const
{
    SparseMatrix flipped = -m_matrix;
    return {std::move(flipped),
            is_positive_semidefinite() ? Definiteness::NegativeSemidefinite
                                       : Definiteness::PositiveSemidefinite};
}

SparseSymMatrix SparseSymMatrix::positive_semidefinite() const
{
    return is_positive_semidefinite() ? *this : negated();
}

MassLumping parse_mass_lumping(const std::string& name)
{
    if (name == "full") return MassLumping::Full;
    if (name == "third") return MassLumping::Third;
    throw std::invalid_argument("unknown mass lumping '" + name + "' (expected full or third)");
}

std::string to_string(MassLumping lumping)
{
    return lumping == MassLumping::Full ? "full" : "third";
}

SparseSymMatrix cotan_stiffness(const TriMesh& mesh)
{
    const int n = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(12 * static_cast<size_t>(mesh.num_triangles()));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        for (int k = 0; k < 3; ++k) {
            // Angle at corner k is opposite edge (i, j).
            const int c = tri[k];
            const int i = tri[(k + 1) % 3];
            const int j = tri[(k + 2) % 3];
            const Vec3 u = mesh.vertex(i) - mesh.vertex(c);
            const Vec3 v = mesh.vertex(j) - mesh.vertex(c);
            const double sine = u.cross(v).norm();
            const double cosine = u.dot(v);
            const double cot = cosine / sine;
            if (!std::isfinite(cot) || std::abs(cot) > 1e12) {
                throw MeshError(
                    "cotangent overflow in triangle " + std::to_string(t) +
                    " (near-degenerate angle)");
            }
            const double w = 0.5 * cot;
            triplets.emplace_back(i, j, w);
            triplets.emplace_back(j, i, w);
            triplets.emplace_back(i, i, -w);
            triplets.emplace_back(j, j, -w);
        }
    }
    SparseMatrix L(n, n);
    L.setFromTriplets(triplets.begin(), triplets.end());
    L.makeCompressed();
    return {std::move(L), SparseSymMatrix::Definiteness::NegativeSemidefinite};
}

MassDiag lumped_mass(const TriMesh& mesh, MassLumping lumping)
{
    const int n = mesh.num_vertices();
    Vector d = Vector::Zero(n);
    const double factor = lumping == MassLumping::Full ? 1.0 : 1.0 / 3.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a = factor * triangle_area(mesh, t);
        for (int v : mesh.triangle(t)) d[v] += a;
    }
    for (int i = 0; i < n; ++i) {
        if (!(d[i] > 0.0)) {
            throw MeshError("isolated vertex " + std::to_string(i) + " has zero lumped mass");
        }
    }
    return {std::move(d)};
}

double weighted_lp_norm_p(const Matrix& S, const MassDiag& mass, double p)
{
    if (S.rows() != mass.dimension()) {
        throw std::invalid_argument("weighted_lp_norm_p: row count does not match mass size");
    }
    const auto& k = simd::kernels();
    const auto n = static_cast<std::size_t>(S.rows());
    double total = 0.0;
    for (Eigen::Index j = 0; j < S.cols(); ++j) {
        total += k.weighted_abs_pow_sum(S.col(j).data(), mass.d.data(), p, n);
    }
    return total;
}

void save_matrix_market(const SparseSymMatrix& op, const std::string& path)
{
    // Symmetric MatrixMarket files store the lower triangle only.
    const SparseMatrix lower = op.matrix().triangularView<Eigen::Lower>();
    if (!Eigen::saveMarket(lower, path, Eigen::Symmetric)) {
        throw std::runtime_error("cannot write MatrixMarket file " + path);
    }
}

MeshOperators assemble_operators(const TriMesh& mesh, MassLumping lumping)
{
    return {cotan_stiffness(mesh).positive_semidefinite(), lumped_mass(mesh, lumping)};
}

} // namespace lpcm
