#pragma once

#include "lpcm/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>

namespace lpcm {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric sparse operator together with its definiteness convention.
///
/// The cotangent assembly yields positive off-diagonal weights and a diagonal
/// equal to the negative row sum, i.e. a negative semidefinite matrix. All
/// solves and energies use the negated, positive semidefinite form.
class SparseSymMatrix
{
public:
    enum class Definiteness { NegativeSemidefinite, PositiveSemidefinite };

    SparseSymMatrix() = default;
    SparseSymMatrix(SparseMatrix matrix, Definiteness definiteness)
        : m_matrix(std::move(matrix))
        , m_definiteness(definiteness)
    {}

    int dimension() const { return static_cast<int>(m_matrix.rows()); }
    const SparseMatrix& matrix() const { return m_matrix; }
    Definiteness definiteness() const { return m_definiteness; }
    bool is_positive_semidefinite() const
    {
        return m_definiteness == Definiteness::PositiveSemidefinite;
    }

    /// Same operator with flipped sign (and flipped definiteness flag).
    SparseSymMatrix negated() const;
    /// The positive semidefinite form, negating if needed.
    SparseSymMatrix positive_semidefinite() const;

    double coeff(int i, int j) const { return m_matrix.coeff(i, j); }

private:
    SparseMatrix m_matrix;
    Definiteness m_definiteness = Definiteness::NegativeSemidefinite;
};

enum class MassLumping { Full, Third };

MassLumping parse_mass_lumping(const std::string& name);
std::string to_string(MassLumping lumping);

struct MassDiag
{
    Vector d;

    int dimension() const { return static_cast<int>(d.size()); }
};

/// Cotangent weight matrix: w_ij = (cot a + cot b)/2 off the diagonal, one
/// term for boundary edges, diagonal -sum_k w_ik. Returned with the
/// NegativeSemidefinite flag.
SparseSymMatrix cotan_stiffness(const TriMesh& mesh);

/// Lumped mass d_i = sum of incident triangle areas (Full), or a third of it.
MassDiag lumped_mass(const TriMesh& mesh, MassLumping lumping = MassLumping::Full);

/// sum_ij d_i |S_ij|^p
double weighted_lp_norm_p(const Matrix& S, const MassDiag& mass, double p);

/// Writes the operator in MatrixMarket coordinate format.
void save_matrix_market(const SparseSymMatrix& op, const std::string& path);

/// Laplacian and mass of one mesh, assembled once and shared by the solvers.
struct MeshOperators
{
    SparseSymMatrix stiffness; // positive semidefinite form
    MassDiag mass;

    int dimension() const { return mass.dimension(); }
};

MeshOperators assemble_operators(const TriMesh& mesh, MassLumping lumping = MassLumping::Full);

} // namespace lpcm
