#pragma once

#include "lpcm/operators.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpcm {

class EigenSolverError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Smallest generalized eigenpairs of L_pd phi = lambda D phi.
struct EigenBasis
{
    Matrix Phi;     // n x N, D-orthonormal
    Vector lambdas; // non-decreasing

    int size() const { return static_cast<int>(lambdas.size()); }
};

inline constexpr int kDenseEigenLimit = 3000;

/// Dense symmetric eigensolver on D^-1/2 L D^-1/2 for n <= dense_limit,
/// ARPACK shift-invert Lanczos otherwise.
EigenBasis mhb(const MeshOperators& ops, int N, int dense_limit = kDenseEigenLimit);

/// D-orthogonal projection B (B^T D X) of the columns of X onto span(B).
Matrix reconstruct(const Matrix& basis, const MassDiag& mass, const Matrix& signal);

/// sqrt(sum_i d_i |x_i - y_i|^2 / sum_i d_i |x_i|^2), rows as points.
double relative_error(const Matrix& signal, const Matrix& approx, const MassDiag& mass);

/// Principal angles (radians, ascending) between span(A) and span(B) in the
/// D inner product.
Vector principal_angles(const Matrix& A, const Matrix& B, const MassDiag& mass);

struct ReconstructionRow
{
    std::string basis;
    int num_modes = 0;
    double relative_error = 0.0;
};

/// basis,N,rel_error
void write_reconstruction_csv(std::ostream& out, const std::vector<ReconstructionRow>& rows);

} // namespace lpcm
