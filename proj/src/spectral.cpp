#include "lpcm/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

// Pulls in <complex.h>, whose I macro clashes with later headers.
#include <arpack/arpack.hpp>
#undef I

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace lpcm {

namespace {

EigenBasis dense_mhb(const MeshOperators& ops, int N)
{
    const Vector inv_sqrt = ops.mass.d.cwiseSqrt().cwiseInverse();
    const Matrix L = Matrix(ops.stiffness.matrix());
    const Matrix C = inv_sqrt.asDiagonal() * L * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    if (eig.info() != Eigen::Success) throw EigenSolverError("dense eigensolver failed");
    EigenBasis basis;
    basis.lambdas = eig.eigenvalues().head(N);
    basis.Phi = inv_sqrt.asDiagonal() * eig.eigenvectors().leftCols(N);
    return basis;
}

// Shift-invert Lanczos: eigenvalues of (L - sigma D)^-1 D with largest
// magnitude are those of L phi = lambda D phi closest to sigma.
EigenBasis arpack_mhb(const MeshOperators& ops, int N)
{
    const int n = ops.dimension();
    const SparseMatrix& L = ops.stiffness.matrix();
    const Vector& d = ops.mass.d;
    // A small negative shift keeps L - sigma D positive definite.
    const double scale = L.diagonal().sum() / d.sum();
    const double sigma = -1e-3 * scale;
    SparseMatrix shifted = L;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * d[i];
    Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
    if (factor.info() != Eigen::Success) throw EigenSolverError("shifted factorisation failed");

    const a_int nev = N;
    const a_int ncv = std::min<a_int>(n, std::max<a_int>(2 * nev + 1, 20));
    const double tol = 1e-12;
    std::vector<double> resid(n, 1.0), v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n));
    const a_int lworkl = ncv * (ncv + 8);
    std::vector<double> workl(lworkl);
    a_int iparam[11] = {};
    a_int ipntr[14] = {};
    iparam[0] = 1;
    iparam[2] = 10000;
    iparam[6] = 3;
    a_int ido = 0;
    a_int info = 1; // use the provided (deterministic) starting vector

    for (;;) {
        arpack::saupd(ido, arpack::bmat::generalized, n, arpack::which::largest_magnitude, nev, tol,
                      resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(),
                      lworkl, info);
        if (ido == -1 || ido == 1) {
            Eigen::Map<const Vector> x(&workd[ipntr[0] - 1], n);
            Eigen::Map<Vector> y(&workd[ipntr[1] - 1], n);
            if (ido == -1) {
                y = factor.solve(Vector(d.cwiseProduct(x)));
            } else {
                Eigen::Map<const Vector> bx(&workd[ipntr[2] - 1], n);
                y = factor.solve(Vector(bx));
            }
        } else if (ido == 2) {
            Eigen::Map<const Vector> x(&workd[ipntr[0] - 1], n);
            Eigen::Map<Vector> y(&workd[ipntr[1] - 1], n);
            y = d.cwiseProduct(x);
        } else {
            break;
        }
    }
    if (info < 0) throw EigenSolverError("ARPACK saupd failed with info " + std::to_string(info));
    if (iparam[4] < nev) {
        throw EigenSolverError("ARPACK converged " + std::to_string(iparam[4]) + " of " +
                               std::to_string(nev) + " eigenpairs");
    }

    std::vector<a_int> select(ncv, 1);
    std::vector<double> values(nev);
    Matrix Z(n, nev);
    a_int einfo = 0;
    arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), values.data(), Z.data(), n,
                  sigma, arpack::bmat::generalized, n, arpack::which::largest_magnitude, nev, tol,
                  resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl,
                  einfo);
    if (einfo != 0) throw EigenSolverError("ARPACK seupd failed with info " + std::to_string(einfo));

    std::vector<int> order(nev);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    EigenBasis basis;
    basis.lambdas.resize(nev);
    basis.Phi.resize(n, nev);
    for (int k = 0; k < nev; ++k) {
        basis.lambdas[k] = values[order[k]];
        Vector phi = Z.col(order[k]);
        phi /= std::sqrt(phi.dot(d.cwiseProduct(phi)));
        // Fix the sign so the largest-magnitude entry is positive.
        Eigen::Index at;
        phi.cwiseAbs().maxCoeff(&at);
        if (phi[at] < 0) phi = -phi;
        basis.Phi.col(k) = phi;
    }
    return basis;
}

} // namespace

EigenBasis mhb(const MeshOperators& ops, int N, int dense_limit)
{
    const int n = ops.dimension();
    if (N < 1 || N > n) {
        throw std::invalid_argument("eigenpair count " + std::to_string(N) + " outside [1, " +
                                    std::to_string(n) + "]");
    }
    if (n <= dense_limit || N >= n - 1) return dense_mhb(ops, N);
    spdlog::debug("computing {} eigenpairs with shift-invert Lanczos (n={})", N, n);
    return arpack_mhb(ops, N);
}

Matrix reconstruct(const Matrix& basis, const MassDiag& mass, const Matrix& signal)
{
    if (basis.cols() == 0) return Matrix::Zero(signal.rows(), signal.cols());
    return basis * (basis.transpose() * (mass.d.asDiagonal() * signal));
}

double relative_error(const Matrix& signal, const Matrix& approx, const MassDiag& mass)
{
    const Vector num = (signal - approx).rowwise().squaredNorm();
    const Vector den = signal.rowwise().squaredNorm();
    return std::sqrt(mass.d.dot(num) / mass.d.dot(den));
}

Vector principal_angles(const Matrix& A, const Matrix& B, const MassDiag& mass)
{
    const Vector s = mass.d.cwiseSqrt();
    const Eigen::HouseholderQR<Matrix> qa(s.asDiagonal() * A);
    const Eigen::HouseholderQR<Matrix> qb(s.asDiagonal() * B);
    const Matrix Qa = qa.householderQ() * Matrix::Identity(A.rows(), A.cols());
    const Matrix Qb = qb.householderQ() * Matrix::Identity(B.rows(), B.cols());
    const Eigen::JacobiSVD<Matrix> svd(Qa.transpose() * Qb);
    Vector angles = svd.singularValues().unaryExpr([](double c) { return std::acos(std::clamp(c, -1.0, 1.0)); });
    std::sort(angles.data(), angles.data() + angles.size());
    return angles;
}

void write_reconstruction_csv(std::ostream& out, const std::vector<ReconstructionRow>& rows)
{
    out << "basis,N,rel_error\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : rows) out << r.basis << ',' << r.num_modes << ',' << r.relative_error << '\n';
    out.precision(old_precision);
}

} // namespace lpcm
