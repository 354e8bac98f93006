#pragma once

#include "lpcm/operators.hpp"

#include <Eigen/SparseCholesky>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace lpcm {

/// Entry (i, k) of a mode set is in the support of mode k when
/// |Psi(i, k)| > kSupportRelativeFloor * max_i |Psi(i, k)|.
inline constexpr double kSupportRelativeFloor = 1e-3;

struct SolverConfig
{
    double mu = 1.0;
    double p = 0.8;
    double rho = 1.0;
    double tol_rel_change = 1e-3;
    int max_iter = 5000;
    int newton_iters = 8;
    std::uint64_t seed = 1;
    int jobs = 1;
};

/// Throws std::invalid_argument for non-positive parameters or p outside (0, 1].
void validate(const SolverConfig& cfg);

struct IterationRecord
{
    int iter = 0;
    double err_psi = 0.0;
    double primal_residual_sq = 0.0;
    double energy = 0.0;
    double ortho_error = 0.0;
};

struct AdmmState
{
    Matrix Psi, S, E, U_S, U_E;
    int iter = 0;
    std::vector<IterationRecord> history;
};

struct ModeSet
{
    Matrix Psi;
    double mu = 0.0;
    double p = 0.0;
    bool converged = false;
    int iters = 0;

    int num_modes() const { return static_cast<int>(Psi.cols()); }
    int num_vertices() const { return static_cast<int>(Psi.rows()); }
};

struct SolveResult
{
    ModeSet modes;
    AdmmState state;
    std::uint64_t seed_used = 0;
    int restarts = 0;
};

/// Y^T D Y is numerically singular; the caller should perturb and retry.
class RankDeficientError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Y V Sigma^(-1/2) V^T with Y^T D Y = V Sigma V^T, computed from the N x N
/// eigendecomposition. The result is D-orthonormal.
Matrix d_orthonormalize(const Matrix& Y, const MassDiag& mass);

/// Psi-step: d_orthonormalize((S + U_S/rho + E + U_E/rho) / 2).
Matrix psi_update(const Matrix& S, const Matrix& E, const Matrix& U_S, const Matrix& U_E,
                  double rho, const MassDiag& mass);

/// S-step: entrywise Lp proximal map of Psi - U_S/rho with weight d_i/(rho mu).
Matrix s_update(const Matrix& Psi, const Matrix& U_S, const SolverConfig& cfg,
                const MassDiag& mass);

/// Factorisation of rho I + 2 L_pd, reused across E-steps.
class ESolver
{
public:
    ESolver(const SparseSymMatrix& stiffness, double rho);

    /// Solves (rho I + 2 L_pd) E = rho Psi - U_E column by column.
    Matrix solve(const Matrix& Psi, const Matrix& U_E, int jobs = 1) const;
    /// Solves the system for an explicit right-hand side.
    Matrix solve_rhs(const Matrix& rhs, int jobs = 1) const;

    double rho() const { return m_rho; }
    /// Largest relative residual of the most recent solve.
    double last_relative_residual() const { return m_last_residual; }

private:
    double m_rho;
    SparseMatrix m_system;
    Eigen::SimplicialLDLT<SparseMatrix> m_factor;
    mutable double m_last_residual = 0.0;
};

Matrix e_update(const Matrix& Psi, const Matrix& U_E, double rho, const SparseSymMatrix& stiffness);

/// (1/mu) sum_ij d_i |Psi_ij|^p + Tr(Psi^T L_pd Psi)
double admm_objective(const Matrix& Psi, const MeshOperators& ops, double mu, double p);

/// Max absolute row sum of Psi^T D Psi - I.
double orthonormality_error(const Matrix& Psi, const MassDiag& mass);

/// Seeded uniform[-1, 1] matrix, D-orthonormalised.
Matrix random_initial_modes(int n, int N, std::uint64_t seed, const MassDiag& mass);

using IterationObserver = std::function<void(const AdmmState&)>;

/// Runs the ADMM iteration for N modes until the relative change of Psi drops
/// below cfg.tol_rel_change or cfg.max_iter is reached. A rank failure in the
/// Psi-step triggers one restart with a derived seed.
SolveResult solve(const MeshOperators& ops, int N, const SolverConfig& cfg,
                  const IterationObserver& observer = {});

/// Norm of the constraint-tangent projection of (1/mu) s(Psi) + 2 L_pd Psi,
/// with s(u) = sign(u) p |u|^(p-1) evaluated on in-support entries only and
/// the norm taken over those entries. Pass mu = +inf to drop the penalty.
double stationarity_residual(const ModeSet& modes, const MeshOperators& ops, double mu, double p);

/// Support mask of column k (see kSupportRelativeFloor).
std::vector<char> column_support(const Matrix& Psi, int k,
                                 double relative_floor = kSupportRelativeFloor);

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history);

} // namespace lpcm
