#include "lpcm/admm.hpp"

#include "lpcm/parallel.hpp"
#include "lpcm/prox.hpp"
#include "lpcm/simd/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace lpcm {

namespace {

constexpr std::uint64_t kRestartSeedOffset = 0x9E3779B97F4A7C15ULL;

constexpr int kVectorNewtonSteps = 3;

// Per-row weights d_i/(rho mu), zero thresholds and the lower end of the
// root bracket.
struct ProxRows
{
    Vector weight;
    Vector threshold;
    Vector lower;

    ProxRows(const MassDiag& mass, double rho, double mu, double p)
        : weight(mass.d / (rho * mu))
        , threshold(weight.size())
        , lower(weight.size())
    {
        for (Eigen::Index i = 0; i < weight.size(); ++i) {
            threshold[i] = lp_threshold(weight[i], p);
            lower[i] = p < 1.0 ? std::pow(2.0 * weight[i] * (1.0 - p), 1.0 / (2.0 - p)) : 0.0;
        }
    }
};

// Entries above the threshold go through the vector root kernel in one batch;
// any entry whose root is not tight or not a minimiser is redone by the
// scalar prox.
Matrix apply_prox(const Matrix& Psi, const Matrix& U_S, const ProxRows& rows,
                  const SolverConfig& cfg)
{
    const auto& k = simd::kernels();
    const Eigen::Index n = Psi.rows();
    const auto un = static_cast<std::size_t>(n);
    const double p = cfg.p;
    Matrix S(n, Psi.cols());
    parallel_for(static_cast<int>(Psi.cols()), cfg.jobs, [&](int j) {
        Vector q(n);
        k.shifted(Psi.col(j).data(), U_S.col(j).data(), cfg.rho, q.data(), un);
        double* out = S.col(j).data();
        if (p >= 1.0) {
            k.soft_threshold(q.data(), rows.weight.data(), out, un);
            return;
        }
        const std::size_t kept = k.hard_gate(q.data(), rows.threshold.data(), out, un);
        if (kept == 0) return;

        std::vector<int> idx;
        idx.reserve(kept);
        std::vector<double> a, wp, root(kept), power(kept);
        a.reserve(kept);
        wp.reserve(kept);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (out[i] == 0.0) continue;
            idx.push_back(static_cast<int>(i));
            a.push_back(std::abs(q[i]));
            wp.push_back(rows.weight[i] * p);
        }
        k.lp_root(a.data(), wp.data(), p, cfg.newton_iters, kVectorNewtonSteps, root.data(),
                  power.data(), idx.size());

        for (std::size_t m = 0; m < idx.size(); ++m) {
            const int i = idx[m];
            const double s = root[m];
            const double h = s - a[m] + wp[m] * power[m];
            const double dh = 1.0 + wp[m] * (p - 1.0) * power[m] / s;
            const double f = rows.weight[i] * s * power[m] + 0.5 * (s - a[m]) * (s - a[m]);
            const bool tight = s >= rows.lower[i] && s <= a[m] && dh > 0.0 &&
                               std::abs(h) <= 1e-12 * a[m] * dh && f <= 0.5 * a[m] * a[m];
            out[i] = tight ? std::copysign(s, q[i])
                           : prox_lp_scalar(q[i], rows.weight[i], p, cfg.newton_iters);
        }
    });
    return S;
}

Matrix average_target(const Matrix& S, const Matrix& E, const Matrix& U_S, const Matrix& U_E,
                      double rho)
{
    Matrix Y(S.rows(), S.cols());
    simd::kernels().average_target(S.data(), U_S.data(), E.data(), U_E.data(), rho, Y.data(),
                                   static_cast<std::size_t>(S.size()));
    return Y;
}

double frobenius_sq_distance(const Matrix& A, const Matrix& B)
{
    return simd::kernels().squared_distance(A.data(), B.data(), static_cast<std::size_t>(A.size()));
}

double frobenius_sq(const Matrix& A)
{
    return simd::kernels().squared_norm(A.data(), static_cast<std::size_t>(A.size()));
}

} // namespace

void validate(const SolverConfig& cfg)
{
    if (!(cfg.mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(cfg.p > 0.0 && cfg.p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
    if (!(cfg.rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(cfg.tol_rel_change > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (cfg.newton_iters < 0) throw std::invalid_argument("newton_iters must be non-negative");
}

Matrix d_orthonormalize(const Matrix& Y, const MassDiag& mass)
{
    const Matrix gram = Y.transpose() * mass.d.asDiagonal() * Y;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    if (eig.info() != Eigen::Success) throw RankDeficientError("eigendecomposition of Y^T D Y failed");
    const Vector& sigma = eig.eigenvalues();
    const double largest = sigma.maxCoeff();
    if (!(largest > 0.0) || !(sigma.minCoeff() >= 1e-12 * largest)) {
        throw RankDeficientError("Y^T D Y is rank deficient; perturb the iterate and retry");
    }
    const Matrix& V = eig.eigenvectors();
    const Vector inv_sqrt = sigma.cwiseSqrt().cwiseInverse();
    return Y * (V * inv_sqrt.asDiagonal() * V.transpose());
}

Matrix psi_update(const Matrix& S, const Matrix& E, const Matrix& U_S, const Matrix& U_E,
                  double rho, const MassDiag& mass)
{
    return d_orthonormalize(average_target(S, E, U_S, U_E, rho), mass);
}

Matrix s_update(const Matrix& Psi, const Matrix& U_S, const SolverConfig& cfg, const MassDiag& mass)
{
    return apply_prox(Psi, U_S, ProxRows(mass, cfg.rho, cfg.mu, cfg.p), cfg);
}

ESolver::ESolver(const SparseSymMatrix& stiffness, double rho)
    : m_rho(rho)
{
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    const SparseSymMatrix psd = stiffness.positive_semidefinite();
    const int n = psd.dimension();
    SparseMatrix identity(n, n);
    identity.setIdentity();
    m_system = rho * identity + 2.0 * psd.matrix();
    m_system.makeCompressed();
    m_factor.compute(m_system);
    if (m_factor.info() != Eigen::Success) {
        throw SolverError("factorisation of rho I + 2 L failed (n=" + std::to_string(n) +
                          ", rho=" + std::to_string(rho) + ")");
    }
}

Matrix ESolver::solve_rhs(const Matrix& rhs, int jobs) const
{
    Matrix E(rhs.rows(), rhs.cols());
    std::vector<double> residuals(static_cast<size_t>(rhs.cols()), 0.0);
    parallel_for(static_cast<int>(rhs.cols()), jobs, [&](int j) {
        const Vector b = rhs.col(j);
        const double bnorm = b.norm();
        if (bnorm == 0.0) {
            E.col(j).setZero();
            return;
        }
        Vector x = m_factor.solve(b);
        double rel = (m_system * x - b).norm() / bnorm;
        for (int refine = 0; refine < 3 && rel > 1e-12; ++refine) {
            x += m_factor.solve(Vector(b - m_system * x));
            rel = (m_system * x - b).norm() / bnorm;
        }
        residuals[static_cast<size_t>(j)] = rel;
        E.col(j) = x;
    });
    m_last_residual = 0.0;
    for (double r : residuals) m_last_residual = std::max(m_last_residual, r);
    if (!(m_last_residual <= 1e-10)) {
        throw SolverError("E-step relative residual " + std::to_string(m_last_residual) +
                          " exceeds 1e-10");
    }
    return E;
}

Matrix ESolver::solve(const Matrix& Psi, const Matrix& U_E, int jobs) const
{
    return solve_rhs(m_rho * Psi - U_E, jobs);
}

Matrix e_update(const Matrix& Psi, const Matrix& U_E, double rho, const SparseSymMatrix& stiffness)
{
    return ESolver(stiffness, rho).solve(Psi, U_E);
}

double admm_objective(const Matrix& Psi, const MeshOperators& ops, double mu, double p)
{
    const SparseMatrix& L = ops.stiffness.matrix();
    const double dirichlet = (Psi.transpose() * (L * Psi)).trace();
    if (std::isinf(mu)) return dirichlet;
    return weighted_lp_norm_p(Psi, ops.mass, p) / mu + dirichlet;
}

double orthonormality_error(const Matrix& Psi, const MassDiag& mass)
{
    Matrix G = Psi.transpose() * mass.d.asDiagonal() * Psi;
    G.diagonal().array() -= 1.0;
    return G.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix random_initial_modes(int n, int N, std::uint64_t seed, const MassDiag& mass)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Matrix Y(n, N);
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        for (Eigen::Index i = 0; i < Y.rows(); ++i) Y(i, j) = uniform(rng);
    }
    return d_orthonormalize(Y, mass);
}

namespace {

SolveResult run_admm(const MeshOperators& ops, const ESolver& esolver, int N,
                     const SolverConfig& cfg, std::uint64_t seed, const IterationObserver& observer)
{
    const int n = ops.dimension();
    const ProxRows rows(ops.mass, cfg.rho, cfg.mu, cfg.p);
    const auto& k = simd::kernels();
    const auto size = static_cast<std::size_t>(n) * static_cast<std::size_t>(N);

    SolveResult result;
    result.seed_used = seed;
    AdmmState& st = result.state;
    st.Psi = random_initial_modes(n, N, seed, ops.mass);
    st.S = st.Psi;
    st.E = st.Psi;
    st.U_S = Matrix::Zero(n, N);
    st.U_E = Matrix::Zero(n, N);

    bool converged = false;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        Matrix previous = std::move(st.Psi);
        st.Psi = psi_update(st.S, st.E, st.U_S, st.U_E, cfg.rho, ops.mass);
        st.S = apply_prox(st.Psi, st.U_S, rows, cfg);
        st.E = esolver.solve(st.Psi, st.U_E, cfg.jobs);
        k.dual_step(st.U_S.data(), st.Psi.data(), st.S.data(), cfg.rho, size);
        k.dual_step(st.U_E.data(), st.Psi.data(), st.E.data(), cfg.rho, size);

        IterationRecord rec;
        rec.iter = iter;
        rec.err_psi = std::sqrt(frobenius_sq_distance(st.Psi, previous) / frobenius_sq(previous));
        rec.primal_residual_sq = frobenius_sq_distance(st.Psi, st.S) +
                                 frobenius_sq_distance(st.Psi, st.E);
        rec.energy = admm_objective(st.Psi, ops, cfg.mu, cfg.p);
        rec.ortho_error = orthonormality_error(st.Psi, ops.mass);
        st.iter = iter;
        st.history.push_back(rec);
        if (observer) observer(st);
        // With S = E = Psi at start, the first Psi-step reproduces Psi exactly.
        if (iter >= 2 && rec.err_psi < cfg.tol_rel_change) {
            converged = true;
            break;
        }
    }

    result.modes.Psi = st.Psi;
    result.modes.mu = cfg.mu;
    result.modes.p = cfg.p;
    result.modes.converged = converged;
    result.modes.iters = st.iter;
    return result;
}

} // namespace

SolveResult solve(const MeshOperators& ops, int N, const SolverConfig& cfg,
                  const IterationObserver& observer)
{
    validate(cfg);
    const int n = ops.dimension();
    if (N < 1 || N > n) {
        throw std::invalid_argument("mode count " + std::to_string(N) + " outside [1, " +
                                    std::to_string(n) + "]");
    }
    const ESolver esolver(ops.stiffness, cfg.rho);
    try {
        return run_admm(ops, esolver, N, cfg, cfg.seed, observer);
    } catch (const RankDeficientError& err) {
        spdlog::warn("ADMM rank failure ({}); restarting with a new seed", err.what());
    }
    try {
        SolveResult result = run_admm(ops, esolver, N, cfg, cfg.seed + kRestartSeedOffset, observer);
        result.restarts = 1;
        return result;
    } catch (const RankDeficientError& err) {
        throw SolverError(std::string("ADMM failed after restart: ") + err.what());
    }
}

std::vector<char> column_support(const Matrix& Psi, int k, double relative_floor)
{
    const auto col = Psi.col(k);
    const double floor = relative_floor * col.cwiseAbs().maxCoeff();
    std::vector<char> mask(static_cast<size_t>(Psi.rows()), 0);
    for (Eigen::Index i = 0; i < Psi.rows(); ++i) mask[static_cast<size_t>(i)] = std::abs(col[i]) > floor;
    return mask;
}

double stationarity_residual(const ModeSet& modes, const MeshOperators& ops, double mu, double p)
{
    const Matrix& Psi = modes.Psi;
    const Vector& d = ops.mass.d;
    Matrix G = 2.0 * (ops.stiffness.matrix() * Psi);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active(Psi.rows(), Psi.cols());
    for (int k = 0; k < Psi.cols(); ++k) {
        const auto mask = column_support(Psi, k);
        for (Eigen::Index i = 0; i < Psi.rows(); ++i) {
            active(i, k) = mask[static_cast<size_t>(i)] != 0;
            if (active(i, k) && std::isfinite(mu)) {
                const double u = Psi(i, k);
                // Penalty is sum d_i |u|^p, so its derivative carries d_i.
                G(i, k) += d[i] * std::copysign(p * std::pow(std::abs(u), p - 1.0), u) / mu;
            }
        }
    }
    // Normal space of {Psi^T D Psi = I} is {D Psi Sym}; remove that component
    // by solving A X + X A = Psi^T D G + G^T D Psi with A = Psi^T D^2 Psi.
    const Matrix DPsi = d.asDiagonal() * Psi;
    const Matrix A = DPsi.transpose() * DPsi;
    const Matrix C = DPsi.transpose() * G + G.transpose() * DPsi;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
    const Matrix& Q = eig.eigenvectors();
    const Vector& lam = eig.eigenvalues();
    Matrix Ct = Q.transpose() * C * Q;
    for (Eigen::Index i = 0; i < Ct.rows(); ++i) {
        for (Eigen::Index j = 0; j < Ct.cols(); ++j) Ct(i, j) /= lam[i] + lam[j];
    }
    const Matrix X = Q * Ct * Q.transpose();
    const Matrix tangent = G - DPsi * X;
    double sum = 0.0;
    for (Eigen::Index k = 0; k < Psi.cols(); ++k) {
        for (Eigen::Index i = 0; i < Psi.rows(); ++i) {
            if (active(i, k)) sum += tangent(i, k) * tangent(i, k);
        }
    }
    return std::sqrt(sum);
}

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history)
{
    out << "iter,err_psi,primal_residual_sq,energy,ortho_error\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : history) {
        out << r.iter << ',' << r.err_psi << ',' << r.primal_residual_sq << ',' << r.energy << ','
            << r.ortho_error << '\n';
    }
    out.precision(old_precision);
}

} // namespace lpcm
