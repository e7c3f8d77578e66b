#include "tlns/saddle_solver.hpp"

#include "tlns/error.hpp"

#include <Eigen/SparseCholesky>

#include <umfpack.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

namespace tlns {

namespace detail {

namespace {

// Saddle matrices are structurally symmetric; the symmetric strategy keeps
// the fill an order of magnitude below the unsymmetric default.
const double* umfpack_control()
{
    static const std::array<double, UMFPACK_CONTROL> control = [] {
        std::array<double, UMFPACK_CONTROL> c{};
        umfpack_di_defaults(c.data());
        c[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
        return c;
    }();
    return control.data();
}

} // namespace

/// Owns UMFPACK symbolic and numeric objects. The symbolic part may be
/// shared between factorizations of matrices with one pattern.
class UmfpackSymbolic
{
public:
    UmfpackSymbolic(const SparseMatrix& a)
        : outer_(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1)
        , inner_(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros())
    {
        double info[UMFPACK_INFO];
        const int status = umfpack_di_symbolic(static_cast<int>(a.rows()), static_cast<int>(a.cols()),
                                               a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr(), &handle_,
                                               umfpack_control(), info);
        if (status != UMFPACK_OK)
            throw SolverError(SolverFailure::PressureBlockSingular,
                              "symbolic factorization failed (UMFPACK status " + std::to_string(status) + ")");
    }
    ~UmfpackSymbolic()
    {
        if (handle_)
            umfpack_di_free_symbolic(&handle_);
    }
    UmfpackSymbolic(const UmfpackSymbolic&) = delete;
    UmfpackSymbolic& operator=(const UmfpackSymbolic&) = delete;

    bool matches(const SparseMatrix& a) const
    {
        return static_cast<std::size_t>(a.nonZeros()) == inner_.size()
            && static_cast<std::size_t>(a.outerSize() + 1) == outer_.size()
            && std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr())
            && std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
    }

    void* handle() const { return handle_; }

private:
    std::vector<int> outer_;
    std::vector<int> inner_;
    void* handle_ = nullptr;
};

class UmfpackFactor
{
public:
    UmfpackFactor(std::shared_ptr<UmfpackSymbolic> symbolic, const SparseMatrix& a)
        : symbolic_(std::move(symbolic))
    {
        double info[UMFPACK_INFO];
        status_ = umfpack_di_numeric(a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr(), symbolic_->handle(),
                                     &numeric_, umfpack_control(), info);
        rcond_ = info[UMFPACK_RCOND];
    }
    ~UmfpackFactor()
    {
        if (numeric_)
            umfpack_di_free_numeric(&numeric_);
    }
    UmfpackFactor(const UmfpackFactor&) = delete;
    UmfpackFactor& operator=(const UmfpackFactor&) = delete;

    int status() const { return status_; }
    double rcond() const { return rcond_; }
    const std::shared_ptr<UmfpackSymbolic>& symbolic() const { return symbolic_; }

    Eigen::VectorXd solve(const SparseMatrix& a, const Eigen::VectorXd& b) const
    {
        Eigen::VectorXd x(b.size());
        double info[UMFPACK_INFO];
        const int status = umfpack_di_solve(UMFPACK_A, a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr(),
                                            x.data(), b.data(), numeric_, umfpack_control(), info);
        if (status != UMFPACK_OK)
            throw SolverError(SolverFailure::PressureBlockSingular,
                              "triangular solve failed (UMFPACK status " + std::to_string(status) + ")");
        return x;
    }

private:
    std::shared_ptr<UmfpackSymbolic> symbolic_;
    void* numeric_ = nullptr;
    int status_ = UMFPACK_OK;
    double rcond_ = 0.0;
};

} // namespace detail

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix eliminate_dirichlet(const SparseMatrix& k, const std::vector<bool>& dirichlet_scalar, int ns)
{
    auto is_dirichlet = [&](int i) { return dirichlet_scalar[static_cast<std::size_t>(i % ns)]; };
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(k.nonZeros()));
    for (int col = 0; col < k.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            if (is_dirichlet(row) || is_dirichlet(col)) {
                if (row == col)
                    trips.emplace_back(row, col, it.value() != 0.0 ? it.value() : 1.0);
                continue;
            }
            trips.emplace_back(row, col, it.value());
        }
    }
    SparseMatrix out(k.rows(), k.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

// Tells a singular velocity block apart from a singular pressure coupling.
SolverFailure classify_singularity(const SparseMatrix& velocity_block, const DiscreteSystem& system)
{
    const SparseMatrix k = eliminate_dirichlet(velocity_block, system.space->dirichlet(), system.space->scalar_dofs());
    const SparseMatrix kt = k.transpose();
    if ((k - kt).norm() == 0.0) {
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
        if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
            return SolverFailure::VelocityBlockNotDefinite;
        return SolverFailure::PressureBlockSingular;
    }
    auto symbolic = std::make_shared<detail::UmfpackSymbolic>(k);
    detail::UmfpackFactor f(symbolic, k);
    if (f.status() != UMFPACK_OK || !(f.rcond() > 1e-14))
        return SolverFailure::VelocityBlockNotDefinite;
    return SolverFailure::PressureBlockSingular;
}

} // namespace

SparseMatrix assemble_augmented(const SparseMatrix& velocity_block, const DiscreteSystem& system, bool mean_constraint)
{
    const auto& sp = *system.space;
    const int nvel = sp.velocity_dofs();
    const int np = sp.pressure_dofs();
    const int ns = sp.scalar_dofs();
    if (velocity_block.rows() != nvel || velocity_block.cols() != nvel)
        throw InvalidArgument("saddle: velocity block has the wrong size");
    const int n = nvel + np + (mean_constraint ? 1 : 0);
    auto is_dirichlet = [&](int i) { return sp.dirichlet()[static_cast<std::size_t>(i % ns)]; };

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(velocity_block.nonZeros() + 2 * system.divergence.nonZeros() + 2 * np));
    for (int col = 0; col < velocity_block.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(velocity_block, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            if (is_dirichlet(row) || is_dirichlet(col)) {
                if (row == col)
                    trips.emplace_back(row, col, it.value() != 0.0 ? it.value() : 1.0);
                continue;
            }
            trips.emplace_back(row, col, it.value());
        }
    }
    for (int col = 0; col < system.divergence.outerSize(); ++col) {
        if (is_dirichlet(col))
            continue;
        for (SparseMatrix::InnerIterator it(system.divergence, col); it; ++it) {
            const int prow = nvel + static_cast<int>(it.row());
            trips.emplace_back(prow, col, -it.value());
            trips.emplace_back(col, prow, -it.value());
        }
    }
    if (mean_constraint) {
        for (int i = 0; i < np; ++i) {
            trips.emplace_back(nvel + i, nvel + np, system.pressure_mean[i]);
            trips.emplace_back(nvel + np, nvel + i, system.pressure_mean[i]);
        }
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

namespace {

std::vector<int> dirichlet_rows(const MixedSpace& sp)
{
    std::vector<int> rows;
    const int ns = sp.scalar_dofs();
    for (int c = 0; c < 2; ++c)
        for (int s = 0; s < ns; ++s)
            if (sp.dirichlet()[static_cast<std::size_t>(s)])
                rows.push_back(c * ns + s);
    return rows;
}

void check_factorization(const SparseMatrix& velocity_block, const DiscreteSystem& system, int status, double rcond,
                         double singular_rcond)
{
    if (status == UMFPACK_WARNING_singular_matrix || status != UMFPACK_OK || !(rcond > singular_rcond)) {
        const auto kind = classify_singularity(velocity_block, system);
        std::ostringstream msg;
        msg << "saddle system is singular (pivot ratio " << rcond << "): "
            << (kind == SolverFailure::VelocityBlockNotDefinite
                    ? "velocity block is not positive definite"
                    : "pressure block singular; inf-sup failure or unconstrained pressure constant");
        throw SolverError(kind, msg.str());
    }
}

} // namespace

SaddleFactorization::~SaddleFactorization() = default;
SaddleFactorization::SaddleFactorization(SaddleFactorization&&) noexcept = default;
SaddleFactorization& SaddleFactorization::operator=(SaddleFactorization&&) noexcept = default;

SaddleFactorization::SaddleFactorization(const SparseMatrix& velocity_block, const DiscreteSystem& system,
                                         const SaddleOptions& options)
    : options_(options)
    , velocity_dofs_(system.space->velocity_dofs())
    , pressure_dofs_(system.space->pressure_dofs())
{
    matrix_ = assemble_augmented(velocity_block, system, options.mean_constraint);
    auto symbolic = std::make_shared<detail::UmfpackSymbolic>(matrix_);
    factor_ = std::make_shared<detail::UmfpackFactor>(symbolic, matrix_);
    rcond_ = factor_->rcond();
    dirichlet_rows_ = dirichlet_rows(*system.space);
    check_factorization(velocity_block, system, factor_->status(), rcond_, options.singular_rcond);
}

SaddleSolution SaddleFactorization::solve(const Eigen::VectorXd& rhs_velocity, const Eigen::VectorXd& rhs_pressure) const
{
    const auto start = std::chrono::steady_clock::now();
    if (rhs_velocity.size() != velocity_dofs_)
        throw InvalidArgument("saddle solve: velocity right-hand side has the wrong size");
    if (rhs_pressure.size() != 0 && rhs_pressure.size() != pressure_dofs_)
        throw InvalidArgument("saddle solve: pressure right-hand side has the wrong size");

    Eigen::VectorXd b = Eigen::VectorXd::Zero(matrix_.rows());
    b.head(velocity_dofs_) = rhs_velocity;
    if (rhs_pressure.size() != 0)
        b.segment(velocity_dofs_, pressure_dofs_) = rhs_pressure;
    // Dirichlet rows carry the homogeneous boundary value.
    for (int i : dirichlet_rows_)
        b[i] = 0.0;

    Eigen::VectorXd x = factor_->solve(matrix_, b);
    const double bnorm = b.lpNorm<Eigen::Infinity>();
    double res = (matrix_ * x - b).lpNorm<Eigen::Infinity>();
    if (!(res <= options_.residual_tolerance * (1.0 + bnorm))) {
        // One step of iterative refinement before giving up.
        x += factor_->solve(matrix_, b - matrix_ * x);
        res = (matrix_ * x - b).lpNorm<Eigen::Infinity>();
    }
    if (!(res <= options_.residual_tolerance * (1.0 + bnorm))) {
        std::ostringstream msg;
        msg << "saddle solve residual " << res << " exceeds tolerance " << options_.residual_tolerance * (1.0 + bnorm);
        throw SolverError(SolverFailure::ResidualTooLarge, msg.str());
    }

    SaddleSolution sol;
    sol.velocity = x.head(velocity_dofs_);
    sol.pressure = x.segment(velocity_dofs_, pressure_dofs_);
    sol.stats.residual_norm = res;
    sol.stats.factorization_reused = reused_symbolic_;
    sol.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

SaddleFactorization factorize(const SparseMatrix& velocity_block, const DiscreteSystem& system,
                              const SaddleOptions& options)
{
    return SaddleFactorization(velocity_block, system, options);
}

SaddleSolver::SaddleSolver(const DiscreteSystem& system, SaddleOptions options)
    : system_(&system)
    , options_(options)
{
}

const SaddleFactorization& SaddleSolver::factorize(const SparseMatrix& velocity_block)
{
    SaddleFactorization f;
    f.options_ = options_;
    f.velocity_dofs_ = system_->space->velocity_dofs();
    f.pressure_dofs_ = system_->space->pressure_dofs();
    f.matrix_ = assemble_augmented(velocity_block, *system_, options_.mean_constraint);

    std::shared_ptr<detail::UmfpackSymbolic> symbolic;
    if (fact_.factor_ && fact_.factor_->symbolic()->matches(f.matrix_)) {
        symbolic = fact_.factor_->symbolic();
        f.reused_symbolic_ = true;
    } else {
        symbolic = std::make_shared<detail::UmfpackSymbolic>(f.matrix_);
    }
    f.factor_ = std::make_shared<detail::UmfpackFactor>(symbolic, f.matrix_);
    f.rcond_ = f.factor_->rcond();
    f.dirichlet_rows_ = dirichlet_rows(*system_->space);
    check_factorization(velocity_block, *system_, f.factor_->status(), f.rcond_, options_.singular_rcond);
    fact_ = std::move(f);
    return fact_;
}

} // namespace tlns
