#pragma once

#include "tlns/assembly.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace tlns {

struct SolveStats
{
    double residual_norm = 0.0; // max-norm of the augmented residual
    bool factorization_reused = false;
    double wall_time = 0.0;     // seconds
};

struct SaddleOptions
{
    /// Relative tolerance: ||A x - b||_inf <= tol * (1 + ||b||_inf).
    double residual_tolerance = 1e-10;
    /// Pivot-ratio threshold under which the factorization is declared singular.
    double singular_rcond = 1e-14;
    /// Test hook: drop the zero-mean pressure constraint row and column.
    bool mean_constraint = true;
};

struct SaddleSolution
{
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
    SolveStats stats;
};

namespace detail {
class UmfpackFactor;
}

/**
 * LU factorization of the augmented system
 *
 *   [ K   -B^T  0 ] [u]   [f]
 *   [ -B   0    c ] [p] = [g]
 *   [ 0    c^T  0 ] [l]   [0]
 *
 * with Dirichlet velocity rows and columns of K replaced by their diagonal
 * (homogeneous data), so the returned velocity vanishes on the boundary and
 * c^T p = 0. The object is immutable once built and solve() is reentrant.
 */
class SaddleFactorization
{
public:
    SaddleFactorization(const SparseMatrix& velocity_block, const DiscreteSystem& system,
                        const SaddleOptions& options = {});
    ~SaddleFactorization();
    SaddleFactorization(SaddleFactorization&&) noexcept;
    SaddleFactorization& operator=(SaddleFactorization&&) noexcept;

    /// rhs_pressure may be empty (treated as zero).
    SaddleSolution solve(const Eigen::VectorXd& rhs_velocity, const Eigen::VectorXd& rhs_pressure = {}) const;

    /// Pivot-ratio estimate reported by the factorization.
    double rcond() const { return rcond_; }
    int size() const { return static_cast<int>(matrix_.rows()); }
    /// The assembled augmented matrix (for oracles and diagnostics).
    const SparseMatrix& augmented_matrix() const { return matrix_; }

private:
    friend class SaddleSolver;
    SaddleFactorization() = default;

    SparseMatrix matrix_;
    std::shared_ptr<detail::UmfpackFactor> factor_;
    SaddleOptions options_;
    std::vector<int> dirichlet_rows_;
    int velocity_dofs_ = 0;
    int pressure_dofs_ = 0;
    double rcond_ = 0.0;
    bool reused_symbolic_ = false;
};

SaddleFactorization factorize(const SparseMatrix& velocity_block, const DiscreteSystem& system,
                              const SaddleOptions& options = {});

/// Repeated factorizations of velocity blocks that share one sparsity
/// pattern; the symbolic analysis is computed once.
class SaddleSolver
{
public:
    SaddleSolver(const DiscreteSystem& system, SaddleOptions options = {});

    const SaddleFactorization& factorize(const SparseMatrix& velocity_block);
    const SaddleFactorization& current() const { return fact_; }

private:
    const DiscreteSystem* system_;
    SaddleOptions options_;
    SaddleFactorization fact_;
};

/// Build the augmented matrix without factorizing it.
SparseMatrix assemble_augmented(const SparseMatrix& velocity_block, const DiscreteSystem& system,
                                bool mean_constraint = true);

} // namespace tlns
