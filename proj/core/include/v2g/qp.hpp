#pragma once

// Convex quadratic programs with a diagonal Hessian:
//
//     minimize    1/2 sum_i Q_i x_i^2 + sum_i q_i x_i
//     subject to  l <= A x <= u
//
// The 1/2 is part of the objective convention everywhere in this module, so a
// separable cost c x^2 is entered as Q_i = 2c.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace v2g::qp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Row-sparse constraint matrix.
class ConstraintMatrix {
public:
    struct Entry {
        std::size_t col;
        double value;
    };

    explicit ConstraintMatrix(std::size_t cols = 0) : cols_(cols) {}

    [[nodiscard]] std::size_t rows() const { return row_start_.size(); }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    /// Appends a row and returns its index.
    std::size_t add_row(std::span<const Entry> entries);
    /// e_j^T x
    std::size_t add_identity_row(std::size_t j, double scale = 1.0);
    /// scale * (x_0 + ... + x_{last})
    std::size_t add_prefix_row(std::size_t last, double scale = 1.0);

    [[nodiscard]] std::span<const Entry> row(std::size_t i) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// x = A^T y
    void multiply_transpose(std::span<const double> y, std::span<double> x) const;

private:
    std::size_t cols_;
    std::vector<std::size_t> row_start_;
    std::vector<Entry> entries_;
};

struct QuadraticProgram {
    std::vector<double> diag_Q;
    std::vector<double> linear_q;
    ConstraintMatrix A;
    std::vector<double> lower;
    std::vector<double> upper;

    explicit QuadraticProgram(std::size_t n = 0)
        : diag_Q(n, 0.0), linear_q(n, 0.0), A(n) {}

    [[nodiscard]] std::size_t num_vars() const { return diag_Q.size(); }
    [[nodiscard]] std::size_t num_constraints() const { return A.rows(); }

    std::size_t add_constraint(std::span<const ConstraintMatrix::Entry> row, double lo, double hi);
    std::size_t add_box(std::size_t j, double lo, double hi);
    std::size_t add_prefix(std::size_t last, double scale, double lo, double hi);

    /// Throws std::invalid_argument on size mismatch, negative curvature or l > u.
    void validate() const;
};

double objective_value(const QuadraticProgram& qp, std::span<const double> x);

/// Largest violation of l <= A x <= u.
double constraint_violation(const QuadraticProgram& qp, std::span<const double> x);

enum class SolveStatus { Optimal, MaxIterations, PrimalInfeasible, DualInfeasible };

std::string to_string(SolveStatus s);

struct SolverSettings {
    double eps_abs = 1e-8;
    double eps_rel = 1e-8;
    int max_iter = 200000;
    double rho = 0.1;
    double sigma = 1e-6;
    double relaxation = 1.6;
    int scaling_iterations = 10;
    bool adaptive_rho = true;
    int check_interval = 25;
    int adaptive_rho_interval = 100;  // first rho update; the wait doubles after each change
    bool polish = true;
    double eps_primal_infeasible = 1e-7;
    double eps_dual_infeasible = 1e-7;
};

struct SolveReport {
    std::vector<double> x;
    std::vector<double> y;  // constraint multipliers, > 0 on active upper bounds
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    bool polished = false;
    SolveStatus status = SolveStatus::MaxIterations;
    double eps_abs = 0.0;
    double eps_rel = 0.0;
    double final_rho = 0.0;

    [[nodiscard]] bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Operator-splitting (ADMM) solve with active-set polishing of the final iterate.
SolveReport solve(const QuadraticProgram& qp, const SolverSettings& settings = {});

/// True KKT residuals of (x, y) against the unscaled problem.
std::pair<double, double> kkt_residuals(const QuadraticProgram& qp, std::span<const double> x,
                                        std::span<const double> y);

}  // namespace v2g::qp
