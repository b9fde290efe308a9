#include "v2g/qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace v2g::qp {

std::size_t ConstraintMatrix::add_row(std::span<const Entry> entries) {
    for (const auto& e : entries) {
        if (e.col >= cols_) throw std::out_of_range("constraint column out of range");
    }
    row_start_.push_back(entries_.size());
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    return row_start_.size() - 1;
}

std::size_t ConstraintMatrix::add_identity_row(std::size_t j, double scale) {
    const Entry e{j, scale};
    return add_row(std::span<const Entry>(&e, 1));
}

std::size_t ConstraintMatrix::add_prefix_row(std::size_t last, double scale) {
    std::vector<Entry> row;
    row.reserve(last + 1);
    for (std::size_t j = 0; j <= last; ++j) row.push_back({j, scale});
    return add_row(row);
}

std::span<const ConstraintMatrix::Entry> ConstraintMatrix::row(std::size_t i) const {
    const std::size_t b = row_start_[i];
    const std::size_t e = (i + 1 < row_start_.size()) ? row_start_[i + 1] : entries_.size();
    return {entries_.data() + b, e - b};
}

void ConstraintMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < rows(); ++i) {
        double s = 0.0;
        for (const auto& e : row(i)) s += e.value * x[e.col];
        y[i] = s;
    }
}

void ConstraintMatrix::multiply_transpose(std::span<const double> y, std::span<double> x) const {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
        for (const auto& e : row(i)) x[e.col] += e.value * y[i];
    }
}

std::size_t QuadraticProgram::add_constraint(std::span<const ConstraintMatrix::Entry> row,
                                             double lo, double hi) {
    lower.push_back(lo);
    upper.push_back(hi);
    return A.add_row(row);
}

std::size_t QuadraticProgram::add_box(std::size_t j, double lo, double hi) {
    lower.push_back(lo);
    upper.push_back(hi);
    return A.add_identity_row(j);
}

std::size_t QuadraticProgram::add_prefix(std::size_t last, double scale, double lo, double hi) {
    lower.push_back(lo);
    upper.push_back(hi);
    return A.add_prefix_row(last, scale);
}

void QuadraticProgram::validate() const {
    const std::size_t n = num_vars();
    if (linear_q.size() != n || A.cols() != n) {
        throw std::invalid_argument("quadratic program: inconsistent variable count");
    }
    if (lower.size() != A.rows() || upper.size() != A.rows()) {
        throw std::invalid_argument("quadratic program: bound vectors must match constraint rows");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(diag_Q[j] >= 0.0) || !std::isfinite(diag_Q[j]) || !std::isfinite(linear_q[j])) {
            throw std::invalid_argument("quadratic program: diag_Q must be finite and >= 0");
        }
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
            throw std::invalid_argument("quadratic program: lower bound exceeds upper bound at row " +
                                        std::to_string(i));
        }
    }
}

double objective_value(const QuadraticProgram& qp, std::span<const double> x) {
    double f = 0.0;
    for (std::size_t j = 0; j < qp.num_vars(); ++j) {
        f += 0.5 * qp.diag_Q[j] * x[j] * x[j] + qp.linear_q[j] * x[j];
    }
    return f;
}

double constraint_violation(const QuadraticProgram& qp, std::span<const double> x) {
    std::vector<double> ax(qp.num_constraints());
    qp.A.multiply(x, ax);
    double v = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        v = std::max({v, qp.lower[i] - ax[i], ax[i] - qp.upper[i]});
    }
    return v;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIterations: return "max-iter";
        case SolveStatus::PrimalInfeasible: return "infeasible";
        case SolveStatus::DualInfeasible: return "dual-infeasible";
    }
    return "unknown";
}

std::pair<double, double> kkt_residuals(const QuadraticProgram& qp, std::span<const double> x,
                                        std::span<const double> y) {
    std::vector<double> aty(qp.num_vars());
    qp.A.multiply_transpose(y, aty);
    double dual = 0.0;
    for (std::size_t j = 0; j < qp.num_vars(); ++j) {
        dual = std::max(dual, std::abs(qp.diag_Q[j] * x[j] + qp.linear_q[j] + aty[j]));
    }
    return {constraint_violation(qp, x), dual};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

VectorXd to_eigen(std::span<const double> v) {
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Ruiz-equilibrated copy of the problem. Scaled variables relate to the original ones by
// x = D xs, z = E^-1 zs, y = E ys / c.
struct ScaledProblem {
    std::size_t n = 0;
    std::size_t m = 0;
    VectorXd D, E;
    double c = 1.0;
    VectorXd P, q, l, u;
    MatrixXd A;  // dense; problem sizes here are a few hundred rows at most

    ScaledProblem(const QuadraticProgram& qp, int iterations) {
        n = qp.num_vars();
        m = qp.num_constraints();
        D = VectorXd::Ones(static_cast<Eigen::Index>(n));
        E = VectorXd::Ones(static_cast<Eigen::Index>(m));
        P = to_eigen(qp.diag_Q);
        q = to_eigen(qp.linear_q);
        A = MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < m; ++i)
            for (const auto& e : qp.A.row(i))
                A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) += e.value;

        auto safe_inv_sqrt = [](double v) {
            if (v < 1e-8) return 1.0;
            return std::clamp(1.0 / std::sqrt(v), 1e-4, 1e4);
        };
        for (int it = 0; it < iterations; ++it) {
            VectorXd dcol(static_cast<Eigen::Index>(n));
            for (Eigen::Index j = 0; j < dcol.size(); ++j) {
                double norm = std::abs(P(j));
                if (m > 0) norm = std::max(norm, A.col(j).cwiseAbs().maxCoeff());
                dcol(j) = safe_inv_sqrt(norm);
            }
            VectorXd erow(static_cast<Eigen::Index>(m));
            for (Eigen::Index i = 0; i < erow.size(); ++i) {
                erow(i) = safe_inv_sqrt(A.row(i).cwiseAbs().maxCoeff());
            }
            P = P.cwiseProduct(dcol).cwiseProduct(dcol);
            q = q.cwiseProduct(dcol);
            A = erow.asDiagonal() * A * dcol.asDiagonal();
            D = D.cwiseProduct(dcol);
            E = E.cwiseProduct(erow);

            const double pmean = n > 0 ? P.cwiseAbs().mean() : 0.0;
            const double scale = std::max(pmean, inf_norm(q));
            const double gamma = scale < 1e-8 ? 1.0 : std::clamp(1.0 / scale, 1e-4, 1e4);
            P *= gamma;
            q *= gamma;
            c *= gamma;
        }
        l = to_eigen(qp.lower).cwiseProduct(E);
        u = to_eigen(qp.upper).cwiseProduct(E);
    }

    [[nodiscard]] VectorXd unscale_x(const VectorXd& xs) const { return D.cwiseProduct(xs); }
    [[nodiscard]] VectorXd unscale_z(const VectorXd& zs) const { return zs.cwiseQuotient(E); }
    [[nodiscard]] VectorXd unscale_y(const VectorXd& ys) const { return E.cwiseProduct(ys) / c; }
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double eps_primal = 0.0;
    double eps_dual = 0.0;
    [[nodiscard]] bool converged() const { return primal <= eps_primal && dual <= eps_dual; }
};

class AdmmSolver {
public:
    AdmmSolver(const QuadraticProgram& qp, const SolverSettings& s)
        : qp_(qp), s_(s), sp_(qp, s.scaling_iterations) {
        const auto n = static_cast<Eigen::Index>(sp_.n);
        const auto m = static_cast<Eigen::Index>(sp_.m);
        xs_ = VectorXd::Zero(n);
        zs_ = VectorXd::Zero(m);
        ys_ = VectorXd::Zero(m);
        rho_ = s.rho;
        rho_wait_ = s.adaptive_rho_interval;
        next_rho_update_ = rho_wait_;
        set_rho_vector();
        factor();
    }

    SolveReport run() {
        SolveReport rep;
        rep.eps_abs = s_.eps_abs;
        rep.eps_rel = s_.eps_rel;
        const auto m = static_cast<Eigen::Index>(sp_.m);
        VectorXd x_prev = xs_;
        VectorXd y_prev = ys_;
        for (int k = 1; k <= s_.max_iter; ++k) {
            x_prev = xs_;
            y_prev = ys_;
            const VectorXd rhs =
                s_.sigma * xs_ - sp_.q + sp_.A.transpose() * (rho_vec_.cwiseProduct(zs_) - ys_);
            const VectorXd x_tilde = llt_.solve(rhs);
            const VectorXd z_tilde = sp_.A * x_tilde;
            const double a = s_.relaxation;
            xs_ = a * x_tilde + (1.0 - a) * xs_;
            const VectorXd z_relaxed = a * z_tilde + (1.0 - a) * zs_;
            VectorXd z_new(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                z_new(i) = std::clamp(z_relaxed(i) + ys_(i) / rho_vec_(i), sp_.l(i), sp_.u(i));
            }
            ys_ += rho_vec_.cwiseProduct(z_relaxed - z_new);
            zs_ = std::move(z_new);

            if (k % s_.check_interval != 0 && k != s_.max_iter) continue;

            const Residuals r = residuals();
            if (r.converged()) {
                finish(rep, k, SolveStatus::Optimal);
                return rep;
            }
            if (s_.polish && try_polish(rep, k)) return rep;
            if (primal_infeasible(ys_ - y_prev)) {
                finish(rep, k, SolveStatus::PrimalInfeasible, false);
                return rep;
            }
            if (dual_infeasible(xs_ - x_prev)) {
                finish(rep, k, SolveStatus::DualInfeasible, false);
                return rep;
            }
            // Rho changes void ADMM's convergence guarantee, and frequent ones keep it from
            // settling on near-degenerate LPs; each applied update doubles the wait.
            if (s_.adaptive_rho && k >= next_rho_update_) {
                if (adapt_rho()) rho_wait_ *= 2;
                next_rho_update_ = k + rho_wait_;
            }
        }
        finish(rep, s_.max_iter, SolveStatus::MaxIterations);
        return rep;
    }

private:
    void set_rho_vector() {
        const auto m = static_cast<Eigen::Index>(sp_.m);
        rho_vec_.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const bool free_row = !std::isfinite(sp_.l(i)) && !std::isfinite(sp_.u(i));
            if (free_row) {
                rho_vec_(i) = 1e-6;
            } else if (sp_.u(i) - sp_.l(i) < 1e-12 * std::max(1.0, std::abs(sp_.u(i)))) {
                rho_vec_(i) = 1e3 * rho_;
            } else {
                rho_vec_(i) = rho_;
            }
        }
    }

    void factor() {
        MatrixXd M = sp_.A.transpose() * rho_vec_.asDiagonal() * sp_.A;
        M.diagonal() += sp_.P + VectorXd::Constant(sp_.P.size(), s_.sigma);
        llt_.compute(M);
        if (llt_.info() != Eigen::Success) {
            throw std::runtime_error("qp: failed to factor the ADMM system");
        }
    }

    Residuals residuals() const {
        const VectorXd x = sp_.unscale_x(xs_);
        const VectorXd z = sp_.unscale_z(zs_);
        const VectorXd y = sp_.unscale_y(ys_);
        std::vector<double> ax(sp_.m);
        std::vector<double> aty(sp_.n);
        qp_.A.multiply(std::span<const double>(x.data(), sp_.n), ax);
        qp_.A.multiply_transpose(std::span<const double>(y.data(), sp_.m), aty);
        const VectorXd Ax = to_eigen(ax);
        const VectorXd Aty = to_eigen(aty);
        const VectorXd Px = to_eigen(qp_.diag_Q).cwiseProduct(x);
        const VectorXd q = to_eigen(qp_.linear_q);
        Residuals r;
        r.primal = inf_norm(Ax - z);
        r.dual = inf_norm(Px + q + Aty);
        r.eps_primal = s_.eps_abs + s_.eps_rel * std::max(inf_norm(Ax), inf_norm(z));
        r.eps_dual =
            s_.eps_abs + s_.eps_rel * std::max({inf_norm(Px), inf_norm(Aty), inf_norm(q)});
        return r;
    }

    bool adapt_rho() {
        const VectorXd Ax = sp_.A * xs_;
        const VectorXd Px = sp_.P.cwiseProduct(xs_);
        const VectorXd Aty = sp_.A.transpose() * ys_;
        const double prim = inf_norm(Ax - zs_) / std::max({inf_norm(Ax), inf_norm(zs_), 1e-30});
        const double dual = inf_norm(Px + sp_.q + Aty) /
                            std::max({inf_norm(Px), inf_norm(Aty), inf_norm(sp_.q), 1e-30});
        if (prim <= 0.0 || dual <= 0.0) return false;
        const double rho_new = std::clamp(rho_ * std::sqrt(prim / dual), 1e-6, 1e6);
        if (rho_new > 5.0 * rho_ || rho_new < 0.2 * rho_) {
            rho_ = rho_new;
            set_rho_vector();
            factor();
            return true;
        }
        return false;
    }

    bool primal_infeasible(const VectorXd& dys) const {
        const VectorXd dy = sp_.unscale_y(dys);
        const double norm = inf_norm(dy);
        if (norm < 1e-30) return false;
        std::vector<double> aty(sp_.n);
        qp_.A.multiply_transpose(std::span<const double>(dy.data(), sp_.m), aty);
        if (inf_norm(to_eigen(aty)) > s_.eps_primal_infeasible * norm) return false;
        double support = 0.0;
        for (std::size_t i = 0; i < sp_.m; ++i) {
            const double d = dy(static_cast<Eigen::Index>(i));
            if (d > 0.0) {
                if (!std::isfinite(qp_.upper[i])) return false;
                support += qp_.upper[i] * d;
            } else if (d < 0.0) {
                if (!std::isfinite(qp_.lower[i])) return false;
                support += qp_.lower[i] * d;
            }
        }
        return support < -s_.eps_primal_infeasible * norm;
    }

    bool dual_infeasible(const VectorXd& dxs) const {
        const VectorXd dx = sp_.unscale_x(dxs);
        const double norm = inf_norm(dx);
        if (norm < 1e-30) return false;
        const double tol = s_.eps_dual_infeasible * norm;
        if (inf_norm(to_eigen(qp_.diag_Q).cwiseProduct(dx)) > tol) return false;
        if (to_eigen(qp_.linear_q).dot(dx) > -tol) return false;
        std::vector<double> adx(sp_.m);
        qp_.A.multiply(std::span<const double>(dx.data(), sp_.n), adx);
        for (std::size_t i = 0; i < sp_.m; ++i) {
            if (std::isfinite(qp_.upper[i]) && adx[i] > tol) return false;
            if (std::isfinite(qp_.lower[i]) && adx[i] < -tol) return false;
        }
        return true;
    }

    // Solves the equality-constrained KKT system on the active set guessed from the current
    // iterate. Succeeds only when the result is primal feasible, dual feasible with correctly
    // signed multipliers.
    bool try_polish(SolveReport& rep, int iter) {
        const auto n = static_cast<Eigen::Index>(sp_.n);
        std::vector<Eigen::Index> active;
        std::vector<double> target;
        std::vector<int> side;  // -1 lower, +1 upper, 0 equality
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(sp_.m); ++i) {
            const bool eq = sp_.u(i) - sp_.l(i) < 1e-12 * std::max(1.0, std::abs(sp_.u(i)));
            const bool lo = zs_(i) - sp_.l(i) < -ys_(i);
            const bool hi = sp_.u(i) - zs_(i) < ys_(i);
            if (eq) {
                active.push_back(i);
                target.push_back(sp_.l(i));
                side.push_back(0);
            } else if (lo) {
                active.push_back(i);
                target.push_back(sp_.l(i));
                side.push_back(-1);
            } else if (hi) {
                active.push_back(i);
                target.push_back(sp_.u(i));
                side.push_back(1);
            }
        }
        const auto k = static_cast<Eigen::Index>(active.size());
        MatrixXd K = MatrixXd::Zero(n + k, n + k);
        K.topLeftCorner(n, n).diagonal() = sp_.P;
        for (Eigen::Index r = 0; r < k; ++r) {
            K.block(n + r, 0, 1, n) = sp_.A.row(active[static_cast<std::size_t>(r)]);
            K.block(0, n + r, n, 1) = sp_.A.row(active[static_cast<std::size_t>(r)]).transpose();
        }
        VectorXd rhs(n + k);
        rhs.head(n) = -sp_.q;
        for (Eigen::Index r = 0; r < k; ++r) rhs(n + r) = target[static_cast<std::size_t>(r)];

        constexpr double delta = 1e-9;
        MatrixXd K_reg = K;
        K_reg.topLeftCorner(n, n).diagonal().array() += delta;
        K_reg.bottomRightCorner(k, k).diagonal().array() -= delta;
        const Eigen::PartialPivLU<MatrixXd> lu(K_reg);
        VectorXd sol = lu.solve(rhs);
        for (int it = 0; it < 8; ++it) sol += lu.solve(rhs - K * sol);
        if (!sol.allFinite()) return false;

        VectorXd ys_pol = VectorXd::Zero(static_cast<Eigen::Index>(sp_.m));
        for (Eigen::Index r = 0; r < k; ++r) ys_pol(active[static_cast<std::size_t>(r)]) = sol(n + r);
        const VectorXd x = sp_.unscale_x(sol.head(n));
        const VectorXd y = sp_.unscale_y(ys_pol);
        const auto [prim, dual] = kkt_residuals(qp_, to_std(x), to_std(y));

        std::vector<double> ax(sp_.m);
        std::vector<double> aty(sp_.n);
        qp_.A.multiply(to_std(x), ax);
        qp_.A.multiply_transpose(to_std(y), aty);
        const VectorXd Px = to_eigen(qp_.diag_Q).cwiseProduct(x);
        const double eps_prim = s_.eps_abs + s_.eps_rel * inf_norm(to_eigen(ax));
        const double eps_dual =
            s_.eps_abs + s_.eps_rel * std::max({inf_norm(Px), inf_norm(to_eigen(aty)),
                                                inf_norm(to_eigen(qp_.linear_q))});
        if (prim > eps_prim || dual > eps_dual) return false;
        for (Eigen::Index r = 0; r < k; ++r) {
            const double yi = y(active[static_cast<std::size_t>(r)]);
            const int sd = side[static_cast<std::size_t>(r)];
            if ((sd < 0 && yi > eps_dual) || (sd > 0 && yi < -eps_dual)) return false;
        }
        rep.x = to_std(x);
        rep.y = to_std(y);
        rep.objective = objective_value(qp_, rep.x);
        rep.primal_residual = prim;
        rep.dual_residual = dual;
        rep.iterations = iter;
        rep.polished = true;
        rep.status = SolveStatus::Optimal;
        rep.final_rho = rho_;
        return true;
    }

    void finish(SolveReport& rep, int iter, SolveStatus status, bool polish_first = true) {
        if (polish_first && s_.polish && try_polish(rep, iter)) return;
        rep.x = to_std(sp_.unscale_x(xs_));
        rep.y = to_std(sp_.unscale_y(ys_));
        rep.objective = objective_value(qp_, rep.x);
        const auto [prim, dual] = kkt_residuals(qp_, rep.x, rep.y);
        rep.primal_residual = prim;
        rep.dual_residual = dual;
        rep.iterations = iter;
        rep.polished = false;
        rep.status = status;
        rep.final_rho = rho_;
    }

    const QuadraticProgram& qp_;
    SolverSettings s_;
    ScaledProblem sp_;
    VectorXd xs_, zs_, ys_;
    VectorXd rho_vec_;
    double rho_ = 0.1;
    long rho_wait_ = 0;
    long next_rho_update_ = 0;
    Eigen::LLT<MatrixXd> llt_;
};

}  // namespace

SolveReport solve(const QuadraticProgram& qp, const SolverSettings& settings) {
    qp.validate();
    if (settings.check_interval <= 0 || settings.max_iter <= 0 ||
        settings.adaptive_rho_interval <= 0) {
        throw std::invalid_argument("qp: iteration intervals and max_iter must be positive");
    }
    if (qp.num_vars() == 0) {
        SolveReport rep;
        rep.status = SolveStatus::Optimal;
        rep.y.assign(qp.num_constraints(), 0.0);
        rep.primal_residual = constraint_violation(qp, rep.x);
        if (rep.primal_residual > settings.eps_abs) rep.status = SolveStatus::PrimalInfeasible;
        return rep;
    }
    AdmmSolver solver(qp, settings);
    return solver.run();
}

}  // namespace v2g::qp
