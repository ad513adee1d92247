#include "fdid/lp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fdid/error.hpp"

namespace fdid {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

std::size_t LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
    variables.push_back({std::move(name), lower, upper});
    objective.push_back(cost);
    for (auto& c : constraints) c.coefficients.resize(variables.size(), 0.0);
    return variables.size() - 1;
}

void LinearProgram::add_constraint(std::vector<double> coefficients, Relation relation, double rhs) {
    constraints.push_back({std::move(coefficients), relation, rhs});
}

void LinearProgram::validate() const {
    if (objective.size() != variables.size()) throw ContractError("objective length does not match variable count");
    for (std::size_t j = 0; j < variables.size(); ++j) {
        const auto& v = variables[j];
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper || v.lower == kInfinity ||
            v.upper == -kInfinity) {
            throw ContractError("variable '" + v.name + "' has invalid bounds");
        }
        if (!std::isfinite(objective[j])) throw ContractError("objective coefficient of '" + v.name + "' is not finite");
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        if (c.coefficients.size() != variables.size()) {
            throw ContractError("constraint " + std::to_string(i) + " length does not match variable count");
        }
        if (!std::isfinite(c.rhs)) throw ContractError("constraint " + std::to_string(i) + " has a non-finite rhs");
    }
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
    double z = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) z += objective[j] * x[j];
    return z;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < variables.size(); ++j) {
        worst = std::max({worst, variables[j].lower - x[j], x[j] - variables[j].upper});
    }
    for (const auto& c : constraints) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lhs += c.coefficients[j] * x[j];
        const double gap = lhs - c.rhs;
        switch (c.relation) {
            case Relation::LessEqual: worst = std::max(worst, gap); break;
            case Relation::GreaterEqual: worst = std::max(worst, -gap); break;
            case Relation::Equal: worst = std::max(worst, std::abs(gap)); break;
        }
    }
    return worst;
}

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

// x_j = offset + y[pos] - y[neg], with absent columns set to npos.
struct ColumnMap {
    double offset = 0.0;
    std::size_t pos = npos;
    std::size_t neg = npos;
};

struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    Relation relation;
    double rhs;
};

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), w_(cols + 1), a_((rows + 2) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * w_ + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * w_ + c]; }
    double& rhs(std::size_t r) { return a_[r * w_ + n_]; }
    double rhs(std::size_t r) const { return a_[r * w_ + n_]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::size_t cost_row() const { return m_; }
    std::size_t phase1_row() const { return m_ + 1; }

    void pivot(std::size_t r, std::size_t q) {
        double* pr = &a_[r * w_];
        const double inv = 1.0 / pr[q];
        nz_.clear();
        for (std::size_t j = 0; j < w_; ++j) {
            if (pr[j] != 0.0) {
                pr[j] *= inv;
                nz_.push_back(j);
            }
        }
        pr[q] = 1.0;
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            double* pi = &a_[i * w_];
            const double f = pi[q];
            if (f == 0.0) continue;
            for (auto j : nz_) {
                double v = pi[j] - f * pr[j];
                if (std::abs(v) < 1e-13) v = 0.0;
                pi[j] = v;
            }
            pi[q] = 0.0;
        }
    }

private:
    std::size_t m_, n_, w_;
    std::vector<double> a_;
    std::vector<std::size_t> nz_;
};

class Simplex {
public:
    Simplex(Tableau& t, std::vector<std::size_t>& basis, std::vector<bool>& artificial, const SimplexOptions& opt,
            std::size_t max_iter)
        : t_(t), basis_(basis), artificial_(artificial), opt_(opt), max_iter_(max_iter) {}

    enum class Outcome { Optimal, Unbounded };

    Outcome run(std::size_t cost_row) {
        std::size_t degenerate = 0;
        bool bland = false;
        for (;;) {
            const std::size_t q = price(cost_row, bland);
            if (q == npos) return Outcome::Optimal;
            const auto [r, step] = ratio(q, bland);
            if (r == npos) return Outcome::Unbounded;
            if (++iterations_ > max_iter_) throw SolverError("simplex iteration limit reached");
            if (step <= 1e-12) {
                if (++degenerate > opt_.degenerate_switch) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
            t_.pivot(r, q);
            basis_[r] = q;
        }
    }

    std::size_t iterations() const { return iterations_; }

private:
    std::size_t price(std::size_t cost_row, bool bland) const {
        std::size_t q = npos;
        double best = -opt_.optimality_tolerance;
        for (std::size_t j = 0; j < t_.cols(); ++j) {
            if (artificial_[j]) continue;
            const double d = t_.at(cost_row, j);
            if (d < best) {
                q = j;
                if (bland) break;
                best = d;
            }
        }
        return q;
    }

    std::pair<std::size_t, double> ratio(std::size_t q, bool bland) const {
        std::size_t r = npos;
        double best = kInfinity;
        double best_pivot = 0.0;
        for (std::size_t i = 0; i < t_.rows(); ++i) {
            const double a = t_.at(i, q);
            if (a <= opt_.pivot_tolerance) continue;
            const double ratio = std::max(t_.rhs(i), 0.0) / a;
            const double eps = 1e-12 * std::max(1.0, best == kInfinity ? ratio : best);
            bool take = false;
            if (r == npos || ratio < best - eps) {
                take = true;
            } else if (ratio <= best + eps) {
                if (bland) {
                    take = basis_[i] < basis_[r];
                } else {
                    take = a > best_pivot * (1.0 + 1e-9) || (a >= best_pivot * (1.0 - 1e-9) && basis_[i] < basis_[r]);
                }
            }
            if (take) {
                r = i;
                best = std::min(ratio, best);
                best_pivot = a;
            }
        }
        return {r, best};
    }

    Tableau& t_;
    std::vector<std::size_t>& basis_;
    std::vector<bool>& artificial_;
    const SimplexOptions& opt_;
    std::size_t max_iter_;
    std::size_t iterations_ = 0;
};

std::vector<double> map_back(const std::vector<ColumnMap>& maps, const std::vector<double>& y) {
    std::vector<double> x(maps.size());
    for (std::size_t j = 0; j < maps.size(); ++j) {
        double v = maps[j].offset;
        if (maps[j].pos != npos) v += y[maps[j].pos];
        if (maps[j].neg != npos) v -= y[maps[j].neg];
        x[j] = v;
    }
    return x;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
    lp.validate();
    const bool maximize = lp.sense == Sense::Maximize;

    // Shift and split variables so every column is y >= 0.
    std::vector<ColumnMap> maps(lp.variables.size());
    std::size_t ncols = 0;
    std::vector<Row> rows;
    for (std::size_t j = 0; j < lp.variables.size(); ++j) {
        const auto& v = lp.variables[j];
        auto& m = maps[j];
        const bool lo = std::isfinite(v.lower);
        const bool hi = std::isfinite(v.upper);
        if (lo && hi && v.lower == v.upper) {
            m.offset = v.lower;
        } else if (lo) {
            m.offset = v.lower;
            m.pos = ncols++;
            if (hi) rows.push_back({{{m.pos, 1.0}}, Relation::LessEqual, v.upper - v.lower});
        } else if (hi) {
            m.offset = v.upper;
            m.neg = ncols++;
        } else {
            m.pos = ncols++;
            m.neg = ncols++;
        }
    }
    const std::size_t structural = ncols;

    for (const auto& c : lp.constraints) {
        Row row{{}, c.relation, c.rhs};
        for (std::size_t j = 0; j < c.coefficients.size(); ++j) {
            const double a = c.coefficients[j];
            if (a == 0.0) continue;
            row.rhs -= a * maps[j].offset;
            if (maps[j].pos != npos) row.terms.emplace_back(maps[j].pos, a);
            if (maps[j].neg != npos) row.terms.emplace_back(maps[j].neg, -a);
        }
        rows.push_back(std::move(row));
    }

    // Non-negative right-hand sides, then slack / surplus / artificial columns.
    std::size_t slack_count = 0, artificial_count = 0;
    for (auto& row : rows) {
        if (row.rhs < 0.0) {
            row.rhs = -row.rhs;
            for (auto& term : row.terms) term.second = -term.second;
            if (row.relation == Relation::LessEqual) row.relation = Relation::GreaterEqual;
            else if (row.relation == Relation::GreaterEqual) row.relation = Relation::LessEqual;
        }
        if (row.relation != Relation::Equal) ++slack_count;
        if (row.relation != Relation::LessEqual) ++artificial_count;
    }

    const std::size_t m = rows.size();
    const std::size_t n = structural + slack_count + artificial_count;
    Tableau t(m, n);
    std::vector<std::size_t> basis(m);
    std::vector<bool> artificial(n, false);

    std::size_t next = structural;
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& [c, a] : rows[i].terms) t.at(i, c) += a;
        t.rhs(i) = rows[i].rhs;
        switch (rows[i].relation) {
            case Relation::LessEqual:
                t.at(i, next) = 1.0;
                basis[i] = next++;
                break;
            case Relation::GreaterEqual:
                t.at(i, next++) = -1.0;
                [[fallthrough]];
            case Relation::Equal:
                t.at(i, next) = 1.0;
                artificial[next] = true;
                basis[i] = next++;
                break;
        }
    }

    for (std::size_t j = 0; j < maps.size(); ++j) {
        const double c = maximize ? -lp.objective[j] : lp.objective[j];
        if (maps[j].pos != npos) t.at(t.cost_row(), maps[j].pos) += c;
        if (maps[j].neg != npos) t.at(t.cost_row(), maps[j].neg) -= c;
    }

    double bmax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        bmax = std::max(bmax, t.rhs(i));
        if (!artificial[basis[i]]) continue;
        for (std::size_t j = 0; j <= n; ++j) {
            if (j < n && artificial[j]) continue;
            t.at(t.phase1_row(), j) -= (j == n ? t.rhs(i) : t.at(i, j));
        }
    }

    const std::size_t max_iter = options.max_iterations ? options.max_iterations : 50 * (m + n) + 1000;
    Simplex simplex(t, basis, artificial, options, max_iter);

    LpSolution sol;
    if (artificial_count > 0) {
        simplex.run(t.phase1_row());
        const double infeasibility = -t.rhs(t.phase1_row());
        if (infeasibility > 1e-8 * (1.0 + bmax)) {
            sol.status = LpStatus::Infeasible;
            sol.iterations = simplex.iterations();
            return sol;
        }
        // Pivot remaining (zero-level) artificials out of the basis. Rows with
        // no usable entry are redundant and stay inert.
        for (std::size_t i = 0; i < m; ++i) {
            if (!artificial[basis[i]]) continue;
            std::size_t q = npos;
            double best = 1e-9;
            for (std::size_t j = 0; j < n; ++j) {
                if (!artificial[j] && std::abs(t.at(i, j)) > best) {
                    best = std::abs(t.at(i, j));
                    q = j;
                }
            }
            if (q != npos) {
                t.pivot(i, q);
                basis[i] = q;
            }
        }
    }

    if (simplex.run(t.cost_row()) == Simplex::Outcome::Unbounded) {
        sol.status = LpStatus::Unbounded;
        sol.iterations = simplex.iterations();
        return sol;
    }

    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) y[basis[i]] = std::max(t.rhs(i), 0.0);
    std::vector<double> x = map_back(maps, y);

    if (lp.max_violation(x) > options.feasibility_tolerance) {
        // Accumulated round-off: recompute the basic solution from the original rows.
        Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        Eigen::VectorXd b(static_cast<Eigen::Index>(m));
        std::vector<std::size_t> position(n, npos);
        for (std::size_t i = 0; i < m; ++i) position[basis[i]] = i;
        std::size_t slack = structural;
        for (std::size_t i = 0; i < m; ++i) {
            const auto ei = static_cast<Eigen::Index>(i);
            b[ei] = rows[i].rhs;
            for (const auto& [c, a] : rows[i].terms) {
                if (position[c] != npos) bmat(ei, static_cast<Eigen::Index>(position[c])) += a;
            }
            auto put = [&](std::size_t col, double v) {
                if (position[col] != npos) bmat(ei, static_cast<Eigen::Index>(position[col])) = v;
            };
            if (rows[i].relation == Relation::LessEqual) {
                put(slack++, 1.0);
            } else if (rows[i].relation == Relation::GreaterEqual) {
                put(slack++, -1.0);
                put(slack++, 1.0);
            } else {
                put(slack++, 1.0);
            }
        }
        const Eigen::VectorXd yb = bmat.fullPivLu().solve(b);
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (!artificial[basis[i]]) y[basis[i]] = std::max(yb[static_cast<Eigen::Index>(i)], 0.0);
        }
        x = map_back(maps, y);
        if (lp.max_violation(x) > options.feasibility_tolerance) {
            throw SolverError("simplex result fails the feasibility audit (violation " +
                              std::to_string(lp.max_violation(x)) + ")");
        }
    }

    sol.status = LpStatus::Optimal;
    sol.values = std::move(x);
    sol.objective_value = lp.evaluate(sol.values);
    sol.iterations = simplex.iterations();
    return sol;
}

}  // namespace fdid
