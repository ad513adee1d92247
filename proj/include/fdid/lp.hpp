#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fdid {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInfinity;
};

struct Constraint {
    std::vector<double> coefficients;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<double> objective;
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;

    std::size_t add_variable(std::string name, double lower, double upper, double cost = 0.0);
    void add_constraint(std::vector<double> coefficients, Relation relation, double rhs);

    // Throws ContractError on mismatched row lengths or inverted bounds.
    void validate() const;
    double evaluate(const std::vector<double>& x) const;
    // Largest bound or constraint violation at x, in the units of the row.
    double max_violation(const std::vector<double>& x) const;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> values;
    double objective_value = 0.0;
    std::size_t iterations = 0;
};

struct SimplexOptions {
    double pivot_tolerance = 1e-9;
    double optimality_tolerance = 1e-9;
    double feasibility_tolerance = 1e-7;  // checked on the original rows after solving
    // Consecutive degenerate pivots tolerated under Dantzig pricing before
    // switching to Bland's rule for the rest of the degenerate run.
    std::size_t degenerate_switch = 50;
    std::size_t max_iterations = 0;  // 0 = 50 * (rows + columns)
};

// Dense two-phase primal simplex. Entering column: most negative reduced cost
// (lowest index on ties); leaving row: minimum ratio, ties to the lowest basic
// column. After `degenerate_switch` zero-length steps pricing falls back to
// Bland's rule until the objective moves again, which rules out cycling.
// Deterministic for identical input. Throws SolverError if the iteration cap
// is hit or the final point fails the feasibility audit.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace fdid
