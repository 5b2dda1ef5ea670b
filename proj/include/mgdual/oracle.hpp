#pragma once

#include <string>
#include <vector>

#include "mgdual/deflator.hpp"
#include "mgdual/finite_market.hpp"
#include "mgdual/image_duality.hpp"
#include "mgdual/utility_field.hpp"

namespace mgdual {

struct SolveOptions {
    double mu_final = 1e-12;   // last barrier stage
    double grad_tol = 1e-11;   // Newton stationarity target (absolute)
    int max_iters_per_stage = 60;
    unsigned restart_seed = 0;  // 0 = canonical start, else perturbed
};

struct PrimalSolution {
    double x = 0.0;
    double value = 0.0;              // u(x), direct multi-good solve
    double value_single_good = 0.0;  // u*(x), image-utility route
    double two_stage_gap = 0.0;      // |u - u*| / max(1,|u|)
    std::vector<double> expenditure;               // per node (0 off the clock)
    std::vector<std::vector<double>> consumption;  // per node, size m on the clock
    std::vector<std::vector<double>> holdings;     // per node, size d (non-terminal)
    std::vector<double> wealth;                    // wealth arriving at each node
    double kkt_residual = 0.0;
    int newton_iters = 0;
};

struct DualSolution {
    double y = 0.0;
    double value = 0.0;       // v(y)
    std::vector<double> z;    // normalized deflator per node, z_root = 1
    double min_terminal_z = 0.0;
    double kkt_residual = 0.0;
    int newton_iters = 0;
};

struct ResidualCheck {
    std::string name;
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string where;  // offending node/good when applicable
};

struct Theorem1Report {
    double x = 0.0, y = 0.0;  // y = u'(x) by Richardson central differences
    double u_value = 0.0, v_value = 0.0, u_star_value = 0.0;
    double u_prime = 0.0, v_prime = 0.0;
    PrimalSolution primal;
    DualSolution dual;
    std::vector<ResidualCheck> checks;
    bool all_pass() const;
    const ResidualCheck& check(const std::string& name) const;
};

// Maximizes E[ sum_t U(t,.,c_t) dkappa_t ] over consumption trees and trading
// strategies keeping wealth nonnegative. Runs the direct multi-good solve and
// the single-good image-utility route; both land within two_stage_gap.
PrimalSolution solve_primal(const FiniteMarket& mkt, const UtilityField& U, double x,
                            const SolveOptions& opt = {});

// Minimizes E[ sum_t V*(t,.,y z_t) dkappa_t ] over the closed deflator
// polytope with unit mass (V* decreasing makes maximal mass lossless).
DualSolution solve_dual(const FiniteMarket& mkt, const UtilityField& U, double y,
                        const SolveOptions& opt = {});

struct VerifyOptions {
    SolveOptions solve;
    int restarts = 5;
    double foc_tol = 1e-6;
    double conjugacy_tol = 1e-6;
    double binding_tol = 1e-6;
    double uniqueness_value_tol = 1e-8;
    double uniqueness_opt_tol = 1e-6;
};

// Full Theorem-1 diagnostic: finiteness, Inada trends of u', existence and
// uniqueness via restarts, the two first-order characterizations, budget
// binding, Legendre conjugacy, weak duality, dual positivity, and the
// deflator representation of v. Check failures are reported with residuals,
// never thrown.
Theorem1Report verify_theorem1(const FiniteMarket& mkt, const UtilityField& U, double x,
                               const VerifyOptions& opt = {});

}  // namespace mgdual
