#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mgdual/finite_market.hpp"

namespace mgdual {

// Finite-dimensional surrogate of the dual domain: terminal deflator values
// z_T >= 0, intermediate values by conditional expectation, conditional
// martingale equalities per (non-terminal node, asset), unit mass at the root.
// The relatively open part {z_T > 0} corresponds to equivalent local
// martingale deflators; its closure is the dual-feasible set.
struct DeflatorPolytope {
    int n_terminal = 0;
    Eigen::MatrixXd cond_exp;   // (#nodes) x n_terminal: z_all = cond_exp * z_T
    Eigen::MatrixXd eq;         // equality rows A (martingale + mass)
    Eigen::VectorXd eq_rhs;     // b: zeros and a trailing 1 for E[z] = 1
    Eigen::MatrixXd nullspace;  // N: columns span ker(A)
    Eigen::VectorXd particular; // z0 with A z0 = b (least squares)
    double particular_residual = 0.0;  // ||A z0 - b||_inf; > tol means E[z]=1 is unreachable

    std::vector<int> terminal_ids;  // polytope variable order
};

DeflatorPolytope build_polytope(const FiniteMarket& mkt);

struct NupbrResult {
    bool holds = false;
    double margin = 0.0;                 // optimal value of max{t : z >= t, A z = b}
    std::vector<double> witness;         // strictly positive terminal deflator (if holds)
    std::vector<double> separating;      // per (node,asset) strategy certificate (if not)
    std::string detail;
};

// Strict feasibility of the deflator polytope: solves the margin LP by a
// log-barrier Newton method. holds <=> a strictly positive deflator exists,
// which characterizes "no unbounded profit with bounded risk".
NupbrResult check_nupbr(const FiniteMarket& mkt);

}  // namespace mgdual
