#include "mgdual/deflator.hpp"

#include <cmath>
#include <sstream>

namespace mgdual {

DeflatorPolytope build_polytope(const FiniteMarket& mkt) {
    DeflatorPolytope poly;
    const int n = static_cast<int>(mkt.nodes.size());
    const int nt = static_cast<int>(mkt.terminals.size());
    poly.n_terminal = nt;
    poly.terminal_ids = mkt.terminals;

    std::vector<int> term_index(n, -1);
    for (int k = 0; k < nt; ++k) term_index[mkt.terminals[k]] = k;

    // conditional-expectation rows, children first (ids increase with depth)
    poly.cond_exp = Eigen::MatrixXd::Zero(n, nt);
    for (int i = n - 1; i >= 0; --i) {
        if (mkt.is_terminal(i)) {
            poly.cond_exp(i, term_index[i]) = 1.0;
        } else {
            for (int ch : mkt.children[i])
                poly.cond_exp.row(i) += mkt.nodes[ch].prob * poly.cond_exp.row(ch);
        }
    }

    int rows = 1;  // mass row
    for (int i = 0; i < n; ++i)
        if (!mkt.is_terminal(i)) rows += mkt.d;
    poly.eq = Eigen::MatrixXd::Zero(rows, nt);
    poly.eq_rhs = Eigen::VectorXd::Zero(rows);
    int r = 0;
    for (int i = 0; i < n; ++i) {
        if (mkt.is_terminal(i)) continue;
        for (int j = 0; j < mkt.d; ++j) {
            for (int ch : mkt.children[i]) {
                const double dS = mkt.nodes[ch].s_tilde[j] - mkt.nodes[i].s_tilde[j];
                poly.eq.row(r) += mkt.nodes[ch].prob * dS * poly.cond_exp.row(ch);
            }
            ++r;
        }
    }
    poly.eq.row(r) = poly.cond_exp.row(0);  // z at the root = E[z]
    poly.eq_rhs(r) = 1.0;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(poly.eq);
    poly.particular = cod.solve(poly.eq_rhs);
    poly.particular_residual =
        (poly.eq * poly.particular - poly.eq_rhs).lpNorm<Eigen::Infinity>();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(poly.eq);
    lu.setThreshold(1e-10);
    poly.nullspace = lu.kernel();
    if (poly.nullspace.cols() == 1 && poly.nullspace.norm() == 0.0)
        poly.nullspace = Eigen::MatrixXd::Zero(nt, 0);  // trivial kernel
    return poly;
}

NupbrResult check_nupbr(const FiniteMarket& mkt) {
    const DeflatorPolytope poly = build_polytope(mkt);
    NupbrResult res;
    if (poly.particular_residual > 1e-8) {
        res.holds = false;
        res.margin = -std::numeric_limits<double>::infinity();
        res.detail = "martingale equalities inconsistent with unit mass";
        return res;
    }

    const int nt = poly.n_terminal;
    const int k = static_cast<int>(poly.nullspace.cols());
    // maximize t subject to z0 + N xi >= t, via log-barrier Newton in (xi, t)
    Eigen::MatrixXd J(nt, k + 1);
    J.leftCols(k) = poly.nullspace;
    J.col(k) = Eigen::VectorXd::Constant(nt, -1.0);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(k + 1);
    w(k) = poly.particular.minCoeff() - 1.0;
    auto slack = [&](const Eigen::VectorXd& wv) -> Eigen::VectorXd {
        return poly.particular + J.leftCols(k) * wv.head(k) -
               Eigen::VectorXd::Constant(nt, wv(k));
    };

    double mu = 1.0;
    Eigen::VectorXd s = slack(w);
    for (int outer = 0; outer < 64 && mu > 1e-10; ++outer, mu *= 0.125) {
        for (int it = 0; it < 100; ++it) {
            s = slack(w);
            const Eigen::VectorXd inv_s = s.cwiseInverse();
            Eigen::VectorXd grad = -mu * J.transpose() * inv_s;
            grad(k) -= 1.0;
            const Eigen::VectorXd inv_s2 = inv_s.cwiseProduct(inv_s);
            Eigen::MatrixXd H = mu * J.transpose() * inv_s2.asDiagonal() * J;
            H.diagonal().array() += 1e-13;
            Eigen::VectorXd dw = H.ldlt().solve(-grad);
            if (grad.lpNorm<Eigen::Infinity>() < std::max(1e-12, 1e-3 * mu)) break;
            // keep slacks strictly positive
            double alpha = 1.0;
            const Eigen::VectorXd ds = J * dw;
            for (int i = 0; i < nt; ++i)
                if (ds(i) < 0) alpha = std::min(alpha, -0.99 * s(i) / ds(i));
            for (int bt = 0; bt < 60; ++bt) {
                const Eigen::VectorXd wn = w + alpha * dw;
                const Eigen::VectorXd sn = slack(wn);
                if (sn.minCoeff() > 0) {
                    const double f0 = -w(k) - mu * s.array().log().sum();
                    const double f1 = -wn(k) - mu * sn.array().log().sum();
                    if (f1 < f0 + 1e-12 * std::abs(f0) || bt == 59) {
                        w = wn;
                        break;
                    }
                }
                alpha *= 0.5;
            }
        }
    }

    s = slack(w);
    res.margin = w(k);
    res.holds = res.margin > 1e-7;
    const Eigen::VectorXd z = poly.particular + poly.nullspace * w.head(k);
    if (res.holds) {
        res.witness.assign(z.data(), z.data() + nt);
        std::ostringstream os;
        os << "strictly positive deflator with min z = " << z.minCoeff();
        res.detail = os.str();
    } else {
        // LP dual: lambda = mu / slack satisfies A^T nu = lambda, sum lambda = 1;
        // nu over the martingale rows is a dominating trading strategy.
        const Eigen::VectorXd lambda = (mu / 0.125) * s.cwiseInverse();
        const Eigen::VectorXd nu =
            poly.eq.transpose().completeOrthogonalDecomposition().solve(lambda);
        res.separating.assign(nu.data(), nu.data() + nu.size() - 1);
        std::ostringstream os;
        os << "no strictly positive deflator; margin = " << res.margin;
        res.detail = os.str();
    }
    return res;
}

}  // namespace mgdual
