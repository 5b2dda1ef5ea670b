#include "mgdual/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mgdual {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Primal barrier-Newton solver.
//
// Variables: consumption at clock-charged nodes and holdings at non-terminal
// nodes. Terminal budget constraints bind by strict monotonicity, so the last
// good at each charged terminal node is substituted out (c_m = residual
// wealth / S^m); the remaining nonnegativity constraints stay strictly
// interior under Inada, which keeps the barrier path well-conditioned.
// ---------------------------------------------------------------------------

// Per-node objective adapter; lets the same solver run the direct multi-good
// problem and the single-good image-utility route.
struct NodeObjective {
    int m = 0;
    std::function<double(int node, const double* c)> eval;
    std::function<void(int node, const double* c, double* g)> grad;
    std::function<void(int node, const double* c, double* h)> hess;
    std::function<void(int node, double* S)> prices;  // size m
};

struct PrimalProblem {
    const FiniteMarket* mkt = nullptr;
    NodeObjective obj;
    double x = 0.0;

    int n_vars = 0;
    std::vector<int> cons_offset;  // -1 when the node has no consumption vars
    std::vector<int> cons_count;   // m interior, m-1 terminal (charged), 0 otherwise
    std::vector<int> hold_offset;  // -1 for terminal nodes
    std::vector<std::vector<double>> S;  // goods prices per node
    std::vector<double> w;               // clock weight P_n * dkappa_n

    MatrixXd wealth_rows;  // node -> affine wealth map
    VectorXd wealth_const;
    std::vector<int> barrier_nodes;  // nodes with a log-barrier slack
    MatrixXd barrier_rows;           // slack = row . v + const
    VectorXd barrier_const;
    std::vector<int> charged_terminals;
    MatrixXd last_good_rows;  // per charged terminal: eliminated good as affine map
    VectorXd last_good_const;

    void build(const FiniteMarket& market, NodeObjective o, double x0) {
        mkt = &market;
        obj = std::move(o);
        x = x0;
        const int n = static_cast<int>(market.nodes.size());
        const int m = obj.m;
        cons_offset.assign(n, -1);
        cons_count.assign(n, 0);
        hold_offset.assign(n, -1);
        S.assign(n, {});
        w.assign(n, 0.0);

        int p = 0;
        for (int i = 0; i < n; ++i) {
            S[i].resize(m);
            obj.prices(i, S[i].data());
            w[i] = market.clock_weight(i);
            const bool charged = market.nodes[i].dkappa > 0.0;
            if (charged) {
                cons_count[i] = market.is_terminal(i) ? m - 1 : m;
                cons_offset[i] = p;
                p += cons_count[i];
            }
        }
        for (int i = 0; i < n; ++i)
            if (!market.is_terminal(i)) {
                hold_offset[i] = p;
                p += market.d;
            }
        n_vars = p;

        wealth_rows = MatrixXd::Zero(n, p);
        wealth_const = VectorXd::Zero(n);
        wealth_const(0) = x;
        for (int i = 1; i < n; ++i) {
            const int par = market.nodes[i].parent;
            wealth_rows.row(i) = wealth_rows.row(par);
            wealth_const(i) = wealth_const(par);
            if (cons_offset[par] >= 0 && !market.is_terminal(par))
                for (int k = 0; k < m; ++k)
                    wealth_rows(i, cons_offset[par] + k) -= S[par][k];
            for (int j = 0; j < market.d; ++j)
                wealth_rows(i, hold_offset[par] + j) +=
                    market.nodes[i].s_tilde[j] - market.nodes[par].s_tilde[j];
        }

        barrier_nodes.clear();
        charged_terminals.clear();
        for (int i = 0; i < n; ++i) {
            if (!market.is_terminal(i))
                barrier_nodes.push_back(i);  // post-spend wealth >= 0
            else if (market.nodes[i].dkappa <= 0.0)
                barrier_nodes.push_back(i);  // stranded terminal wealth >= 0
            else
                charged_terminals.push_back(i);
        }
        barrier_rows = MatrixXd::Zero(static_cast<int>(barrier_nodes.size()), p);
        barrier_const = VectorXd::Zero(static_cast<int>(barrier_nodes.size()));
        for (std::size_t b = 0; b < barrier_nodes.size(); ++b) {
            const int i = barrier_nodes[b];
            barrier_rows.row(static_cast<int>(b)) = wealth_rows.row(i);
            barrier_const(static_cast<int>(b)) = wealth_const(i);
            if (cons_offset[i] >= 0 && !market.is_terminal(i))
                for (int k = 0; k < m; ++k)
                    barrier_rows(static_cast<int>(b), cons_offset[i] + k) -= S[i][k];
        }

        last_good_rows = MatrixXd::Zero(static_cast<int>(charged_terminals.size()), p);
        last_good_const = VectorXd::Zero(static_cast<int>(charged_terminals.size()));
        for (std::size_t q = 0; q < charged_terminals.size(); ++q) {
            const int i = charged_terminals[q];
            last_good_rows.row(static_cast<int>(q)) = wealth_rows.row(i) / S[i][m - 1];
            last_good_const(static_cast<int>(q)) = wealth_const(i) / S[i][m - 1];
            for (int k = 0; k < m - 1; ++k)
                last_good_rows(static_cast<int>(q), cons_offset[i] + k) -=
                    S[i][k] / S[i][m - 1];
        }
    }

    // x enters only through the affine constants; rebuilding them is enough
    void set_x(double new_x) {
        x = new_x;
        wealth_const.setConstant(new_x);
        barrier_const.setConstant(new_x);
        for (std::size_t q = 0; q < charged_terminals.size(); ++q)
            last_good_const(static_cast<int>(q)) =
                new_x / S[charged_terminals[q]][obj.m - 1];
    }

    void full_consumption(int node, int term_idx, const VectorXd& v, double* c) const {
        const int m = obj.m;
        for (int k = 0; k < cons_count[node]; ++k) c[k] = v(cons_offset[node] + k);
        if (term_idx >= 0)
            c[m - 1] = last_good_rows.row(term_idx).dot(v) + last_good_const(term_idx);
    }

    // smallest of all quantities that must stay strictly positive
    double feasible_margin(const VectorXd& v) const {
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(cons_offset.size()); ++i)
            for (int k = 0; k < cons_count[i]; ++k) mn = std::min(mn, v(cons_offset[i] + k));
        const VectorXd slack = barrier_rows * v + barrier_const;
        if (slack.size()) mn = std::min(mn, slack.minCoeff());
        const VectorXd lg = last_good_rows * v + last_good_const;
        if (lg.size()) mn = std::min(mn, lg.minCoeff());
        return mn;
    }

    double phi(const VectorXd& v) const {
        const int m = obj.m;
        double total = 0.0;
        std::vector<double> c(m);
        int q = 0;
        for (int i = 0; i < static_cast<int>(cons_offset.size()); ++i) {
            if (cons_offset[i] < 0) continue;
            const bool term = mkt->is_terminal(i);
            full_consumption(i, term ? q : -1, v, c.data());
            if (term) ++q;
            total += w[i] * obj.eval(i, c.data());
        }
        return total;
    }

    void phi_derivs(const VectorXd& v, VectorXd& grad, MatrixXd& hess) const {
        const int m = obj.m;
        grad.setZero(n_vars);
        hess.setZero(n_vars, n_vars);
        std::vector<double> c(m), g(m), h(m * m);
        int q = 0;
        for (int i = 0; i < static_cast<int>(cons_offset.size()); ++i) {
            if (cons_offset[i] < 0) continue;
            const bool term = mkt->is_terminal(i);
            full_consumption(i, term ? q : -1, v, c.data());
            obj.grad(i, c.data(), g.data());
            obj.hess(i, c.data(), h.data());
            if (!term) {
                for (int a = 0; a < m; ++a) {
                    grad(cons_offset[i] + a) += w[i] * g[a];
                    for (int b = 0; b < m; ++b)
                        hess(cons_offset[i] + a, cons_offset[i] + b) += w[i] * h[a * m + b];
                }
            } else {
                // chain rule through the substituted last good
                const auto lrow = last_good_rows.row(q);
                for (int a = 0; a < m - 1; ++a) grad(cons_offset[i] + a) += w[i] * g[a];
                grad += (w[i] * g[m - 1]) * lrow.transpose();
                for (int a = 0; a < m - 1; ++a) {
                    for (int b = 0; b < m - 1; ++b)
                        hess(cons_offset[i] + a, cons_offset[i] + b) += w[i] * h[a * m + b];
                    hess.row(cons_offset[i] + a) += (w[i] * h[a * m + (m - 1)]) * lrow;
                    hess.col(cons_offset[i] + a) += (w[i] * h[(m - 1) * m + a]) * lrow.transpose();
                }
                hess += (w[i] * h[(m - 1) * m + (m - 1)]) * (lrow.transpose() * lrow);
                ++q;
            }
        }
    }

    VectorXd canonical_start(unsigned seed) const {
        const int m = obj.m;
        const int n = static_cast<int>(cons_offset.size());
        VectorXd v = VectorXd::Zero(n_vars);
        const double per_level = x / (2.0 * static_cast<double>(mkt->times.size()));
        for (int i = 0; i < n; ++i)
            if (cons_offset[i] >= 0 && !mkt->is_terminal(i))
                for (int k = 0; k < m; ++k) v(cons_offset[i] + k) = per_level / (m * S[i][k]);
        int q = 0;
        for (int tid : charged_terminals) {
            const double wT = wealth_rows.row(tid).dot(v) + wealth_const(tid);
            for (int k = 0; k < m - 1; ++k)
                v(cons_offset[tid] + k) = wT / (2.0 * m * S[tid][k]);
            ++q;
        }
        (void)q;
        if (seed != 0) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> nd;
            VectorXd pert = v;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < cons_count[i]; ++k)
                    pert(cons_offset[i] + k) *= std::exp(0.25 * nd(rng));
            for (int i = 0; i < n; ++i)
                if (hold_offset[i] >= 0)
                    for (int j = 0; j < mkt->d; ++j)
                        pert(hold_offset[i] + j) =
                            0.05 * x * nd(rng) / std::max(1.0, mkt->nodes[i].s_tilde[j]);
            // blend back toward the canonical start until strictly feasible
            for (double blend = 1.0; blend > 1e-4; blend *= 0.5) {
                const VectorXd cand = v + blend * (pert - v);
                if (feasible_margin(cand) > 0) return cand;
            }
        }
        return v;
    }
};

struct BarrierResult {
    VectorXd v;
    double value = 0.0;
    double kkt = 0.0;
    int iters = 0;
};

BarrierResult maximize_with_barrier(const PrimalProblem& prob, const SolveOptions& opt,
                                    const VectorXd* warm = nullptr) {
    VectorXd v;
    bool warm_ok = false;
    if (warm && warm->size() == prob.n_vars && prob.feasible_margin(*warm) > 0) {
        v = *warm;
        warm_ok = true;
    } else {
        v = prob.canonical_start(opt.restart_seed);
    }
    if (!(prob.feasible_margin(v) > 0))
        throw std::runtime_error("primal solver: infeasible start");

    const int p = prob.n_vars;
    const int nb = static_cast<int>(prob.barrier_nodes.size());
    VectorXd grad(p);
    MatrixXd hess(p, p);
    int total_iters = 0;
    double kkt = std::numeric_limits<double>::infinity();

    double mu0 = std::max(1.0, std::abs(prob.phi(v)) / std::max(1, nb));
    if (warm_ok) mu0 = std::max(1e-6, opt.mu_final);
    for (double mu = mu0;; mu = std::max(mu * 0.1, opt.mu_final)) {
        for (int it = 0; it < opt.max_iters_per_stage; ++it) {
            ++total_iters;
            prob.phi_derivs(v, grad, hess);
            VectorXd slack = prob.barrier_rows * v + prob.barrier_const;
            VectorXd g = -grad;
            MatrixXd H = -hess;
            for (int b = 0; b < nb; ++b) {
                g -= (mu / slack(b)) * prob.barrier_rows.row(b).transpose();
                H += (mu / (slack(b) * slack(b))) * prob.barrier_rows.row(b).transpose() *
                     prob.barrier_rows.row(b);
            }
            kkt = g.lpNorm<Eigen::Infinity>();
            if (kkt < std::max(opt.grad_tol, 1e-3 * mu)) break;

            VectorXd dv;
            double reg = 0.0;
            for (int attempt = 0; attempt < 8; ++attempt) {
                MatrixXd Hr = H;
                if (reg > 0) Hr.diagonal().array() += reg;
                Eigen::LDLT<MatrixXd> ldlt(Hr);
                dv = ldlt.solve(-g);
                if (ldlt.info() == Eigen::Success && dv.allFinite() && g.dot(dv) < 0) break;
                reg = reg == 0 ? 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff()) : reg * 100;
            }

            // fraction-to-boundary on every strictly positive quantity
            double alpha = 1.0;
            auto cap = [&](double q0, double dq) {
                if (dq < 0) alpha = std::min(alpha, -0.995 * q0 / dq);
            };
            for (int i = 0; i < static_cast<int>(prob.cons_offset.size()); ++i)
                for (int k = 0; k < prob.cons_count[i]; ++k)
                    cap(v(prob.cons_offset[i] + k), dv(prob.cons_offset[i] + k));
            {
                const VectorXd ds = prob.barrier_rows * dv;
                for (int b = 0; b < nb; ++b) cap(slack(b), ds(b));
                const VectorXd lg = prob.last_good_rows * v + prob.last_good_const;
                const VectorXd dlg = prob.last_good_rows * dv;
                for (int b = 0; b < lg.size(); ++b) cap(lg(b), dlg(b));
            }

            auto merit = [&](const VectorXd& vv) {
                const VectorXd s = prob.barrier_rows * vv + prob.barrier_const;
                return -prob.phi(vv) - mu * s.array().log().sum();
            };
            const double f0 = merit(v);
            bool moved = false;
            for (int bt = 0; bt < 50; ++bt) {
                const VectorXd vn = v + alpha * dv;
                if (prob.feasible_margin(vn) > 0 && merit(vn) < f0 + 1e-14 * std::abs(f0)) {
                    v = vn;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!moved) break;
        }
        if (mu <= opt.mu_final) break;
    }
    BarrierResult out;
    out.v = v;
    out.value = prob.phi(v);
    out.kkt = kkt;
    out.iters = total_iters;
    return out;
}

NodeObjective direct_objective(const FiniteMarket& mkt, const UtilityField& U) {
    NodeObjective o;
    o.m = U.m;
    const auto* M = &mkt;
    const auto* Up = &U;
    o.eval = [M, Up](int node, const double* c) {
        return Up->eval(M->node_time(node), node, std::span<const double>(c, Up->m)).value();
    };
    o.grad = [M, Up](int node, const double* c, double* g) {
        Up->gradient(M->node_time(node), node, std::span<const double>(c, Up->m),
                     std::span<double>(g, Up->m));
    };
    o.hess = [M, Up](int node, const double* c, double* h) {
        Up->hessian(M->node_time(node), node, std::span<const double>(c, Up->m),
                    std::span<double>(h, static_cast<std::size_t>(Up->m) * Up->m));
    };
    o.prices = [M, Up](int node, double* S) {
        for (int k = 0; k < Up->m; ++k) S[k] = M->nodes[node].goods[k];
    };
    return o;
}

NodeObjective image_objective(const FiniteMarket& mkt, const ImageUtility& img) {
    NodeObjective o;
    o.m = 1;
    const auto* M = &mkt;
    const auto* I = &img;
    o.eval = [M, I](int node, const double* c) {
        return I->eval(M->node_time(node), node, c[0]).value();
    };
    o.grad = [M, I](int node, const double* c, double* g) {
        g[0] = I->deriv(M->node_time(node), node, c[0]);
    };
    o.hess = [M, I](int node, const double* c, double* h) {
        h[0] = I->second_deriv(M->node_time(node), node, c[0]);
    };
    o.prices = [](int, double* S) { S[0] = 1.0; };
    return o;
}

// ---------------------------------------------------------------------------
// Dual barrier-Newton solver over the deflator polytope.
// ---------------------------------------------------------------------------

struct ConjAccessor {
    std::function<double(int node, double Y)> val, d1, d2;
};

ConjAccessor make_conjugate(const FiniteMarket& mkt, const UtilityField& U) {
    ConjAccessor a;
    if (U.additive()) {
        // V*(t,., y) = sum_i V^i(y S^i): conjugates add under infimal
        // convolution of the per-good utilities.
        const auto* M = &mkt;
        const auto* Up = &U;
        a.val = [M, Up](int node, double Y) {
            double s = 0.0;
            for (int i = 0; i < Up->m; ++i)
                s += Up->components[i].conjugate(Y * M->nodes[node].goods[i]);
            return s;
        };
        a.d1 = [M, Up](int node, double Y) {
            double s = 0.0;
            for (int i = 0; i < Up->m; ++i) {
                const double Si = M->nodes[node].goods[i];
                s += Si * Up->components[i].conjugate_deriv(Y * Si);
            }
            return s;
        };
        a.d2 = [M, Up](int node, double Y) {
            double s = 0.0;
            for (int i = 0; i < Up->m; ++i) {
                const double Si = M->nodes[node].goods[i];
                s += Si * Si * Up->components[i].conjugate_second(Y * Si);
            }
            return s;
        };
        return a;
    }
    auto conj = std::make_shared<ConjugateField>(ImageUtility(U, mkt.goods_view()));
    const auto* M = &mkt;
    a.val = [M, conj](int node, double Y) { return conj->eval(M->node_time(node), node, Y); };
    a.d1 = [M, conj](int node, double Y) { return conj->deriv(M->node_time(node), node, Y); };
    a.d2 = [M, conj](int node, double Y) {
        return conj->second_deriv(M->node_time(node), node, Y);
    };
    return a;
}

struct DualWork {
    DeflatorPolytope poly;
    std::vector<int> charged;  // nodes with clock weight
    VectorXd weights;          // P_n dkappa_n on charged nodes
    MatrixXd map;              // charged-node z as a function of xi
    VectorXd map_const;
    MatrixXd term_map;         // terminal z as a function of xi (barrier slacks)
    VectorXd term_const;
    VectorXd xi_start;
};

DualWork make_dual_work(const FiniteMarket& mkt) {
    DualWork wrk;
    wrk.poly = build_polytope(mkt);
    if (wrk.poly.particular_residual > 1e-8)
        throw std::runtime_error("solve_dual: deflator polytope is empty (NUPBR fails)");
    const int n = static_cast<int>(mkt.nodes.size());
    for (int i = 0; i < n; ++i)
        if (mkt.clock_weight(i) > 0) wrk.charged.push_back(i);
    const int nc = static_cast<int>(wrk.charged.size());
    wrk.weights.resize(nc);
    MatrixXd rows(nc, wrk.poly.n_terminal);
    for (int c = 0; c < nc; ++c) {
        wrk.weights(c) = mkt.clock_weight(wrk.charged[c]);
        rows.row(c) = wrk.poly.cond_exp.row(wrk.charged[c]);
    }
    wrk.map = rows * wrk.poly.nullspace;
    wrk.map_const = rows * wrk.poly.particular;
    wrk.term_map = wrk.poly.nullspace;
    wrk.term_const = wrk.poly.particular;

    const NupbrResult feas = check_nupbr(mkt);
    if (!feas.holds)
        throw std::runtime_error("solve_dual: market admits unbounded profit (no deflator)");
    VectorXd zw(wrk.poly.n_terminal);
    for (int i = 0; i < wrk.poly.n_terminal; ++i) zw(i) = feas.witness[i];
    wrk.xi_start = wrk.poly.nullspace.completeOrthogonalDecomposition().solve(
        zw - wrk.poly.particular);
    return wrk;
}

struct DualRunResult {
    VectorXd xi;
    double value = 0.0;
    double kkt = 0.0;
    int iters = 0;
};

DualRunResult minimize_dual(const DualWork& wrk, const ConjAccessor& conj, double y,
                            const SolveOptions& opt, const VectorXd* xi_init) {
    const int k = static_cast<int>(wrk.term_map.cols());
    const int nc = static_cast<int>(wrk.weights.size());
    const int nt = static_cast<int>(wrk.term_const.size());

    VectorXd xi = xi_init ? *xi_init : wrk.xi_start;
    if (opt.restart_seed != 0) {
        std::mt19937_64 rng(opt.restart_seed);
        std::normal_distribution<double> nd;
        VectorXd pert(k);
        for (int i = 0; i < k; ++i) pert(i) = nd(rng);
        const double scale = 0.3 * (wrk.term_map * xi + wrk.term_const).minCoeff();
        for (double blend = 1.0; blend > 1e-6; blend *= 0.5) {
            const VectorXd cand = xi + blend * scale * pert;
            if (((wrk.term_map * cand + wrk.term_const).minCoeff()) > 0) {
                xi = cand;
                break;
            }
        }
    }
    if ((wrk.term_map * xi + wrk.term_const).minCoeff() <= 0)
        throw std::runtime_error("dual solver: infeasible start");

    auto objective = [&](const VectorXd& xiv) {
        const VectorXd z = wrk.map * xiv + wrk.map_const;
        double s = 0.0;
        for (int c = 0; c < nc; ++c) s += wrk.weights(c) * conj.val(wrk.charged[c], y * z(c));
        return s;
    };

    double kkt = std::numeric_limits<double>::infinity();
    int iters = 0;
    double mu0 = std::max(1.0, std::abs(objective(xi)) / std::max(1, nt));
    if (xi_init) mu0 = std::max(1e-6, opt.mu_final);  // warm start: short path
    for (double mu = mu0;; mu = std::max(mu * 0.1, opt.mu_final)) {
        for (int it = 0; it < opt.max_iters_per_stage; ++it) {
            ++iters;
            const VectorXd z = wrk.map * xi + wrk.map_const;
            const VectorXd zt = wrk.term_map * xi + wrk.term_const;
            VectorXd g = VectorXd::Zero(k);
            MatrixXd H = MatrixXd::Zero(k, k);
            for (int c = 0; c < nc; ++c) {
                const double Y = y * z(c);
                const double wv = wrk.weights(c);
                g += (wv * y * conj.d1(wrk.charged[c], Y)) * wrk.map.row(c).transpose();
                H += (wv * y * y * conj.d2(wrk.charged[c], Y)) * wrk.map.row(c).transpose() *
                     wrk.map.row(c);
            }
            for (int t = 0; t < nt; ++t) {
                g -= (mu / zt(t)) * wrk.term_map.row(t).transpose();
                H += (mu / (zt(t) * zt(t))) * wrk.term_map.row(t).transpose() *
                     wrk.term_map.row(t);
            }
            kkt = g.lpNorm<Eigen::Infinity>();
            if (kkt < std::max(opt.grad_tol, 1e-3 * mu)) break;

            VectorXd dxi;
            double reg = 0.0;
            for (int attempt = 0; attempt < 8; ++attempt) {
                MatrixXd Hr = H;
                if (reg > 0) Hr.diagonal().array() += reg;
                Eigen::LDLT<MatrixXd> ldlt(Hr);
                dxi = ldlt.solve(-g);
                if (ldlt.info() == Eigen::Success && dxi.allFinite() && g.dot(dxi) < 0) break;
                reg = reg == 0 ? 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff()) : reg * 100;
            }

            double alpha = 1.0;
            const VectorXd dzt = wrk.term_map * dxi;
            for (int t = 0; t < nt; ++t)
                if (dzt(t) < 0) alpha = std::min(alpha, -0.995 * zt(t) / dzt(t));

            auto merit = [&](const VectorXd& xv) {
                const VectorXd s = wrk.term_map * xv + wrk.term_const;
                if (s.minCoeff() <= 0) return std::numeric_limits<double>::infinity();
                return objective(xv) - mu * s.array().log().sum();
            };
            const double f0 = merit(xi);
            for (int bt = 0; bt < 50; ++bt) {
                const VectorXd xn = xi + alpha * dxi;
                if (merit(xn) < f0 + 1e-14 * std::abs(f0)) {
                    xi = xn;
                    break;
                }
                alpha *= 0.5;
                if (bt == 49) it = opt.max_iters_per_stage;  // stalled
            }
        }
        if (mu <= opt.mu_final) break;
    }
    DualRunResult out;
    out.xi = xi;
    out.value = objective(xi);
    out.kkt = kkt;
    out.iters = iters;
    return out;
}

DualSolution package_dual(const FiniteMarket& mkt, const DualWork& wrk,
                          const DualRunResult& run, double y) {
    DualSolution sol;
    sol.y = y;
    sol.value = run.value;
    const VectorXd zt = wrk.term_map * run.xi + wrk.term_const;
    const VectorXd zall = wrk.poly.cond_exp * zt;
    sol.z.assign(zall.data(), zall.data() + zall.size());
    sol.min_terminal_z = zt.minCoeff();
    sol.kkt_residual = run.kkt;
    sol.newton_iters = run.iters;
    (void)mkt;
    return sol;
}

}  // namespace

bool Theorem1Report::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const ResidualCheck& Theorem1Report::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no check named " + name);
}

namespace {

PrimalSolution package_primal(const FiniteMarket& mkt, const UtilityField& U,
                              const PrimalProblem& direct, const BarrierResult& run,
                              const BarrierResult& run1, double x) {
    PrimalSolution sol;
    sol.x = x;
    sol.value = run.value;
    sol.value_single_good = run1.value;
    sol.two_stage_gap = std::abs(run.value - run1.value) / std::max(1.0, std::abs(run.value));
    sol.kkt_residual = std::max(run.kkt, run1.kkt);
    sol.newton_iters = run.iters + run1.iters;

    const int n = static_cast<int>(mkt.nodes.size());
    sol.expenditure.assign(n, 0.0);
    sol.consumption.assign(n, {});
    sol.holdings.assign(n, {});
    sol.wealth.assign(n, 0.0);
    std::vector<double> c(U.m);
    int q = 0;
    for (int i = 0; i < n; ++i) {
        sol.wealth[i] = direct.wealth_rows.row(i).dot(run.v) + direct.wealth_const(i);
        if (direct.cons_offset[i] >= 0) {
            const bool term = mkt.is_terminal(i);
            direct.full_consumption(i, term ? q : -1, run.v, c.data());
            if (term) ++q;
            sol.consumption[i].assign(c.begin(), c.end());
            double e = 0.0;
            for (int k = 0; k < U.m; ++k) e += c[k] * mkt.nodes[i].goods[k];
            sol.expenditure[i] = e;
        }
        if (direct.hold_offset[i] >= 0) {
            sol.holdings[i].resize(mkt.d);
            for (int j = 0; j < mkt.d; ++j) sol.holdings[i][j] = run.v(direct.hold_offset[i] + j);
        }
    }
    return sol;
}

}  // namespace

PrimalSolution solve_primal(const FiniteMarket& mkt, const UtilityField& U, double x,
                            const SolveOptions& opt) {
    if (!(x > 0.0)) throw std::invalid_argument("solve_primal: x must be > 0");
    if (!mkt.finalized()) throw std::invalid_argument("solve_primal: market not finalized");
    if (U.m != mkt.m) throw std::invalid_argument("solve_primal: goods dimension mismatch");

    PrimalProblem direct;
    direct.build(mkt, direct_objective(mkt, U), x);
    const BarrierResult run = maximize_with_barrier(direct, opt);

    ImageUtility img(U, mkt.goods_view());
    PrimalProblem single;
    single.build(mkt, image_objective(mkt, img), x);
    const BarrierResult run1 = maximize_with_barrier(single, opt);

    return package_primal(mkt, U, direct, run, run1, x);
}

DualSolution solve_dual(const FiniteMarket& mkt, const UtilityField& U, double y,
                        const SolveOptions& opt) {
    if (!(y > 0.0)) throw std::invalid_argument("solve_dual: y must be > 0");
    if (!mkt.finalized()) throw std::invalid_argument("solve_dual: market not finalized");
    const DualWork wrk = make_dual_work(mkt);
    const ConjAccessor conj = make_conjugate(mkt, U);
    const DualRunResult run = minimize_dual(wrk, conj, y, opt, nullptr);
    return package_dual(mkt, wrk, run, y);
}

Theorem1Report verify_theorem1(const FiniteMarket& mkt, const UtilityField& U, double x,
                               const VerifyOptions& opt) {
    Theorem1Report rep;
    rep.x = x;

    // primal pieces ---------------------------------------------------------
    PrimalProblem direct;
    direct.build(mkt, direct_objective(mkt, U), x);
    const BarrierResult base = maximize_with_barrier(direct, opt.solve);
    {
        ImageUtility img(U, mkt.goods_view());
        PrimalProblem single;
        single.build(mkt, image_objective(mkt, img), x);
        const BarrierResult run1 = maximize_with_barrier(single, opt.solve);
        rep.primal = package_primal(mkt, U, direct, base, run1, x);
    }
    rep.u_value = rep.primal.value;
    rep.u_star_value = rep.primal.value_single_good;

    // direct-route value with warm starts; u' by Richardson central difference
    auto u_at = [&](double xx, const VectorXd* warm) {
        direct.set_x(xx);
        return maximize_with_barrier(direct, opt.solve, warm);
    };
    auto u_prime = [&](double xx, double hrel, const VectorXd* anchor) {
        BarrierResult a;
        if (!anchor) {
            a = u_at(xx, nullptr);
            anchor = &a.v;
        }
        const double h = hrel * xx;
        const double up = u_at(xx + h, anchor).value;
        const double dn = u_at(xx - h, anchor).value;
        const double up2 = u_at(xx + 2 * h, anchor).value;
        const double dn2 = u_at(xx - 2 * h, anchor).value;
        const double d1 = (up - dn) / (2.0 * h);
        const double d2 = (up2 - dn2) / (4.0 * h);
        return (4.0 * d1 - d2) / 3.0;
    };
    rep.u_prime = u_prime(x, 1e-3, &base.v);
    rep.y = rep.u_prime;
    const double y = rep.y;

    // dual pieces, warm-started across y ------------------------------------
    const DualWork wrk = make_dual_work(mkt);
    const ConjAccessor conj = make_conjugate(mkt, U);
    VectorXd xi_warm = wrk.xi_start;
    bool have_warm = false;
    auto dual_at = [&](double yy) {
        const DualRunResult r =
            minimize_dual(wrk, conj, yy, opt.solve, have_warm ? &xi_warm : nullptr);
        xi_warm = r.xi;
        have_warm = true;
        return r;
    };
    const DualRunResult drun = dual_at(y);
    rep.dual = package_dual(mkt, wrk, drun, y);
    rep.v_value = rep.dual.value;
    {
        const double h = 1e-3 * y;
        rep.v_prime = (dual_at(y + h).value - dual_at(y - h).value) / (2.0 * h);
        dual_at(y);  // restore warm point at y
    }

    auto push = [&](std::string name, double residual, double tol, std::string where = "") {
        rep.checks.push_back(
            {std::move(name), residual, tol, residual <= tol, std::move(where)});
    };

    // (i) finiteness
    const bool finite = std::isfinite(rep.u_value) && std::isfinite(rep.v_value);
    push("finiteness_i", finite ? 0.0 : 1.0, 0.5);

    // (v) Legendre conjugacy, Eq. (452): u(x) = inf_y (v(y) + x y)
    {
        auto f = [&](double yy) { return dual_at(yy).value + x * yy; };
        double lo = y / 50.0, hi = y * 50.0;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = std::log(lo), b = std::log(hi);
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        double f1 = f(std::exp(c1)), f2 = f(std::exp(c2));
        double fbest = std::min(f1, f2);
        for (int it = 0; it < 40; ++it) {
            if (f1 < f2) {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - gr * (b - a);
                f1 = f(std::exp(c1));
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + gr * (b - a);
                f2 = f(std::exp(c2));
            }
            fbest = std::min(fbest, std::min(f1, f2));
        }
        push("conjugacy_452", std::abs(rep.u_value - fbest) / std::max(1.0, std::abs(rep.u_value)),
             opt.conjugacy_tol);

        // weak duality on a sampled y-grid
        double worst = 0.0;
        for (double mult : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double gap = dual_at(y * mult).value + x * y * mult - rep.u_value;
            worst = std::max(worst, -gap / std::max(1.0, std::abs(rep.u_value)));
        }
        push("weak_duality", worst, 1e-8);
        dual_at(y);
    }

    // (iv) budget binding, Eq. (451)
    {
        double lhs = 0.0;
        for (std::size_t i = 0; i < mkt.nodes.size(); ++i)
            lhs += mkt.clock_weight(static_cast<int>(i)) * rep.primal.expenditure[i] *
                   rep.dual.z[i];
        push("binding_451", std::abs(lhs - x) / x, opt.binding_tol);
    }

    // (iii) first-order characterizations, Eqs. (3212) and (3221)
    {
        ImageUtility img(U, mkt.goods_view());
        double worst12 = 0.0, worst21 = 0.0;
        std::string where12, where21;
        std::vector<double> g(U.m);
        for (std::size_t i = 0; i < mkt.nodes.size(); ++i) {
            if (!(mkt.clock_weight(static_cast<int>(i)) > 0)) continue;
            const double Y = y * rep.dual.z[i];
            U.gradient(mkt.node_time(static_cast<int>(i)), static_cast<int>(i),
                       rep.primal.consumption[i], g);
            for (int k = 0; k < U.m; ++k) {
                const double r = std::abs(g[k] / mkt.nodes[i].goods[k] - Y) / Y;
                if (r > worst12) {
                    worst12 = r;
                    where12 = "node " + std::to_string(i) + " good " + std::to_string(k);
                }
            }
            const double r21 =
                std::abs(img.deriv(mkt.node_time(static_cast<int>(i)), static_cast<int>(i),
                                   rep.primal.expenditure[i]) -
                         Y) /
                Y;
            if (r21 > worst21) {
                worst21 = r21;
                where21 = "node " + std::to_string(i);
            }
        }
        push("foc_3212", worst12, opt.foc_tol, where12);
        push("foc_3221", worst21, opt.foc_tol, where21);
        push("dual_positivity", rep.dual.min_terminal_z > 0 ? 0.0 : -rep.dual.min_terminal_z,
             0.0, "min terminal z");
        push("two_stage_u_star", rep.primal.two_stage_gap, 1e-6);
    }

    // (ii) Inada trends of u', Eq. (453)
    {
        double prev = std::numeric_limits<double>::infinity();
        double first = 0.0, last = 0.0, mono_viol = 0.0;
        for (int e = -2; e <= 2; ++e) {
            const double up = u_prime(x * std::pow(10.0, e), 1e-3, nullptr);
            if (e == -2) first = up;
            if (e == 2) last = up;
            if (up >= prev) mono_viol = std::max(mono_viol, up - prev);
            prev = up;
        }
        push("inada_453_monotone", mono_viol, 0.0);
        push("inada_453_range", first / std::max(last, 1e-300) >= 1e3 ? 0.0 : 1.0, 0.5,
             "u'(x/100)/u'(100x)");
    }

    // (vi) deflator representation of v: re-evaluate at a strictly interior
    // blend with the feasibility witness
    {
        const NupbrResult feas = check_nupbr(mkt);
        double resid = 0.0;
        if (feas.holds) {
            VectorXd zt = wrk.term_map * xi_warm + wrk.term_const;
            VectorXd zw(zt.size());
            for (int i = 0; i < zt.size(); ++i) zw(i) = feas.witness[i];
            const VectorXd zb = (1.0 - 1e-8) * zt + 1e-8 * zw;
            const VectorXd zall = wrk.poly.cond_exp * zb;
            double val = 0.0;
            for (std::size_t i = 0; i < mkt.nodes.size(); ++i) {
                const double wv = mkt.clock_weight(static_cast<int>(i));
                if (wv > 0) val += wv * conj.val(static_cast<int>(i), y * zall(i));
            }
            resid = std::abs(val - rep.v_value) / std::max(1.0, std::abs(rep.v_value));
        } else {
            resid = 1.0;
        }
        push("v_defl_interior", resid, 1e-6);
    }

    // (iii) uniqueness via randomized restarts
    {
        double dv = 0.0, dopt = 0.0, dzopt = 0.0;
        for (int r = 1; r <= opt.restarts; ++r) {
            SolveOptions o = opt.solve;
            o.restart_seed = 1000 + 17 * r;
            direct.set_x(x);
            const BarrierResult rrun = maximize_with_barrier(direct, o);
            const PrimalSolution ps = package_primal(mkt, U, direct, rrun, rrun, x);
            dv = std::max(dv, std::abs(ps.value - rep.u_value) /
                                  std::max(1.0, std::abs(rep.u_value)));
            for (std::size_t i = 0; i < mkt.nodes.size(); ++i)
                for (std::size_t k = 0; k < ps.consumption[i].size(); ++k)
                    dopt = std::max(dopt,
                                    std::abs(ps.consumption[i][k] -
                                             rep.primal.consumption[i][k]) /
                                        std::max(1e-12, rep.primal.consumption[i][k]));
            const DualRunResult dr = minimize_dual(wrk, conj, y, o, nullptr);
            dv = std::max(dv, std::abs(dr.value - rep.v_value) /
                                  std::max(1.0, std::abs(rep.v_value)));
            const DualSolution dsl = package_dual(mkt, wrk, dr, y);
            for (std::size_t i = 0; i < dsl.z.size(); ++i)
                if (mkt.clock_weight(static_cast<int>(i)) > 0)
                    dzopt = std::max(dzopt, std::abs(dsl.z[i] - rep.dual.z[i]) /
                                                std::max(1e-12, rep.dual.z[i]));
        }
        push("uniqueness_value", dv, opt.uniqueness_value_tol);
        push("uniqueness_optimizer", std::max(dopt, dzopt), opt.uniqueness_opt_tol);
    }

    return rep;
}

}  // namespace mgdual
