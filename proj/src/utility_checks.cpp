#include "mgdual/utility_checks.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mgdual {

bool UtilityCheckReport::all_pass() const {
    for (const auto& it : items)
        if (!it.pass) return false;
    return true;
}

const CheckItem& UtilityCheckReport::item(const std::string& name) const {
    for (const auto& it : items)
        if (it.name == name) return it;
    throw std::out_of_range("no check item named " + name);
}

namespace {

std::string point_str(double t, StateId s, std::span<const double> c) {
    std::ostringstream os;
    os << "t=" << t << " state=" << s << " c=(";
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << ")";
    return os.str();
}

void worse(CheckItem& item, double violation, const std::string& where) {
    if (violation > item.worst) {
        item.worst = violation;
        item.where = where;
    }
    if (violation > 0) item.pass = false;
}

}  // namespace

UtilityCheckReport check_assumption_U(const UtilityField& U, const UtilitySampleSpec& spec) {
    const int m = U.m;
    UtilityCheckReport rep;
    CheckItem concave{"strict_concavity"};
    CheckItem monotone{"strict_monotonicity"};
    CheckItem grad_pos{"gradient_positivity"};
    CheckItem grad_fd{"gradient_finite_difference"};
    CheckItem inada0{"inada_at_zero"};
    CheckItem inada_inf{"inada_at_infinity"};
    CheckItem boundary{"boundary_usc"};

    std::vector<double> a(m), b(m), mid(m), g(m), cp(m);

    for (double t : spec.times)
        for (StateId s : spec.states) {
            // pairs of interior points from the level grid (staggered so a != b)
            for (std::size_t i = 0; i < spec.levels.size(); ++i)
                for (std::size_t j = i + 1; j < spec.levels.size(); ++j) {
                    for (int k = 0; k < m; ++k) {
                        a[k] = spec.levels[(i + k) % spec.levels.size()];
                        b[k] = spec.levels[(j + k) % spec.levels.size()];
                        mid[k] = 0.5 * (a[k] + b[k]);
                    }
                    const double ua = U.eval(t, s, a).value();
                    const double ub = U.eval(t, s, b).value();
                    const double um = U.eval(t, s, mid).value();
                    // strict midpoint concavity: um > (ua+ub)/2
                    const double margin = um - 0.5 * (ua + ub);
                    worse(concave, margin > 0 ? 0.0 : -margin + 1e-300,
                          point_str(t, s, a) + " vs " + point_str(t, s, b));
                }

            for (double level : spec.levels) {
                for (int k = 0; k < m; ++k) cp[k] = level;
                const double base = U.eval(t, s, cp).value();
                U.gradient(t, s, cp, g);
                for (int k = 0; k < m; ++k) {
                    // monotonicity: bump one coordinate
                    std::vector<double> up(cp);
                    up[k] = cp[k] * 1.25;
                    const double bumped = U.eval(t, s, up).value();
                    worse(monotone, bumped > base ? 0.0 : base - bumped + 1e-300,
                          point_str(t, s, cp) + " good " + std::to_string(k));

                    worse(grad_pos, g[k] > 0 ? 0.0 : -g[k] + 1e-300,
                          point_str(t, s, cp) + " good " + std::to_string(k));

                    const double h = 1e-6 * cp[k];
                    std::vector<double> lo(cp), hi(cp);
                    lo[k] -= h;
                    hi[k] += h;
                    const double fd =
                        (U.eval(t, s, hi).value() - U.eval(t, s, lo).value()) / (2.0 * h);
                    const double rel = std::abs(fd - g[k]) / std::max(std::abs(g[k]), 1e-300);
                    worse(grad_fd, rel <= 1e-6 ? 0.0 : rel,
                          point_str(t, s, cp) + " good " + std::to_string(k));
                }
            }

            // Inada scan: vary one good over the decades, others pinned at 1.
            const int half = spec.inada_decades / 2;
            for (int k = 0; k < m; ++k) {
                double prev = 0.0;
                bool first = true;
                for (int e = -half; e <= half; ++e) {
                    for (int q = 0; q < m; ++q) cp[q] = 1.0;
                    cp[k] = std::pow(10.0, e);
                    U.gradient(t, s, cp, g);
                    if (!first)
                        worse(inada0, g[k] < prev ? 0.0 : g[k] - prev + 1e-300,
                              "non-monotone marginal, good " + std::to_string(k));
                    prev = g[k];
                    first = false;
                    if (e == -half)
                        worse(inada0, g[k] > 1e3 ? 0.0 : 1e3 - g[k],
                              "marginal too small at c=1e-" + std::to_string(half));
                    if (e == half)
                        worse(inada_inf, g[k] < 1e-3 ? 0.0 : g[k] - 1e-3,
                              "marginal too large at c=1e" + std::to_string(half));
                }
            }

            // boundary upper semicontinuity: U at a boundary point equals the
            // limit along the segment toward an interior anchor
            for (int k = 0; k < m; ++k) {
                std::vector<double> edge(m, 1.0), anchor(m, 1.0);
                edge[k] = 0.0;
                const ExtendedReal at_edge = U.eval(t, s, edge);
                double lim = 0.0;
                bool lim_ninf = false;
                std::vector<double> pt(m);
                for (double eps : {1e-4, 1e-6, 1e-8}) {
                    for (int q = 0; q < m; ++q)
                        pt[q] = edge[q] + eps * (anchor[q] - edge[q] + (q == k ? 1.0 : 0.0));
                    const ExtendedReal v = U.eval(t, s, pt);
                    lim = v.value();
                    lim_ninf = v.is_neg_inf() || lim < -1e12;
                }
                if (at_edge.is_neg_inf())
                    worse(boundary, lim_ninf || lim < -10.0 ? 0.0 : std::abs(lim),
                          "edge good " + std::to_string(k));
                else
                    worse(boundary,
                          std::abs(at_edge.value() - lim) /
                                      std::max(1.0, std::abs(at_edge.value())) <=
                                  1e-3
                              ? 0.0
                              : std::abs(at_edge.value() - lim),
                          "edge good " + std::to_string(k));
            }
        }

    rep.items = {concave, monotone, grad_pos, grad_fd, inada0, inada_inf, boundary};
    return rep;
}

}  // namespace mgdual
