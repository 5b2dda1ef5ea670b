#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mgdual/utility_field.hpp"

namespace mgdual {

// Strictly positive consumption-goods price curves S^1..S^m, queried by
// (time, opaque state id). Immutable; evaluation is pure.
struct GoodsPrices {
    int m = 0;
    std::function<void(double t, StateId s, std::span<double> out)> price;

    std::vector<double> at(double t, StateId s) const {
        std::vector<double> p(m);
        price(t, s, p);
        for (double v : p)
            if (!(v > 0.0)) throw std::runtime_error("GoodsPrices: non-positive price");
        return p;
    }

    static GoodsPrices constant(std::vector<double> p) {
        for (double v : p)
            if (!(v > 0.0)) throw std::invalid_argument("GoodsPrices: prices must be > 0");
        GoodsPrices g;
        g.m = static_cast<int>(p.size());
        g.price = [p = std::move(p)](double, StateId, std::span<double> out) {
            for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i];
        };
        return g;
    }
};

}  // namespace mgdual
