#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgdual/goods_prices.hpp"

namespace mgdual {

// One node of a finite-state event tree. `prob` is conditional on the parent;
// the root has parent -1 and prob 1.
struct MarketNode {
    int id = 0;
    int parent = -1;
    double prob = 1.0;
    std::vector<double> s_tilde;  // traded asset prices, size d
    std::vector<double> goods;    // consumption-goods prices, size m, all > 0
    double dkappa = 0.0;          // clock mass charged at this node
};

// Finite discrete-time market tree. Nodes must be listed parent-before-child;
// finalize() derives depths/children/path probabilities and validates the
// clock and probability structure.
struct FiniteMarket {
    std::vector<double> times;  // t_0 < ... < t_N
    std::vector<MarketNode> nodes;

    int d = 0;  // traded assets
    int m = 0;  // consumption goods
    std::vector<int> depth;
    std::vector<std::vector<int>> children;
    std::vector<double> path_prob;  // unconditional node probability
    std::vector<int> terminals;     // node ids at depth N, in id order

    void finalize();
    bool finalized() const { return !depth.empty(); }

    int periods() const { return static_cast<int>(times.size()) - 1; }
    bool is_terminal(int id) const { return children[id].empty(); }
    double node_time(int id) const { return times[depth[id]]; }
    double clock_weight(int id) const { return path_prob[id] * nodes[id].dkappa; }

    // Goods prices of this tree viewed through the (t, state) interface;
    // state ids are node ids.
    GoodsPrices goods_view() const;

    static FiniteMarket from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Structured validation: returns human-readable problems ("tree[3].prob: ...");
// empty means the market is well-formed. finalize() throws on the same faults.
std::vector<std::string> validate_market(const FiniteMarket& mkt);

}  // namespace mgdual
