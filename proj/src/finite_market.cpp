#include "mgdual/finite_market.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mgdual {

std::vector<std::string> validate_market(const FiniteMarket& mkt) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& msg) { bad.push_back(msg); };

    if (mkt.times.size() < 2) fail("times: need at least two time points");
    for (std::size_t i = 1; i < mkt.times.size(); ++i)
        if (!(mkt.times[i] > mkt.times[i - 1])) fail("times: must be strictly increasing");
    if (mkt.nodes.empty()) {
        fail("tree: empty");
        return bad;
    }
    const int n = static_cast<int>(mkt.nodes.size());
    if (mkt.nodes[0].parent != -1) fail("tree[0]: root must have parent -1");
    const std::size_t d = mkt.nodes[0].s_tilde.size();
    const std::size_t m = mkt.nodes[0].goods.size();
    if (d == 0) fail("tree[0].s_tilde: need at least one traded asset");
    if (m == 0) fail("tree[0].goods: need at least one consumption good");

    std::vector<int> depth(n, 0);
    std::vector<double> kid_prob(n, 0.0);
    std::vector<bool> has_kids(n, false);
    for (int i = 0; i < n; ++i) {
        const auto& nd = mkt.nodes[i];
        std::ostringstream tag;
        tag << "tree[" << i << "]";
        if (nd.id != i) fail(tag.str() + ".id: ids must be 0..n-1 in order");
        if (i > 0) {
            if (nd.parent < 0 || nd.parent >= i)
                fail(tag.str() + ".parent: must point to an earlier node");
            else {
                depth[i] = depth[nd.parent] + 1;
                kid_prob[nd.parent] += nd.prob;
                has_kids[nd.parent] = true;
            }
            if (!(nd.prob > 0.0)) fail(tag.str() + ".prob: must be > 0");
        }
        if (nd.s_tilde.size() != d) fail(tag.str() + ".s_tilde: inconsistent asset count");
        if (nd.goods.size() != m) fail(tag.str() + ".goods: inconsistent goods count");
        for (double g : nd.goods)
            if (!(g > 0.0)) fail(tag.str() + ".goods: prices must be strictly positive");
        if (nd.dkappa < 0.0) fail(tag.str() + ".dkappa: must be >= 0");
        if (depth[i] >= static_cast<int>(mkt.times.size()))
            fail(tag.str() + ": node deeper than the time grid");
    }
    const int N = static_cast<int>(mkt.times.size()) - 1;
    double total_mass = 0.0;
    for (int i = 0; i < n; ++i) {
        if (has_kids[i] && std::abs(kid_prob[i] - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "tree[" << i << "]: children probabilities sum to " << kid_prob[i]
               << ", expected 1";
            fail(os.str());
        }
        if (!has_kids[i] && depth[i] != N) {
            std::ostringstream os;
            os << "tree[" << i << "]: leaf at depth " << depth[i] << ", expected " << N;
            fail(os.str());
        }
        total_mass += mkt.nodes[i].dkappa;
    }
    if (!(total_mass > 0.0)) fail("tree: clock mass is zero everywhere");
    return bad;
}

void FiniteMarket::finalize() {
    const auto bad = validate_market(*this);
    if (!bad.empty()) throw std::invalid_argument("FiniteMarket: " + bad.front());

    const int n = static_cast<int>(nodes.size());
    d = static_cast<int>(nodes[0].s_tilde.size());
    m = static_cast<int>(nodes[0].goods.size());
    depth.assign(n, 0);
    children.assign(n, {});
    path_prob.assign(n, 1.0);
    terminals.clear();
    for (int i = 1; i < n; ++i) {
        depth[i] = depth[nodes[i].parent] + 1;
        children[nodes[i].parent].push_back(i);
        path_prob[i] = path_prob[nodes[i].parent] * nodes[i].prob;
    }
    for (int i = 0; i < n; ++i)
        if (children[i].empty()) terminals.push_back(i);
}

GoodsPrices FiniteMarket::goods_view() const {
    GoodsPrices g;
    g.m = m;
    const auto* self = this;
    g.price = [self](double, StateId s, std::span<double> out) {
        const auto& p = self->nodes.at(static_cast<std::size_t>(s)).goods;
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i];
    };
    return g;
}

FiniteMarket FiniteMarket::from_json(const nlohmann::json& j) {
    FiniteMarket mkt;
    mkt.times = j.at("times").get<std::vector<double>>();
    for (const auto& nj : j.at("tree")) {
        MarketNode nd;
        nd.id = nj.at("id").get<int>();
        nd.parent = nj.at("parent").get<int>();
        nd.prob = nj.at("prob").get<double>();
        nd.s_tilde = nj.at("s_tilde").get<std::vector<double>>();
        nd.goods = nj.at("goods").get<std::vector<double>>();
        nd.dkappa = nj.at("dkappa").get<double>();
        mkt.nodes.push_back(std::move(nd));
    }
    mkt.finalize();
    return mkt;
}

nlohmann::json FiniteMarket::to_json() const {
    nlohmann::json j;
    j["times"] = times;
    j["tree"] = nlohmann::json::array();
    for (const auto& nd : nodes) {
        nlohmann::json nj;
        nj["id"] = nd.id;
        nj["parent"] = nd.parent;
        nj["prob"] = nd.prob;
        nj["s_tilde"] = nd.s_tilde;
        nj["goods"] = nd.goods;
        nj["dkappa"] = nd.dkappa;
        j["tree"].push_back(std::move(nj));
    }
    return j;
}

}  // namespace mgdual
