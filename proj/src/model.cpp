#include "hmln/model.hpp"

#include <algorithm>
#include <set>

#include "hmln/error.hpp"

namespace hmln {

HybridModel::HybridModel(std::vector<FeaturizedPotential> potentials) : potentials_(std::move(potentials)) {
    std::set<GroundPredicate> vars;
    for (const auto& fp : potentials_) {
        vars.insert(fp.spec.x1);
        vars.insert(fp.spec.x2);
    }
    variables_.assign(vars.begin(), vars.end());
    for (std::size_t i = 0; i < variables_.size(); ++i) index_[variables_[i]] = i;
    scopes_.reserve(potentials_.size());
    for (const auto& fp : potentials_)
        scopes_.emplace_back(static_cast<std::uint32_t>(index_.at(fp.spec.x1)),
                             static_cast<std::uint32_t>(index_.at(fp.spec.x2)));
}

std::size_t HybridModel::index_of(const GroundPredicate& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) throw Error(ErrorKind::invalid_argument, "predicate " + p.canonical() + " not in model");
    return it->second;
}

FactorGraph HybridModel::compile(const WeightVector& w) const {
    std::vector<PairFactor> factors;
    factors.reserve(potentials_.size());
    for (std::size_t k = 0; k < potentials_.size(); ++k) {
        const auto& fp = potentials_[k];
        if (fp.weight_ref >= w.size())
            throw Error(ErrorKind::consistency, "potential " + std::to_string(fp.spec.id) + " has invalid weight_ref");
        const double weight = w[fp.weight_ref];
        PairFactor f{scopes_[k].first, scopes_[k].second, {}};
        for (std::size_t r = 0; r < 4; ++r) f.log_table[r] = weight * fp.base[r] + fp.evidence[r];
        factors.push_back(f);
    }
    return FactorGraph(variables_.size(), std::move(factors));
}

HybridModel HybridModel::with_evidence(const VirtualEvidence& ve) const {
    std::vector<std::size_t> order(potentials_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return potentials_[a].spec.id < potentials_[b].spec.id; });

    auto out = potentials_;
    std::set<GroundPredicate> assigned;
    for (std::size_t k : order) {
        VirtualEvidence own;
        for (const auto* p : {&out[k].spec.x1, &out[k].spec.x2}) {
            auto it = ve.factors.find(*p);
            if (it != ve.factors.end() && assigned.insert(*p).second) own.factors.insert(*it);
        }
        if (!own.factors.empty()) out[k] = apply_virtual_evidence(out[k], own);
    }
    return HybridModel(std::move(out));
}

HybridModel HybridModel::subset(std::span<const PotentialSpec> keep) const {
    std::set<std::size_t> ids;
    for (const auto& s : keep) ids.insert(s.id);
    std::vector<FeaturizedPotential> out;
    for (const auto& fp : potentials_)
        if (ids.count(fp.spec.id)) out.push_back(fp);
    return HybridModel(std::move(out));
}

std::vector<double> HybridModel::statistics(const World& y, std::size_t num_signatures) const {
    std::vector<double> s(num_signatures, 0.0);
    for (std::size_t k = 0; k < potentials_.size(); ++k) {
        const auto [a, b] = scopes_[k];
        s.at(potentials_[k].weight_ref) += potentials_[k].base[table_row(y[a], y[b])];
    }
    return s;
}

}  // namespace hmln
