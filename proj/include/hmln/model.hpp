#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "hmln/potentials.hpp"
#include "hmln/sampler.hpp"

namespace hmln {

/// Featurized potentials plus the variable index shared by every world over them.
class HybridModel {
public:
    HybridModel() = default;
    /// Variables are the distinct scope predicates in sorted order.
    explicit HybridModel(std::vector<FeaturizedPotential> potentials);

    const std::vector<FeaturizedPotential>& potentials() const noexcept { return potentials_; }
    const std::vector<GroundPredicate>& variables() const noexcept { return variables_; }
    std::size_t num_vars() const noexcept { return variables_.size(); }

    /// Variable indices (x1, x2) of potential k.
    std::pair<std::uint32_t, std::uint32_t> scope(std::size_t k) const { return scopes_.at(k); }
    std::size_t index_of(const GroundPredicate& p) const;

    /// Factor graph with tables w * (I + C) + evidence.
    FactorGraph compile(const WeightVector& w) const;

    /// Folds each evidence factor into exactly one potential: the lowest-id one holding the
    /// predicate. Predicates outside the model are ignored.
    HybridModel with_evidence(const VirtualEvidence& ve) const;

    /// Keeps only the potentials whose ids appear in `keep`.
    HybridModel subset(std::span<const PotentialSpec> keep) const;

    /// I indicator (XOR) of potential k in world y.
    bool i_true(std::size_t k, const World& y) const {
        const auto [a, b] = scopes_[k];
        return y[a] != y[b];
    }

    /// Per-signature sum of I + C over the groundings, evaluated at y.
    std::vector<double> statistics(const World& y, std::size_t num_signatures) const;

private:
    std::vector<FeaturizedPotential> potentials_;
    std::vector<GroundPredicate> variables_;
    std::map<GroundPredicate, std::size_t> index_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> scopes_;
};

}  // namespace hmln
