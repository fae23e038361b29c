#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "hmln/corpus.hpp"
#include "hmln/grounder.hpp"

namespace hmln {

inline double sigmoid(double t) {
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

/// log(sigmoid(t)) without overflow for large |t|.
inline double log_sigmoid(double t) { return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t)); }

/// Softness `a` and threshold epsilon of the match sigmoid, shared by C values and evidence.
struct HybridParams {
    double epsilon = 0.7;
    double softness = 1.0;
};

/// Explanation property: -(g1 - g2)^2 when exactly one predicate holds, else 0.
double i_value(bool x1, bool x2, double g1, double g2);

/// Conjunctive property: min of the two log-sigmoid match scores when both predicates hold, else 0.
double c_value(bool x1, bool x2, double g1, double g2, double epsilon, double softness);

/// Row index of a 2x2 table: (x1, x2) -> 2*x1 + x2.
constexpr std::size_t table_row(bool x1, bool x2) { return (x1 ? 2u : 0u) + (x2 ? 1u : 0u); }

using Table = std::array<double, 4>;

/// Shared weights, one per lifted signature, projected onto [floor, inf).
class WeightVector {
public:
    WeightVector() = default;
    WeightVector(std::vector<LiftedSignature> signatures, double initial, double floor = 1e-3);

    std::size_t size() const noexcept { return signatures_.size(); }
    const std::vector<LiftedSignature>& signatures() const noexcept { return signatures_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_.at(i); }
    double floor() const noexcept { return floor_; }

    /// Index of a signature; throws CheckpointIncompatible when absent.
    std::size_t index_of(const LiftedSignature& sig) const;
    bool contains(const LiftedSignature& sig) const;

    /// Stores max(value, floor) and invalidates cached tables.
    void set(std::size_t i, double value);

    /// Changes on every mutation; copies keep the version of their source.
    std::uint64_t version() const noexcept { return version_; }

private:
    std::vector<LiftedSignature> signatures_;  // sorted
    std::vector<double> values_;
    double floor_ = 1e-3;
    std::uint64_t version_ = 0;
};

struct FeaturizedPotential {
    PotentialSpec spec;
    double g1 = 0.0;
    double g2 = 0.0;
    std::size_t weight_ref = 0;
    /// I + C per row.
    Table base{};
    /// Log virtual-evidence offsets per row; zero for prior potentials.
    Table evidence{};
    /// weight * base + evidence, valid for `table_version`.
    Table table{};
    std::uint64_t table_version = 0;
};

FeaturizedPotential featurize(const PotentialSpec& spec, double g1, double g2, std::size_t weight_ref,
                              const HybridParams& params);

/// Featurizes every potential, taking g = embedding_distance(predicate text, source image).
std::vector<FeaturizedPotential> featurize_all(std::span<const PotentialSpec> specs,
                                               std::span<const NormalizedInstance> normalized,
                                               const EmbeddingStore& store, const WeightVector& weights,
                                               const HybridParams& params);

/// Sorted distinct signatures of a potential list.
std::vector<LiftedSignature> signatures_of(std::span<const PotentialSpec> specs);

void refresh_table(FeaturizedPotential& fp, const WeightVector& w);
void refresh_tables(std::span<FeaturizedPotential> fps, const WeightVector& w);

/// Cached log table entry. Throws ConsistencyError when the table predates the weights.
double log_potential(const FeaturizedPotential& fp, const WeightVector& w, bool x1, bool x2);

/// Multiplicative univariate factors psi >= 1 keyed by corpus predicate.
struct VirtualEvidence {
    std::map<GroundPredicate, double> factors;

    double factor(const GroundPredicate& p) const {
        auto it = factors.find(p);
        return it == factors.end() ? 1.0 : it->second;
    }
};

/// Adds log psi to the rows where an evidenced in-scope predicate is 1. The input is unchanged.
FeaturizedPotential apply_virtual_evidence(const FeaturizedPotential& fp, const VirtualEvidence& ve);

/// psi(d) = exp(-log sigmoid(a * (epsilon - d))).
double evidence_factor(double similarity, const HybridParams& params);

/// One factor per reified test predicate, with d the cosine similarity between the test
/// image embedding and the test predicate's text embedding. Factors landing on the same
/// corpus predicate multiply.
VirtualEvidence build_virtual_evidence(const TestInstance& test, const ReificationMap& reified,
                                       const EmbeddingStore& store, const HybridParams& params);

nlohmann::json weights_to_json(const WeightVector& w);
WeightVector weights_from_json(const nlohmann::json& j, double floor = 1e-3);
nlohmann::json to_json(const FeaturizedPotential& fp);

}  // namespace hmln
