#include "hmln/potentials.hpp"

#include <algorithm>
#include <atomic>
#include <set>

#include "hmln/error.hpp"

namespace hmln {

using nlohmann::json;

namespace {

std::uint64_t next_version() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

double i_value(bool x1, bool x2, double g1, double g2) {
    if (x1 == x2) return 0.0;
    const double d = g1 - g2;
    return -d * d;
}

double c_value(bool x1, bool x2, double g1, double g2, double epsilon, double softness) {
    if (!(x1 && x2)) return 0.0;
    return std::min(log_sigmoid(softness * (epsilon - g1)), log_sigmoid(softness * (epsilon - g2)));
}

// ---------------------------------------------------------------------------

WeightVector::WeightVector(std::vector<LiftedSignature> signatures, double initial, double floor)
    : signatures_(std::move(signatures)), floor_(floor), version_(next_version()) {
    if (!(floor > 0.0)) throw Error(ErrorKind::invalid_argument, "weight floor must be positive");
    std::sort(signatures_.begin(), signatures_.end());
    signatures_.erase(std::unique(signatures_.begin(), signatures_.end()), signatures_.end());
    values_.assign(signatures_.size(), std::max(initial, floor));
}

std::size_t WeightVector::index_of(const LiftedSignature& sig) const {
    auto it = std::lower_bound(signatures_.begin(), signatures_.end(), sig);
    if (it == signatures_.end() || *it != sig)
        throw Error(ErrorKind::checkpoint_incompatible, "no weight for signature (" + sig.first + ", " + sig.second + ")");
    return static_cast<std::size_t>(it - signatures_.begin());
}

bool WeightVector::contains(const LiftedSignature& sig) const {
    return std::binary_search(signatures_.begin(), signatures_.end(), sig);
}

void WeightVector::set(std::size_t i, double value) {
    values_.at(i) = std::max(value, floor_);
    version_ = next_version();
}

// ---------------------------------------------------------------------------

FeaturizedPotential featurize(const PotentialSpec& spec, double g1, double g2, std::size_t weight_ref,
                              const HybridParams& params) {
    FeaturizedPotential fp;
    fp.spec = spec;
    fp.g1 = g1;
    fp.g2 = g2;
    fp.weight_ref = weight_ref;
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            fp.base[table_row(x1, x2)] =
                i_value(x1, x2, g1, g2) + c_value(x1, x2, g1, g2, params.epsilon, params.softness);
    return fp;
}

std::vector<LiftedSignature> signatures_of(std::span<const PotentialSpec> specs) {
    std::set<LiftedSignature> sigs;
    for (const auto& s : specs) sigs.insert(s.signature);
    return {sigs.begin(), sigs.end()};
}

std::vector<FeaturizedPotential> featurize_all(std::span<const PotentialSpec> specs,
                                               std::span<const NormalizedInstance> normalized,
                                               const EmbeddingStore& store, const WeightVector& weights,
                                               const HybridParams& params) {
    std::vector<FeaturizedPotential> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        const auto& image = store.at(normalized[spec.source_index].image_embedding_key);
        const double g1 = embedding_distance(store.at(predicate_key(spec.x1)), image);
        const double g2 = embedding_distance(store.at(predicate_key(spec.x2)), image);
        out.push_back(featurize(spec, g1, g2, weights.index_of(spec.signature), params));
        refresh_table(out.back(), weights);
    }
    return out;
}

void refresh_table(FeaturizedPotential& fp, const WeightVector& w) {
    const double weight = w[fp.weight_ref];
    for (std::size_t r = 0; r < 4; ++r) fp.table[r] = weight * fp.base[r] + fp.evidence[r];
    fp.table_version = w.version();
}

void refresh_tables(std::span<FeaturizedPotential> fps, const WeightVector& w) {
    for (auto& fp : fps) refresh_table(fp, w);
}

double log_potential(const FeaturizedPotential& fp, const WeightVector& w, bool x1, bool x2) {
    if (fp.weight_ref >= w.size())
        throw Error(ErrorKind::consistency, "potential " + std::to_string(fp.spec.id) + " has invalid weight_ref");
    if (fp.table_version != w.version())
        throw Error(ErrorKind::consistency,
                    "potential " + std::to_string(fp.spec.id) + " table is stale for the current weights");
    return fp.table[table_row(x1, x2)];
}

// ---------------------------------------------------------------------------

FeaturizedPotential apply_virtual_evidence(const FeaturizedPotential& fp, const VirtualEvidence& ve) {
    FeaturizedPotential out = fp;
    const double log1 = std::log(ve.factor(fp.spec.x1));
    const double log2 = std::log(ve.factor(fp.spec.x2));
    if (log1 != 0.0) {
        for (std::size_t r : {table_row(1, 0), table_row(1, 1)}) {
            out.evidence[r] += log1;
            out.table[r] += log1;
        }
    }
    if (log2 != 0.0) {
        for (std::size_t r : {table_row(0, 1), table_row(1, 1)}) {
            out.evidence[r] += log2;
            out.table[r] += log2;
        }
    }
    return out;
}

double evidence_factor(double similarity, const HybridParams& params) {
    return std::exp(-log_sigmoid(params.softness * (params.epsilon - similarity)));
}

VirtualEvidence build_virtual_evidence(const TestInstance& test, const ReificationMap& reified,
                                       const EmbeddingStore& store, const HybridParams& params) {
    if (reified.pairs.empty())
        throw Error(ErrorKind::invalid_argument, "build_virtual_evidence: no reified predicates");
    const auto& image = store.at(test.image_embedding_key);
    VirtualEvidence ve;
    for (const auto& pr : reified.pairs) {
        const double d = cosine_similarity(image, store.at(predicate_key(pr.test)));
        auto [it, inserted] = ve.factors.emplace(pr.corpus, 1.0);
        it->second *= evidence_factor(d, params);
    }
    return ve;
}

// ---------------------------------------------------------------------------

json weights_to_json(const WeightVector& w) {
    json arr = json::array();
    for (std::size_t i = 0; i < w.size(); ++i)
        arr.push_back({{"signature", {w.signatures()[i].first, w.signatures()[i].second}}, {"weight", w[i]}});
    return arr;
}

WeightVector weights_from_json(const json& j, double floor) {
    if (!j.is_array()) throw Error(ErrorKind::validation, "weights must be an array of {signature, weight}");
    std::vector<LiftedSignature> sigs;
    std::vector<double> values;
    for (const auto& rec : j) {
        if (!rec.is_object() || !rec.contains("signature") || !rec.contains("weight") ||
            !rec.at("signature").is_array() || rec.at("signature").size() != 2 || !rec.at("weight").is_number())
            throw Error(ErrorKind::validation, "malformed weight record: " + rec.dump());
        const double value = rec.at("weight").get<double>();
        if (!std::isfinite(value) || value <= 0.0)
            throw Error(ErrorKind::validation, "weight must be finite and positive: " + rec.dump());
        sigs.push_back(LiftedSignature::of(rec.at("signature")[0].get<std::string>(),
                                           rec.at("signature")[1].get<std::string>()));
        values.push_back(value);
    }
    WeightVector w(sigs, 1.0, floor);
    if (w.size() != sigs.size()) throw Error(ErrorKind::validation, "duplicate signature in weights");
    for (std::size_t i = 0; i < sigs.size(); ++i) w.set(w.index_of(sigs[i]), values[i]);
    return w;
}

json to_json(const FeaturizedPotential& fp) {
    json j = to_json(fp.spec);
    j["g1"] = fp.g1;
    j["g2"] = fp.g2;
    j["table"] = fp.table;
    return j;
}

}  // namespace hmln
