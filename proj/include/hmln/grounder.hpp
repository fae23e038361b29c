#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmln/corpus.hpp"

namespace hmln {

/// Weight-sharing class of a potential: the predicate-symbol pair in lexicographic order.
struct LiftedSignature {
    std::string first;
    std::string second;

    static LiftedSignature of(const std::string& a, const std::string& b) {
        return a <= b ? LiftedSignature{a, b} : LiftedSignature{b, a};
    }
    std::string str() const { return first + "|" + second; }

    friend auto operator<=>(const LiftedSignature&, const LiftedSignature&) = default;
    friend bool operator==(const LiftedSignature&, const LiftedSignature&) = default;
};

/// A training instance restricted to the closed world of one test image.
struct NormalizedInstance {
    std::size_t source_index = 0;
    std::string image_id;
    std::string image_embedding_key;
    /// Predicates of the selected caption that survived the closed-world filter, deduplicated.
    std::vector<GroundPredicate> predicates;
    /// All captions of the source image, used for the observed-world rule.
    std::vector<Caption> captions;
};

struct NormalizeOptions {
    /// Caption whose triples define an image's predicates (clamped to the last caption).
    std::size_t caption_index = 0;
};

/// Keeps resolved predicates touching a detected object (lowercase equality) and drops images
/// left without any object-sharing predicate pair. Throws NormalizationEmpty when nothing survives.
std::vector<NormalizedInstance> normalize(std::span<const TrainingInstance> corpus, const TestInstance& test,
                                          const NormalizeOptions& options = {});

/// One grounded C+I template over two predicates of the same image.
struct PotentialSpec {
    std::size_t id = 0;
    std::string source_image;
    std::size_t source_index = 0;  // position in the normalized list
    GroundPredicate x1;
    GroundPredicate x2;
    std::string shared_object;
    LiftedSignature signature;

    bool in_scope(const GroundPredicate& p) const { return x1 == p || x2 == p; }
};

/// One potential per unordered object-sharing predicate pair within an image.
/// Ids follow (image order, pair order).
std::vector<PotentialSpec> build_potentials(std::span<const NormalizedInstance> normalized);

/// Distinct predicates across the potentials' scopes, sorted.
std::vector<GroundPredicate> scope_predicates(std::span<const PotentialSpec> potentials);

enum class ReificationRule { same_symbol, similar_symbol };

struct ReifiedPair {
    GroundPredicate test;
    GroundPredicate corpus;
    ReificationRule rule;
    double score;
};

struct ReificationMap {
    std::vector<ReifiedPair> pairs;
    std::vector<GroundPredicate> unmapped;
    double similarity_threshold = 0.5;

    const GroundPredicate* lookup(const GroundPredicate& test) const;
    /// Distinct corpus-side images of the map, sorted.
    std::vector<GroundPredicate> images() const;
};

/// Maps each test predicate G(O1,O2) to the best corpus predicate G'(O1',O2') such that either
///  (i)  G = G' and some test object equals some corpus object; score 1 + mean positional
///       object similarity, or
///  (ii) both test objects occur among the corpus objects and sim(G, G') > tau; score sim(G, G').
/// Ties go to the lexicographically smaller canonical form.
ReificationMap reify(const TestInstance& test, std::span<const GroundPredicate> corpus_predicates,
                     const EmbeddingStore& store, double tau);

/// Potentials whose scope holds at least one reified predicate. Throws BlanketEmpty when none do.
std::vector<PotentialSpec> markov_blanket(const ReificationMap& reified, std::span<const PotentialSpec> potentials);

nlohmann::json to_json(const PotentialSpec& p);
nlohmann::json to_json(const ReificationMap& m);
nlohmann::json grounding_report(std::span<const NormalizedInstance> normalized,
                                std::span<const PotentialSpec> potentials, const ReificationMap& reified,
                                std::span<const PotentialSpec> blanket);

}  // namespace hmln
