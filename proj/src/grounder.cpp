#include "hmln/grounder.hpp"

#include <algorithm>
#include <set>

#include "hmln/error.hpp"

namespace hmln {

using nlohmann::json;

namespace {

bool touches_any(const GroundPredicate& p, const std::set<std::string>& objects) {
    return objects.count(p.subject) != 0 || (!p.target.empty() && objects.count(p.target) != 0);
}

// First object held by both predicates, scanning subject before target on each side.
std::optional<std::string> shared_object(const GroundPredicate& a, const GroundPredicate& b) {
    for (const auto* oa : {&a.subject, &a.target}) {
        if (oa->empty()) continue;
        for (const auto* ob : {&b.subject, &b.target})
            if (*oa == *ob) return *oa;
    }
    return std::nullopt;
}

bool has_shared_pair(const std::vector<GroundPredicate>& preds) {
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t j = i + 1; j < preds.size(); ++j)
            if (shared_object(preds[i], preds[j])) return true;
    return false;
}

double word_sim_or_zero(const EmbeddingStore& store, const std::string& a, const std::string& b) {
    return store.word_similarity(a, b).value_or(0.0);
}

}  // namespace

std::vector<NormalizedInstance> normalize(std::span<const TrainingInstance> corpus, const TestInstance& test,
                                          const NormalizeOptions& options) {
    if (test.detected_objects.empty())
        throw Error(ErrorKind::invalid_argument, "normalize: test instance has no detected objects");
    std::set<std::string> detected;
    for (const auto& o : test.detected_objects) detected.insert(to_lower(o));

    std::vector<NormalizedInstance> out;
    for (std::size_t idx = 0; idx < corpus.size(); ++idx) {
        const auto& inst = corpus[idx];
        if (inst.captions.empty()) continue;
        const auto& cap = inst.captions[std::min(options.caption_index, inst.captions.size() - 1)];
        NormalizedInstance ni;
        ni.source_index = idx;
        ni.image_id = inst.image_id;
        ni.image_embedding_key = inst.image_embedding_key;
        for (std::size_t t = 0; t < cap.triples.size(); ++t) {
            const auto& p = cap.triples[t];
            const bool resolved = t < cap.resolved.size() ? cap.resolved[t] : true;
            if (!resolved || !touches_any(p, detected)) continue;
            if (std::find(ni.predicates.begin(), ni.predicates.end(), p) == ni.predicates.end())
                ni.predicates.push_back(p);
        }
        if (!has_shared_pair(ni.predicates)) continue;
        ni.captions = inst.captions;
        out.push_back(std::move(ni));
    }
    if (out.empty()) {
        std::string objs;
        for (const auto& o : detected) objs += (objs.empty() ? "" : ", ") + o;
        throw Error(ErrorKind::normalization_empty,
                    "no training instance has an object-sharing predicate pair over detected objects {" + objs + "}");
    }
    return out;
}

std::vector<PotentialSpec> build_potentials(std::span<const NormalizedInstance> normalized) {
    std::vector<PotentialSpec> out;
    for (std::size_t n = 0; n < normalized.size(); ++n) {
        const auto& inst = normalized[n];
        const auto& preds = inst.predicates;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            for (std::size_t j = i + 1; j < preds.size(); ++j) {
                auto shared = shared_object(preds[i], preds[j]);
                if (!shared || preds[i] == preds[j]) continue;
                PotentialSpec spec;
                spec.id = out.size();
                spec.source_image = inst.image_id;
                spec.source_index = n;
                spec.x1 = preds[i];
                spec.x2 = preds[j];
                spec.shared_object = *shared;
                spec.signature = LiftedSignature::of(preds[i].symbol, preds[j].symbol);
                out.push_back(std::move(spec));
            }
        }
    }
    return out;
}

std::vector<GroundPredicate> scope_predicates(std::span<const PotentialSpec> potentials) {
    std::set<GroundPredicate> all;
    for (const auto& p : potentials) {
        all.insert(p.x1);
        all.insert(p.x2);
    }
    return {all.begin(), all.end()};
}

const GroundPredicate* ReificationMap::lookup(const GroundPredicate& test) const {
    for (const auto& pr : pairs)
        if (pr.test == test) return &pr.corpus;
    return nullptr;
}

std::vector<GroundPredicate> ReificationMap::images() const {
    std::set<GroundPredicate> out;
    for (const auto& pr : pairs) out.insert(pr.corpus);
    return {out.begin(), out.end()};
}

ReificationMap reify(const TestInstance& test, std::span<const GroundPredicate> corpus_predicates,
                     const EmbeddingStore& store, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorKind::invalid_argument, "reify: tau must lie in (0, 1)");
    ReificationMap map;
    map.similarity_threshold = tau;

    for (const auto& g : test.caption_predicates) {
        if (std::any_of(map.pairs.begin(), map.pairs.end(), [&](const ReifiedPair& p) { return p.test == g; }))
            continue;
        std::optional<ReifiedPair> best;
        const auto consider = [&](const GroundPredicate& c, ReificationRule rule, double score) {
            if (!best || score > best->score ||
                (score == best->score && c.canonical() < best->corpus.canonical()))
                best = ReifiedPair{g, c, rule, score};
        };
        for (const auto& c : corpus_predicates) {
            const bool any_match = c.has_object(g.subject) || c.has_object(g.target);
            if (g.symbol == c.symbol && any_match) {
                const auto pos = [&](const std::string& a, const std::string& b) {
                    return (a.empty() && b.empty()) ? 1.0 : word_sim_or_zero(store, a, b);
                };
                consider(c, ReificationRule::same_symbol,
                         1.0 + 0.5 * (pos(g.subject, c.subject) + pos(g.target, c.target)));
                continue;
            }
            const bool target_match = g.target.empty() ? c.target.empty() : c.has_object(g.target);
            if (c.has_object(g.subject) && target_match) {
                const double sim = word_sim_or_zero(store, g.symbol, c.symbol);
                if (sim > tau) consider(c, ReificationRule::similar_symbol, sim);
            }
        }
        if (best) {
            map.pairs.push_back(*best);
        } else if (std::find(map.unmapped.begin(), map.unmapped.end(), g) == map.unmapped.end()) {
            map.unmapped.push_back(g);
        }
    }
    return map;
}

std::vector<PotentialSpec> markov_blanket(const ReificationMap& reified, std::span<const PotentialSpec> potentials) {
    const auto mapped = reified.images();
    std::vector<PotentialSpec> out;
    for (const auto& p : potentials) {
        if (std::any_of(mapped.begin(), mapped.end(), [&](const GroundPredicate& m) { return p.in_scope(m); }))
            out.push_back(p);
    }
    if (out.empty())
        throw Error(ErrorKind::blanket_empty, "no potential touches a reified caption predicate (" +
                                                  std::to_string(mapped.size()) + " mapped)");
    return out;
}

json to_json(const PotentialSpec& p) {
    return {{"id", p.id},
            {"source_image", p.source_image},
            {"x1", p.x1.canonical()},
            {"x2", p.x2.canonical()},
            {"shared_object", p.shared_object},
            {"signature", {p.signature.first, p.signature.second}}};
}

json to_json(const ReificationMap& m) {
    json pairs = json::array();
    for (const auto& pr : m.pairs)
        pairs.push_back({{"test", pr.test.canonical()},
                         {"corpus", pr.corpus.canonical()},
                         {"rule", pr.rule == ReificationRule::same_symbol ? "same_symbol" : "similar_symbol"},
                         {"score", pr.score}});
    json unmapped = json::array();
    for (const auto& u : m.unmapped) unmapped.push_back(u.canonical());
    return {{"pairs", pairs}, {"unmapped", unmapped}, {"similarity_threshold", m.similarity_threshold}};
}

json grounding_report(std::span<const NormalizedInstance> normalized, std::span<const PotentialSpec> potentials,
                      const ReificationMap& reified, std::span<const PotentialSpec> blanket) {
    json images = json::array();
    for (const auto& n : normalized) {
        json preds = json::array();
        for (const auto& p : n.predicates) preds.push_back(p.canonical());
        images.push_back({{"image_id", n.image_id}, {"predicates", preds}});
    }
    json pots = json::array();
    for (const auto& p : potentials) pots.push_back(to_json(p));
    json mb = json::array();
    for (const auto& p : blanket) mb.push_back(p.id);
    return {{"normalized", images}, {"potentials", pots}, {"reification", to_json(reified)}, {"blanket", mb}};
}

}  // namespace hmln
