#include "hmln/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "hmln/error.hpp"
#include "hmln/rng.hpp"

namespace hmln {

using nlohmann::json;

namespace {

constexpr std::size_t kDim = 32;

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector scaled_sum(double a, const Vector& x, double b, const Vector& y) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
    return out;
}

void normalize_in_place(Vector& v) {
    const double n = std::sqrt(dot(v, v));
    for (auto& x : v) x /= n;
}

/// Orthonormal directions from seeded Gaussian draws (Gram-Schmidt).
std::vector<Vector> orthonormal_basis(CounterRng& rng, std::size_t count) {
    std::vector<Vector> basis;
    while (basis.size() < count) {
        Vector v(kDim);
        for (auto& x : v) x = rng.normal();
        for (const auto& b : basis) v = scaled_sum(1.0, v, -dot(v, b), b);
        if (std::sqrt(dot(v, v)) < 1e-6) continue;
        normalize_in_place(v);
        basis.push_back(std::move(v));
    }
    return basis;
}

Vector random_unit(CounterRng& rng) {
    Vector v(kDim);
    for (auto& x : v) x = rng.normal();
    normalize_in_place(v);
    return v;
}

/// Unit vector whose cosine with both p and q equals `target`; `fresh` is orthogonal to p and q.
Vector equiangular(const Vector& p, const Vector& q, double target, const Vector& fresh) {
    Vector m = scaled_sum(1.0, p, 1.0, q);
    normalize_in_place(m);
    const double a = target / dot(p, m);
    if (std::abs(a) > 1.0) throw Error(ErrorKind::invalid_argument, "synth: infeasible cosine target");
    return scaled_sum(a, m, std::sqrt(1.0 - a * a), fresh);
}

std::string hex_id(std::uint64_t seed, std::uint64_t salt) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06llx",
                  static_cast<unsigned long long>(CounterRng::mix(seed * 0x9e3779b97f4a7c15ULL + salt) & 0xffffff));
    return buf;
}

Caption caption(std::string text, std::vector<GroundPredicate> triples) {
    Caption c;
    c.text = std::move(text);
    c.resolved.assign(triples.size(), true);
    c.triples = std::move(triples);
    return c;
}

}  // namespace

SynthBundle synthesize(std::uint64_t seed, std::size_t size) {
    if (size < 1) throw Error(ErrorKind::invalid_argument, "synth: size must be >= 1");
    CounterRng rng(seed, 0x5e17);
    const auto basis = orthonormal_basis(rng, 8);
    const auto jitter = [&] { return (rng.uniform() - 0.5) * 0.04; };

    const GroundPredicate riding("riding", "man", "horse");
    const GroundPredicate wearing("wearing", "man", "hat");
    const GroundPredicate feeding("feeding", "man", "horse");
    const GroundPredicate near("near", "horse", "fence");

    const Vector& e_r = basis[0];
    const Vector e_h = scaled_sum(0.9, basis[0], std::sqrt(1 - 0.81), basis[1]);
    const Vector e_n = scaled_sum(0.5, basis[0], std::sqrt(1 - 0.25), basis[2]);
    const Vector e_u = scaled_sum(0.9, basis[0], std::sqrt(1 - 0.81), basis[3]);

    SynthBundle out;
    out.store = EmbeddingStore(kDim);
    out.store.add(predicate_key(riding), e_r);
    out.store.add(predicate_key(wearing), e_h);

    const std::string pos_id = "img_" + hex_id(seed, 1);
    const std::string neg_id = "img_" + hex_id(seed, 2);
    const std::string neu_id = "img_" + hex_id(seed, 3);

    std::vector<TrainingInstance> corpus;
    {
        TrainingInstance t{pos_id, {"man", "horse", "hat"}, {}, pos_id};
        for (const char* text : {"a man in a hat riding a horse", "a man riding a horse wearing a hat",
                                 "man wearing a hat while riding his horse"})
            t.captions.push_back(caption(text, {riding, wearing}));
        out.store.add(pos_id, equiangular(e_r, e_h, 0.9 + jitter(), basis[4]));
        corpus.push_back(std::move(t));
    }
    if (size >= 2) {
        TrainingInstance t{neg_id, {"man", "horse"}, {}, neg_id};
        t.captions.push_back(caption("a man riding and feeding a horse", {riding, feeding}));
        t.captions.push_back(caption("a man riding a horse", {riding}));
        t.captions.push_back(caption("a man rides a brown horse", {riding}));
        out.store.add(predicate_key(feeding), e_n);
        out.store.add(neg_id, equiangular(e_r, e_n, -0.8 + jitter(), basis[5]));
        corpus.push_back(std::move(t));
    }
    if (size >= 3) {
        TrainingInstance t{neu_id, {"man", "horse", "fence"}, {}, neu_id};
        for (const char* text : {"a man riding a horse near a fence", "a horse near a fence with a man riding it",
                                 "man riding a horse by the fence"})
            t.captions.push_back(caption(text, {riding, near}));
        out.store.add(predicate_key(near), e_u);
        out.store.add(neu_id, equiangular(e_r, e_u, 0.9 + jitter(), basis[6]));
        corpus.push_back(std::move(t));
    }
    for (std::size_t f = 0; f + 3 < size; ++f) {
        const std::string id = "img_" + hex_id(seed, 100 + f);
        TrainingInstance t{id, {}, {}, id};
        std::vector<GroundPredicate> triples;
        if (f % 2 == 0) {
            // Objects the test image does not contain, so normalization drops the image.
            t.object_labels = {"dog", "frisbee"};
            triples = {GroundPredicate("chasing", "dog", "frisbee"), GroundPredicate("catching", "dog", "frisbee")};
            t.captions.push_back(caption("a dog chasing and catching a frisbee", triples));
            t.captions.push_back(caption("a dog catching a frisbee", {triples[1]}));
        } else {
            // Shares detected objects but no relation symbol with the test caption.
            t.object_labels = {"bench", "tree"};
            triples = {GroundPredicate("beside", "bench", "tree"), GroundPredicate("under", "bench", "tree")};
            t.captions.push_back(caption("a bench beside and under a tree", triples));
            t.captions.push_back(caption("a bench under a tree", {triples[1]}));
        }
        for (const auto& p : triples)
            if (!out.store.contains(predicate_key(p))) out.store.add(predicate_key(p), random_unit(rng));
        out.store.add(id, random_unit(rng));
        corpus.push_back(std::move(t));
    }
    for (std::size_t i = corpus.size(); i > 1; --i) std::swap(corpus[i - 1], corpus[rng.below(i)]);
    out.corpus = std::move(corpus);

    TestInstance test;
    test.image_id = "test_" + hex_id(seed, 0);
    test.detected_objects = {"man", "horse", "hat", "fence", "bench", "tree"};
    test.caption_text = "a man wearing a hat riding a horse";
    test.caption_predicates = {riding, wearing};
    test.image_embedding_key = test.image_id;
    out.store.add(test.image_id, equiangular(e_r, e_h, 0.95 + jitter(), basis[7]));
    out.tests.push_back(std::move(test));

    if (size >= 3)
        out.planted = {{"positive", pos_id}, {"negative", neg_id}, {"neutral", neu_id}, {"degenerate", false}};
    else
        out.planted = {{"degenerate", true}};
    return out;
}

// ---------------------------------------------------------------------------

RandomFixture random_fixture(std::uint64_t seed, const RandomModelOptions& o) {
    if (o.min_vars < 2 || o.max_vars < o.min_vars || o.num_symbols < 1)
        throw Error(ErrorKind::invalid_argument, "random_fixture: bad options");
    CounterRng rng(seed, 0xf1);
    const std::size_t n = o.min_vars + rng.below(o.max_vars - o.min_vars + 1);

    std::vector<GroundPredicate> preds;
    for (std::size_t i = 0; i < n; ++i) {
        char sym[24], obj[24];
        std::snprintf(sym, sizeof sym, "s%zu", static_cast<std::size_t>(rng.below(o.num_symbols)));
        std::snprintf(obj, sizeof obj, "o%02zu", i);
        preds.emplace_back(sym, obj, "x");
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.insert({i, i + 1});
    const auto extra = static_cast<std::size_t>(o.extra_edge_rate * static_cast<double>(n));
    for (std::size_t e = 0; e < extra; ++e) {
        std::size_t a = rng.below(n), b = rng.below(n);
        if (a == b) continue;
        edges.insert({std::min(a, b), std::max(a, b)});
    }

    std::vector<PotentialSpec> specs;
    for (const auto& [a, b] : edges) {
        PotentialSpec s;
        s.id = specs.size();
        s.source_image = "fixture";
        s.x1 = preds[a];
        s.x2 = preds[b];
        s.shared_object = "x";
        s.signature = LiftedSignature::of(preds[a].symbol, preds[b].symbol);
        specs.push_back(std::move(s));
    }
    RandomFixture fx{HybridModel{}, WeightVector(signatures_of(specs), 1.0)};
    for (std::size_t i = 0; i < fx.weights.size(); ++i)
        fx.weights.set(i, o.min_weight + (o.max_weight - o.min_weight) * rng.uniform());

    std::vector<FeaturizedPotential> fps;
    for (const auto& s : specs) {
        const double g1 = o.min_g + (o.max_g - o.min_g) * rng.uniform();
        const double g2 = o.min_g + (o.max_g - o.min_g) * rng.uniform();
        fps.push_back(featurize(s, g1, g2, fx.weights.index_of(s.signature), o.params));
        refresh_table(fps.back(), fx.weights);
    }
    fx.model = HybridModel(std::move(fps));
    return fx;
}

VirtualEvidence random_evidence(std::uint64_t seed, const HybridModel& model) {
    CounterRng rng(seed, 0xe7);
    VirtualEvidence ve;
    for (const auto& p : model.variables())
        if (rng.uniform() < 0.5) ve.factors[p] = 1.2 + 1.8 * rng.uniform();
    if (ve.factors.empty() && model.num_vars() > 0) ve.factors[model.variables().front()] = 2.0;
    return ve;
}

}  // namespace hmln
