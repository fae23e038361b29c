#include <cmath>

#include "doctest.h"
#include "hmln/error.hpp"
#include "hmln/potentials.hpp"
#include "models.hpp"
#include "oracle.hpp"

using namespace hmln;

namespace {

const GroundPredicate p_ride("riding", "man", "horse");
const GroundPredicate p_wear("wearing", "man", "hat");
const GroundPredicate p_hold("holding", "man", "rope");

FeaturizedPotential single(double g1, double g2, const WeightVector& w, const HybridParams& params = {}) {
    testing_support::Edge e{p_ride, p_wear, g1, g2};
    auto fp = featurize(testing_support::spec_of(0, e), g1, g2, 0, params);
    refresh_table(fp, w);
    return fp;
}

WeightVector one_weight(double value) {
    return WeightVector({LiftedSignature::of("riding", "wearing")}, value);
}

}  // namespace

TEST_CASE("I value is zero unless exactly one predicate holds") {
    CHECK(i_value(false, false, 0.3, 0.6) == 0.0);
    CHECK(i_value(true, true, 0.3, 0.6) == 0.0);
    CHECK(i_value(true, false, 0.3, 0.6) == doctest::Approx(-0.09));
    CHECK(i_value(false, true, 0.3, 0.6) == doctest::Approx(-0.09));
    CHECK(i_value(true, false, 0.4, 0.4) == 0.0);
}

TEST_CASE("C value is the smaller log-sigmoid match score on the AND row") {
    CHECK(c_value(true, true, 0.7, 0.7, 0.7, 1.0) == doctest::Approx(std::log(0.5)));
    CHECK(c_value(true, true, 1.5, 0.2, 0.7, 1.0) == doctest::Approx(-1.1711).epsilon(1e-4));
    CHECK(c_value(true, false, 1.5, 0.2, 0.7, 1.0) == 0.0);
    CHECK(c_value(false, false, 1.5, 0.2, 0.7, 1.0) == 0.0);
    for (double g : {0.0, 0.3, 0.9, 1.4, 2.0}) CHECK(c_value(true, true, g, g, 0.7, 1.0) < 0.0);
}

TEST_CASE("log-sigmoid stays finite far into both tails") {
    CHECK(std::isfinite(log_sigmoid(-800.0)));
    CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
    CHECK(log_sigmoid(800.0) == doctest::Approx(0.0));
    CHECK(log_sigmoid(0.0) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("tables match the hand formula") {
    const auto w = one_weight(2.0);
    const auto fp = single(1.5, 0.2, w);
    double expected[4];
    oracle::hybrid_table(2.0, 1.5, 0.2, 0.7, 1.0, expected);
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            CHECK(log_potential(fp, w, x1, x2) == doctest::Approx(expected[2 * x1 + x2]).epsilon(1e-12));
    CHECK(log_potential(fp, w, false, false) == 0.0);
    CHECK(log_potential(fp, w, true, true) == doctest::Approx(-2.3422).epsilon(1e-4));
}

TEST_CASE("a table older than the weights is a consistency error") {
    auto w = one_weight(1.0);
    const auto fp = single(0.5, 0.5, w);
    CHECK_NOTHROW(log_potential(fp, w, true, true));
    w.set(0, 1.5);
    try {
        log_potential(fp, w, true, true);
        FAIL("expected a consistency error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::consistency);
    }
}

TEST_CASE("weights are projected onto the floor") {
    auto w = one_weight(1.0);
    w.set(0, -4.0);
    CHECK(w[0] == doctest::Approx(w.floor()));
    const auto before = w.version();
    w.set(0, 2.0);
    CHECK(w.version() != before);
    CHECK_THROWS_AS(w.index_of(LiftedSignature::of("a", "b")), Error);
}

TEST_CASE("virtual evidence adds log psi to the rows where its predicate is 1") {
    const auto w = one_weight(1.0);
    const auto fp = single(0.4, 0.9, w);

    VirtualEvidence on_x1;
    on_x1.factors[p_ride] = 2.0;
    const auto a = apply_virtual_evidence(fp, on_x1);
    CHECK(a.table[table_row(false, false)] == doctest::Approx(fp.table[0]));
    CHECK(a.table[table_row(false, true)] == doctest::Approx(fp.table[1]));
    CHECK(a.table[table_row(true, false)] == doctest::Approx(fp.table[2] + std::log(2.0)));
    CHECK(a.table[table_row(true, true)] == doctest::Approx(fp.table[3] + std::log(2.0)));
    CHECK(fp.evidence == Table{});

    VirtualEvidence disjoint;
    disjoint.factors[p_hold] = 3.0;
    CHECK(apply_virtual_evidence(fp, disjoint).table == fp.table);

    VirtualEvidence both;
    both.factors[p_ride] = 2.0;
    both.factors[p_wear] = 3.0;
    const auto b = apply_virtual_evidence(fp, both);
    CHECK(b.table[1] == doctest::Approx(fp.table[1] + std::log(3.0)));
    CHECK(b.table[2] == doctest::Approx(fp.table[2] + std::log(2.0)));
    CHECK(b.table[3] == doctest::Approx(fp.table[3] + std::log(6.0)));
}

TEST_CASE("evidence factor values and monotonicity") {
    const HybridParams params;
    CHECK(evidence_factor(params.epsilon, params) == doctest::Approx(2.0));
    CHECK(evidence_factor(1.0, params) == doctest::Approx(1.0 + std::exp(0.3)));
    CHECK(evidence_factor(1.0, params) == doctest::Approx(2.3499).epsilon(1e-4));
    double previous = 0.0;
    for (double d = -1.0; d <= 1.0; d += 0.05) {
        const double psi = evidence_factor(d, params);
        CHECK(psi >= 1.0);
        CHECK(psi > previous);
        previous = psi;
    }
}

TEST_CASE("evidence built from embeddings multiplies factors landing on one corpus predicate") {
    EmbeddingStore store(2);
    store.add("test", {1.0, 0.0});
    store.add(predicate_key(p_ride), {1.0, 0.0});
    const GroundPredicate atop("atop", "man", "horse");
    store.add(predicate_key(atop), {0.0, 1.0});
    TestInstance t;
    t.image_embedding_key = "test";
    ReificationMap map;
    map.pairs.push_back({p_ride, p_ride, ReificationRule::same_symbol, 2.0});
    map.pairs.push_back({atop, p_ride, ReificationRule::similar_symbol, 0.8});
    const HybridParams params;
    const auto ve = build_virtual_evidence(t, map, store, params);
    REQUIRE(ve.factors.size() == 1);
    CHECK(ve.factor(p_ride) == doctest::Approx(evidence_factor(1.0, params) * evidence_factor(0.0, params)));
    CHECK(ve.factor(p_wear) == 1.0);
    CHECK_THROWS_AS(build_virtual_evidence(t, ReificationMap{}, store, params), Error);
}

TEST_CASE("the weighted I value equals a Gaussian penalty") {
    CounterRng rng(7, 1);
    for (int i = 0; i < 200; ++i) {
        const double w = 1e-3 + 4.0 * rng.uniform();
        const double g1 = 2.0 * rng.uniform(), g2 = 2.0 * rng.uniform();
        const double var = 1.0 / (2.0 * w);
        CHECK(std::abs(std::exp(w * i_value(true, false, g1, g2)) - std::exp(-(g1 - g2) * (g1 - g2) / (2 * var))) <
              1e-12);
    }
}

TEST_CASE("weight records round-trip and malformed ones are rejected") {
    WeightVector w({LiftedSignature::of("riding", "wearing"), LiftedSignature::of("near", "riding")}, 1.0);
    w.set(0, 0.25);
    w.set(1, 3.5);
    const auto again = weights_from_json(weights_to_json(w));
    REQUIRE(again.size() == 2);
    CHECK(again.signatures() == w.signatures());
    CHECK(again[0] == w[0]);
    CHECK(again[1] == w[1]);

    using nlohmann::json;
    CHECK_THROWS_AS(weights_from_json(json::object()), Error);
    CHECK_THROWS_AS(weights_from_json(json::parse(R"([{"signature": ["a"], "weight": 1}])")), Error);
    CHECK_THROWS_AS(weights_from_json(json::parse(R"([{"signature": ["a", "b"], "weight": -1}])")), Error);
    CHECK_THROWS_AS(weights_from_json(json::parse(R"([{"signature": ["a", "b"], "weight": "x"}])")), Error);
    CHECK_THROWS_AS(
        weights_from_json(json::parse(R"([{"signature": ["a", "b"], "weight": 1}, {"signature": ["b", "a"], "weight": 2}])")),
        Error);
}

TEST_CASE("g values come from predicate text and source image embeddings") {
    EmbeddingStore store(2);
    store.add("img", {1.0, 0.0});
    store.add(predicate_key(p_ride), {1.0, 0.0});
    store.add(predicate_key(p_wear), {0.0, 1.0});
    NormalizedInstance n;
    n.image_id = "img";
    n.image_embedding_key = "img";
    n.predicates = {p_ride, p_wear};
    const std::vector<NormalizedInstance> norm{n};
    const auto specs = build_potentials(norm);
    const WeightVector w(signatures_of(specs), 1.0);
    const auto fps = featurize_all(specs, norm, store, w, {});
    REQUIRE(fps.size() == 1);
    const bool ride_first = fps[0].spec.x1 == p_ride;
    CHECK(fps[0].g1 == doctest::Approx(ride_first ? 0.0 : 1.0));
    CHECK(fps[0].g2 == doctest::Approx(ride_first ? 1.0 : 0.0));
    CHECK(to_json(fps[0]).contains("g1"));
}
