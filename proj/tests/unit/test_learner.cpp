#include <cmath>

#include "doctest.h"
#include "hmln/error.hpp"
#include "hmln/learner.hpp"
#include "models.hpp"
#include "oracle.hpp"

using namespace hmln;
using testing_support::build;
using testing_support::Edge;

namespace {

const GroundPredicate p_ride("riding", "man", "horse");
const GroundPredicate p_wear("wearing", "man", "hat");
const GroundPredicate p_hold("holding", "man", "rope");
const GroundPredicate p_near("near", "horse", "fence");

Caption mentioning(std::vector<GroundPredicate> preds) {
    Caption c;
    c.text = "c";
    c.resolved.assign(preds.size(), true);
    c.triples = std::move(preds);
    return c;
}

NormalizedInstance instance(std::string id, std::vector<GroundPredicate> preds, std::vector<Caption> caps) {
    NormalizedInstance n;
    n.image_id = id;
    n.image_embedding_key = id;
    n.predicates = std::move(preds);
    n.captions = std::move(caps);
    return n;
}

ObservedWorld world(std::vector<int> bits) {
    ObservedWorld x;
    x.assignment = testing_support::world_of(bits);
    return x;
}

/// Oracle log-likelihood: weighted hand-computed statistics at x minus the brute-force log Z.
double oracle_ll(const HybridModel& m, const WeightVector& w, const std::vector<int>& x) {
    const auto om = testing_support::oracle_of(m, w);
    return static_cast<double>(oracle::log_weight(om, x)) - oracle::log_partition(om);
}

testing_support::Built three_var(double w = 1.0) {
    return build({Edge{p_ride, p_wear, 0.2, 0.9}, Edge{p_ride, p_hold, 0.5, 1.3}, Edge{p_wear, p_hold, 1.1, 0.1}}, w);
}

}  // namespace

TEST_CASE("a predicate is observed true only when every caption of its image mentions it") {
    const auto b = build({Edge{p_ride, p_wear, 0.3, 0.4}});
    std::vector<Caption> five(5, mentioning({p_ride, p_wear}));
    std::vector<Caption> four_of_five = five;
    four_of_five[2] = mentioning({p_ride});
    const std::vector<NormalizedInstance> norm{instance("a", {p_ride, p_wear}, four_of_five)};
    const auto x = observed_world(b.model, norm);
    const auto ride = b.model.index_of(p_ride), wear = b.model.index_of(p_wear);
    CHECK(x.assignment[ride] == 1);
    CHECK(x.assignment[wear] == 0);
    REQUIRE(x.provenance[wear].sources.size() == 1);
    CHECK(x.provenance[wear].sources[0].captions_mentioning == 4);
    CHECK(x.provenance[wear].sources[0].captions_total == 5);

    const std::vector<NormalizedInstance> single{instance("a", {p_ride, p_wear}, {mentioning({p_ride, p_wear})})};
    const auto y = observed_world(b.model, single);
    CHECK(y.assignment[ride] == 1);
    CHECK(y.assignment[wear] == 1);
}

TEST_CASE("an observation shared by several images needs every image to agree") {
    const auto b = build({Edge{p_ride, p_wear, 0.3, 0.4}, Edge{p_ride, p_hold, 0.3, 0.4, "b"}});
    const std::vector<NormalizedInstance> norm{
        instance("a", {p_ride, p_wear}, {mentioning({p_ride, p_wear})}),
        instance("b", {p_ride, p_hold}, {mentioning({p_ride, p_hold}), mentioning({p_hold})})};
    const auto x = observed_world(b.model, norm);
    CHECK(x.assignment[b.model.index_of(p_ride)] == 0);
    CHECK(x.assignment[b.model.index_of(p_hold)] == 1);
    CHECK(x.provenance[b.model.index_of(p_ride)].sources.size() == 2);
}

TEST_CASE("data statistics on reference worlds") {
    const auto b = build({Edge{p_ride, p_wear, 1.5, 0.2}});
    const auto i = b.model.index_of(p_ride);
    std::vector<int> bits(2, 0);
    CHECK(data_statistics(b.model, b.weights, world(bits))[0] == 0.0);
    bits[i] = 1;
    CHECK(data_statistics(b.model, b.weights, world(bits))[0] == doctest::Approx(-1.69));
    bits.assign(2, 1);
    CHECK(data_statistics(b.model, b.weights, world(bits))[0] == doctest::Approx(-1.1711).epsilon(1e-4));

    const auto eq = build({Edge{p_ride, p_wear, 0.6, 0.6}});
    CHECK(data_statistics(eq.model, eq.weights, world({1, 0}))[0] == 0.0);
}

TEST_CASE("a single Monte-Carlo world gives one of the attainable statistics") {
    const auto b = build({Edge{p_ride, p_wear, 1.5, 0.2}});
    SamplerConfig cfg;
    cfg.samples = 1;
    cfg.burn_in = 3;
    const double s = expected_statistics(b.model, b.weights, cfg)[0];
    const bool attainable = s == 0.0 || std::abs(s + 1.69) < 1e-9 || std::abs(s - c_value(true, true, 1.5, 0.2, 0.7, 1.0)) < 1e-9;
    CHECK(attainable);
}

TEST_CASE("Monte-Carlo expectations approach the exact ones") {
    const auto b = three_var(1.5);
    SamplerConfig cfg;
    cfg.samples = 40000;
    const auto mc = expected_statistics(b.model, b.weights, cfg);
    const auto ex = exact_expected_statistics(b.model, b.weights);
    REQUIRE(mc.size() == ex.size());
    for (std::size_t i = 0; i < mc.size(); ++i) CHECK(std::abs(mc[i] - ex[i]) < 0.03);
}

TEST_CASE("the exact log-likelihood matches the brute-force oracle") {
    const auto b = three_var(0.8);
    for (std::uint64_t s = 0; s < 8; ++s) {
        const auto bits = oracle::bits(s, 3);
        CHECK(exact_log_likelihood(b.model, b.weights, world(bits)) ==
              doctest::Approx(oracle_ll(b.model, b.weights, bits)).epsilon(1e-10));
    }
}

TEST_CASE("a model with vanishing tables has log-likelihood -n ln 2") {
    const auto b = build({Edge{p_ride, p_wear, -60, -60}, Edge{p_hold, p_near, -60, -60}});
    CHECK(exact_log_likelihood(b.model, b.weights, world({0, 0, 0, 0})) ==
          doctest::Approx(-4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("the exact gradient matches central differences of the oracle log-likelihood") {
    const auto b = three_var(1.0);
    const std::vector<int> bits{1, 0, 1};
    const auto g = exact_gradient(b.model, b.weights, world(bits));
    const double h = 1e-5;
    for (std::size_t i = 0; i < b.weights.size(); ++i) {
        WeightVector up = b.weights, down = b.weights;
        up.set(i, b.weights[i] + h);
        down.set(i, b.weights[i] - h);
        const double fd = (oracle_ll(b.model, up, bits) - oracle_ll(b.model, down, bits)) / (2 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("a zero learning rate leaves the weights unchanged") {
    const auto b = three_var(1.25);
    LearnConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.iterations = 5;
    cfg.early_stop_patience = 0;
    const auto r = learn(b.model, world({1, 1, 0}), cfg, b.weights);
    CHECK(r.trace.size() == 5);
    for (std::size_t i = 0; i < b.weights.size(); ++i) CHECK(r.weights[i] == b.weights[i]);
}

TEST_CASE("learning from a stationary point stays there") {
    const auto b = three_var(1.0);
    const auto x = world({1, 0, 1});
    LearnConfig cfg;
    cfg.exact_expectations = true;
    cfg.learning_rate = 0.5;
    cfg.iterations = 4000;
    cfg.early_stop_tol = 1e-10;
    const auto fit = learn(b.model, x, cfg, b.weights);
    const auto g = exact_gradient(b.model, fit.weights, x);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (fit.weights[i] > fit.weights.floor()) CHECK(std::abs(g[i]) < 1e-8);

    cfg.iterations = 20;
    const auto again = learn(b.model, x, cfg, fit.weights);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(again.weights[i] == doctest::Approx(fit.weights[i]).epsilon(1e-8));
}

TEST_CASE("weights never drop below the floor") {
    const auto b = build({Edge{p_ride, p_wear, 1.9, 1.9}});
    LearnConfig cfg;
    cfg.learning_rate = 10.0;
    cfg.iterations = 10;
    cfg.floor = 0.05;
    const auto r = learn(b.model, world({1, 1}), cfg, WeightVector(b.weights.signatures(), 1.0, cfg.floor));
    CHECK(r.weights[0] == doctest::Approx(0.05));
    for (const auto& row : r.trace) CHECK(row.weights[0] >= 0.05);
}

TEST_CASE("small exact steps never decrease the log-likelihood") {
    const auto b = three_var(2.5);
    const auto x = world({0, 1, 1});
    LearnConfig cfg;
    cfg.exact_expectations = true;
    cfg.learning_rate = 0.05;
    cfg.iterations = 60;
    cfg.early_stop_patience = 0;
    const auto r = learn(b.model, x, cfg, b.weights);
    double previous = exact_log_likelihood(b.model, b.weights, x);
    for (const auto& row : r.trace) {
        WeightVector w = b.weights;
        for (std::size_t i = 0; i < w.size(); ++i) w.set(i, row.weights[i]);
        const double ll = exact_log_likelihood(b.model, w, x);
        CHECK(ll >= previous - 1e-12);
        previous = ll;
    }
}

TEST_CASE("learned weights do not depend on potential order") {
    const std::vector<Edge> edges{Edge{p_ride, p_wear, 0.2, 0.9}, Edge{p_ride, p_hold, 0.5, 1.3},
                                  Edge{p_wear, p_hold, 1.1, 0.1}};
    const std::vector<Edge> reversed(edges.rbegin(), edges.rend());
    const auto a = build(edges), b = build(reversed);
    LearnConfig cfg;
    cfg.exact_expectations = true;
    cfg.learning_rate = 0.2;
    cfg.iterations = 50;
    const auto x = [&](const HybridModel& m) {
        World w(m.num_vars(), 0);
        w[m.index_of(p_ride)] = 1;
        w[m.index_of(p_hold)] = 1;
        ObservedWorld o;
        o.assignment = w;
        return o;
    };
    const auto ra = learn(a.model, x(a.model), cfg, a.weights);
    const auto rb = learn(b.model, x(b.model), cfg, b.weights);
    REQUIRE(ra.weights.signatures() == rb.weights.signatures());
    for (std::size_t i = 0; i < ra.weights.size(); ++i)
        CHECK(ra.weights[i] == doctest::Approx(rb.weights[i]).epsilon(1e-12));
}

TEST_CASE("contrastive-divergence learning is seed deterministic") {
    const auto b = three_var(1.0);
    LearnConfig cfg;
    cfg.iterations = 30;
    for (auto init : {CdInit::data, CdInit::persistent}) {
        cfg.init = init;
        const auto r1 = learn(b.model, world({1, 0, 1}), cfg, b.weights);
        const auto r2 = learn(b.model, world({1, 0, 1}), cfg, b.weights);
        CHECK(trace_csv(r1) == trace_csv(r2));
    }
}

TEST_CASE("learning rejects bad settings and mismatched observations") {
    const auto b = three_var();
    LearnConfig cfg;
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(learn(b.model, world({1, 0, 1}), cfg, b.weights), Error);
    cfg = {};
    CHECK_THROWS_AS(learn(b.model, world({1, 0}), cfg, b.weights), Error);
}

TEST_CASE("the trace CSV has a header and one row per iteration") {
    const auto b = three_var();
    LearnConfig cfg;
    cfg.iterations = 3;
    cfg.early_stop_patience = 0;
    const auto csv = trace_csv(learn(b.model, world({1, 0, 1}), cfg, b.weights));
    CHECK(csv.rfind("iteration,grad_inf_norm,grad[", 0) == 0);
    CHECK(csv.find("weight[holding|riding]") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
