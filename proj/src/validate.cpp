#include "hmln/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmln/error.hpp"
#include "hmln/explainer.hpp"
#include "hmln/learner.hpp"
#include "hmln/synth.hpp"

namespace hmln {

namespace {

using Check = CheckResult (*)(std::uint64_t);

std::vector<IndicatorPair> all_indicators(const HybridModel& m) {
    std::vector<IndicatorPair> out;
    for (std::size_t k = 0; k < m.potentials().size(); ++k) {
        const auto [a, b] = m.scope(k);
        out.push_back({a, b});
    }
    return out;
}

CheckResult finish(const std::string& name, double worst, double tol, const std::string& detail) {
    CheckResult r;
    r.name = name;
    r.worst = worst;
    r.tolerance = tol;
    r.passed = worst <= tol;
    r.detail = detail;
    return r;
}

CheckResult gibbs_vs_exact(std::uint64_t seed) {
    double worst = 0.0;
    std::size_t marginals = 0;
    for (std::uint64_t f = 0; f < 20; ++f) {
        const auto fx = random_fixture(seed * 1000 + f);
        const auto graph = fx.model.compile(fx.weights);
        const ExactJoint joint(graph);
        SamplerConfig cfg;
        cfg.seed = seed + f;
        cfg.samples = 50000;
        const auto inds = all_indicators(fx.model);
        std::vector<double> var_hits(graph.num_vars(), 0.0), ind_hits(inds.size(), 0.0);
        sample_worlds(graph, cfg, [&](const World& y) {
            for (std::size_t v = 0; v < y.size(); ++v) var_hits[v] += y[v];
            for (std::size_t k = 0; k < inds.size(); ++k) ind_hits[k] += inds[k](y) ? 1.0 : 0.0;
        });
        const double t = static_cast<double>(cfg.samples);
        for (std::size_t v = 0; v < graph.num_vars(); ++v)
            worst = std::max(worst, std::abs(var_hits[v] / t - joint.marginal(v)));
        for (std::size_t k = 0; k < inds.size(); ++k) {
            const auto ind = inds[k];
            const double exact = joint.expectation([&](const World& y) { return ind(y) ? 1.0 : 0.0; });
            worst = std::max(worst, std::abs(ind_hits[k] / t - exact));
        }
        marginals += graph.num_vars() + inds.size();
    }
    return finish("gibbs_vs_exact", worst, 0.02, std::to_string(marginals) + " marginals over 20 models");
}

CheckResult gradient_oracle(std::uint64_t seed) {
    double worst = 0.0;
    const double h = 1e-5;
    for (std::uint64_t f = 0; f < 10; ++f) {
        RandomModelOptions o;
        o.max_vars = 10;
        const auto fx = random_fixture(seed * 7919 + f, o);
        CounterRng rng(seed, f);
        ObservedWorld x;
        for (std::size_t v = 0; v < fx.model.num_vars(); ++v) x.assignment.push_back(rng.uniform() < 0.5);
        const auto g = exact_gradient(fx.model, fx.weights, x);
        for (std::size_t i = 0; i < fx.weights.size(); ++i) {
            WeightVector up = fx.weights, down = fx.weights;
            up.set(i, fx.weights[i] + h);
            down.set(i, fx.weights[i] - h);
            const double fd =
                (exact_log_likelihood(fx.model, up, x) - exact_log_likelihood(fx.model, down, x)) / (2 * h);
            const double scale = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - g[i]) / scale);
        }
    }
    return finish("gradient_oracle", worst, 1e-4, "relative error, central differences h=1e-5, 10 fixtures");
}

CheckResult importance_recovery(std::uint64_t seed) {
    double worst = 0.0;
    for (std::uint64_t f = 0; f < 3; ++f) {
        const auto fx = random_fixture(seed * 104729 + f);
        const auto cond = fx.model.with_evidence(random_evidence(seed + f, fx.model));
        const auto prior_graph = fx.model.compile(fx.weights);
        const auto cond_graph = cond.compile(fx.weights);
        const ExactJoint prior_joint(prior_graph), cond_joint(cond_graph);
        SamplerConfig cfg;
        cfg.seed = seed + 31 * f;
        cfg.samples = 50000;
        const auto inds = all_indicators(fx.model);
        const auto run = estimate_marginals(cond_graph, prior_graph, inds, cfg, WeightClipping::unclipped);
        for (std::size_t k = 0; k < inds.size(); ++k) {
            const auto ind = inds[k];
            const auto fn = [&](const World& y) { return ind(y) ? 1.0 : 0.0; };
            worst = std::max(worst, std::abs(run.marginals[k].p1 - prior_joint.expectation(fn)));
            worst = std::max(worst, std::abs(run.marginals[k].p2 - cond_joint.expectation(fn)));
        }
    }
    return finish("importance_recovery", worst, 0.02, "unclipped p1 vs exact prior, p2 vs exact conditioned");
}

CheckResult null_evidence(std::uint64_t seed) {
    double worst = 0.0;
    for (std::uint64_t f = 0; f < 3; ++f) {
        const auto fx = random_fixture(seed * 31337 + f);
        const auto graph = fx.model.with_evidence({}).compile(fx.weights);
        SamplerConfig cfg;
        cfg.seed = seed + f;
        cfg.samples = 5000;
        const auto inds = all_indicators(fx.model);
        const auto run = estimate_marginals(graph, fx.model.compile(fx.weights), inds, cfg);
        for (const auto& m : run.marginals) worst = std::max(worst, std::abs(m.p1 - m.p2));
    }
    return finish("null_evidence", worst, 0.0, "p1 == p2 under psi = 1");
}

CheckResult gaussian_identity(std::uint64_t seed) {
    CounterRng rng(seed, 0x3a);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double w = 1e-3 + 5.0 * rng.uniform();
        const double g1 = 2.0 * rng.uniform(), g2 = 2.0 * rng.uniform();
        const double sd = std::sqrt(1.0 / (2.0 * w));
        const double lhs = std::exp(w * i_value(true, false, g1, g2));
        const double rhs = std::exp(-(g1 - g2) * (g1 - g2) / (2.0 * sd * sd));
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return finish("gaussian_identity", worst, 1e-12, "weighted I value vs Gaussian penalty, 1000 draws");
}

CheckResult propriety(std::uint64_t seed) {
    std::size_t violations = 0;
    for (std::uint64_t f = 0; f < 5; ++f) {
        const auto fx = random_fixture(seed * 65537 + f);
        const auto prior = fx.model.compile(fx.weights);
        const auto cond = fx.model.with_evidence(random_evidence(seed * 3 + f, fx.model)).compile(fx.weights);
        CounterRng rng(seed, 0x90 + f);
        for (int i = 0; i < 2000; ++i) {
            World y(prior.num_vars());
            for (auto& b : y) b = rng.uniform() < 0.5;
            const double lp = prior.log_density(y), lc = cond.log_density(y);
            if (std::exp(lp) > 0.0 && !(std::exp(lc) > 0.0 && lc >= lp)) ++violations;
        }
    }
    return finish("propriety", static_cast<double>(violations), 0.0, "10000 random worlds over 5 models");
}

struct Entry {
    CheckInfo info;
    Check fn;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> r = {
        {{"gibbs_vs_exact", "Gibbs marginals match exact enumeration within 0.02"}, gibbs_vs_exact},
        {{"gradient_oracle", "exact gradient matches finite differences within 1e-4 relative"}, gradient_oracle},
        {{"importance_recovery", "unclipped importance estimate recovers the exact prior marginals"},
         importance_recovery},
        {{"null_evidence", "no evidence gives identical weighted and unweighted marginals"}, null_evidence},
        {{"gaussian_identity", "weighted I value equals the Gaussian penalty to 1e-12"}, gaussian_identity},
        {{"propriety", "evidence never zeroes a world the prior supports"}, propriety},
    };
    return r;
}

}  // namespace

const std::vector<CheckInfo>& oracle_checks() {
    static const std::vector<CheckInfo> infos = [] {
        std::vector<CheckInfo> v;
        for (const auto& e : registry()) v.push_back(e.info);
        return v;
    }();
    return infos;
}

CheckResult run_check(const std::string& name, std::uint64_t seed) {
    for (const auto& e : registry())
        if (e.info.name == name) return e.fn(seed);
    throw Error(ErrorKind::invalid_argument, "unknown check '" + name + "'");
}

}  // namespace hmln
