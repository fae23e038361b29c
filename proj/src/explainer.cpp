#include "hmln/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hmln/error.hpp"

namespace hmln {

using nlohmann::json;

double importance_weight(const FactorGraph& prior, const FactorGraph& conditioned, const World& y) {
    return std::exp(prior.log_density(y) - conditioned.log_density(y));
}

MarginalRun estimate_marginals(const FactorGraph& conditioned, const FactorGraph& prior,
                               std::span<const IndicatorPair> indicators, const SamplerConfig& cfg,
                               WeightClipping clipping, bool keep_weights) {
    if (cfg.samples == 0) throw Error(ErrorKind::invalid_argument, "estimate_marginals: zero samples");
    if (prior.num_vars() != conditioned.num_vars())
        throw Error(ErrorKind::invalid_argument, "prior and conditioned models differ in variables");
    const std::size_t k = indicators.size();

    std::vector<double> log_w;
    std::vector<std::uint8_t> hits;  // samples x indicators
    log_w.reserve(cfg.samples);
    hits.reserve(cfg.samples * k);
    sample_worlds(conditioned, cfg, [&](const World& y) {
        log_w.push_back(prior.log_density(y) - conditioned.log_density(y));
        for (const auto& ind : indicators) hits.push_back(ind(y) ? 1 : 0);
    });

    MarginalRun run;
    run.samples = log_w.size();
    const double max_log = *std::max_element(log_w.begin(), log_w.end());
    double mean_scaled = 0.0;
    for (double lw : log_w) mean_scaled += std::exp(lw - max_log);
    mean_scaled /= static_cast<double>(run.samples);
    const double log_norm = max_log + std::log(mean_scaled);
    run.weight_normalizer = std::exp(log_norm);

    std::vector<double> num(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    double den = 0.0;
    run.min_effective_weight = INFINITY;
    run.max_effective_weight = 0.0;
    if (keep_weights) run.effective_weights.reserve(run.samples);
    for (std::size_t j = 0; j < run.samples; ++j) {
        double w = std::exp(log_w[j] - log_norm);
        if (clipping == WeightClipping::clipped) w = std::max(w, 1.0);
        den += w;
        run.min_effective_weight = std::min(run.min_effective_weight, w);
        run.max_effective_weight = std::max(run.max_effective_weight, w);
        if (keep_weights) run.effective_weights.push_back(w);
        const std::uint8_t* row = hits.data() + j * k;
        for (std::size_t i = 0; i < k; ++i) {
            if (row[i]) {
                num[i] += w;
                ++count[i];
            }
        }
    }
    run.marginals.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        run.marginals[i].p1 = num[i] / den;
        run.marginals[i].p2 = static_cast<double>(count[i]) / static_cast<double>(run.samples);
    }
    return run;
}

double bernoulli_hellinger(double p1, double p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw Error(ErrorKind::invalid_argument, "bernoulli_hellinger: probabilities must lie in [0, 1]");
    const double a = std::sqrt(p1) - std::sqrt(p2);
    const double b = std::sqrt(1.0 - p1) - std::sqrt(1.0 - p2);
    return std::min(1.0, std::sqrt(a * a + b * b) / std::sqrt(2.0));
}

const char* to_string(BiasClass c) {
    switch (c) {
        case BiasClass::similar: return "similar";
        case BiasClass::negative_explainer: return "negative_explainer";
        case BiasClass::positive_explainer: return "positive_explainer";
    }
    return "unknown";
}

BiasClass classify(double p2, double delta_h, double t_delta, double t_p) {
    if (delta_h < t_delta) return BiasClass::similar;
    return p2 >= t_p ? BiasClass::negative_explainer : BiasClass::positive_explainer;
}

std::vector<PotentialBias> aggregate_by_image(std::span<const PotentialBias> biases) {
    std::map<std::string, PotentialBias> best;
    for (const auto& b : biases) {
        auto it = best.find(b.source_image);
        if (it == best.end()) {
            best.emplace(b.source_image, b);
        } else if (b.delta_h > it->second.delta_h ||
                   (b.delta_h == it->second.delta_h && b.potential_id < it->second.potential_id)) {
            it->second = b;
        }
    }
    std::vector<PotentialBias> out;
    for (auto& [id, b] : best) out.push_back(b);
    return out;
}

Explanation select_examples(std::span<const PotentialBias> biases) {
    if (biases.empty()) throw Error(ErrorKind::invalid_argument, "select_examples: no bias records");
    const auto images = aggregate_by_image(biases);  // sorted by image id
    Explanation e;
    e.degenerate = images.size() < 3;

    std::set<std::string> taken;
    const auto pick = [&](auto score, bool maximize) -> const PotentialBias& {
        const PotentialBias* best = nullptr;
        for (const auto& b : images) {
            if (!e.degenerate && taken.count(b.source_image)) continue;
            const double s = score(b);
            // Strict comparison keeps the smaller image id on ties.
            if (!best || (maximize ? s > score(*best) : s < score(*best))) best = &b;
        }
        taken.insert(best->source_image);
        return *best;
    };

    const auto pos_score = [](const PotentialBias& b) { return b.delta_h - b.p2; };
    const auto neg_score = [](const PotentialBias& b) { return b.delta_h + b.p2; };
    const auto neu_score = [](const PotentialBias& b) { return b.delta_h; };

    const auto& pos = pick(pos_score, true);
    e.positive = pos.source_image;
    e.positive_score = pos_score(pos);
    const auto& neg = pick(neg_score, true);
    e.negative = neg.source_image;
    e.negative_score = neg_score(neg);
    const auto& neu = pick(neu_score, false);
    e.neutral = neu.source_image;
    e.neutral_score = neu_score(neu);
    return e;
}

double bias_summary(std::span<const PotentialBias> biases, double p_threshold) {
    double m = 0.0;
    for (const auto& b : biases)
        if (b.p2 >= p_threshold) m = std::max(m, b.delta_h);
    return m;
}

BiasRun quantify_bias(const HybridModel& prior, const HybridModel& conditioned, const WeightVector& w,
                      const SamplerConfig& cfg, const Thresholds& thresholds, WeightClipping clipping) {
    if (prior.variables() != conditioned.variables() || prior.potentials().size() != conditioned.potentials().size())
        throw Error(ErrorKind::invalid_argument, "quantify_bias: prior and conditioned models differ");
    if (prior.potentials().empty()) throw Error(ErrorKind::blanket_empty, "quantify_bias: empty Markov blanket");

    std::vector<IndicatorPair> indicators;
    for (std::size_t k = 0; k < prior.potentials().size(); ++k) {
        const auto [a, b] = prior.scope(k);
        indicators.push_back({a, b});
    }
    BiasRun run;
    run.marginals = estimate_marginals(conditioned.compile(w), prior.compile(w), indicators, cfg, clipping);
    for (std::size_t k = 0; k < indicators.size(); ++k) {
        const auto& m = run.marginals.marginals[k];
        const double dh = bernoulli_hellinger(m.p1, m.p2);
        const auto& spec = prior.potentials()[k].spec;
        run.biases.push_back(
            {spec.id, spec.source_image, m.p1, m.p2, dh, classify(m.p2, dh, thresholds.t_delta, thresholds.t_p)});
    }
    return run;
}

json to_json(const PotentialBias& b) {
    return {{"potential_id", b.potential_id},
            {"source_image", b.source_image},
            {"p1", b.p1},
            {"p2", b.p2},
            {"delta_h", b.delta_h},
            {"classification", to_string(b.classification)}};
}

json to_json(const Explanation& e) {
    return {{"positive", e.positive},
            {"negative", e.negative},
            {"neutral", e.neutral},
            {"scores", {{"positive", e.positive_score}, {"negative", e.negative_score}, {"neutral", e.neutral_score}}},
            {"degenerate", e.degenerate}};
}

}  // namespace hmln
