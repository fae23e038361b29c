#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmln/model.hpp"

namespace hmln {

/// P(y) / P^(y) from unnormalized densities; with each evidence factor folded once this is
/// exp(-sum of log psi over evidenced predicates set to 1 in y).
double importance_weight(const FactorGraph& prior, const FactorGraph& conditioned, const World& y);

enum class WeightClipping {
    /// max(W, 1) on the normalized ratio P(y)/P^(y).
    clipped,
    /// Plain self-normalized importance weights.
    unclipped,
};

struct IndicatorPair {
    std::uint32_t a;
    std::uint32_t b;
    bool operator()(const World& y) const { return y[a] != y[b]; }
};

struct MarginalEstimate {
    double p1;  // importance-weighted
    double p2;  // unweighted, under the conditioned model
};

struct MarginalRun {
    std::vector<MarginalEstimate> marginals;
    std::size_t samples = 0;
    /// Sample mean of the unnormalized weights; estimates Z / Z^.
    double weight_normalizer = 1.0;
    double min_effective_weight = 1.0;
    double max_effective_weight = 1.0;
    /// Every weight that entered the p1 sums, when requested.
    std::vector<double> effective_weights;
};

/// Runs one Gibbs chain on the conditioned model. Each retained world y contributes
/// 1[I_k(y)] to p2 and 1[I_k(y)] * W'(y) to p1, where W' = max(W / c, 1) when clipped, W is the
/// unnormalized ratio and c its sample mean, so W / c estimates the normalized ratio P(y)/P^(y).
MarginalRun estimate_marginals(const FactorGraph& conditioned, const FactorGraph& prior,
                               std::span<const IndicatorPair> indicators, const SamplerConfig& cfg,
                               WeightClipping clipping = WeightClipping::clipped, bool keep_weights = false);

/// Hellinger distance between Bernoulli(p1) and Bernoulli(p2).
double bernoulli_hellinger(double p1, double p2);

enum class BiasClass { similar, negative_explainer, positive_explainer };
const char* to_string(BiasClass c);

struct Thresholds {
    double t_delta = 0.1;
    double t_p = 0.5;
    double p_threshold = 0.75;
};

/// delta_h < t_delta: similar; else p2 >= t_p: negative explainer; else positive explainer.
BiasClass classify(double p2, double delta_h, double t_delta, double t_p);

struct PotentialBias {
    std::size_t potential_id;
    std::string source_image;
    double p1;
    double p2;
    double delta_h;
    BiasClass classification;
};

struct Explanation {
    std::string positive;
    std::string negative;
    std::string neutral;
    double positive_score = 0.0;  // delta_h - p2
    double negative_score = 0.0;  // delta_h + p2
    double neutral_score = 0.0;   // delta_h
    /// Fewer than three distinct images, so roles repeat.
    bool degenerate = false;
};

/// Keeps each image's max-delta record (lowest potential id on ties).
std::vector<PotentialBias> aggregate_by_image(std::span<const PotentialBias> biases);

/// positive = argmax(delta - p2), negative = argmax(delta + p2), neutral = argmin delta over
/// per-image records; ties go to the smaller image id. Distinct roles are preferred when at
/// least three images exist.
Explanation select_examples(std::span<const PotentialBias> biases);

/// Max delta_h over records with p2 >= p_threshold; 0 when none qualify.
double bias_summary(std::span<const PotentialBias> biases, double p_threshold);

struct BiasRun {
    std::vector<PotentialBias> biases;
    MarginalRun marginals;
};

/// Prior and conditioned blanket models must share the variable index.
BiasRun quantify_bias(const HybridModel& prior, const HybridModel& conditioned, const WeightVector& w,
                      const SamplerConfig& cfg, const Thresholds& thresholds, WeightClipping clipping);

nlohmann::json to_json(const PotentialBias& b);
nlohmann::json to_json(const Explanation& e);

}  // namespace hmln
