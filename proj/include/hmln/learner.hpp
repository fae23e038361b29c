#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmln/grounder.hpp"
#include "hmln/model.hpp"

namespace hmln {

struct ObservedSource {
    std::string image_id;
    std::size_t captions_mentioning = 0;
    std::size_t captions_total = 0;
};

struct ObservedBit {
    GroundPredicate predicate;
    std::vector<ObservedSource> sources;
};

/// Training assignment: a predicate is 1 iff every caption of every source image mentions it.
struct ObservedWorld {
    World assignment;
    std::vector<ObservedBit> provenance;  // parallel to the model's variables
};

ObservedWorld observed_world(const HybridModel& model, std::span<const NormalizedInstance> normalized);

enum class CdInit { data, persistent };

struct LearnConfig {
    double learning_rate = 0.01;
    std::size_t iterations = 200;
    std::size_t cd_samples = 100;  // worlds per gradient estimate
    std::size_t cd_sweeps = 10;    // sweeps before the first retained world
    double initial_weight = 1.0;
    double floor = 1e-3;
    CdInit init = CdInit::data;
    std::uint64_t seed = 1;
    double early_stop_tol = 1e-3;
    std::size_t early_stop_patience = 5;
    /// Replace the Monte-Carlo expectation by exact enumeration (validation only).
    bool exact_expectations = false;
};

/// Per-signature sum of I + C at the observed world.
std::vector<double> data_statistics(const HybridModel& model, const WeightVector& w, const ObservedWorld& x);

/// Monte-Carlo mean of the per-signature statistics over `cfg.samples` Gibbs worlds.
std::vector<double> expected_statistics(const HybridModel& model, const WeightVector& w, const SamplerConfig& cfg,
                                        std::optional<World> init = std::nullopt);

std::vector<double> exact_expected_statistics(const HybridModel& model, const WeightVector& w);

/// sum_f w_f * stat_f(x) - log Z_w.
double exact_log_likelihood(const HybridModel& model, const WeightVector& w, const ObservedWorld& x);

/// data - exact expectation, per signature.
std::vector<double> exact_gradient(const HybridModel& model, const WeightVector& w, const ObservedWorld& x);

struct TraceRow {
    std::size_t iteration;
    std::vector<double> gradient;
    std::vector<double> weights;
    double grad_inf_norm;
};

struct LearnResult {
    WeightVector weights;
    std::vector<TraceRow> trace;
    bool early_stopped = false;
};

/// Projected gradient ascent with contrastive-divergence expectations:
/// w <- max(w + eta * (data - expected), floor), for at most cfg.iterations steps.
LearnResult learn(const HybridModel& model, const ObservedWorld& x, const LearnConfig& cfg, WeightVector initial);

std::string trace_csv(const LearnResult& result);

}  // namespace hmln
