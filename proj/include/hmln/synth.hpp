#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmln/corpus.hpp"
#include "hmln/model.hpp"

namespace hmln {

/// Synthetic corpus with three planted training images whose explanation roles are known.
struct SynthBundle {
    std::vector<TrainingInstance> corpus;
    EmbeddingStore store;
    std::vector<TestInstance> tests;
    /// {"positive", "negative", "neutral"} image ids, or {"degenerate": true} below three images.
    nlohmann::json planted;
};

/// `size` is the number of training images: 1 keeps only the high-agreement image, 2 adds the
/// contradictory one, and 3 or more add the near-duplicate plus unrelated filler images.
SynthBundle synthesize(std::uint64_t seed, std::size_t size);

struct RandomModelOptions {
    std::size_t min_vars = 4;
    std::size_t max_vars = 12;
    std::size_t num_symbols = 3;
    double min_weight = 0.1;
    double max_weight = 3.0;
    double min_g = 0.0;
    double max_g = 1.4;
    /// Extra edges per variable on top of the spanning chain.
    double extra_edge_rate = 0.5;
    HybridParams params{};
};

struct RandomFixture {
    HybridModel model;
    WeightVector weights;
};

/// Random pairwise model: a chain over the variables plus random extra edges, symbols drawn from
/// a small alphabet so several groundings share a weight.
RandomFixture random_fixture(std::uint64_t seed, const RandomModelOptions& options = {});

/// Random virtual evidence (psi in [1.2, 3]) on roughly half of a model's variables.
VirtualEvidence random_evidence(std::uint64_t seed, const HybridModel& model);

}  // namespace hmln
