#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmln/rng.hpp"

namespace hmln {

/// One bit per ground predicate in the model's variable index.
using World = std::vector<std::uint8_t>;

struct PairFactor {
    std::uint32_t a;
    std::uint32_t b;
    /// Log values indexed 2*x_a + x_b.
    std::array<double, 4> log_table;

    double at(const World& w) const { return log_table[2u * w[a] + w[b]]; }
};

/// Compiled pairwise model over binary variables.
class FactorGraph {
public:
    FactorGraph() = default;
    FactorGraph(std::size_t num_vars, std::vector<PairFactor> factors);

    std::size_t num_vars() const noexcept { return num_vars_; }
    const std::vector<PairFactor>& factors() const noexcept { return factors_; }
    std::span<const std::uint32_t> incident(std::size_t var) const { return incident_[var]; }

    /// Unnormalized log density: sum of the factor log values at `w`.
    double log_density(const World& w) const;

private:
    std::size_t num_vars_ = 0;
    std::vector<PairFactor> factors_;
    std::vector<std::vector<std::uint32_t>> incident_;
};

/// P(var = 1 | all other variables), from the factors incident on `var` only.
double conditional(const FactorGraph& graph, const World& world, std::size_t var);

enum class ScanOrder { systematic, random };

struct SamplerConfig {
    std::uint64_t seed = 1;
    std::size_t burn_in = 1000;  // sweeps
    std::size_t thinning = 5;    // sweeps between retained worlds
    std::size_t samples = 20000;
    ScanOrder scan = ScanOrder::systematic;

    void validate() const;
};

/// A single Gibbs chain. A sweep visits every variable once: in index order for systematic
/// scan, or `num_vars` seeded uniform picks for random scan.
class GibbsChain {
public:
    /// Starts from a uniformly random world drawn from the chain's own stream.
    GibbsChain(const FactorGraph& graph, const SamplerConfig& cfg);
    /// Starts from `init`.
    GibbsChain(const FactorGraph& graph, const SamplerConfig& cfg, World init);

    void sweep();
    const World& state() const noexcept { return state_; }

    struct Checkpoint {
        World state;
        std::uint64_t rng_counter;
    };
    Checkpoint checkpoint() const { return {state_, rng_.counter()}; }
    void restore(const Checkpoint& cp);

private:
    void update(std::size_t var);

    const FactorGraph* graph_;
    ScanOrder scan_;
    CounterRng rng_;
    World state_;
};

/// Burns in, then hands each retained world (one every `thinning` sweeps) to `visit`.
void sample_worlds(const FactorGraph& graph, const SamplerConfig& cfg,
                   const std::function<void(const World&)>& visit, std::optional<World> init = std::nullopt);

/// Collects `cfg.samples` worlds.
std::vector<World> gibbs_chain(const FactorGraph& graph, const SamplerConfig& cfg,
                               std::optional<World> init = std::nullopt);

double estimate_expectation(std::span<const World> worlds, const std::function<double(const World&)>& fn);

/// Exact normalized joint by enumeration. World bit i is bit i of the state index.
class ExactJoint {
public:
    static constexpr std::size_t kMaxVars = 20;

    /// Throws SizeLimit above kMaxVars variables.
    explicit ExactJoint(const FactorGraph& graph);

    std::size_t num_vars() const noexcept { return num_vars_; }
    double log_partition() const noexcept { return log_z_; }
    double partition() const;
    double probability(std::uint64_t state) const { return probs_.at(state); }
    double probability(const World& w) const;
    double marginal(std::size_t var) const;
    double expectation(const std::function<double(const World&)>& fn) const;

    static World world_of(std::uint64_t state, std::size_t n);

private:
    std::size_t num_vars_;
    double log_z_;
    std::vector<double> probs_;
};

inline ExactJoint exact_enumerate(const FactorGraph& graph) { return ExactJoint(graph); }

/// Hex dump of a world, low variable in the first nibble; used for sample traces.
std::string world_hex(const World& w);

/// Split-chain potential scale reduction of a scalar trace (1 means well mixed).
double split_rhat(std::span<const double> trace);

}  // namespace hmln
