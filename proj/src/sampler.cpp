#include "hmln/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hmln/error.hpp"
#include "hmln/potentials.hpp"

namespace hmln {

FactorGraph::FactorGraph(std::size_t num_vars, std::vector<PairFactor> factors)
    : num_vars_(num_vars), factors_(std::move(factors)), incident_(num_vars) {
    for (std::uint32_t f = 0; f < factors_.size(); ++f) {
        const auto& fac = factors_[f];
        if (fac.a >= num_vars_ || fac.b >= num_vars_ || fac.a == fac.b)
            throw Error(ErrorKind::invalid_argument, "factor " + std::to_string(f) + " has an invalid scope");
        incident_[fac.a].push_back(f);
        incident_[fac.b].push_back(f);
    }
}

double FactorGraph::log_density(const World& w) const {
    double s = 0.0;
    for (const auto& f : factors_) s += f.at(w);
    return s;
}

double conditional(const FactorGraph& graph, const World& world, std::size_t var) {
    double delta = 0.0;
    for (auto f : graph.incident(var)) {
        const auto& fac = graph.factors()[f];
        if (fac.a == var) {
            const unsigned xb = world[fac.b];
            delta += fac.log_table[2u + xb] - fac.log_table[xb];
        } else {
            const unsigned xa = world[fac.a];
            delta += fac.log_table[2u * xa + 1u] - fac.log_table[2u * xa];
        }
    }
    return sigmoid(delta);
}

void SamplerConfig::validate() const {
    if (thinning < 1) throw Error(ErrorKind::invalid_argument, "sampler thinning must be >= 1");
    if (samples < 1) throw Error(ErrorKind::invalid_argument, "sampler samples must be >= 1");
}

// ---------------------------------------------------------------------------

GibbsChain::GibbsChain(const FactorGraph& graph, const SamplerConfig& cfg)
    : graph_(&graph), scan_(cfg.scan), rng_(cfg.seed), state_(graph.num_vars()) {
    for (auto& bit : state_) bit = rng_.uniform() < 0.5 ? 1 : 0;
}

GibbsChain::GibbsChain(const FactorGraph& graph, const SamplerConfig& cfg, World init)
    : graph_(&graph), scan_(cfg.scan), rng_(cfg.seed), state_(std::move(init)) {
    if (state_.size() != graph.num_vars())
        throw Error(ErrorKind::invalid_argument, "initial world has the wrong number of variables");
}

void GibbsChain::update(std::size_t var) {
    const double p1 = conditional(*graph_, state_, var);
    state_[var] = rng_.uniform() < p1 ? 1 : 0;
}

void GibbsChain::sweep() {
    const std::size_t n = state_.size();
    if (scan_ == ScanOrder::systematic) {
        for (std::size_t v = 0; v < n; ++v) update(v);
    } else {
        for (std::size_t k = 0; k < n; ++k) update(rng_.below(n));
    }
}

void GibbsChain::restore(const Checkpoint& cp) {
    if (cp.state.size() != state_.size())
        throw Error(ErrorKind::invalid_argument, "checkpoint has the wrong number of variables");
    state_ = cp.state;
    rng_.set_counter(cp.rng_counter);
}

void sample_worlds(const FactorGraph& graph, const SamplerConfig& cfg,
                   const std::function<void(const World&)>& visit, std::optional<World> init) {
    cfg.validate();
    GibbsChain chain = init ? GibbsChain(graph, cfg, std::move(*init)) : GibbsChain(graph, cfg);
    for (std::size_t i = 0; i < cfg.burn_in; ++i) chain.sweep();
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        for (std::size_t t = 0; t < cfg.thinning; ++t) chain.sweep();
        visit(chain.state());
    }
}

std::vector<World> gibbs_chain(const FactorGraph& graph, const SamplerConfig& cfg, std::optional<World> init) {
    std::vector<World> out;
    out.reserve(cfg.samples);
    sample_worlds(graph, cfg, [&](const World& w) { out.push_back(w); }, std::move(init));
    return out;
}

double estimate_expectation(std::span<const World> worlds, const std::function<double(const World&)>& fn) {
    if (worlds.empty()) throw Error(ErrorKind::invalid_argument, "estimate_expectation: no worlds");
    double s = 0.0;
    for (const auto& w : worlds) s += fn(w);
    return s / static_cast<double>(worlds.size());
}

// ---------------------------------------------------------------------------

ExactJoint::ExactJoint(const FactorGraph& graph) : num_vars_(graph.num_vars()) {
    if (num_vars_ > kMaxVars)
        throw Error(ErrorKind::size_limit, "exact enumeration refused: " + std::to_string(num_vars_) +
                                               " variables exceed the limit of " + std::to_string(kMaxVars));
    const std::uint64_t count = std::uint64_t{1} << num_vars_;
    probs_.resize(count);
    World w(num_vars_);
    double max_log = -INFINITY;
    for (std::uint64_t s = 0; s < count; ++s) {
        for (std::size_t v = 0; v < num_vars_; ++v) w[v] = (s >> v) & 1u;
        probs_[s] = graph.log_density(w);
        max_log = std::max(max_log, probs_[s]);
    }
    double z = 0.0;
    for (auto& p : probs_) {
        p = std::exp(p - max_log);
        z += p;
    }
    for (auto& p : probs_) p /= z;
    log_z_ = max_log + std::log(z);
}

double ExactJoint::partition() const { return std::exp(log_z_); }

World ExactJoint::world_of(std::uint64_t state, std::size_t n) {
    World w(n);
    for (std::size_t v = 0; v < n; ++v) w[v] = (state >> v) & 1u;
    return w;
}

double ExactJoint::probability(const World& w) const {
    std::uint64_t s = 0;
    for (std::size_t v = 0; v < w.size(); ++v) s |= std::uint64_t{w[v] != 0} << v;
    return probs_.at(s);
}

double ExactJoint::marginal(std::size_t var) const {
    double m = 0.0;
    for (std::uint64_t s = 0; s < probs_.size(); ++s)
        if ((s >> var) & 1u) m += probs_[s];
    return m;
}

double ExactJoint::expectation(const std::function<double(const World&)>& fn) const {
    double e = 0.0;
    for (std::uint64_t s = 0; s < probs_.size(); ++s) e += probs_[s] * fn(world_of(s, num_vars_));
    return e;
}

// ---------------------------------------------------------------------------

std::string world_hex(const World& w) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < w.size(); i += 4) {
        unsigned nib = 0;
        for (std::size_t k = 0; k < 4 && i + k < w.size(); ++k) nib |= (w[i + k] ? 1u : 0u) << k;
        out.push_back(kDigits[nib]);
    }
    return out;
}

double split_rhat(std::span<const double> trace) {
    const std::size_t half = trace.size() / 2;
    if (half < 2) return NAN;
    const auto stats = [](std::span<const double> x) {
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        return std::pair{mean, var / static_cast<double>(x.size() - 1)};
    };
    const auto [m1, v1] = stats(trace.subspan(0, half));
    const auto [m2, v2] = stats(trace.subspan(half, half));
    const double n = static_cast<double>(half);
    const double within = 0.5 * (v1 + v2);
    const double grand = 0.5 * (m1 + m2);
    const double between = n * ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand));
    if (within <= 0.0) return between <= 0.0 ? 1.0 : INFINITY;
    const double var_plus = (n - 1.0) / n * within + between / n;
    return std::sqrt(var_plus / within);
}

}  // namespace hmln
