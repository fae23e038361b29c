#include "hmln/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmln/error.hpp"
#include "hmln/log.hpp"

namespace hmln {

ObservedWorld observed_world(const HybridModel& model, std::span<const NormalizedInstance> normalized) {
    ObservedWorld x;
    x.assignment.assign(model.num_vars(), 0);
    x.provenance.reserve(model.num_vars());
    for (std::size_t v = 0; v < model.num_vars(); ++v) {
        const auto& pred = model.variables()[v];
        ObservedBit bit{pred, {}};
        bool all = true;
        for (const auto& inst : normalized) {
            if (std::find(inst.predicates.begin(), inst.predicates.end(), pred) == inst.predicates.end()) continue;
            ObservedSource src{inst.image_id, 0, inst.captions.size()};
            for (const auto& cap : inst.captions) src.captions_mentioning += cap.mentions(pred) ? 1 : 0;
            all = all && src.captions_mentioning == src.captions_total;
            bit.sources.push_back(std::move(src));
        }
        x.assignment[v] = (all && !bit.sources.empty()) ? 1 : 0;
        x.provenance.push_back(std::move(bit));
    }
    return x;
}

std::vector<double> data_statistics(const HybridModel& model, const WeightVector& w, const ObservedWorld& x) {
    return model.statistics(x.assignment, w.size());
}

std::vector<double> expected_statistics(const HybridModel& model, const WeightVector& w, const SamplerConfig& cfg,
                                        std::optional<World> init) {
    const auto graph = model.compile(w);
    std::vector<double> sum(w.size(), 0.0);
    sample_worlds(
        graph, cfg,
        [&](const World& y) {
            const auto s = model.statistics(y, w.size());
            for (std::size_t i = 0; i < s.size(); ++i) sum[i] += s[i];
        },
        std::move(init));
    for (auto& v : sum) v /= static_cast<double>(cfg.samples);
    return sum;
}

std::vector<double> exact_expected_statistics(const HybridModel& model, const WeightVector& w) {
    const ExactJoint joint(model.compile(w));
    std::vector<double> e(w.size(), 0.0);
    const std::uint64_t count = std::uint64_t{1} << joint.num_vars();
    for (std::uint64_t s = 0; s < count; ++s) {
        const double p = joint.probability(s);
        const auto st = model.statistics(ExactJoint::world_of(s, joint.num_vars()), w.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += p * st[i];
    }
    return e;
}

double exact_log_likelihood(const HybridModel& model, const WeightVector& w, const ObservedWorld& x) {
    const auto graph = model.compile(w);
    const ExactJoint joint(graph);
    const auto stats = model.statistics(x.assignment, w.size());
    double ll = -joint.log_partition();
    for (std::size_t i = 0; i < stats.size(); ++i) ll += w[i] * stats[i];
    return ll;
}

std::vector<double> exact_gradient(const HybridModel& model, const WeightVector& w, const ObservedWorld& x) {
    auto g = data_statistics(model, w, x);
    const auto e = exact_expected_statistics(model, w);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= e[i];
    return g;
}

LearnResult learn(const HybridModel& model, const ObservedWorld& x, const LearnConfig& cfg, WeightVector initial) {
    if (!(cfg.learning_rate >= 0.0)) throw Error(ErrorKind::invalid_argument, "learning rate must be >= 0");
    if (cfg.cd_samples < 1) throw Error(ErrorKind::invalid_argument, "cd_samples must be >= 1");
    if (x.assignment.size() != model.num_vars())
        throw Error(ErrorKind::invalid_argument, "observed world does not match the model");

    LearnResult result{std::move(initial), {}, false};
    WeightVector& w = result.weights;
    const auto data = data_statistics(model, w, x);
    World chain_state = x.assignment;
    std::size_t quiet = 0;

    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        std::vector<double> expected;
        if (cfg.exact_expectations) {
            expected = exact_expected_statistics(model, w);
        } else {
            const auto graph = model.compile(w);
            SamplerConfig sc;
            sc.seed = CounterRng::mix(cfg.seed ^ CounterRng::mix(t));
            sc.burn_in = cfg.cd_sweeps > 0 ? cfg.cd_sweeps - 1 : 0;
            sc.thinning = 1;
            sc.samples = cfg.cd_samples;
            expected.assign(w.size(), 0.0);
            World start = cfg.init == CdInit::data ? x.assignment : chain_state;
            sample_worlds(
                graph, sc,
                [&](const World& y) {
                    const auto s = model.statistics(y, w.size());
                    for (std::size_t i = 0; i < s.size(); ++i) expected[i] += s[i];
                    chain_state = y;
                },
                std::move(start));
            for (auto& v : expected) v /= static_cast<double>(cfg.cd_samples);
        }

        TraceRow row{t, std::vector<double>(w.size()), {}, 0.0};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double g = data[i] - expected[i];
            if (!std::isfinite(g))
                throw Error(ErrorKind::numeric, "non-finite gradient at iteration " + std::to_string(t) +
                                                    " for signature (" + w.signatures()[i].first + ", " +
                                                    w.signatures()[i].second + ")");
            row.gradient[i] = g;
            row.grad_inf_norm = std::max(row.grad_inf_norm, std::abs(g));
        }
        for (std::size_t i = 0; i < w.size(); ++i) w.set(i, w[i] + cfg.learning_rate * row.gradient[i]);
        row.weights.assign(w.values().begin(), w.values().end());
        spdlog::debug("learn iteration {}: |grad|_inf = {}", t, row.grad_inf_norm);
        result.trace.push_back(std::move(row));

        quiet = result.trace.back().grad_inf_norm < cfg.early_stop_tol ? quiet + 1 : 0;
        if (cfg.early_stop_patience > 0 && quiet >= cfg.early_stop_patience) {
            result.early_stopped = true;
            break;
        }
    }
    return result;
}

std::string trace_csv(const LearnResult& result) {
    std::ostringstream out;
    out.precision(17);
    out << "iteration,grad_inf_norm";
    const auto& sigs = result.weights.signatures();
    for (const auto& s : sigs) out << ",grad[" << s.str() << "]";
    for (const auto& s : sigs) out << ",weight[" << s.str() << "]";
    out << "\n";
    for (const auto& row : result.trace) {
        out << row.iteration << "," << row.grad_inf_norm;
        for (double g : row.gradient) out << "," << g;
        for (double v : row.weights) out << "," << v;
        out << "\n";
    }
    return out.str();
}

}  // namespace hmln
