#pragma once

#include <string>
#include <vector>

#include "hmln/model.hpp"
#include "oracle.hpp"

namespace testing_support {

struct Edge {
    hmln::GroundPredicate x1;
    hmln::GroundPredicate x2;
    double g1;
    double g2;
    std::string image = "img";
};

inline hmln::PotentialSpec spec_of(std::size_t id, const Edge& e) {
    hmln::PotentialSpec s;
    s.id = id;
    s.source_image = e.image;
    s.x1 = e.x1;
    s.x2 = e.x2;
    s.shared_object = e.x1.subject;
    s.signature = hmln::LiftedSignature::of(e.x1.symbol, e.x2.symbol);
    return s;
}

struct Built {
    hmln::HybridModel model;
    hmln::WeightVector weights;
};

/// Model over the given edges with every signature weighted `w`.
inline Built build(const std::vector<Edge>& edges, double w = 1.0, const hmln::HybridParams& params = {}) {
    std::vector<hmln::PotentialSpec> specs;
    for (std::size_t i = 0; i < edges.size(); ++i) specs.push_back(spec_of(i, edges[i]));
    hmln::WeightVector weights(hmln::signatures_of(specs), w);
    std::vector<hmln::FeaturizedPotential> fps;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        fps.push_back(hmln::featurize(specs[i], edges[i].g1, edges[i].g2, weights.index_of(specs[i].signature),
                                      params));
        hmln::refresh_table(fps.back(), weights);
    }
    return {hmln::HybridModel(std::move(fps)), weights};
}

/// The oracle's view of a compiled library model, rebuilt from g-values and weights by hand.
inline oracle::Model oracle_of(const hmln::HybridModel& m, const hmln::WeightVector& w, double eps = 0.7,
                               double a = 1.0) {
    oracle::Model om;
    om.n = m.num_vars();
    for (std::size_t k = 0; k < m.potentials().size(); ++k) {
        const auto& fp = m.potentials()[k];
        oracle::Factor f{m.index_of(fp.spec.x1), m.index_of(fp.spec.x2), {}};
        oracle::hybrid_table(w[fp.weight_ref], fp.g1, fp.g2, eps, a, f.table);
        om.factors.push_back(f);
    }
    return om;
}

inline hmln::World world_of(const std::vector<int>& x) { return hmln::World(x.begin(), x.end()); }

}  // namespace testing_support
