#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hmln/commands.hpp"
#include "hmln/corpus.hpp"
#include "hmln/error.hpp"
#include "hmln/synth.hpp"
#include "hmln/validate.hpp"

using namespace hmln;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("synthetic bundles are seed deterministic") {
    const auto a = synthesize(3, 6), b = synthesize(3, 6), c = synthesize(4, 6);
    CHECK(serialize_corpus(a.corpus) == serialize_corpus(b.corpus));
    CHECK(serialize_embeddings(a.store) == serialize_embeddings(b.store));
    CHECK(a.planted == b.planted);
    CHECK(serialize_embeddings(a.store) != serialize_embeddings(c.store));
    CHECK(a.corpus.size() == 6);
    REQUIRE(a.tests.size() == 1);
}

TEST_CASE("planted roles name distinct corpus images") {
    const auto s = synthesize(9, 5);
    CHECK_FALSE(s.planted.at("degenerate").get<bool>());
    std::set<std::string> ids;
    for (const auto& t : s.corpus) ids.insert(t.image_id);
    std::set<std::string> roles;
    for (const char* r : {"positive", "negative", "neutral"}) {
        const auto id = s.planted.at(r).get<std::string>();
        CHECK(ids.count(id) == 1);
        roles.insert(id);
    }
    CHECK(roles.size() == 3);
}

TEST_CASE("a single-image bundle is marked degenerate and size zero is rejected") {
    const auto s = synthesize(1, 1);
    CHECK(s.corpus.size() == 1);
    CHECK(s.planted.at("degenerate").get<bool>());
    CHECK_THROWS_AS(synthesize(1, 0), Error);
}

TEST_CASE("synthetic embeddings hit their planted cosines") {
    const auto s = synthesize(2, 3);
    const GroundPredicate riding("riding", "man", "horse");
    const auto& test = s.tests[0];
    const double d = cosine_similarity(s.store.at(test.image_embedding_key), s.store.at(predicate_key(riding)));
    CHECK(d == doctest::Approx(0.95).epsilon(0.03));
    const auto pos = s.planted.at("positive").get<std::string>();
    CHECK(cosine_similarity(s.store.at(pos), s.store.at(predicate_key(riding))) == doctest::Approx(0.9).epsilon(0.03));
}

TEST_CASE("random fixtures respect their options") {
    RandomModelOptions o;
    o.min_vars = 5;
    o.max_vars = 7;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto fx = random_fixture(seed, o);
        CHECK(fx.model.num_vars() >= 5);
        CHECK(fx.model.num_vars() <= 7);
        CHECK(fx.model.potentials().size() >= fx.model.num_vars() - 1);
        for (std::size_t i = 0; i < fx.weights.size(); ++i) {
            CHECK(fx.weights[i] >= o.min_weight);
            CHECK(fx.weights[i] <= o.max_weight);
        }
        const auto ve = random_evidence(seed, fx.model);
        CHECK_FALSE(ve.factors.empty());
        for (const auto& [p, psi] : ve.factors) CHECK(psi >= 1.2);
    }
    o.min_vars = 1;
    CHECK_THROWS_AS(random_fixture(0, o), Error);
}

TEST_CASE("oracle checks are listed and unknown names are rejected") {
    const auto& checks = oracle_checks();
    CHECK(checks.size() == 6);
    std::ostringstream out;
    CHECK(cmd_validate(RunConfig{}, ValidateOptions{true, {}}, out) == 0);
    CHECK(out.str().find("gibbs_vs_exact\t") != std::string::npos);
    CHECK_THROWS_AS(run_check("nope"), Error);
    std::ostringstream ignored;
    CHECK_THROWS_AS(cmd_validate(RunConfig{}, ValidateOptions{false, {"nope"}}, ignored), Error);
}

TEST_CASE("cheap oracle checks pass") {
    for (const char* name : {"null_evidence", "gaussian_identity", "propriety"}) {
        const auto r = run_check(name);
        CHECK_MESSAGE(r.passed, name << " worst=" << r.worst);
    }
    std::ostringstream out;
    CHECK(cmd_validate(RunConfig{}, ValidateOptions{false, {"gaussian_identity"}}, out) == 0);
    CHECK(out.str().rfind("PASS gaussian_identity", 0) == 0);
}

TEST_CASE("exit codes and diagnostics") {
    CHECK(exit_code_for(ErrorKind::validation) == 2);
    CHECK(exit_code_for(ErrorKind::parse) == 3);
    CHECK(exit_code_for(ErrorKind::normalization_empty) == 3);
    CHECK(exit_code_for(ErrorKind::checkpoint_incompatible) == 3);
    CHECK(exit_code_for(ErrorKind::size_limit) == 1);
    CHECK(exit_code_for(ErrorKind::numeric) == 1);

    const auto d = nlohmann::json::parse(diagnostic(ParseError("bad line", 4)));
    CHECK(d.at("error") == "ParseError");
    CHECK(d.at("exit_code") == 3);
    CHECK(d.at("line") == 4);
    const auto other = nlohmann::json::parse(diagnostic(std::runtime_error("boom")));
    CHECK(other.at("exit_code") == 1);
    CHECK_FALSE(other.contains("line"));
}

TEST_CASE("atomic writes replace the target and leave no temp file") {
    const auto dir = std::filesystem::temp_directory_path() / "hmln_atomic_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_atomic(dir / "f.txt", "one");
    write_atomic(dir / "f.txt", "two");
    CHECK(slurp(dir / "f.txt") == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
}

TEST_CASE("synth writes a loadable bundle") {
    const auto dir = std::filesystem::temp_directory_path() / "hmln_synth_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    cmd_synth(5, 4, dir);
    const auto cfg = load_config(dir / "config.json");
    CHECK(cfg.seed == 5);
    const auto store = load_embeddings(cfg.paths.embeddings);
    const auto corpus = load_corpus(cfg.paths.corpus, &store);
    CHECK(corpus.issues.empty());
    CHECK(corpus.instances.size() == 4);
    CHECK(load_test_instances(cfg.paths.test).size() == 1);
}
