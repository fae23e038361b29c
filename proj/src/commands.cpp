#include "hmln/commands.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "hmln/explainer.hpp"
#include "hmln/grounder.hpp"
#include "hmln/learner.hpp"
#include "hmln/log.hpp"
#include "hmln/synth.hpp"
#include "hmln/validate.hpp"

namespace hmln {

using nlohmann::json;
namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::validation: return 2;
        case ErrorKind::parse:
        case ErrorKind::io:
        case ErrorKind::normalization_empty:
        case ErrorKind::blanket_empty:
        case ErrorKind::checkpoint_incompatible:
        case ErrorKind::invalid_argument: return 3;
        case ErrorKind::size_limit:
        case ErrorKind::consistency:
        case ErrorKind::numeric: return 1;
    }
    return 1;
}

std::string diagnostic(const std::exception& e) {
    json d;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        d["error"] = to_string(err->kind());
        d["exit_code"] = exit_code_for(err->kind());
    } else {
        d["error"] = "Internal";
        d["exit_code"] = 1;
    }
    d["message"] = e.what();
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) d["line"] = pe->line();
    return d.dump();
}

namespace {

struct Inputs {
    std::vector<TrainingInstance> corpus;
    EmbeddingStore store;
    std::vector<TestInstance> tests;
};

void require_path(const fs::path& p, const char* flag) {
    if (p.empty()) throw Error(ErrorKind::invalid_argument, std::string("missing input path: ") + flag);
}

Inputs load_inputs(const RunConfig& cfg) {
    require_path(cfg.paths.corpus, "--corpus");
    require_path(cfg.paths.embeddings, "--embeddings");
    require_path(cfg.paths.test, "--test");
    Inputs in;
    in.store = load_embeddings(cfg.paths.embeddings);
    auto load = load_corpus(cfg.paths.corpus, &in.store);
    for (const auto& w : load.warnings) spdlog::warn("{}:{}: {}", cfg.paths.corpus.string(), w.line, w.message);
    load.require_valid();
    in.corpus = std::move(load.instances);
    in.tests = load_test_instances(cfg.paths.test);
    if (in.tests.empty()) throw Error(ErrorKind::invalid_argument, "test file holds no instances");
    return in;
}

struct Grounded {
    std::vector<NormalizedInstance> normalized;
    std::vector<PotentialSpec> specs;
};

Grounded ground(const Inputs& in, const TestInstance& test, const RunConfig& cfg) {
    Grounded g;
    g.normalized = normalize(in.corpus, test, {cfg.caption_index});
    g.specs = build_potentials(g.normalized);
    spdlog::info("test {}: {} normalized images, {} potentials", test.image_id, g.normalized.size(), g.specs.size());
    return g;
}

std::string file_safe(const std::string& id) {
    std::string s = id;
    for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return s;
}

json load_checkpoint(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open weight checkpoint " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError("weight checkpoint " + path.string() + " is not valid JSON: " + e.what(), 1);
    }
    if (!j.is_object() || !j.contains("models") || !j.at("models").is_array())
        throw Error(ErrorKind::validation, "weight checkpoint " + path.string() + " lacks a 'models' array");
    for (const auto& m : j.at("models")) {
        if (!m.is_object() || !m.contains("test_image") || !m.at("test_image").is_string() || !m.contains("weights"))
            throw Error(ErrorKind::validation, "weight checkpoint " + path.string() + " has a malformed model entry");
        weights_from_json(m.at("weights"));
    }
    return j;
}

WeightVector checkpoint_weights(const json& ckpt, const std::string& test_image,
                                const std::vector<LiftedSignature>& expected, double floor) {
    for (const auto& m : ckpt.at("models")) {
        if (m.at("test_image").get<std::string>() != test_image) continue;
        auto w = weights_from_json(m.at("weights"), floor);
        if (w.signatures() != expected) {
            std::set<LiftedSignature> have(w.signatures().begin(), w.signatures().end());
            std::set<LiftedSignature> want(expected.begin(), expected.end());
            std::string diff;
            for (const auto& s : want)
                if (!have.count(s)) diff += " missing " + s.str();
            for (const auto& s : have)
                if (!want.count(s)) diff += " unexpected " + s.str();
            throw Error(ErrorKind::checkpoint_incompatible,
                        "checkpoint signatures do not match the corpus for test " + test_image + ":" + diff);
        }
        return w;
    }
    throw Error(ErrorKind::checkpoint_incompatible, "checkpoint holds no weights for test " + test_image);
}

const TrainingInstance* find_image(const std::vector<TrainingInstance>& corpus, const std::string& id) {
    for (const auto& t : corpus)
        if (t.image_id == id) return &t;
    return nullptr;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << v;
    return s.str();
}

std::string markdown_report(const json& report, const Inputs& in) {
    std::ostringstream md;
    md << "# Bias report\n";
    for (const auto& inst : report.at("instances")) {
        md << "\n## Test image `" << inst.at("test_image").get<std::string>() << "`\n\n";
        md << "Caption: " << inst.at("caption").get<std::string>() << "\n\n";
        const auto& ex = inst.at("explanation");
        md << "| role | training image | score | caption |\n|---|---|---|---|\n";
        for (const char* role : {"positive", "negative", "neutral"}) {
            const auto id = ex.at(role).get<std::string>();
            const auto* img = find_image(in.corpus, id);
            md << "| " << role << " | `" << id << "` | " << fmt(ex.at("scores").at(role).get<double>()) << " | "
               << (img && !img->captions.empty() ? img->captions.front().text : "") << " |\n";
        }
        if (ex.at("degenerate").get<bool>()) md << "\nFewer than three training images: roles repeat.\n";
        md << "\nBias summary (max delta over p2 >= threshold): " << fmt(inst.at("bias_summary").get<double>())
           << "\n\n";
        md << "| potential | image | p1 | p2 | delta | class |\n|---|---|---|---|---|---|\n";
        for (const auto& b : inst.at("biases"))
            md << "| " << b.at("potential_id").get<std::size_t>() << " | `" << b.at("source_image").get<std::string>()
               << "` | " << fmt(b.at("p1").get<double>()) << " | " << fmt(b.at("p2").get<double>()) << " | "
               << fmt(b.at("delta_h").get<double>()) << " | " << b.at("classification").get<std::string>()
               << " |\n";
    }
    return md.str();
}

}  // namespace

void cmd_learn(const RunConfig& cfg) {
    cfg.validate();
    const auto in = load_inputs(cfg);
    json models = json::array();
    for (const auto& test : in.tests) {
        const auto g = ground(in, test, cfg);
        WeightVector w0(signatures_of(g.specs), cfg.learn.initial_weight, cfg.learn.floor);
        HybridModel model(featurize_all(g.specs, g.normalized, in.store, w0, cfg.hybrid));
        const auto x = observed_world(model, g.normalized);
        const auto result = learn(model, x, cfg.learn, w0);
        spdlog::info("test {}: {} iterations{}", test.image_id, result.trace.size(),
                     result.early_stopped ? " (early stop)" : "");

        json observed = json::array();
        for (std::size_t v = 0; v < model.num_vars(); ++v)
            observed.push_back({{"predicate", model.variables()[v].canonical()}, {"value", x.assignment[v]}});
        models.push_back({{"test_image", test.image_id},
                          {"weights", weights_to_json(result.weights)},
                          {"iterations", result.trace.size()},
                          {"early_stopped", result.early_stopped},
                          {"observed", observed}});
        write_atomic(cfg.paths.out / ("trace_" + file_safe(test.image_id) + ".csv"),
                     "# config " + to_json(cfg).dump() + "\n" + trace_csv(result));
    }
    const json ckpt = {{"config", to_json(cfg)}, {"models", models}};
    write_atomic(cfg.weights_path(), ckpt.dump(2) + "\n");
}

void cmd_explain(const RunConfig& cfg) {
    cfg.validate();
    const auto in = load_inputs(cfg);
    const auto ckpt = load_checkpoint(cfg.weights_path());
    json instances = json::array();
    for (const auto& test : in.tests) {
        const auto g = ground(in, test, cfg);
        const auto w = checkpoint_weights(ckpt, test.image_id, signatures_of(g.specs), cfg.learn.floor);
        HybridModel model(featurize_all(g.specs, g.normalized, in.store, w, cfg.hybrid));

        const auto scope = scope_predicates(g.specs);
        const auto reified = reify(test, scope, in.store, cfg.tau);
        const auto blanket = markov_blanket(reified, g.specs);
        const auto prior = model.subset(blanket);
        const VirtualEvidence ve =
            cfg.null_evidence ? VirtualEvidence{} : build_virtual_evidence(test, reified, in.store, cfg.hybrid);
        const auto conditioned = prior.with_evidence(ve);
        const auto run = quantify_bias(prior, conditioned, w, cfg.sampler, cfg.thresholds,
                                       cfg.clip ? WeightClipping::clipped : WeightClipping::unclipped);
        const auto explanation = select_examples(run.biases);

        json evidence = json::array();
        for (const auto& [p, psi] : ve.factors) evidence.push_back({{"predicate", p.canonical()}, {"psi", psi}});
        json potentials = json::array();
        for (const auto& fp : prior.potentials()) potentials.push_back(to_json(fp));
        json variables = json::array();
        for (const auto& p : prior.variables()) variables.push_back(p.canonical());
        json biases = json::array();
        for (const auto& b : run.biases) biases.push_back(to_json(b));

        instances.push_back(
            {{"test_image", test.image_id},
             {"caption", test.caption_text},
             {"reification", to_json(reified)},
             {"evidence", evidence},
             {"blanket", {{"potentials", potentials}, {"variables", variables}}},
             {"importance",
              {{"samples", run.marginals.samples},
               {"clipping", cfg.clip ? "clipped" : "unclipped"},
               {"weight_normalizer", run.marginals.weight_normalizer},
               {"min_effective_weight", run.marginals.min_effective_weight},
               {"max_effective_weight", run.marginals.max_effective_weight}}},
             {"biases", biases},
             {"explanation", to_json(explanation)},
             {"bias_summary", bias_summary(run.biases, cfg.thresholds.p_threshold)}});
        spdlog::info("test {}: positive {}, negative {}, neutral {}", test.image_id, explanation.positive,
                     explanation.negative, explanation.neutral);
    }
    const json report = {{"config", to_json(cfg)}, {"instances", instances}};
    write_atomic(cfg.paths.out / "report.json", report.dump(2) + "\n");
    write_atomic(cfg.paths.out / "report.md", markdown_report(report, in));
}

int cmd_validate(const RunConfig& cfg, const ValidateOptions& options, std::ostream& out) {
    const auto& checks = oracle_checks();
    if (options.list) {
        for (const auto& c : checks) out << c.name << "\t" << c.description << "\n";
        return 0;
    }
    for (const auto& name : options.only)
        if (std::none_of(checks.begin(), checks.end(), [&](const CheckInfo& c) { return c.name == name; }))
            throw Error(ErrorKind::invalid_argument, "unknown check '" + name + "'");
    cfg.validate();
    if (!cfg.paths.corpus.empty() || !cfg.paths.embeddings.empty() || !cfg.paths.test.empty()) {
        const auto in = load_inputs(cfg);
        out << "inputs: " << in.corpus.size() << " training images, " << in.store.size() << " embeddings, "
            << in.tests.size() << " test instances\n";
    }
    if (!cfg.paths.weights.empty()) {
        const auto ckpt = load_checkpoint(cfg.paths.weights);
        out << "checkpoint: " << ckpt.at("models").size() << " models\n";
    }
    bool ok = true;
    for (const auto& c : checks) {
        if (!options.only.empty() &&
            std::find(options.only.begin(), options.only.end(), c.name) == options.only.end())
            continue;
        const auto r = run_check(c.name, cfg.seed);
        ok = ok && r.passed;
        out << (r.passed ? "PASS " : "FAIL ") << r.name << "  worst=" << r.worst << "  tol=" << r.tolerance << "  "
            << r.detail << "\n";
    }
    return ok ? 0 : 2;
}

void cmd_synth(std::uint64_t seed, std::size_t size, const fs::path& dir) {
    const auto bundle = synthesize(seed, size);
    write_atomic(dir / "corpus.jsonl", serialize_corpus(bundle.corpus));
    write_atomic(dir / "embeddings.jsonl", serialize_embeddings(bundle.store));
    write_atomic(dir / "test.jsonl", serialize_test_instances(bundle.tests));
    write_atomic(dir / "planted.json", bundle.planted.dump(2) + "\n");
    const json config = {
        {"paths", {{"corpus", "corpus.jsonl"}, {"embeddings", "embeddings.jsonl"}, {"test", "test.jsonl"}, {"out", "."}}},
        {"seed", seed}};
    write_atomic(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace hmln
