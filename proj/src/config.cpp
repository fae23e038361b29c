#include "hmln/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hmln/error.hpp"

namespace hmln {

using nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::apply_seed(std::uint64_t s) {
    seed = s;
    learn.seed = s;
    sampler.seed = s;
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::validation, "config: " + what);
}

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

/// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        require(j.is_object(), name_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::validation, "config: " + field(key) + " has the wrong type");
        }
    }

    void get_size(const char* key, std::size_t& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const auto& v = j_.at(key);
        require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                field(key) + " must be a non-negative integer");
        out = v.get<std::size_t>();
    }

    void get_path(const char* key, fs::path& out, const fs::path& base) {
        std::string s;
        get(key, s);
        if (j_.contains(key)) out = (base.empty() || fs::path(s).is_absolute()) ? fs::path(s) : base / s;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            require(seen_.count(k) != 0, "unknown field " + field(k.c_str()));
    }

private:
    std::string field(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

ScanOrder parse_scan(const std::string& s) {
    if (s == "systematic") return ScanOrder::systematic;
    if (s == "random") return ScanOrder::random;
    throw Error(ErrorKind::validation, "config: sampler.scan must be \"systematic\" or \"random\"");
}

CdInit parse_init(const std::string& s) {
    if (s == "data") return CdInit::data;
    if (s == "persistent") return CdInit::persistent;
    throw Error(ErrorKind::validation, "config: learn.init must be \"data\" or \"persistent\"");
}

}  // namespace

void RunConfig::validate() const {
    require(hybrid.softness > 0.0, "softness must be positive");
    require(std::isfinite(hybrid.epsilon), "epsilon must be finite");
    require(open_unit(tau), "tau must lie in (0, 1)");
    require(open_unit(thresholds.t_delta), "thresholds.t_delta must lie in (0, 1)");
    require(open_unit(thresholds.t_p), "thresholds.t_p must lie in (0, 1)");
    require(thresholds.p_threshold >= 0.0 && thresholds.p_threshold <= 1.0,
            "thresholds.p_threshold must lie in [0, 1]");
    require(learn.learning_rate > 0.0, "learn.learning_rate must be positive");
    require(learn.floor > 0.0, "learn.floor must be positive");
    require(learn.initial_weight > 0.0, "learn.initial_weight must be positive");
    require(learn.cd_samples >= 1, "learn.cd_samples must be >= 1");
    require(learn.early_stop_tol >= 0.0, "learn.early_stop_tol must be >= 0");
    require(sampler.samples >= 1, "sampler.samples must be >= 1");
    require(sampler.thinning >= 1, "sampler.thinning must be >= 1");
}

fs::path RunConfig::weights_path() const { return paths.weights.empty() ? paths.out / "weights.json" : paths.weights; }

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
    RunConfig cfg;
    Section top(j, "");

    if (const json* p = top.child("paths")) {
        Section s(*p, "paths");
        s.get_path("corpus", cfg.paths.corpus, base_dir);
        s.get_path("embeddings", cfg.paths.embeddings, base_dir);
        s.get_path("test", cfg.paths.test, base_dir);
        s.get_path("out", cfg.paths.out, base_dir);
        s.get_path("weights", cfg.paths.weights, base_dir);
        s.finish();
    }
    top.get("epsilon", cfg.hybrid.epsilon);
    top.get("softness", cfg.hybrid.softness);
    top.get("tau", cfg.tau);
    top.get_size("caption_index", cfg.caption_index);
    top.get("clip", cfg.clip);
    top.get("null_evidence", cfg.null_evidence);

    if (const json* t = top.child("thresholds")) {
        Section s(*t, "thresholds");
        s.get("t_delta", cfg.thresholds.t_delta);
        s.get("t_p", cfg.thresholds.t_p);
        s.get("p_threshold", cfg.thresholds.p_threshold);
        s.finish();
    }
    if (const json* l = top.child("learn")) {
        Section s(*l, "learn");
        s.get("learning_rate", cfg.learn.learning_rate);
        s.get_size("iterations", cfg.learn.iterations);
        s.get_size("cd_samples", cfg.learn.cd_samples);
        s.get_size("cd_sweeps", cfg.learn.cd_sweeps);
        s.get("initial_weight", cfg.learn.initial_weight);
        s.get("floor", cfg.learn.floor);
        s.get("early_stop_tol", cfg.learn.early_stop_tol);
        s.get_size("patience", cfg.learn.early_stop_patience);
        std::string init = "data";
        s.get("init", init);
        cfg.learn.init = parse_init(init);
        s.finish();
    }
    if (const json* sm = top.child("sampler")) {
        Section s(*sm, "sampler");
        s.get_size("burn_in", cfg.sampler.burn_in);
        s.get_size("thinning", cfg.sampler.thinning);
        s.get_size("samples", cfg.sampler.samples);
        std::string scan = "systematic";
        s.get("scan", scan);
        cfg.sampler.scan = parse_scan(scan);
        s.finish();
    }
    std::uint64_t seed = cfg.seed;
    top.get("seed", seed);
    top.finish();
    cfg.apply_seed(seed);
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path.string() + ": " + e.what(), 1);
    }
    return config_from_json(j, path.parent_path());
}

json to_json(const SamplerConfig& cfg) {
    return {{"seed", cfg.seed},
            {"burn_in", cfg.burn_in},
            {"thinning", cfg.thinning},
            {"samples", cfg.samples},
            {"scan", cfg.scan == ScanOrder::systematic ? "systematic" : "random"}};
}

json to_json(const LearnConfig& cfg) {
    return {{"learning_rate", cfg.learning_rate},
            {"iterations", cfg.iterations},
            {"cd_samples", cfg.cd_samples},
            {"cd_sweeps", cfg.cd_sweeps},
            {"initial_weight", cfg.initial_weight},
            {"floor", cfg.floor},
            {"early_stop_tol", cfg.early_stop_tol},
            {"patience", cfg.early_stop_patience},
            {"init", cfg.init == CdInit::data ? "data" : "persistent"}};
}

json to_json(const RunConfig& cfg) {
    return {{"paths",
             {{"corpus", cfg.paths.corpus.generic_string()},
              {"embeddings", cfg.paths.embeddings.generic_string()},
              {"test", cfg.paths.test.generic_string()},
              {"out", cfg.paths.out.generic_string()},
              {"weights", cfg.weights_path().generic_string()}}},
            {"epsilon", cfg.hybrid.epsilon},
            {"softness", cfg.hybrid.softness},
            {"tau", cfg.tau},
            {"caption_index", cfg.caption_index},
            {"clip", cfg.clip},
            {"null_evidence", cfg.null_evidence},
            {"thresholds",
             {{"t_delta", cfg.thresholds.t_delta},
              {"t_p", cfg.thresholds.t_p},
              {"p_threshold", cfg.thresholds.p_threshold}}},
            {"learn", to_json(cfg.learn)},
            {"sampler", to_json(cfg.sampler)},
            {"seed", cfg.seed}};
}

}  // namespace hmln
