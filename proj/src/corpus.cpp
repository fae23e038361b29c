#include "hmln/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hmln/error.hpp"
#include "hmln/log.hpp"

namespace hmln {

using nlohmann::json;

namespace {

// Lowercase, trim, and replace characters that would break the canonical form.
std::string normalize_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (char c : raw) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc) || c == ',' || c == '(' || c == ')') {
            pending_sep = !out.empty();
            continue;
        }
        if (pending_sep) {
            out.push_back('_');
            pending_sep = false;
        }
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const bool blank = std::all_of(line.begin(), line.end(),
                                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        if (!blank) fn(line_no, line);
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
}

json parse_line(std::string_view line, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what(), line_no);
    }
}

GroundPredicate triple_from_json(const json& j) {
    if (!j.is_array() || j.size() < 2 || j.size() > 3)
        throw std::invalid_argument("triple must be [symbol, subject, target]");
    for (const auto& part : j)
        if (!part.is_string()) throw std::invalid_argument("triple entries must be strings");
    GroundPredicate p(j[0].get<std::string>(), j[1].get<std::string>(),
                      j.size() == 3 ? j[2].get<std::string>() : std::string{});
    if (p.symbol.empty()) throw std::invalid_argument("triple symbol is empty");
    if (p.subject.empty()) throw std::invalid_argument("triple subject is empty");
    return p;
}

std::vector<std::string> string_array(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_array())
        throw std::invalid_argument(std::string("missing array field '") + field + "'");
    std::vector<std::string> out;
    for (const auto& v : j.at(field)) {
        if (!v.is_string()) throw std::invalid_argument(std::string("field '") + field + "' must hold strings");
        out.push_back(to_lower(v.get<std::string>()));
    }
    return out;
}

std::string string_field(const json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string())
        throw std::invalid_argument(std::string("missing string field '") + field + "'");
    return j.at(field).get<std::string>();
}

}  // namespace

GroundPredicate::GroundPredicate(std::string sym, std::string subj, std::string tgt)
    : symbol(normalize_name(sym)), subject(normalize_name(subj)), target(normalize_name(tgt)) {}

std::string GroundPredicate::canonical() const { return symbol + "(" + subject + "," + target + ")"; }

bool GroundPredicate::has_object(std::string_view object) const {
    return !object.empty() && (subject == object || target == object);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool Caption::mentions(const GroundPredicate& p) const {
    return std::find(triples.begin(), triples.end(), p) != triples.end();
}

bool TrainingInstance::has_object(std::string_view object) const {
    return std::find(object_labels.begin(), object_labels.end(), object) != object_labels.end();
}

// ---------------------------------------------------------------------------
// Embedding store

void EmbeddingStore::add(const std::string& key, Vector vec) {
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_)
        throw Error(ErrorKind::validation, "embedding '" + key + "' has dimension " +
                                               std::to_string(vec.size()) + ", expected " +
                                               std::to_string(dim_));
    const double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw Error(ErrorKind::validation, "embedding '" + key + "' has zero or non-finite norm");
    if (std::abs(norm - 1.0) > 1e-12)
        for (auto& v : vec) v /= norm;
    entries_[key] = std::move(vec);
}

void EmbeddingStore::add_word_similarity(const std::string& w1, const std::string& w2, double sim) {
    if (!(sim >= -1.0 && sim <= 1.0))
        throw Error(ErrorKind::validation, "word similarity for (" + w1 + ", " + w2 + ") outside [-1, 1]");
    auto a = normalize_name(w1);
    auto b = normalize_name(w2);
    if (b < a) std::swap(a, b);
    word_sims_[{a, b}] = sim;
}

const Vector& EmbeddingStore::at(const std::string& key) const {
    if (const auto* v = find(key)) return *v;
    throw Error(ErrorKind::validation, "missing embedding key '" + key + "'");
}

const Vector* EmbeddingStore::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<double> EmbeddingStore::word_similarity(const std::string& w1, const std::string& w2) const {
    if (w1 == w2) return 1.0;
    auto key = w1 < w2 ? std::make_pair(w1, w2) : std::make_pair(w2, w1);
    auto it = word_sims_.find(key);
    if (it == word_sims_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Loading

void CorpusLoad::require_valid() const {
    if (issues.empty()) return;
    std::string msg = "corpus failed validation:";
    for (const auto& issue : issues) msg += "\n  line " + std::to_string(issue.line) + ": " + issue.message;
    throw Error(ErrorKind::validation, msg);
}

CorpusLoad parse_corpus(std::string_view text, const EmbeddingStore* store) {
    CorpusLoad out;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const json j = parse_line(line, line_no);
        try {
            if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
            TrainingInstance inst;
            inst.image_id = string_field(j, "image_id");
            if (inst.image_id.empty()) throw std::invalid_argument("image_id is empty");
            inst.object_labels = string_array(j, "objects");
            inst.image_embedding_key = string_field(j, "embedding_key");
            if (!j.contains("captions") || !j.at("captions").is_array() || j.at("captions").empty())
                throw std::invalid_argument("at least one caption is required");
            for (const auto& cj : j.at("captions")) {
                Caption cap;
                cap.text = cj.value("text", std::string{});
                if (cj.contains("triples")) {
                    for (const auto& tj : cj.at("triples")) {
                        auto p = triple_from_json(tj);
                        const bool resolved =
                            inst.has_object(p.subject) && (p.target.empty() || inst.has_object(p.target));
                        cap.triples.push_back(std::move(p));
                        cap.resolved.push_back(resolved);
                    }
                }
                if (cap.tripleless())
                    out.warnings.push_back({line_no, "image '" + inst.image_id + "' caption " +
                                                         std::to_string(inst.captions.size()) +
                                                         " has no triples"});
                inst.captions.push_back(std::move(cap));
            }
            if (store && !store->contains(inst.image_embedding_key))
                throw std::invalid_argument("missing embedding key '" + inst.image_embedding_key + "'");
            out.instances.push_back(std::move(inst));
        } catch (const std::exception& e) {
            out.issues.push_back({line_no, e.what()});
        }
    });
    if (out.instances.empty() && out.issues.empty()) {
        out.warnings.push_back({0, "corpus is empty"});
        spdlog::warn("corpus is empty");
    }
    for (const auto& w : out.warnings)
        if (w.line != 0) spdlog::debug("line {}: {}", w.line, w.message);
    return out;
}

CorpusLoad load_corpus(const std::filesystem::path& path, const EmbeddingStore* store) {
    return parse_corpus(read_file(path), store);
}

EmbeddingStore parse_embeddings(std::string_view text) {
    EmbeddingStore store;
    bool have_header = false;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const json j = parse_line(line, line_no);
        const auto fail = [&](const std::string& msg) {
            throw Error(ErrorKind::validation, "embeddings line " + std::to_string(line_no) + ": " + msg);
        };
        if (!j.is_object()) fail("record must be a JSON object");
        if (!have_header) {
            if (!j.contains("dim") || !j.at("dim").is_number_integer() || j.at("dim").get<long>() <= 0)
                fail("first record must be a header {\"dim\": int}");
            store = EmbeddingStore(j.at("dim").get<std::size_t>());
            have_header = true;
            return;
        }
        if (j.contains("key")) {
            if (!j.contains("vec") || !j.at("vec").is_array()) fail("vector record lacks 'vec'");
            Vector v;
            for (const auto& x : j.at("vec")) {
                if (!x.is_number()) fail("non-numeric vector entry");
                v.push_back(x.get<double>());
            }
            try {
                store.add(j.at("key").get<std::string>(), std::move(v));
            } catch (const Error& e) {
                fail(e.what());
            }
        } else if (j.contains("pair")) {
            const auto& pr = j.at("pair");
            if (!pr.is_array() || pr.size() != 2 || !j.contains("sim") || !j.at("sim").is_number())
                fail("similarity record must be {\"pair\": [w1, w2], \"sim\": float}");
            try {
                store.add_word_similarity(pr[0].get<std::string>(), pr[1].get<std::string>(),
                                          j.at("sim").get<double>());
            } catch (const Error& e) {
                fail(e.what());
            }
        } else {
            fail("unrecognized record");
        }
    });
    if (!have_header) throw Error(ErrorKind::validation, "embedding store lacks a {\"dim\"} header");
    return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) { return parse_embeddings(read_file(path)); }

std::vector<TestInstance> parse_test_instances(std::string_view text) {
    std::vector<TestInstance> out;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const json j = parse_line(line, line_no);
        try {
            TestInstance t;
            t.image_id = string_field(j, "image_id");
            t.detected_objects = string_array(j, "detected_objects");
            t.image_embedding_key = string_field(j, "embedding_key");
            t.caption_text = j.value("caption", std::string{});
            if (j.contains("triples")) {
                for (const auto& tj : j.at("triples")) t.caption_predicates.push_back(triple_from_json(tj));
            } else {
                t.caption_predicates = extract_triples(t.caption_text);
            }
            if (t.detected_objects.empty()) throw std::invalid_argument("detected_objects is empty");
            out.push_back(std::move(t));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::validation, "test line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return out;
}

std::vector<TestInstance> load_test_instances(const std::filesystem::path& path) {
    return parse_test_instances(read_file(path));
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const GroundPredicate& p) { return json::array({p.symbol, p.subject, p.target}); }

json to_json(const TrainingInstance& inst) {
    json caps = json::array();
    for (const auto& c : inst.captions) {
        json triples = json::array();
        for (const auto& t : c.triples) triples.push_back(to_json(t));
        caps.push_back({{"text", c.text}, {"triples", triples}});
    }
    return {{"image_id", inst.image_id},
            {"objects", inst.object_labels},
            {"captions", caps},
            {"embedding_key", inst.image_embedding_key}};
}

json to_json(const TestInstance& t) {
    json triples = json::array();
    for (const auto& p : t.caption_predicates) triples.push_back(to_json(p));
    return {{"image_id", t.image_id},
            {"detected_objects", t.detected_objects},
            {"caption", t.caption_text},
            {"triples", triples},
            {"embedding_key", t.image_embedding_key}};
}

std::string serialize_corpus(std::span<const TrainingInstance> corpus) {
    std::string out;
    for (const auto& inst : corpus) out += to_json(inst).dump() + "\n";
    return out;
}

std::string serialize_test_instances(std::span<const TestInstance> tests) {
    std::string out;
    for (const auto& t : tests) out += to_json(t).dump() + "\n";
    return out;
}

std::string serialize_embeddings(const EmbeddingStore& store) {
    std::string out = json{{"dim", store.dim()}}.dump() + "\n";
    for (const auto& [key, vec] : store.entries()) out += json{{"key", key}, {"vec", vec}}.dump() + "\n";
    for (const auto& [pair, sim] : store.word_sims())
        out += json{{"pair", {pair.first, pair.second}}, {"sim", sim}}.dump() + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Similarity

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::invalid_argument, "cosine_similarity: dimension mismatch (" +
                                                     std::to_string(a.size()) + " vs " +
                                                     std::to_string(b.size()) + ")");
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    return std::clamp(dot, -1.0, 1.0);
}

double embedding_distance(std::span<const double> a, std::span<const double> b) {
    return 1.0 - cosine_similarity(a, b);
}

}  // namespace hmln
