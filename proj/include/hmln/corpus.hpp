#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hmln {

/// A relation triple `symbol(subject,target)`; the binary random variable of the model.
/// Unary attributes use an empty target.
struct GroundPredicate {
    std::string symbol;
    std::string subject;
    std::string target;

    GroundPredicate() = default;
    GroundPredicate(std::string sym, std::string subj, std::string tgt = {});

    std::string canonical() const;
    bool has_object(std::string_view object) const;

    friend auto operator<=>(const GroundPredicate&, const GroundPredicate&) = default;
    friend bool operator==(const GroundPredicate&, const GroundPredicate&) = default;
};

std::string to_lower(std::string_view s);

struct Caption {
    std::string text;
    std::vector<GroundPredicate> triples;
    /// Parallel to `triples`: false when an object is not among the image's object labels.
    std::vector<bool> resolved;

    bool tripleless() const { return triples.empty(); }
    bool mentions(const GroundPredicate& p) const;
};

struct TrainingInstance {
    std::string image_id;
    std::vector<std::string> object_labels;
    std::vector<Caption> captions;
    std::string image_embedding_key;

    bool has_object(std::string_view object) const;
};

struct TestInstance {
    std::string image_id;
    std::vector<std::string> detected_objects;
    std::string caption_text;
    std::vector<GroundPredicate> caption_predicates;
    std::string image_embedding_key;
};

using Vector = std::vector<double>;

class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Inserts a vector after unit-normalizing it. Throws on dimension mismatch or zero norm.
    void add(const std::string& key, Vector vec);
    void add_word_similarity(const std::string& w1, const std::string& w2, double sim);

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    /// Throws a validation error naming the key when absent.
    const Vector& at(const std::string& key) const;
    const Vector* find(const std::string& key) const;

    /// Identical words have similarity 1; pairs absent from the table yield nullopt.
    std::optional<double> word_similarity(const std::string& w1, const std::string& w2) const;

    const std::map<std::string, Vector>& entries() const noexcept { return entries_; }
    const std::map<std::pair<std::string, std::string>, double>& word_sims() const noexcept {
        return word_sims_;
    }

private:
    std::size_t dim_ = 0;
    std::map<std::string, Vector> entries_;
    std::map<std::pair<std::string, std::string>, double> word_sims_;
};

/// Embedding key holding the text embedding of a predicate.
inline std::string predicate_key(const GroundPredicate& p) { return p.canonical(); }

struct LoadIssue {
    std::size_t line;
    std::string message;
};

struct CorpusLoad {
    std::vector<TrainingInstance> instances;
    std::vector<LoadIssue> issues;    // invariant violations; the instance is not returned
    std::vector<LoadIssue> warnings;  // accepted with a flag (e.g. tripleless caption)

    /// Throws a validation error listing every issue.
    void require_valid() const;
};

/// Parses a JSONL corpus. Malformed JSON throws ParseError with the 1-based line number.
/// When `store` is given, every `embedding_key` must resolve in it.
CorpusLoad load_corpus(const std::filesystem::path& path, const EmbeddingStore* store = nullptr);
CorpusLoad parse_corpus(std::string_view text, const EmbeddingStore* store = nullptr);

EmbeddingStore load_embeddings(const std::filesystem::path& path);
EmbeddingStore parse_embeddings(std::string_view text);

std::vector<TestInstance> load_test_instances(const std::filesystem::path& path);
std::vector<TestInstance> parse_test_instances(std::string_view text);

nlohmann::json to_json(const GroundPredicate& p);
nlohmann::json to_json(const TrainingInstance& inst);
nlohmann::json to_json(const TestInstance& inst);
std::string serialize_corpus(std::span<const TrainingInstance> corpus);
std::string serialize_test_instances(std::span<const TestInstance> tests);
std::string serialize_embeddings(const EmbeddingStore& store);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// 1 - cosine similarity; in [0, 2] for unit inputs.
double embedding_distance(std::span<const double> a, std::span<const double> b);

/// Heuristic relation extraction used when a caption arrives without triples.
///
/// Rules, applied to the lowercased alphabetic tokens:
///  - stop words (articles, quantifiers, conjunctions, copulas) are dropped but end a noun run;
///  - a relation word is a bundled preposition, a bundled verb, or any token of length > 4
///    ending in "ing"; consecutive relation words join with '_' ("sitting_on");
///  - every other token is a noun; a noun run's head is its last token;
///  - a verb relation takes the first head noun of the caption as subject, a prepositional
///    relation takes the nearest preceding head noun; the target is the next head noun;
///  - a relation lacking a subject or a target emits nothing, so a lone noun yields no triple.
std::vector<GroundPredicate> extract_triples(std::string_view caption_text);

}  // namespace hmln
