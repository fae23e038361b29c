#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "hmln/corpus.hpp"

namespace hmln {

namespace {

constexpr std::array<std::string_view, 24> kStopWords = {
    "a",   "an",    "the",  "some", "two",   "three", "four", "several", "many", "one",  "and",  "is",
    "are", "while", "that", "this", "there", "its",   "his",  "her",     "their", "of", "very", "other"};

constexpr std::array<std::string_view, 30> kPrepositions = {
    "on",     "in",     "at",      "with",   "near",    "under",  "over",    "beside", "behind", "above",
    "below",  "inside", "outside", "by",     "next",    "to",     "against", "across", "through", "along",
    "around", "onto",   "into",    "atop",   "between", "beneath", "from",   "toward", "towards", "underneath"};

constexpr std::array<std::string_view, 16> kVerbs = {
    "holds", "holding", "rides", "sits", "stands", "wears", "eats", "carries",
    "has",   "have",    "plays", "looks", "walks", "lies",  "flies", "throws"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& words, std::string_view w) {
    return std::find(words.begin(), words.end(), w) != words.end();
}

bool is_verb(std::string_view w) {
    return contains(kVerbs, w) || (w.size() > 4 && w.substr(w.size() - 3) == "ing");
}

bool is_relation(std::string_view w) { return contains(kPrepositions, w) || is_verb(w); }

enum class TokenKind { stop, relation, noun };

struct Token {
    std::string text;
    TokenKind kind;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        TokenKind kind = contains(kStopWords, cur) ? TokenKind::stop
                         : is_relation(cur)       ? TokenKind::relation
                                                  : TokenKind::noun;
        out.push_back({cur, kind});
        cur.clear();
    };
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalpha(uc)) {
            cur.push_back(static_cast<char>(std::tolower(uc)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

}  // namespace

std::vector<GroundPredicate> extract_triples(std::string_view caption_text) {
    const auto tokens = tokenize(caption_text);

    // Collapse into a sequence of head nouns and joined relation phrases.
    struct Item {
        bool relation;
        bool verb;
        std::string text;
    };
    std::vector<Item> items;
    for (std::size_t i = 0; i < tokens.size();) {
        if (tokens[i].kind == TokenKind::stop) {
            ++i;
        } else if (tokens[i].kind == TokenKind::relation) {
            std::string phrase = tokens[i].text;
            bool verb = is_verb(tokens[i].text);
            ++i;
            while (i < tokens.size() && tokens[i].kind == TokenKind::relation) {
                phrase += "_" + tokens[i].text;
                ++i;
            }
            items.push_back({true, verb, phrase});
        } else {
            std::string head;
            while (i < tokens.size() && tokens[i].kind == TokenKind::noun) head = tokens[i++].text;
            items.push_back({false, false, head});
        }
    }

    std::vector<GroundPredicate> out;
    std::string first_noun;
    std::string last_noun;
    for (std::size_t k = 0; k < items.size(); ++k) {
        const auto& it = items[k];
        if (!it.relation) {
            if (first_noun.empty()) first_noun = it.text;
            last_noun = it.text;
            continue;
        }
        const std::string& subject = it.verb ? first_noun : last_noun;
        const std::string target = (k + 1 < items.size() && !items[k + 1].relation) ? items[k + 1].text : "";
        if (subject.empty() || target.empty()) continue;
        GroundPredicate p(it.text, subject, target);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
    return out;
}

}  // namespace hmln
