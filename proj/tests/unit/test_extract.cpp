#include "doctest.h"
#include "hmln/corpus.hpp"

using hmln::extract_triples;
using hmln::GroundPredicate;
using Preds = std::vector<GroundPredicate>;

TEST_CASE("a simple verb phrase yields one triple") {
    CHECK(extract_triples("a man riding a horse") == Preds{GroundPredicate("riding", "man", "horse")});
}

TEST_CASE("empty input and a lone noun yield nothing") {
    CHECK(extract_triples("").empty());
    CHECK(extract_triples("sky").empty());
    CHECK(extract_triples("   ...  ").empty());
}

TEST_CASE("verbs attach to the caption subject, prepositions to the nearest noun") {
    const auto got = extract_triples("A man riding a horse wearing a hat");
    CHECK(got == Preds{GroundPredicate("riding", "man", "horse"), GroundPredicate("wearing", "man", "hat")});

    const auto prep = extract_triples("a cat on a mat near the door");
    CHECK(prep == Preds{GroundPredicate("on", "cat", "mat"), GroundPredicate("near", "mat", "door")});
}

TEST_CASE("consecutive relation words join and noun runs keep their head") {
    CHECK(extract_triples("a man sitting on a park bench") ==
          Preds{GroundPredicate("sitting_on", "man", "bench")});
}

TEST_CASE("relations without a target emit nothing and duplicates collapse") {
    CHECK(extract_triples("a dog running").empty());
    CHECK(extract_triples("a dog holding a ball, a dog holding a ball") ==
          Preds{GroundPredicate("holding", "dog", "ball")});
}

TEST_CASE("extraction is deterministic") {
    const char* text = "two people walking along the beach with a dog";
    CHECK(extract_triples(text) == extract_triples(text));
}
