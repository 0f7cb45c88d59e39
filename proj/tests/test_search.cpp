#include "doctest.h"
#include "ereval/error.hpp"
#include "ereval/search.hpp"

using namespace ereval;

namespace {

AttributeTable people() {
  AttributeTable a;
  a.add("r1", "Lutgard De Jonghe");
  a.add("r2", "Marc Jonghe");
  a.add("r3", "Ann De Vries");
  a.add("r4", "Bo Li");
  a.add("r5", "Zoë Müller");
  return a;
}

}  // namespace

TEST_CASE("OSA distance over code points") {
  CHECK(osa_distance(U"jonghe", U"jonghe") == 0);
  CHECK(osa_distance(U"jonhge", U"jonghe") == 1);
  CHECK(osa_distance(U"jonge", U"jonghe") == 1);
  CHECK(osa_distance(U"ca", U"abc") == 3);
  CHECK(osa_distance(U"", U"abc") == 3);
  CHECK(to_code_points("Zoë").size() == 3);
}

TEST_CASE("token search ranks by matched tokens then record id") {
  const TokenIndex idx(people());
  const auto hits = idx.search("De Jonghe");
  REQUIRE(hits.size() >= 3);
  CHECK(hits[0].record == "r1");
  CHECK(hits[0].matched_tokens == 2);
  CHECK(hits[1].record == "r2");
  CHECK(hits[2].record == "r3");
  CHECK(idx.vocabulary_size() > 0);
}

TEST_CASE("one-edit typo tolerance") {
  const TokenIndex idx(people());
  const auto hits = idx.search("Jonhge");
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].record == "r1");
  CHECK(hits[1].record == "r2");
  CHECK(idx.search("jnghe").size() == 2);   // deletion
  CHECK(idx.search("jongher").size() == 2); // insertion
  CHECK(idx.search("MULLER").size() == 1);  // substitution after case folding
  CHECK(idx.search("jxxghe").empty());
}

TEST_CASE("short tokens match exactly and unknown tokens match nothing") {
  const TokenIndex idx(people());
  CHECK(idx.search("li").size() == 1);
  CHECK(idx.search("la").empty());
  CHECK(idx.search("qwertyuiop").empty());
  CHECK_THROWS_AS(idx.search("   "), Error);
  CHECK(search_records(people(), "de jonghe", 1) == std::vector<std::string>{"r1"});
}
