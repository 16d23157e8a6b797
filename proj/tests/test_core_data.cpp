#include <doctest.h>

#include <sstream>

#include "lrexplain/manifest.hpp"

using namespace lrexplain;

namespace {

PairRecord sample_record(const std::string& id, PairLabel label) {
  PairRecord r;
  r.pair_id = id;
  r.image_a = id + "_a";
  r.image_b = id + "_b";
  r.label = label;
  r.regime = PromptRegime::Grounded;
  r.fr_scores["KPRPE"] = 0.62;
  r.fr_decisions["KPRPE"] = Verdict::Match;
  r.explanation = "Match Verdict: match\nSimilarities: eyes\nDifferences: none";
  r.verdict = Verdict::Match;
  return r;
}

std::string to_text(const Manifest& m) {
  std::ostringstream out;
  serialize_manifest_stream(m, out);
  return out.str();
}

Manifest from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest_stream(in, "<test>");
}

}  // namespace

TEST_CASE("manifest parses two valid lines") {
  Manifest m;
  m.records.push_back(sample_record("p1", PairLabel::Genuine));
  m.records.push_back(sample_record("p2", PairLabel::Impostor));
  const auto parsed = from_text(to_text(m));
  CHECK(parsed.records.size() == 2);
  CHECK(parsed.records[0].pair_id == "p1");
  CHECK(parsed.records[1].label == PairLabel::Impostor);
}

TEST_CASE("duplicate pair_id is a validation error naming the id") {
  Manifest m;
  m.records.push_back(sample_record("p1", PairLabel::Genuine));
  auto dup = sample_record("p1", PairLabel::Impostor);
  m.records.push_back(dup);
  const std::string text = to_text(m);
  CHECK_THROWS_WITH_AS(from_text(text),
                       doctest::Contains("p1"), DataError);
}

TEST_CASE("malformed line reports its line number") {
  const std::string text =
      to_text([] {
        Manifest m;
        m.records.push_back(sample_record("p1", PairLabel::Genuine));
        return m;
      }()) +
      "{not json\n";
  CHECK_THROWS_WITH_AS(from_text(text), doctest::Contains(":2"), DataError);
}

TEST_CASE("empty manifest is rejected") {
  std::istringstream in("");
  CHECK_THROWS_AS(parse_manifest_stream(in, "<test>"), DataError);
}

TEST_CASE("fr_decisions without matching score is rejected") {
  auto r = sample_record("p1", PairLabel::Genuine);
  r.fr_decisions["ArcFace"] = Verdict::NonMatch;
  CHECK_THROWS_AS(r.validate(), DataError);
}

TEST_CASE("verdict without explanation is rejected") {
  auto r = sample_record("p1", PairLabel::Genuine);
  r.explanation.reset();
  CHECK_THROWS_AS(r.validate(), DataError);
}

TEST_CASE("manifest round-trips field-for-field") {
  Manifest m;
  auto r = sample_record("p1", PairLabel::Genuine);
  EmbeddingVector e;
  e.provider_tag = "offline-hash-512";
  e.values = {0.123456789012345678, -0.5, 1e-17, 3.0};
  r.embedding = e;
  m.records.push_back(r);
  m.records.push_back(sample_record("p2", PairLabel::Unknown));
  m.metadata["dataset"] = "unit";

  const auto round = from_text(to_text(m));
  REQUIRE(round.records.size() == 2);
  const auto& a = round.records[0];
  CHECK(a.pair_id == r.pair_id);
  CHECK(a.image_a == r.image_a);
  CHECK(a.image_b == r.image_b);
  CHECK(a.label == r.label);
  CHECK(a.regime == r.regime);
  CHECK(a.fr_scores == r.fr_scores);
  CHECK(a.fr_decisions == r.fr_decisions);
  CHECK(a.explanation == r.explanation);
  CHECK(a.verdict == r.verdict);
  REQUIRE(a.embedding.has_value());
  CHECK(a.embedding->provider_tag == e.provider_tag);
  CHECK(a.embedding->values == e.values);  // bit-exact doubles
  CHECK(round.metadata.at("dataset") == "unit");
}

TEST_CASE("verdict parsing follows the explicit verdict line") {
  CHECK(parse_verdict("Match Verdict: Match\nSimilarities: ...") ==
        Verdict::Match);
  CHECK(parse_verdict("Match Verdict: non-match") == Verdict::NonMatch);
  CHECK(parse_verdict("  match verdict :  NON_MATCH  ") == Verdict::NonMatch);
  CHECK(parse_verdict("Match Verdict: uncertain") == Verdict::Uncertain);
  CHECK(parse_verdict("**Match Verdict:** match") == Verdict::Match);
}

TEST_CASE("verdict parsing falls back to standalone tokens") {
  CHECK(parse_verdict("The faces clearly match.") == Verdict::Match);
  CHECK(parse_verdict("This is a non-match in my view.") == Verdict::NonMatch);
  CHECK(parse_verdict("I cannot determine whether these are the same person") ==
        Verdict::Uncertain);
  CHECK(parse_verdict("I am uncertain about this pair") == Verdict::Uncertain);
  // ties collapse to Uncertain
  CHECK(parse_verdict("could be a match or a non-match") == Verdict::Uncertain);
  CHECK(parse_verdict("") == Verdict::Uncertain);
}

TEST_CASE("verdict line wins over contradictory prose") {
  CHECK(parse_verdict("Match Verdict: match\nBut honestly this looks like a "
                      "non-match to me") == Verdict::Match);
}

TEST_CASE("parse_verdict is deterministic") {
  const std::string text = "Match Verdict: non-match\nDifferences: jawline";
  CHECK(parse_verdict(text) == parse_verdict(text));
}

TEST_CASE("filter_training removes uncertain and unknown records") {
  Manifest m;
  for (int i = 0; i < 10; ++i) {
    auto r = sample_record("p" + std::to_string(i), PairLabel::Genuine);
    if (i < 2) r.verdict = Verdict::Uncertain;
    m.records.push_back(r);
  }
  const auto filtered = filter_training(m);
  CHECK(filtered.manifest.records.size() == 8);
  CHECK(filtered.removed_count == 2);

  // identity case
  const auto again = filter_training(filtered.manifest);
  CHECK(again.removed_count == 0);
  CHECK(again.manifest.records.size() == 8);
}

TEST_CASE("filter_training never removes a decided record") {
  Manifest m;
  m.records.push_back(sample_record("a", PairLabel::Genuine));
  auto r = sample_record("b", PairLabel::Impostor);
  r.verdict = Verdict::NonMatch;
  m.records.push_back(r);
  const auto filtered = filter_training(m);
  CHECK(filtered.removed_count == 0);
  CHECK(filtered.manifest.records.size() == 2);
}
