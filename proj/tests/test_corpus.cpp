#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "sarplan/corpus.hpp"
#include "sarplan/error.hpp"
#include "sarplan/geo.hpp"
#include "sarplan/synth.hpp"

using namespace sarplan;
using corpus::Case;
using corpus::Corpus;
using corpus::Report;
using corpus::Status;

namespace {

Case make_case(std::string id, std::vector<Report> reports) {
  Case c;
  c.case_id = std::move(id);
  c.reports = std::move(reports);
  return c;
}

bool message_contains(const ValidationError& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("corpus JSON round trip preserves every field") {
  Corpus c;
  Case a = make_case("zulu", {{"w1", {34.1, -111.4}, Status::kAlive}, {"w2", {34.2, -111.6}, {}}});
  a.found_location = geo::GeoPoint{34.05, -111.45};
  a.found_status = Status::kDeceased;
  a.meta.age = 27.0;
  a.meta.gender = corpus::Gender::kFemale;
  a.meta.reason = corpus::Reason::kDrowning;
  a.meta.region = corpus::Region::kWest;
  Case b = make_case("alpha", {{"w1", {33.9, -111.2}, {}}});
  b.found_status = Status::kAlive;  // status known, location not
  c.cases = {a, b};

  const Corpus back = corpus::parse_corpus(corpus::corpus_to_json(c));
  REQUIRE(back.cases.size() == 2);
  CHECK(back.cases[0].case_id == "alpha");  // parse sorts by id
  CHECK(back.cases[1] == a);
  CHECK(back.cases[0] == b);
  CHECK(back.find("zulu") != nullptr);
  CHECK(back.find("missing") == nullptr);
}

TEST_CASE("parse_corpus rejects malformed corpora with located errors") {
  auto parse_fails_with = [](const std::string& text, const std::string& needle) {
    try {
      corpus::parse_corpus(text, false, "test.json");
      FAIL_CHECK("expected ValidationError for: " << needle);
    } catch (const ValidationError& e) {
      CHECK_MESSAGE(message_contains(e, needle), e.what());
    }
  };

  parse_fails_with("{", "not valid JSON");
  parse_fails_with(R"([])", "top level");
  parse_fails_with(R"({"cases": [{"reports": []}]})", "case_id");
  parse_fails_with(R"({"cases": [{"case_id": "a", "reports": []}]})", "at least one report");
  parse_fails_with(
      R"({"cases": [{"case_id": "a", "reports": [{"observer": "w", "lat": 95, "lon": 0}]}]})",
      "lat");
  parse_fails_with(
      R"({"cases": [{"case_id": "a", "reports": [{"observer": "w", "lon": 0}]}]})",
      "missing field 'lat'");
  parse_fails_with(
      R"({"cases": [
            {"case_id": "a", "reports": [{"observer": "w", "lat": 34, "lon": -111}]},
            {"case_id": "a", "reports": [{"observer": "w", "lat": 34, "lon": -111}]}]})",
      "duplicate case_id");
  parse_fails_with(
      R"({"cases": [{"case_id": "a", "reports": [
            {"observer": "w", "lat": 34, "lon": -111},
            {"observer": "w", "lat": 34.1, "lon": -111}]}]})",
      "reported twice");
  parse_fails_with(
      R"({"cases": [{"case_id": "a", "found": {"lat": 34},
                     "reports": [{"observer": "w", "lat": 34, "lon": -111}]}]})",
      "lat/lon must appear together");
  parse_fails_with(
      R"({"cases": [{"case_id": "a", "found": {"status": "missing"},
                     "reports": [{"observer": "w", "lat": 34, "lon": -111}]}]})",
      "unknown value");
  parse_fails_with(
      R"({"cases": [{"case_id": "a", "meta": {"age": -3},
                     "reports": [{"observer": "w", "lat": 34, "lon": -111}]}]})",
      "age");
}

TEST_CASE("strict parsing rejects unknown fields that lax parsing warns about") {
  const std::string text =
      R"({"cases": [{"case_id": "a", "surprise": 1,
                     "reports": [{"observer": "w", "lat": 34, "lon": -111}]}]})";
  CHECK_NOTHROW(corpus::parse_corpus(text, false));
  CHECK_THROWS_AS(corpus::parse_corpus(text, true), ValidationError);
}

TEST_CASE("report error distance recovers a planted planar offset") {
  Case c = make_case("a", {});
  c.found_location = geo::GeoPoint{34.0, -111.5};
  // Place the report exactly 3 miles east of the found location.
  const geo::GeoPoint east = geo::unproject({3.0, 0.0}, *c.found_location);
  c.reports.push_back({"w", east, {}});
  CHECK(corpus::report_error_distance(c, c.reports[0]) == doctest::Approx(3.0).epsilon(1e-12));

  Case unlocated = make_case("b", {{"w", {34.0, -111.5}, {}}});
  CHECK_THROWS_AS(corpus::report_error_distance(unlocated, unlocated.reports[0]),
                  ValidationError);
}

TEST_CASE("observer histories count located cases and participation") {
  // Four located cases, one unlocated. "a" joins two located plus the
  // unlocated one; "b" joins every located case.
  Corpus c;
  const geo::GeoPoint f{34.0, -111.5};
  for (int i = 0; i < 4; ++i) {
    Case cs = make_case("c" + std::to_string(i), {{"b", geo::unproject({1.0, 0.0}, f), {}}});
    cs.found_location = f;
    if (i < 2) cs.reports.push_back({"a", geo::unproject({0.0, 2.0}, f), {}});
    c.cases.push_back(cs);
  }
  c.cases.push_back(make_case("u", {{"a", {34.0, -111.5}, {}}}));
  corpus::validate(c);

  const auto all = corpus::all_observer_histories(c);
  REQUIRE(all.size() == 2);
  CHECK(all.at("a").n() == 2);
  CHECK(all.at("b").n() == 4);
  CHECK(all.at("a").eta == doctest::Approx(0.5));
  CHECK(all.at("b").eta == doctest::Approx(1.0));
  for (const auto& [id, d] : all.at("a").pairs) CHECK(d == doctest::Approx(2.0).epsilon(1e-12));

  SUBCASE("unlocated cases can count toward participation") {
    corpus::HistoryOptions opt;
    opt.include_unlocated_in_eta = true;
    const auto h = corpus::observer_history(c, "a", opt);
    CHECK(h.eta == doctest::Approx(3.0 / 5.0));
  }
  SUBCASE("history sizes add up to the located report count") {
    size_t total = 0;
    for (const auto& [id, h] : all) total += h.n();
    CHECK(total == 6);  // 4 from "b", 2 from "a"
  }
  SUBCASE("unknown observers raise NotFoundError") {
    CHECK_THROWS_AS(corpus::observer_history(c, "nobody"), NotFoundError);
  }
  SUBCASE("pooled history concatenates everyone at full participation") {
    const auto pooled = corpus::pooled_history(c);
    CHECK(pooled.observer_id == "(pooled)");
    CHECK(pooled.n() == 6);
    CHECK(pooled.eta == 1.0);
  }
}

TEST_CASE("corpus_stats buckets statuses, genders and ages") {
  Corpus c;
  const geo::GeoPoint f{34.0, -111.5};
  const double ages[] = {12.0, 13.0, 30.0, 31.0};
  for (int i = 0; i < 4; ++i) {
    Case cs = make_case("c" + std::to_string(i), {{"w" + std::to_string(i), f, {}}});
    cs.meta.age = ages[i];
    c.cases.push_back(cs);
  }
  c.cases[0].found_location = f;
  c.cases[0].found_status = Status::kAlive;
  c.cases[0].meta.gender = corpus::Gender::kMale;
  c.cases[1].found_status = Status::kDeceased;
  c.cases[1].meta.gender = corpus::Gender::kFemale;
  c.cases[0].reports.push_back({"w9", f, {}});
  corpus::validate(c);

  const auto st = corpus::corpus_stats(c);
  CHECK(st.n_cases == 4);
  CHECK(st.n_located == 1);
  CHECK(st.n_reports == 5);
  CHECK(st.by_status.at("alive") == 1);
  CHECK(st.by_status.at("deceased") == 1);
  CHECK(st.by_status.at("unknown") == 2);
  CHECK(st.by_gender.at("male") == 1);
  CHECK(st.by_gender.at("female") == 1);
  CHECK(st.by_gender.at("unknown") == 2);
  CHECK(st.by_age_bucket.at("under_13") == 1);   // 12
  CHECK(st.by_age_bucket.at("13_to_30") == 2);   // 13 and 30, both ends closed
  CHECK(st.by_age_bucket.at("over_30") == 1);    // 31
  CHECK(st.participation_histogram.at(1) == 5);  // every observer appears once
}

TEST_CASE("status_stats compares stated statuses against outcomes") {
  Corpus c;
  const geo::GeoPoint f{34.0, -111.5};
  const Status outcomes[] = {Status::kAlive, Status::kAlive, Status::kDeceased,
                             Status::kDeceased};
  for (int i = 0; i < 4; ++i) {
    Case cs = make_case("c" + std::to_string(i), {});
    cs.found_status = outcomes[i];
    c.cases.push_back(cs);
  }
  // "w" is always right: states alive on both alive cases, deceased on one
  // deceased case. "v" states alive on a deceased case.
  c.cases[0].reports.push_back({"w", f, Status::kAlive});
  c.cases[1].reports.push_back({"w", f, Status::kAlive});
  c.cases[2].reports.push_back({"w", f, Status::kDeceased});
  c.cases[2].reports.push_back({"v", f, Status::kAlive});
  c.cases[3].reports.push_back({"v", f, {}});
  // A case without a known outcome contributes nothing, even with statements.
  Case open = make_case("open", {{"w", f, Status::kAlive}});
  c.cases.push_back(open);
  corpus::validate(c);

  const auto st = corpus::status_stats(c);
  CHECK(st.n_with_status == 4);
  CHECK(st.prior_alive == doctest::Approx(0.5));
  CHECK(st.prior_deceased == doctest::Approx(0.5));
  REQUIRE(st.rows.size() == 2);

  const auto& v = st.rows[0];
  CHECK(v.observer_id == "v");
  CHECK(v.stated_alive == 1);
  CHECK(v.correct_alive == 0);
  REQUIRE(v.confidence_alive.has_value());
  CHECK(*v.confidence_alive == 0.0);
  CHECK_FALSE(v.confidence_deceased.has_value());

  const auto& w = st.rows[1];
  CHECK(w.observer_id == "w");
  CHECK(w.stated_alive == 2);
  CHECK(w.correct_alive == 2);
  CHECK(*w.confidence_alive == doctest::Approx(1.0));
  CHECK(*w.ratio_alive == doctest::Approx(2.0));  // confidence 1.0 over prior 0.5
  CHECK(w.stated_deceased == 1);
  CHECK(*w.ratio_deceased == doctest::Approx(2.0));

  SUBCASE("a corpus without outcomes yields an empty table") {
    Corpus empty;
    empty.cases.push_back(make_case("x", {{"w", f, Status::kAlive}}));
    const auto est = corpus::status_stats(empty);
    CHECK(est.n_with_status == 0);
    CHECK(est.rows.empty());
  }
}

TEST_CASE("synth_generate is deterministic per seed") {
  corpus::SynthConfig cfg;
  cfg.n_cases = 12;
  cfg.observers = {{"o1", 1.0, 0.9, 0.5, 0.8}, {"o2", 3.0, 0.6, 0.0, 1.0}};
  cfg.with_meta = true;
  cfg.unlocated_fraction = 0.25;

  const Corpus a = corpus::synth_generate(cfg, 99);
  const Corpus b = corpus::synth_generate(cfg, 99);
  CHECK(corpus::corpus_to_json(a) == corpus::corpus_to_json(b));

  const Corpus other = corpus::synth_generate(cfg, 100);
  CHECK(corpus::corpus_to_json(a) != corpus::corpus_to_json(other));
}

TEST_CASE("synth_generate plants the advertised error model") {
  corpus::SynthConfig cfg;
  cfg.n_cases = 1000;
  cfg.extent_miles = 8.0;
  cfg.observers = {{"near", 2.0, 1.0, 0.0, 1.0}, {"exact", 0.0, 1.0, 0.0, 1.0}};

  const Corpus c = corpus::synth_generate(cfg, 4242);
  REQUIRE(c.cases.size() == 1000);

  const auto all = corpus::all_observer_histories(c);
  const auto& near = all.at("near");
  REQUIRE(near.n() == 1000);
  double sum = 0.0, maxd = 0.0;
  for (const auto& [id, d] : near.pairs) {
    sum += d;
    maxd = std::max(maxd, d);
  }
  // Uniform distance on [0, 2]: mean 1, never beyond the radius.
  CHECK(sum / 1000.0 == doctest::Approx(1.0).epsilon(0.1));
  CHECK(maxd <= 2.0 + 1e-9);

  for (const auto& [id, d] : all.at("exact").pairs) CHECK(d <= 1e-9);

  SUBCASE("found locations stay inside the configured extent") {
    for (const auto& cs : c.cases) {
      REQUIRE(cs.located());
      const auto p = geo::project(*cs.found_location, cfg.region_origin);
      CHECK(std::abs(p.x) <= 4.0 + 1e-9);
      CHECK(std::abs(p.y) <= 4.0 + 1e-9);
    }
  }
}

TEST_CASE("synth_generate withholds locations and conscripts a reporter") {
  corpus::SynthConfig cfg;
  cfg.n_cases = 400;
  cfg.unlocated_fraction = 0.3;
  cfg.observers = {{"shy", 2.0, 0.01, 0.0, 1.0}, {"steady", 1.0, 0.02, 0.0, 1.0}};

  const Corpus c = corpus::synth_generate(cfg, 7);
  int located = 0;
  int forced = 0;
  for (const auto& cs : c.cases) {
    if (cs.located()) ++located;
    REQUIRE(!cs.reports.empty());
    // With both participations near zero most cases hold exactly the forced
    // report, which must come from the most reliable observer.
    if (cs.reports.size() == 1 && cs.reports[0].observer_id == "steady") ++forced;
  }
  CHECK(located > 220);
  CHECK(located < 340);
  CHECK(forced > 300);
}

TEST_CASE("synth config JSON round trips and validates") {
  corpus::SynthConfig cfg;
  cfg.n_cases = 5;
  cfg.observers = {{"a", 0.5, 0.7, 0.2, 0.9}};
  cfg.extent_miles = 3.0;
  cfg.region_origin = {40.0, -100.0};
  cfg.p_alive = 0.42;
  cfg.unlocated_fraction = 0.1;
  cfg.with_meta = true;

  const auto back = corpus::synth_config_from_json(corpus::synth_config_to_json(cfg));
  CHECK(back.n_cases == cfg.n_cases);
  REQUIRE(back.observers.size() == 1);
  CHECK(back.observers[0].id == "a");
  CHECK(back.observers[0].radius == cfg.observers[0].radius);
  CHECK(back.observers[0].participation == cfg.observers[0].participation);
  CHECK(back.extent_miles == cfg.extent_miles);
  CHECK(back.region_origin == cfg.region_origin);
  CHECK(back.p_alive == cfg.p_alive);
  CHECK(back.unlocated_fraction == cfg.unlocated_fraction);
  CHECK(back.with_meta == cfg.with_meta);

  CHECK_THROWS_AS(corpus::synth_config_from_json(R"({"n_cases": 0})"), ValidationError);
  corpus::SynthConfig bad = cfg;
  bad.observers.push_back({"a", 1.0, 1.0, 0.0, 1.0});
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
