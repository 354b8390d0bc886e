#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sarplan/alloc.hpp"
#include "sarplan/corpus.hpp"
#include "sarplan/error.hpp"
#include "sarplan/geo.hpp"
#include "sarplan/model.hpp"

using namespace sarplan;
using alloc::Provenance;

namespace {

const geo::GeoPoint kOrigin{34.0, -111.0};

struct Spec {
  std::string observer;
  double x;
  double y;
};

// Case whose reports sit at the given planar offsets from kOrigin. The
// planner re-centers on the mean report location, so fixtures that assert
// exact geometry keep the mean y at zero (a nonzero mean latitude rescales x).
corpus::Case planar_case(const std::string& id, const std::vector<Spec>& specs) {
  corpus::Case c;
  c.case_id = id;
  for (const auto& s : specs) {
    c.reports.push_back({s.observer, geo::unproject({s.x, s.y}, kOrigin), {}});
  }
  return c;
}

// Frame-relative positions the planner should produce for planar_case input.
std::vector<geo::PlanarPoint> framed(const std::vector<Spec>& specs) {
  double mx = 0.0, my = 0.0;
  for (const auto& s : specs) {
    mx += s.x;
    my += s.y;
  }
  mx /= static_cast<double>(specs.size());
  my /= static_cast<double>(specs.size());
  std::vector<geo::PlanarPoint> out;
  for (const auto& s : specs) out.push_back({s.x - mx, s.y - my});
  return out;
}

bool near(const geo::PlanarPoint& a, const geo::PlanarPoint& b, double eps = 1e-9) {
  return std::abs(a.x - b.x) <= eps && std::abs(a.y - b.y) <= eps;
}

// Training corpus with reports planted at exact distances from each case's
// found location, mirroring how observer histories are mined.
struct TrainingBuilder {
  corpus::Corpus c;
  int next = 0;

  void add_case(const std::vector<std::pair<std::string, double>>& reports) {
    const geo::GeoPoint found{34.0 + 0.01 * next, -111.5};
    corpus::Case cs;
    cs.case_id = "t" + std::to_string(100 + next);
    cs.found_location = found;
    int slot = 0;
    for (const auto& [id, d] : reports) {
      const double angle = 0.9 * slot++;
      cs.reports.push_back(
          {id, geo::unproject({d * std::cos(angle), d * std::sin(angle)}, found), {}});
    }
    c.cases.push_back(cs);
    ++next;
  }

  const corpus::Corpus& build() {
    corpus::validate(c);
    return c;
  }
};

corpus::Corpus standard_training() {
  TrainingBuilder b;
  b.add_case({{"o1", 0.3}, {"o2", 2.0}, {"o3", 6.0}});
  b.add_case({{"o1", 0.4}, {"o2", 2.2}, {"o3", 7.0}});
  b.add_case({{"o1", 0.3}, {"o2", 2.1}, {"o3", 8.0}});
  b.add_case({{"o1", 0.5}, {"o2", 2.4}, {"o3", 6.5}});
  return b.build();
}

}  // namespace

TEST_CASE("make_case_frame centers on the mean report location") {
  const std::vector<Spec> specs{{"b", 2.0, 1.0}, {"a", -2.0, -1.0}};
  const auto frame = alloc::make_case_frame(planar_case("c1", specs));

  // Mean of the two reports is kOrigin itself.
  CHECK(frame.origin.lat == doctest::Approx(kOrigin.lat).epsilon(1e-12));
  CHECK(frame.origin.lon == doctest::Approx(kOrigin.lon).epsilon(1e-12));

  REQUIRE(frame.reports.size() == 2);
  CHECK(frame.reports[0].observer_id == "a");  // sorted by observer, not input order
  CHECK(frame.reports[1].observer_id == "b");
  CHECK(near(frame.reports[0].location, {-2.0, -1.0}));
  CHECK(near(frame.reports[1].location, {2.0, 1.0}));

  REQUIRE(frame.candidates.size() == 2);
  CHECK(near(frame.candidates[0], {-2.0, -1.0}));  // lexicographic order

  SUBCASE("duplicate report locations collapse to one candidate") {
    corpus::Case c = planar_case("c2", {{"a", 1.0, 0.0}});
    c.reports.push_back({"b", c.reports[0].location, {}});
    const auto f = alloc::make_case_frame(c);
    CHECK(f.reports.size() == 2);
    CHECK(f.candidates.size() == 1);
  }
  SUBCASE("report order does not matter") {
    corpus::Case fwd = planar_case("c3", {{"a", 0.0, 0.0}, {"b", 3.0, 1.0}, {"c", -1.0, -1.0}});
    corpus::Case rev = fwd;
    std::reverse(rev.reports.begin(), rev.reports.end());
    const auto ff = alloc::make_case_frame(fwd);
    const auto fr = alloc::make_case_frame(rev);
    CHECK(ff.origin.lat == doctest::Approx(fr.origin.lat).epsilon(1e-12));
    CHECK(ff.origin.lon == doctest::Approx(fr.origin.lon).epsilon(1e-12));
    REQUIRE(ff.candidates.size() == fr.candidates.size());
    for (size_t i = 0; i < ff.candidates.size(); ++i) {
      CHECK(near(ff.candidates[i], fr.candidates[i], 1e-9));
    }
  }
  SUBCASE("a case without reports cannot be framed") {
    corpus::Case c;
    c.case_id = "bare";
    CHECK_THROWS_AS(alloc::make_case_frame(c), ValidationError);
  }
}

TEST_CASE("observer quality is the historical hit fraction") {
  TrainingBuilder b;
  b.add_case({{"o1", 0.5}, {"o2", 0.3}});
  b.add_case({{"o1", 2.0}});
  const auto q = alloc::observer_quality_hit_radius(b.build(), 1.0);
  CHECK(q.at("o1") == doctest::Approx(0.5).epsilon(1e-12));  // 0.5 in, 2.0 out
  CHECK(q.at("o2") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(alloc::observer_quality_hit_radius(b.build(), 0.0), ValidationError);
}

TEST_CASE("baseline searches overlap clusters before isolated squares") {
  const std::vector<Spec> specs{
      {"a", 0.0, 0.0}, {"b", 0.8, 0.0}, {"c", 5.0, 4.0}, {"d", 9.0, -4.0}};
  const auto pts = framed(specs);
  const alloc::QualityMap quality{{"a", 0.2}, {"b", 0.9}, {"c", 0.5}, {"d", 0.7}};

  const auto plan = alloc::baseline_plan(planar_case("c1", specs), quality, 1.0);
  REQUIRE(plan.entries.size() == 4);

  // The overlapping pair comes first, better track record leading; the union
  // footprint of two unit squares offset by 0.8 is 1.8 square miles.
  CHECK(near(plan.entries[0].square.center, pts[1]));
  CHECK(near(plan.entries[1].square.center, pts[0]));
  CHECK(plan.entries[0].provenance == Provenance::kMergedOverlap);
  CHECK(plan.entries[1].provenance == Provenance::kMergedOverlap);
  CHECK(plan.entries[0].score == doctest::Approx(1.8).epsilon(1e-9));
  CHECK(plan.entries[1].score == doctest::Approx(1.8).epsilon(1e-9));

  // Isolated squares follow in quality order and carry the quality as score.
  CHECK(near(plan.entries[2].square.center, pts[3]));
  CHECK(plan.entries[2].provenance == Provenance::kObserverHistory);
  CHECK(plan.entries[2].score == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(near(plan.entries[3].square.center, pts[2]));
  CHECK(plan.entries[3].score == doctest::Approx(0.5).epsilon(1e-12));

  for (const auto& e : plan.entries) CHECK(e.square.side == 1.0);
  CHECK(plan.case_id == "c1");
  CHECK_THROWS_AS(alloc::baseline_plan(planar_case("c1", specs), quality, 0.0), ValidationError);
}

TEST_CASE("baseline cluster order and membership") {
  SUBCASE("larger union footprint searches first") {
    const std::vector<Spec> specs{{"e", 0.0, 0.0},  {"f", 0.9, 0.0},  {"g", 1.8, 0.0},
                                  {"h", 10.0, 0.0}, {"i", 10.5, 0.0}};
    const auto pts = framed(specs);
    const alloc::QualityMap quality{{"e", 0.1}, {"f", 0.2}, {"g", 0.3}, {"h", 0.4}, {"i", 0.5}};
    const auto plan = alloc::baseline_plan(planar_case("c1", specs), quality, 1.0);
    REQUIRE(plan.entries.size() == 5);
    // Chain of three (area 2.8) precedes the pair (area 1.5); members run in
    // decreasing quality within each cluster.
    CHECK(near(plan.entries[0].square.center, pts[2]));
    CHECK(near(plan.entries[1].square.center, pts[1]));
    CHECK(near(plan.entries[2].square.center, pts[0]));
    CHECK(near(plan.entries[3].square.center, pts[4]));
    CHECK(near(plan.entries[4].square.center, pts[3]));
    CHECK(plan.entries[0].score == doctest::Approx(2.8).epsilon(1e-9));
    CHECK(plan.entries[3].score == doctest::Approx(1.5).epsilon(1e-9));
    for (const auto& e : plan.entries) CHECK(e.provenance == Provenance::kMergedOverlap);
  }
  SUBCASE("equal footprints fall back to best member quality, then position") {
    const std::vector<Spec> specs{
        {"p1", 0.0, 0.0}, {"p2", 0.8, 0.0}, {"p3", 20.0, 0.0}, {"p4", 20.8, 0.0}};
    const auto pts = framed(specs);
    const alloc::QualityMap by_quality{{"p1", 0.4}, {"p2", 0.4}, {"p3", 0.6}, {"p4", 0.6}};
    auto plan = alloc::baseline_plan(planar_case("c1", specs), by_quality, 1.0);
    REQUIRE(plan.entries.size() == 4);
    CHECK(near(plan.entries[0].square.center, pts[2]));  // right pair: higher quality
    CHECK(near(plan.entries[1].square.center, pts[3]));  // equal members: west first
    CHECK(near(plan.entries[2].square.center, pts[0]));
    CHECK(near(plan.entries[3].square.center, pts[1]));

    const alloc::QualityMap flat{{"p1", 0.5}, {"p2", 0.5}, {"p3", 0.5}, {"p4", 0.5}};
    plan = alloc::baseline_plan(planar_case("c1", specs), flat, 1.0);
    CHECK(near(plan.entries[0].square.center, pts[0]));  // full tie: westmost cluster
  }
  SUBCASE("all reports at one point yield a single square") {
    corpus::Case c = planar_case("c1", {{"a", 1.0, 1.0}});
    c.reports.push_back({"b", c.reports[0].location, {}});
    const alloc::QualityMap quality{{"a", 0.2}, {"b", 0.9}};
    const auto plan = alloc::baseline_plan(c, quality, 1.0);
    REQUIRE(plan.entries.size() == 1);
    CHECK(plan.entries[0].provenance == Provenance::kObserverHistory);
    CHECK(plan.entries[0].score == doctest::Approx(0.9).epsilon(1e-12));  // best reporter
  }
  SUBCASE("disjoint squares rank purely by quality") {
    const std::vector<Spec> specs{{"a", 0.0, 0.0}, {"b", 4.0, 0.0}, {"c", -4.0, 0.0}};
    const auto pts = framed(specs);
    const alloc::QualityMap quality{{"a", 0.3}, {"b", 0.8}, {"c", 0.5}};
    const auto plan = alloc::baseline_plan(planar_case("c1", specs), quality, 1.0);
    REQUIRE(plan.entries.size() == 3);
    CHECK(near(plan.entries[0].square.center, pts[1]));
    CHECK(near(plan.entries[1].square.center, pts[2]));
    CHECK(near(plan.entries[2].square.center, pts[0]));
    for (const auto& e : plan.entries) CHECK(e.provenance == Provenance::kObserverHistory);
  }
  SUBCASE("the wider escalation re-derives overlap at the new side") {
    const std::vector<Spec> specs{{"j", 0.0, 0.0}, {"k", 1.5, 0.0}};
    const alloc::QualityMap quality{{"j", 0.3}, {"k", 0.6}};
    const auto narrow = alloc::baseline_plan(planar_case("c1", specs), quality, 1.0);
    CHECK(narrow.entries[0].provenance == Provenance::kObserverHistory);
    const auto wide = alloc::baseline_plan(planar_case("c1", specs), quality, 2.0);
    CHECK(wide.entries[0].provenance == Provenance::kMergedOverlap);
    CHECK(wide.entries[0].score == doctest::Approx(7.0).epsilon(1e-9));  // 3.5 by 2 strip
    CHECK(wide.entries[0].square.side == 2.0);
  }
}

TEST_CASE("score ties break on covered reports, then priors, then position") {
  const alloc::QualityMap priors{{"r1", 0.5}, {"r2", 0.5}, {"r3", 0.5},
                                 {"r4", 0.5}, {"r5", 0.9}, {"r6", 0.8}};

  SUBCASE("most reports inside the square wins") {
    const std::vector<model::PlacedReport> reports{
        {"r1", {0.0, 0.0}}, {"r2", {0.2, 0.0}}, {"r3", {-0.2, 0.1}}, {"r4", {3.0, 0.0}}};
    const std::vector<geo::PlanarPoint> tied{{3.0, 0.0}, {0.0, 0.0}};
    const auto p = alloc::tiebreak(tied, reports, priors, 1.0);
    CHECK(near(p, {0.0, 0.0}, 0.0));
  }
  SUBCASE("equal coverage falls back to the summed reporter priors") {
    const std::vector<model::PlacedReport> reports{
        {"r5", {0.0, 0.0}}, {"r6", {0.2, 0.0}}, {"r1", {3.0, 0.0}}, {"r2", {3.2, 0.0}}};
    const std::vector<geo::PlanarPoint> tied{{3.0, 0.0}, {0.0, 0.0}};
    const auto p = alloc::tiebreak(tied, reports, priors, 1.0);
    CHECK(near(p, {0.0, 0.0}, 0.0));  // 0.9 + 0.8 beats 0.5 + 0.5
  }
  SUBCASE("a fully symmetric tie resolves to the smallest position") {
    const std::vector<model::PlacedReport> reports;
    const std::vector<geo::PlanarPoint> tied{{1.0, 1.0}, {0.0, 2.0}, {0.0, 3.0}};
    const auto p = alloc::tiebreak(tied, reports, priors, 1.0);
    CHECK(near(p, {0.0, 2.0}, 0.0));
  }
  SUBCASE("degenerate inputs are rejected") {
    const std::vector<geo::PlanarPoint> none;
    const std::vector<model::PlacedReport> reports;
    CHECK_THROWS_AS(alloc::tiebreak(none, reports, priors, 1.0), ValidationError);
    const std::vector<geo::PlanarPoint> one{{0.0, 0.0}};
    CHECK_THROWS_AS(alloc::tiebreak(one, reports, priors, 0.0), ValidationError);
  }
}

TEST_CASE("iterative planning covers every candidate exactly once") {
  const auto training = standard_training();
  const std::vector<Spec> specs{{"o1", 0.0, 0.0}, {"o2", 0.8, 0.0}, {"o3", 8.0, 0.0}};
  const corpus::Case test = planar_case("probe", specs);

  alloc::PlannerOptions opt;
  alloc::PlanTrace trace;
  const auto plan = alloc::iterative_plan(training, test, opt, &trace);

  REQUIRE(plan.entries.size() == 3);
  const auto frame = alloc::make_case_frame(test);
  for (const auto& cand : frame.candidates) {
    int seen = 0;
    for (const auto& e : plan.entries) {
      if (e.square.center == cand) ++seen;
    }
    CHECK(seen == 1);
  }
  for (const auto& e : plan.entries) {
    CHECK(e.provenance == Provenance::kOptRank);
    CHECK(e.square.side == 1.0);
  }

  // The tight observer carries the strongest constraint, so its reported
  // square is searched first.
  geo::PlanarPoint o1_loc{};
  for (const auto& r : frame.reports) {
    if (r.observer_id == "o1") o1_loc = r.location;
  }
  CHECK(plan.entries[0].square.center == o1_loc);

  SUBCASE("one constraint is added per step and never revisited") {
    REQUIRE(trace.steps.size() == 3);
    std::set<std::string> ids;
    for (size_t i = 0; i < trace.steps.size(); ++i) {
      CHECK(trace.steps[i].k == static_cast<int>(i) + 1);
      CHECK(ids.insert(trace.steps[i].observer_id).second);
      CHECK(trace.steps[i].alpha <= trace.steps[i].beta);
    }
    CHECK(trace.steps[0].observer_id == "o1");
  }
  SUBCASE("re-solving from scratch at each cardinality gives the same plan") {
    alloc::PlannerOptions fresh = opt;
    fresh.fresh_resolve = true;
    alloc::PlanTrace fresh_trace;
    const auto fplan = alloc::iterative_plan(training, test, fresh, &fresh_trace);
    REQUIRE(fplan.entries.size() == plan.entries.size());
    for (size_t i = 0; i < plan.entries.size(); ++i) {
      CHECK(fplan.entries[i].square.center == plan.entries[i].square.center);
      CHECK(fplan.entries[i].score == plan.entries[i].score);
    }
    REQUIRE(fresh_trace.steps.size() == trace.steps.size());
    for (size_t i = 0; i < trace.steps.size(); ++i) {
      CHECK(fresh_trace.steps[i].k == trace.steps[i].k);
      CHECK(fresh_trace.steps[i].observer_id == trace.steps[i].observer_id);
      CHECK(fresh_trace.steps[i].alpha == trace.steps[i].alpha);
      CHECK(fresh_trace.steps[i].beta == trace.steps[i].beta);
    }
  }
  SUBCASE("batched point selection keeps the plan complete") {
    alloc::PlannerOptions batched = opt;
    batched.points_per_step = 2;
    alloc::PlanTrace btrace;
    const auto bplan = alloc::iterative_plan(training, test, batched, &btrace);
    CHECK(bplan.entries.size() == 3);
    CHECK(btrace.steps.size() == 2);  // second step drains the candidates
    batched.points_per_step = 0;
    CHECK_THROWS_AS(alloc::iterative_plan(training, test, batched, nullptr), ValidationError);
  }
  SUBCASE("permuting the reports leaves the plan unchanged") {
    corpus::Case rev = test;
    std::reverse(rev.reports.begin(), rev.reports.end());
    const auto rplan = alloc::iterative_plan(training, rev, opt, nullptr);
    REQUIRE(rplan.entries.size() == plan.entries.size());
    for (size_t i = 0; i < plan.entries.size(); ++i) {
      CHECK(near(rplan.entries[i].square.center, plan.entries[i].square.center, 1e-9));
    }
  }
}

TEST_CASE("a single-report case gets the same square as the baseline") {
  const auto training = standard_training();
  const corpus::Case test = planar_case("solo", {{"o2", 0.0, 0.0}});

  alloc::PlannerOptions opt;
  const auto opt_plan = alloc::iterative_plan(training, test, opt, nullptr);
  const auto quality = alloc::observer_quality_hit_radius(training, 1.0);
  const auto base_plan = alloc::baseline_plan(test, quality, 1.0);

  REQUIRE(opt_plan.entries.size() == 1);
  REQUIRE(base_plan.entries.size() == 1);
  CHECK(opt_plan.entries[0].square.center == base_plan.entries[0].square.center);
  CHECK(opt_plan.entries[0].square.side == base_plan.entries[0].square.side);
}

TEST_CASE("observers without history follow the missing-observer policy") {
  const auto training = standard_training();
  const corpus::Case test = planar_case("mix", {{"o1", 0.0, 0.0}, {"mystery", 3.0, 0.0}});

  alloc::PlannerOptions opt;
  opt.missing = alloc::MissingObserverPolicy::kError;
  CHECK_THROWS_AS(alloc::iterative_plan(training, test, opt, nullptr), NotFoundError);

  opt.missing = alloc::MissingObserverPolicy::kPooled;
  alloc::PlanTrace trace;
  const auto pooled = alloc::iterative_plan(training, test, opt, &trace);
  CHECK(pooled.entries.size() == 2);
  bool saw_mystery = false;
  for (const auto& s : trace.steps) saw_mystery |= s.observer_id == "mystery";
  CHECK(saw_mystery);

  opt.missing = alloc::MissingObserverPolicy::kSkip;
  const auto skipped = alloc::iterative_plan(training, test, opt, nullptr);
  CHECK(skipped.entries.size() == 1);  // one usable observer, so one growth step

  const corpus::Case strangers = planar_case("none", {{"ghost", 0.0, 0.0}});
  CHECK_THROWS_AS(alloc::iterative_plan(training, strangers, opt, nullptr), ValidationError);
}

TEST_CASE("a trained model ranks candidates without retraining") {
  model::TrainedModel m;
  m.mode = "single";
  m.epsilon = 0.1;
  m.observers.push_back({"o1", 0.0, 0.5, 0.9, 0.9, 1.0});
  m.observers.push_back({"o2", 0.0, 2.5, 0.6, 0.6, 1.0});
  model::ModelEntry pooled{"(pooled)", 0.0, 2.0, 0.7, 0.7, 1.0};

  const std::vector<Spec> specs{{"o1", 0.0, 0.0}, {"o2", 6.0, 0.0}};
  const corpus::Case c = planar_case("m1", specs);

  const auto plan = alloc::model_plan(m, c, 1.0, alloc::TieBreakPolicy::kHeuristics,
                                      alloc::MissingObserverPolicy::kError);
  REQUIRE(plan.entries.size() == 2);
  // o1's square satisfies the strong constraint; the far square violates it.
  const auto frame = alloc::make_case_frame(c);
  geo::PlanarPoint o1_loc{};
  for (const auto& r : frame.reports) {
    if (r.observer_id == "o1") o1_loc = r.location;
  }
  CHECK(plan.entries[0].square.center == o1_loc);
  CHECK(plan.entries[0].score > plan.entries[1].score);

  SUBCASE("unknown observers need a pooled entry or an explicit skip") {
    const corpus::Case with_new =
        planar_case("m2", {{"o1", 0.0, 0.0}, {"newcomer", 4.0, 0.0}});
    CHECK_THROWS_AS(alloc::model_plan(m, with_new, 1.0, alloc::TieBreakPolicy::kHeuristics,
                                      alloc::MissingObserverPolicy::kError),
                    NotFoundError);
    CHECK_THROWS_AS(alloc::model_plan(m, with_new, 1.0, alloc::TieBreakPolicy::kHeuristics,
                                      alloc::MissingObserverPolicy::kPooled),
                    NotFoundError);  // model carries no pooled entry

    model::TrainedModel with_pooled = m;
    with_pooled.pooled = pooled;
    const auto p = alloc::model_plan(with_pooled, with_new, 1.0,
                                     alloc::TieBreakPolicy::kHeuristics,
                                     alloc::MissingObserverPolicy::kPooled);
    CHECK(p.entries.size() == 2);

    const auto s = alloc::model_plan(m, with_new, 1.0, alloc::TieBreakPolicy::kLexicographic,
                                     alloc::MissingObserverPolicy::kSkip);
    CHECK(s.entries.size() == 2);  // ranked under o1's constraint alone
  }
  SUBCASE("side must be positive") {
    CHECK_THROWS_AS(alloc::model_plan(m, c, 0.0, alloc::TieBreakPolicy::kHeuristics,
                                      alloc::MissingObserverPolicy::kError),
                    ValidationError);
  }
}

TEST_CASE("plan CSV carries ranked geographic centers") {
  alloc::SearchPlan plan;
  plan.case_id = "c1";
  plan.side = 1.0;
  plan.entries.push_back({{{0.0, 0.0}, 1.0}, 0.5, Provenance::kOptRank});
  plan.entries.push_back({{{0.0, 6.9}, 1.0}, -2.25, Provenance::kMergedOverlap});

  std::ostringstream out;
  alloc::write_plan_csv(plan, kOrigin, out);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "rank,center_lat,center_lon,side_miles,score,provenance");
  REQUIRE(std::getline(in, line));
  CHECK(line == "1,34.00000000,-111.00000000,1.00,0.500000,opt-rank");
  REQUIRE(std::getline(in, line));
  CHECK(line == "2,34.10000000,-111.00000000,1.00,-2.250000,merged-overlap");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("plan GeoJSON is a feature collection of closed square rings") {
  alloc::SearchPlan plan;
  plan.case_id = "c9";
  plan.side = 2.0;
  plan.entries.push_back({{{0.0, 0.0}, 2.0}, 1.5, Provenance::kOptRank});
  plan.entries.push_back({{{3.0, -1.0}, 2.0}, 0.25, Provenance::kObserverHistory});

  const auto doc = nlohmann::json::parse(alloc::plan_to_geojson(plan, kOrigin));
  CHECK(doc.at("type") == "FeatureCollection");
  CHECK(doc.at("case_id") == "c9");
  CHECK(doc.at("side_miles") == 2.0);
  CHECK(doc.at("origin").at("lat") == doctest::Approx(34.0));
  REQUIRE(doc.at("features").size() == 2);

  for (size_t i = 0; i < 2; ++i) {
    const auto& f = doc.at("features")[i];
    CHECK(f.at("type") == "Feature");
    CHECK(f.at("properties").at("rank") == static_cast<int>(i) + 1);
    CHECK(f.at("geometry").at("type") == "Polygon");
    const auto& ring = f.at("geometry").at("coordinates").at(0);
    REQUIRE(ring.size() == 5);
    CHECK(ring[0] == ring[4]);  // closed
    // Corners run west-east then east-west; latitudes rise between pairs.
    CHECK(ring[0][0].get<double>() < ring[1][0].get<double>());
    CHECK(ring[0][1].get<double>() == doctest::Approx(ring[1][1].get<double>()));
    CHECK(ring[2][1].get<double>() > ring[1][1].get<double>());
  }
  CHECK(doc.at("features")[0].at("properties").at("provenance") == "opt-rank");
  CHECK(doc.at("features")[1].at("properties").at("provenance") == "observer-history");
  CHECK(doc.at("features")[1].at("properties").at("score") == 0.25);
}
