#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sarplan/corpus.hpp"
#include "sarplan/geo.hpp"
#include "sarplan/learn.hpp"
#include "sarplan/model.hpp"

namespace sarplan::alloc {

enum class Provenance {
  kMergedOverlap,     // baseline phase 1: member of an overlapping cluster
  kObserverHistory,   // baseline phase 2: isolated square, observer track record
  kOptRank,           // optimizer-ranked square
};

std::string to_string(Provenance p);

struct PlanEntry {
  geo::GridSquare square;
  double score{};  // optimizer log-likelihood, or baseline priority
  Provenance provenance{Provenance::kOptRank};
};

struct SearchPlan {
  std::string case_id;
  double side{1.0};
  std::vector<PlanEntry> entries;  // search order, squares distinct
};

// A case projected into its planar frame. The origin is the mean of the
// report coordinates, so it exists before anyone is found and does not depend
// on report order.
struct CaseFrame {
  geo::GeoPoint origin;
  std::vector<model::PlacedReport> reports;   // sorted by (observer, lat, lon)
  std::vector<geo::PlanarPoint> candidates;   // distinct report locations, sorted
};

CaseFrame make_case_frame(const corpus::Case& c);

using QualityMap = std::map<std::string, double>;

// Track-record ranking for the practitioner baseline: the fraction of each
// observer's past reports that landed within `radius_miles` of the found
// location. Observers without history score 0.
QualityMap observer_quality_hit_radius(const corpus::Corpus& training, double radius_miles = 1.0);

// Practitioner plan: squares centered on the reported locations. Clusters of
// mutually overlapping squares are searched first (largest cluster footprint
// first), then the isolated squares in decreasing observer quality.
SearchPlan baseline_plan(const corpus::Case& c, const QualityMap& quality, double side);

enum class TieBreakPolicy { kHeuristics, kLexicographic };

std::string to_string(TieBreakPolicy p);
TieBreakPolicy parse_tiebreak(std::string_view s);

// Resolves a score tie between candidate points: prefer the square holding
// the most reports, then the largest summed reporter prior, then the
// lexicographically smallest center. `tied` must be nonempty.
geo::PlanarPoint tiebreak(std::span<const geo::PlanarPoint> tied,
                          std::span<const model::PlacedReport> reports,
                          const QualityMap& priors, double side);

enum class MissingObserverPolicy {
  kPooled,  // learn a constraint from the pooled history
  kSkip,    // leave the observer out of the optimization
  kError,
};

struct PlannerOptions {
  double side = 1.0;
  double epsilon = 0.1;
  learn::Mode mode = learn::Mode::kDouble;
  learn::NegativePolicy negatives = learn::NegativePolicy::kExcludeCoveringSquare;
  MissingObserverPolicy missing = MissingObserverPolicy::kPooled;
  TieBreakPolicy tiebreak = TieBreakPolicy::kHeuristics;
  // Re-solve the whole program at every cardinality instead of extending the
  // previous selection. The separable objective makes both routes agree; the
  // flag exists to demonstrate it.
  bool fresh_resolve = false;
  int points_per_step = 1;
};

// One growth step of the iterative planner, for auditing the freeze
// discipline: step k adds exactly one observer constraint.
struct PlanStep {
  int k{};
  std::string observer_id;
  double alpha{};
  double beta{};
};

struct PlanTrace {
  std::vector<PlanStep> steps;
};

// Iterative allocation: grow the constraint cardinality one observer at a
// time; after each growth step, rank the not-yet-chosen candidate points
// under the current constraints and commit the best square. The training
// corpus must not contain the test case (leave-one-out is the caller's job).
SearchPlan iterative_plan(const corpus::Corpus& training, const corpus::Case& test,
                          const PlannerOptions& opt, PlanTrace* trace = nullptr);

// Rank all candidate points of a case under a pre-trained model, best first.
SearchPlan model_plan(const model::TrainedModel& m, const corpus::Case& c, double side,
                      TieBreakPolicy tb, MissingObserverPolicy missing);

void write_plan_csv(const SearchPlan& plan, const geo::GeoPoint& origin, std::ostream& out);
std::string plan_to_geojson(const SearchPlan& plan, const geo::GeoPoint& origin);

}  // namespace sarplan::alloc
