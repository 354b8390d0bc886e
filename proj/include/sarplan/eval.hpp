#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sarplan/alloc.hpp"
#include "sarplan/corpus.hpp"

namespace sarplan::eval {

struct AreaOptions {
  double expansion = 0.0;          // detection buffer around each square, miles
  bool expansion_in_area = false;  // also charge the buffer to searched area
};

struct AreaResult {
  double area{};
  bool found{};
};

// Walk the plan in order; stop at the first square that covers the found
// location (grown by the expansion buffer). The reported area is the union of
// the squares searched so far; the buffer detects but is not charged unless
// expansion_in_area is set. A miss reports the full plan union and found=false.
AreaResult area_until_found(const alloc::SearchPlan& plan, const geo::PlanarPoint& found,
                            const AreaOptions& opt = {});

struct TTest {
  bool defined{};  // false when differences have zero variance around a nonzero mean
  double t{};
  int df{};
  double p_one_sided{};
  std::string bound;  // "p < 0.xx" rendering of p_one_sided
};

// Paired one-sided t-test on (baseline - method) differences. Positive t
// means the method searched less area. All-zero differences give t=0, p=0.5.
TTest paired_t(std::span<const double> baseline, std::span<const double> method);

struct EvalConfig {
  std::vector<double> sides{1.0, 2.0};
  bool dog_variant = true;  // additionally evaluate with a 1-mile detection buffer
  double dog_expansion = 1.0;
  bool expansion_in_area = false;
  double epsilon = 0.1;
  learn::Mode mode = learn::Mode::kDouble;
  learn::NegativePolicy negatives = learn::NegativePolicy::kExcludeCoveringSquare;
  alloc::MissingObserverPolicy missing = alloc::MissingObserverPolicy::kPooled;
  alloc::TieBreakPolicy tiebreak = alloc::TieBreakPolicy::kHeuristics;
  bool fresh_resolve = false;
  double baseline_quality_radius = 1.0;
  // Externally supplied observer quality for the baseline, replacing the
  // track-record ranking.
  std::optional<alloc::QualityMap> custom_quality;
  std::optional<std::vector<std::string>> case_filter;  // restrict evaluated cases
};

struct Outcome {
  double area{};
  bool found{};
};

struct CaseConfigResult {
  double side{};
  bool dog{};
  Outcome baseline;
  Outcome opt;
};

struct CaseResult {
  std::string case_id;
  std::vector<CaseConfigResult> rows;  // one per (side, dog) combination
};

struct Aggregate {
  double side{};
  bool dog{};
  int n_pairs{};  // cases where both plans found the person
  double mean_baseline{};
  double mean_opt{};
  double mean_reduction{};
  int improved{};
  int worsened{};
  int tied{};
  TTest ttest;
};

struct EvalReport {
  std::vector<double> sides;
  bool dog_variant{};
  double epsilon{};
  std::string mode;
  std::vector<CaseResult> cases;     // sorted by case_id
  std::vector<Aggregate> aggregates; // derived from `cases`
};

// Leave-one-out evaluation over every located case passing the filter: train
// on the rest, plan with both methods, and measure area until found. Needs at
// least two located cases. Deterministic: reruns produce identical reports.
EvalReport loo_evaluate(const corpus::Corpus& c, const EvalConfig& cfg);

// Recomputes aggregate rows from per-case rows (consistency checks).
std::vector<Aggregate> aggregate_rows(const std::vector<CaseResult>& cases);

struct SweepRow {
  double epsilon{};
  double fraction_1x1{};
  double fraction_2x2{};
  double fraction_1x1_dog{};
  double fraction_2x2_dog{};
};

// Re-runs the leave-one-out evaluation at each epsilon and reports the ratio
// of total optimized area to total baseline area per configuration. Sides
// {1, 2} and the dog variant are always computed here.
std::vector<SweepRow> epsilon_sweep(const corpus::Corpus& c, std::span<const double> epsilons,
                                    const EvalConfig& cfg);

void write_eval_csv(const EvalReport& r, std::ostream& out);
std::string eval_to_json(const EvalReport& r);
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

}  // namespace sarplan::eval
