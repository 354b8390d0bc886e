#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sarplan/corpus.hpp"
#include "sarplan/model.hpp"

namespace sarplan::learn {

enum class Mode { kSingle, kDouble };

std::string to_string(Mode m);
Mode parse_mode(std::string_view s);

// Which reported locations of a training case count as wrong answers when a
// radius is judged. The default drops candidates whose search square would
// already cover the found location; the literal variant drops only an exact
// coordinate match.
enum class NegativePolicy { kExcludeCoveringSquare, kExcludeFoundOnly };

struct CandidateRadii {
  std::string observer_id;
  std::vector<double> radii;  // sorted, distinct, one per error level
};

CandidateRadii candidate_radii(const corpus::ObserverHistory& h);

struct IPVariable {
  int block{};  // index into IPInstance::blocks
  double alpha{};
  double beta{};
  double weight{};
};

struct ObserverBlock {
  std::string observer_id;
  model::RhoTable table;
  int first_var{};
  int n_vars{};
};

// One selectable radius pair per variable; choosing a variable commits its
// observer to that credibility band. The objective is a plain weight sum, so
// feasible solutions are "exactly k blocks, at most one variable per block".
struct IPInstance {
  Mode mode{Mode::kDouble};
  double epsilon{};
  double side{1.0};
  NegativePolicy negatives{NegativePolicy::kExcludeCoveringSquare};
  std::vector<ObserverBlock> blocks;
  std::vector<IPVariable> vars;

  int n_observers() const { return static_cast<int>(blocks.size()); }
  size_t n_vars() const { return vars.size(); }
};

struct BuildOptions {
  Mode mode = Mode::kDouble;
  double epsilon = 0.1;
  double side = 1.0;
  NegativePolicy negatives = NegativePolicy::kExcludeCoveringSquare;
};

// Per-observer distance streams feeding the variable weights: one positive
// distance per located training case the observer joined, and the distances
// from that case's surviving negative candidates to the observer's report.
struct ObserverStreams {
  std::vector<double> positives;
  std::vector<double> negatives;
};

std::map<std::string, ObserverStreams> weight_streams(const corpus::Corpus& training,
                                                      double side, NegativePolicy policy);

// Assembles the full instance over every observer with training history.
IPInstance build_ip(const corpus::Corpus& training, const BuildOptions& opt);

// Assembles an instance for an explicit observer list (the planner's case
// observers), with histories and streams already resolved, pooled or not.
struct ObserverPart {
  std::string observer_id;
  corpus::ObserverHistory history;
  ObserverStreams streams;
};
IPInstance build_ip_from_parts(const std::vector<ObserverPart>& parts, const BuildOptions& opt);

model::ObserverConstraint make_constraint(const IPInstance& ip, const IPVariable& v);

// Index of the block's best variable under the deterministic tie order
// (weight desc, beta asc, alpha asc).
int best_variable_index(const IPInstance& ip, int block);

struct ConstraintSolution {
  std::vector<model::ObserverConstraint> selected;  // exactly k, one per observer
  double objective{};
};

// Exact optimum. The objective is separable, so the best assignment is each
// block's best variable, keeping the k best blocks (observer_id breaks ties).
ConstraintSolution solve_exact(const IPInstance& ip, int k);

// Reference enumerator over all feasible assignments. Refuses instances whose
// assignment space exceeds `cap`.
ConstraintSolution solve_bruteforce(const IPInstance& ip, int k, std::uint64_t cap = 1'000'000);

// Theorem-level variable counts implied by the per-observer radius sets.
size_t expected_var_count_single(const IPInstance& ip);
size_t expected_var_count_double(const IPInstance& ip);

}  // namespace sarplan::learn
