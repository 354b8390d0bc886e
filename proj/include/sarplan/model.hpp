#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sarplan/corpus.hpp"
#include "sarplan/geo.hpp"

namespace sarplan::model {

// Probabilities are clamped into [kProbFloor, 1 - kProbFloor] before any log
// is taken, so degenerate empirical fractions stay finite.
inline constexpr double kProbFloor = 1e-6;

double clamp_prob(double p);

// Empirical hit rate: the fraction of the observer's recorded error distances
// that fall within beta miles (closed boundary). History must be nonempty.
double rho(const corpus::ObserverHistory& h, double beta);

// rho discounted for thin participation: rho - epsilon * (1 - eta), clamped.
double rho_reg(const corpus::ObserverHistory& h, double beta, double epsilon);

// Cached hit-rate curve over the distinct recorded distances, nondecreasing
// in the radius, reaching 1 at the largest recorded distance.
struct RhoTable {
  std::string observer_id;
  std::vector<double> radii;  // sorted, distinct
  std::vector<double> rho;    // rho[i] = hit rate at radii[i]
  double eta{};

  static RhoTable from_history(const corpus::ObserverHistory& h);
  double rho_at(double beta) const;                      // raw hit rate
  double rho_reg_at(double beta, double epsilon) const;  // clamped
};

// An observer's calibrated two-radius credibility band. Scoring uses the
// precomputed zone log-probabilities:
//   d <= alpha          -> log_in_alpha
//   alpha < d <= beta   -> log_in_ring
//   d > beta            -> log_out
// The single-radius form is alpha = 0 with both inner zones carrying the
// beta-level probability, so a report sitting exactly at the candidate point
// still scores as "within beta".
struct ObserverConstraint {
  std::string observer_id;
  double alpha{};
  double beta{};
  double rho_alpha{};  // regularized, clamped
  double rho_beta{};   // regularized, clamped
  double log_in_alpha{};
  double log_in_ring{};
  double log_out{};

  static ObserverConstraint single(std::string observer_id, double beta, double rho_beta_reg);
  static ObserverConstraint dual(std::string observer_id, double alpha, double beta,
                                 double rho_alpha_reg, double rho_beta_reg);

  double log_zone(double dist) const;
};

using ConstraintSet = std::map<std::string, ObserverConstraint>;

// A report projected into the case's planar frame.
struct PlacedReport {
  std::string observer_id;
  geo::PlanarPoint location;
};

enum class MissingObserver {
  kError,  // a report without a constraint is a caller bug
  kSkip,   // reports without a constraint contribute nothing
};

// Log-likelihood of the hypothesis "the person is at p", summed over the
// case's reports under the given constraints. Independence across observers
// makes the sum exact, not an approximation of a joint model.
double score_point(const geo::PlanarPoint& p, std::span<const PlacedReport> reports,
                   const ConstraintSet& constraints, MissingObserver policy = MissingObserver::kError);

struct RankedPlanEntry {
  geo::PlanarPoint point;
  double score{};
  int rank{};  // 1-based
};

// Scores every distinct reported location and orders them best first. Exact
// score ties fall back to lexicographic (x, y); allocation applies the richer
// tie-break heuristics where they matter.
std::vector<RankedPlanEntry> rank_candidates(std::span<const PlacedReport> reports,
                                             const ConstraintSet& constraints,
                                             MissingObserver policy = MissingObserver::kError);

// Serialized training result: one calibrated band per observer plus an
// optional pooled fallback for observers outside the training set.
struct ModelEntry {
  std::string observer_id;
  double alpha{};
  double beta{};
  double rho_alpha{};
  double rho_beta{};
  double eta{};
};

struct TrainedModel {
  std::string mode;  // "single" or "double"
  double epsilon{};
  std::vector<ModelEntry> observers;  // sorted by observer_id
  std::optional<ModelEntry> pooled;

  ConstraintSet constraints() const;
  std::optional<ObserverConstraint> pooled_constraint() const;
};

std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const std::string& text);
TrainedModel load_model(const std::filesystem::path& path);
void save_model(const TrainedModel& m, const std::filesystem::path& path);

}  // namespace sarplan::model
