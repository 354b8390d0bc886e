#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sarplan/geo.hpp"

namespace sarplan::corpus {

enum class Status { kAlive, kDeceased };
enum class Gender { kMale, kFemale };
enum class Reason {
  kAccidental,
  kBipolar,
  kDrowning,
  kFoulPlay,
  kNatural,
  kRunaway,
  kSelfInflicted,
  kStaged,
  kUndetermined,
};
enum class Region { kWest, kMidwest, kNortheast, kSouth, kInternational };

std::string to_string(Status s);
std::string to_string(Gender g);
std::string to_string(Reason r);
std::string to_string(Region r);
Status parse_status(std::string_view s);
Gender parse_gender(std::string_view s);
Reason parse_reason(std::string_view s);
Region parse_region(std::string_view s);

// One observer's sighting claim within a case. An observer may additionally
// state whether they believe the person is alive or deceased.
struct Report {
  std::string observer_id;
  geo::GeoPoint location;
  std::optional<Status> stated_status;
  bool operator==(const Report&) const = default;
};

struct CaseMeta {
  std::optional<double> age;  // years
  std::optional<Gender> gender;
  std::optional<Reason> reason;
  std::optional<Region> region;
  bool empty() const { return !age && !gender && !reason && !region; }
  bool operator==(const CaseMeta&) const = default;
};

// One missing-person incident. The found location and status may be unknown;
// cases without a found location are loadable but contribute neither error
// history nor evaluation ground truth.
struct Case {
  std::string case_id;
  std::optional<geo::GeoPoint> found_location;
  std::optional<Status> found_status;
  std::vector<Report> reports;
  CaseMeta meta;

  bool located() const { return found_location.has_value(); }
  bool operator==(const Case&) const = default;
};

struct Corpus {
  std::vector<Case> cases;  // sorted by case_id, ids unique

  const Case* find(std::string_view case_id) const;
  bool operator==(const Corpus&) const = default;
};

// Enforces: unique nonempty case ids, >=1 report per case, nonempty observer
// ids, at most one report per observer per case, in-range coordinates and
// ages. Throws ValidationError.
void validate(const Corpus& c);

// Parses the corpus JSON ({"cases": [...]}).  With strict=true unknown fields
// are errors; otherwise they produce a warning on stderr. Errors carry
// `source_name` plus the offending record index. Cases come back sorted by id.
Corpus parse_corpus(const std::string& text, bool strict = false,
                    const std::string& source_name = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path, bool strict = false);

std::string corpus_to_json(const Corpus& c);
void save_corpus(const Corpus& c, const std::filesystem::path& path);

struct HistoryOptions {
  // When true, cases with unknown found location still count toward the
  // participation denominator and the observer's participation numerator.
  bool include_unlocated_in_eta = false;
};

// Per-observer record of how far each report landed from the eventual found
// location, in miles, over the cases the observer took part in.
struct ObserverHistory {
  std::string observer_id;
  std::vector<std::pair<std::string, double>> pairs;  // (case_id, error miles)
  double eta{};  // participation fraction

  size_t n() const { return pairs.size(); }
};

// Distance in miles between a case's found location and one of its reports,
// measured in a planar frame anchored at the found location.
double report_error_distance(const Case& c, const Report& r);

ObserverHistory observer_history(const Corpus& c, std::string_view observer_id,
                                 const HistoryOptions& opt = {});
std::map<std::string, ObserverHistory> all_observer_histories(const Corpus& c,
                                                              const HistoryOptions& opt = {});

// Every observer's error records concatenated into one pseudo-observer, used
// as the fallback model for observers with no history of their own.
ObserverHistory pooled_history(const Corpus& c, const HistoryOptions& opt = {});

struct CorpusStats {
  int n_cases{};
  int n_located{};
  int n_reports{};
  std::map<std::string, int> by_status;      // alive / deceased / unknown
  std::map<std::string, int> by_gender;      // male / female / unknown
  std::map<std::string, int> by_age_bucket;  // under_13 / 13_to_30 / over_30 / unknown
  std::map<std::string, int> by_reason;
  std::map<std::string, int> by_region;
  std::map<int, int> participation_histogram;  // #cases participated -> #observers
};

CorpusStats corpus_stats(const Corpus& c);

struct ObserverStatusRow {
  std::string observer_id;
  int stated_alive{};
  int correct_alive{};
  int stated_deceased{};
  int correct_deceased{};
  std::optional<double> confidence_alive;     // correct_alive / stated_alive
  std::optional<double> confidence_deceased;  // correct_deceased / stated_deceased
  std::optional<double> ratio_alive;          // confidence / prior(alive)
  std::optional<double> ratio_deceased;
};

// Reliability of stated statuses, measured against cases whose found status
// is known. Observers that never state a status simply do not appear.
struct StatusStats {
  int n_with_status{};
  double prior_alive{};
  double prior_deceased{};
  std::vector<ObserverStatusRow> rows;  // sorted by observer_id
};

StatusStats status_stats(const Corpus& c);

}  // namespace sarplan::corpus
