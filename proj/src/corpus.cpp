#include "sarplan/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sarplan/error.hpp"

namespace sarplan::corpus {

using nlohmann::json;

std::string to_string(Status s) { return s == Status::kAlive ? "alive" : "deceased"; }
std::string to_string(Gender g) { return g == Gender::kMale ? "male" : "female"; }

std::string to_string(Reason r) {
  switch (r) {
    case Reason::kAccidental: return "accidental";
    case Reason::kBipolar: return "bipolar";
    case Reason::kDrowning: return "drowning";
    case Reason::kFoulPlay: return "foul_play";
    case Reason::kNatural: return "natural";
    case Reason::kRunaway: return "runaway";
    case Reason::kSelfInflicted: return "self_inflicted";
    case Reason::kStaged: return "staged";
    case Reason::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

std::string to_string(Region r) {
  switch (r) {
    case Region::kWest: return "west";
    case Region::kMidwest: return "midwest";
    case Region::kNortheast: return "northeast";
    case Region::kSouth: return "south";
    case Region::kInternational: return "international";
  }
  return "west";
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw ValidationError(where + ": " + msg);
}

template <typename Enum>
Enum parse_enum(std::string_view s, std::initializer_list<Enum> values, const char* kind) {
  for (Enum v : values) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError(std::string(kind) + ": unknown value '" + std::string(s) + "'");
}

}  // namespace

Status parse_status(std::string_view s) {
  return parse_enum(s, {Status::kAlive, Status::kDeceased}, "status");
}

Gender parse_gender(std::string_view s) {
  return parse_enum(s, {Gender::kMale, Gender::kFemale}, "gender");
}

Reason parse_reason(std::string_view s) {
  return parse_enum(s,
                    {Reason::kAccidental, Reason::kBipolar, Reason::kDrowning,
                     Reason::kFoulPlay, Reason::kNatural, Reason::kRunaway,
                     Reason::kSelfInflicted, Reason::kStaged, Reason::kUndetermined},
                    "reason");
}

Region parse_region(std::string_view s) {
  return parse_enum(s,
                    {Region::kWest, Region::kMidwest, Region::kNortheast,
                     Region::kSouth, Region::kInternational},
                    "region");
}

const Case* Corpus::find(std::string_view case_id) const {
  auto it = std::lower_bound(cases.begin(), cases.end(), case_id,
                             [](const Case& c, std::string_view id) { return c.case_id < id; });
  if (it == cases.end() || it->case_id != case_id) return nullptr;
  return &*it;
}

void validate(const Corpus& c) {
  std::set<std::string_view> ids;
  for (const auto& cs : c.cases) {
    const std::string where = "case '" + cs.case_id + "'";
    if (cs.case_id.empty()) fail("corpus", "empty case_id");
    if (!ids.insert(cs.case_id).second) fail("corpus", "duplicate case_id '" + cs.case_id + "'");
    if (cs.reports.empty()) fail(where, "a case needs at least one report");
    if (cs.found_location) geo::validate(*cs.found_location, where + " found location");
    if (cs.meta.age && (!std::isfinite(*cs.meta.age) || *cs.meta.age < 0.0)) {
      fail(where, "age must be finite and >= 0");
    }
    std::set<std::string_view> observers;
    for (const auto& r : cs.reports) {
      if (r.observer_id.empty()) fail(where, "empty observer id");
      if (!observers.insert(r.observer_id).second) {
        fail(where, "observer '" + r.observer_id + "' reported twice");
      }
      geo::validate(r.location, where + " report by '" + r.observer_id + "'");
    }
  }
}

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, bool strict,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      if (strict) fail(where, "unknown field '" + item.key() + "'");
      std::cerr << "warning: " << where << ": ignoring unknown field '" << item.key() << "'\n";
    }
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  if (!it->is_number()) fail(where, std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  if (!it->is_string()) fail(where, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Report parse_report(const json& j, bool strict, const std::string& where) {
  if (!j.is_object()) fail(where, "report must be an object");
  check_keys(j, {"observer", "lat", "lon", "stated_status"}, strict, where);
  Report r;
  r.observer_id = get_string(j, "observer", where);
  r.location = {get_number(j, "lat", where), get_number(j, "lon", where)};
  if (auto it = j.find("stated_status"); it != j.end()) {
    if (!it->is_string()) fail(where, "stated_status must be a string");
    r.stated_status = parse_status(it->get<std::string>());
  }
  return r;
}

Case parse_case(const json& j, bool strict, const std::string& where) {
  if (!j.is_object()) fail(where, "case must be an object");
  check_keys(j, {"case_id", "found", "reports", "meta"}, strict, where);
  Case c;
  c.case_id = get_string(j, "case_id", where);

  if (auto fit = j.find("found"); fit != j.end()) {
    if (!fit->is_object()) fail(where, "found must be an object");
    check_keys(*fit, {"lat", "lon", "status"}, strict, where + ".found");
    const bool has_lat = fit->contains("lat");
    const bool has_lon = fit->contains("lon");
    if (has_lat != has_lon) fail(where, "found lat/lon must appear together");
    if (has_lat) {
      c.found_location = geo::GeoPoint{get_number(*fit, "lat", where + ".found"),
                                       get_number(*fit, "lon", where + ".found")};
    }
    if (auto sit = fit->find("status"); sit != fit->end()) {
      if (!sit->is_string()) fail(where, "found status must be a string");
      c.found_status = parse_status(sit->get<std::string>());
    }
  }

  auto rit = j.find("reports");
  if (rit == j.end() || !rit->is_array()) fail(where, "missing 'reports' array");
  for (size_t i = 0; i < rit->size(); ++i) {
    c.reports.push_back(parse_report((*rit)[i], strict, where + ".reports[" + std::to_string(i) + "]"));
  }

  if (auto mit = j.find("meta"); mit != j.end()) {
    if (!mit->is_object()) fail(where, "meta must be an object");
    check_keys(*mit, {"age", "gender", "reason", "region"}, strict, where + ".meta");
    if (mit->contains("age")) c.meta.age = get_number(*mit, "age", where + ".meta");
    if (mit->contains("gender")) c.meta.gender = parse_gender(get_string(*mit, "gender", where + ".meta"));
    if (mit->contains("reason")) c.meta.reason = parse_reason(get_string(*mit, "reason", where + ".meta"));
    if (mit->contains("region")) c.meta.region = parse_region(get_string(*mit, "region", where + ".meta"));
  }
  return c;
}

}  // namespace

Corpus parse_corpus(const std::string& text, bool strict, const std::string& source_name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(source_name + ": not valid JSON: " + e.what());
  }
  if (!root.is_object()) fail(source_name, "top level must be an object");
  check_keys(root, {"cases"}, strict, source_name);
  auto cit = root.find("cases");
  if (cit == root.end() || !cit->is_array()) fail(source_name, "missing 'cases' array");

  Corpus corpus;
  for (size_t i = 0; i < cit->size(); ++i) {
    corpus.cases.push_back(
        parse_case((*cit)[i], strict, source_name + ": cases[" + std::to_string(i) + "]"));
  }
  std::stable_sort(corpus.cases.begin(), corpus.cases.end(),
                   [](const Case& a, const Case& b) { return a.case_id < b.case_id; });
  try {
    validate(corpus);
  } catch (const ValidationError& e) {
    throw ValidationError(source_name + ": " + e.what());
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), strict, path.string());
}

std::string corpus_to_json(const Corpus& c) {
  json cases = json::array();
  for (const auto& cs : c.cases) {
    json jc;
    jc["case_id"] = cs.case_id;
    if (cs.found_location || cs.found_status) {
      json found = json::object();
      if (cs.found_location) {
        found["lat"] = cs.found_location->lat;
        found["lon"] = cs.found_location->lon;
      }
      if (cs.found_status) found["status"] = to_string(*cs.found_status);
      jc["found"] = found;
    }
    json reports = json::array();
    for (const auto& r : cs.reports) {
      json jr;
      jr["observer"] = r.observer_id;
      jr["lat"] = r.location.lat;
      jr["lon"] = r.location.lon;
      if (r.stated_status) jr["stated_status"] = to_string(*r.stated_status);
      reports.push_back(jr);
    }
    jc["reports"] = reports;
    if (!cs.meta.empty()) {
      json meta = json::object();
      if (cs.meta.age) meta["age"] = *cs.meta.age;
      if (cs.meta.gender) meta["gender"] = to_string(*cs.meta.gender);
      if (cs.meta.reason) meta["reason"] = to_string(*cs.meta.reason);
      if (cs.meta.region) meta["region"] = to_string(*cs.meta.region);
      jc["meta"] = meta;
    }
    cases.push_back(jc);
  }
  return json{{"cases", cases}}.dump(2) + "\n";
}

void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write corpus file '" + path.string() + "'");
  out << corpus_to_json(c);
}

double report_error_distance(const Case& c, const Report& r) {
  if (!c.located()) {
    throw ValidationError("case '" + c.case_id + "': error distance needs a found location");
  }
  return geo::distance(geo::project(r.location, *c.found_location), {0.0, 0.0});
}

namespace {

// Shared scan for the history builders. Returns located-case count and the
// per-observer case participation over all cases (located or not).
struct ParticipationScan {
  int n_located = 0;
  int n_total = 0;
  std::map<std::string, int> cases_located;  // observer -> located cases joined
  std::map<std::string, int> cases_total;    // observer -> all cases joined
};

ParticipationScan scan(const Corpus& c) {
  ParticipationScan s;
  s.n_total = static_cast<int>(c.cases.size());
  for (const auto& cs : c.cases) {
    if (cs.located()) ++s.n_located;
    for (const auto& r : cs.reports) {
      ++s.cases_total[r.observer_id];
      if (cs.located()) ++s.cases_located[r.observer_id];
    }
  }
  return s;
}

double eta_for(const ParticipationScan& s, const std::string& id, const HistoryOptions& opt) {
  const int num = opt.include_unlocated_in_eta
                      ? (s.cases_total.count(id) ? s.cases_total.at(id) : 0)
                      : (s.cases_located.count(id) ? s.cases_located.at(id) : 0);
  const int den = opt.include_unlocated_in_eta ? s.n_total : s.n_located;
  if (den == 0) throw ValidationError("observer_history: corpus has no usable cases");
  return static_cast<double>(num) / den;
}

}  // namespace

std::map<std::string, ObserverHistory> all_observer_histories(const Corpus& c,
                                                              const HistoryOptions& opt) {
  const auto s = scan(c);
  std::map<std::string, ObserverHistory> out;
  for (const auto& cs : c.cases) {
    if (!cs.located()) continue;
    for (const auto& r : cs.reports) {
      auto& h = out[r.observer_id];
      h.observer_id = r.observer_id;
      h.pairs.emplace_back(cs.case_id, report_error_distance(cs, r));
    }
  }
  for (auto& [id, h] : out) h.eta = eta_for(s, id, opt);
  return out;
}

ObserverHistory observer_history(const Corpus& c, std::string_view observer_id,
                                 const HistoryOptions& opt) {
  auto all = all_observer_histories(c, opt);
  auto it = all.find(std::string(observer_id));
  if (it == all.end()) {
    throw NotFoundError("observer '" + std::string(observer_id) +
                        "' has no located case in the corpus");
  }
  return std::move(it->second);
}

ObserverHistory pooled_history(const Corpus& c, const HistoryOptions& opt) {
  ObserverHistory pooled;
  pooled.observer_id = "(pooled)";
  for (const auto& [id, h] : all_observer_histories(c, opt)) {
    pooled.pairs.insert(pooled.pairs.end(), h.pairs.begin(), h.pairs.end());
  }
  // The pool aggregates every observer, so by construction it "participates"
  // in every case that has any report; leave eta at full participation.
  pooled.eta = 1.0;
  return pooled;
}

CorpusStats corpus_stats(const Corpus& c) {
  CorpusStats st;
  st.n_cases = static_cast<int>(c.cases.size());
  for (const auto& cs : c.cases) {
    if (cs.located()) ++st.n_located;
    st.n_reports += static_cast<int>(cs.reports.size());
    ++st.by_status[cs.found_status ? to_string(*cs.found_status) : "unknown"];
    ++st.by_gender[cs.meta.gender ? to_string(*cs.meta.gender) : "unknown"];
    if (cs.meta.age) {
      const double a = *cs.meta.age;
      ++st.by_age_bucket[a < 13.0 ? "under_13" : (a <= 30.0 ? "13_to_30" : "over_30")];
    } else {
      ++st.by_age_bucket["unknown"];
    }
    if (cs.meta.reason) ++st.by_reason[to_string(*cs.meta.reason)];
    if (cs.meta.region) ++st.by_region[to_string(*cs.meta.region)];
  }
  std::map<std::string, int> participation;
  for (const auto& cs : c.cases) {
    for (const auto& r : cs.reports) ++participation[r.observer_id];
  }
  for (const auto& [id, n] : participation) ++st.participation_histogram[n];
  return st;
}

StatusStats status_stats(const Corpus& c) {
  StatusStats st;
  int alive = 0;
  for (const auto& cs : c.cases) {
    if (!cs.found_status) continue;
    ++st.n_with_status;
    if (*cs.found_status == Status::kAlive) ++alive;
  }
  if (st.n_with_status == 0) return st;
  st.prior_alive = static_cast<double>(alive) / st.n_with_status;
  st.prior_deceased = 1.0 - st.prior_alive;

  std::map<std::string, ObserverStatusRow> rows;
  for (const auto& cs : c.cases) {
    if (!cs.found_status) continue;
    for (const auto& r : cs.reports) {
      if (!r.stated_status) continue;
      auto& row = rows[r.observer_id];
      row.observer_id = r.observer_id;
      if (*r.stated_status == Status::kAlive) {
        ++row.stated_alive;
        if (*cs.found_status == Status::kAlive) ++row.correct_alive;
      } else {
        ++row.stated_deceased;
        if (*cs.found_status == Status::kDeceased) ++row.correct_deceased;
      }
    }
  }
  for (auto& [id, row] : rows) {
    if (row.stated_alive > 0) {
      row.confidence_alive = static_cast<double>(row.correct_alive) / row.stated_alive;
      if (st.prior_alive > 0.0) row.ratio_alive = *row.confidence_alive / st.prior_alive;
    }
    if (row.stated_deceased > 0) {
      row.confidence_deceased = static_cast<double>(row.correct_deceased) / row.stated_deceased;
      if (st.prior_deceased > 0.0) row.ratio_deceased = *row.confidence_deceased / st.prior_deceased;
    }
    st.rows.push_back(row);
  }
  return st;
}

}  // namespace sarplan::corpus
