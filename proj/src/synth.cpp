#include "sarplan/synth.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "sarplan/error.hpp"
#include "sarplan/util.hpp"

namespace sarplan::corpus {

using nlohmann::json;

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

const Reason kReasons[] = {Reason::kAccidental,    Reason::kBipolar, Reason::kDrowning,
                           Reason::kFoulPlay,      Reason::kNatural, Reason::kRunaway,
                           Reason::kSelfInflicted, Reason::kStaged,  Reason::kUndetermined};
const Region kRegions[] = {Region::kWest, Region::kMidwest, Region::kNortheast,
                           Region::kSouth, Region::kInternational};

std::string case_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%04d", i);
  return buf;
}
}  // namespace

void SynthConfig::validate() const {
  if (n_cases <= 0) throw ValidationError("synth: n_cases must be positive");
  if (observers.empty()) throw ValidationError("synth: need at least one observer");
  if (!(extent_miles > 0.0)) throw ValidationError("synth: extent_miles must be positive");
  geo::validate(region_origin, "synth: region_origin");
  if (region_origin.lat <= -89.0 || region_origin.lat >= 89.0) {
    throw ValidationError("synth: region_origin latitude too close to a pole");
  }
  if (p_alive < 0.0 || p_alive > 1.0) throw ValidationError("synth: p_alive outside [0, 1]");
  if (unlocated_fraction < 0.0 || unlocated_fraction > 1.0) {
    throw ValidationError("synth: unlocated_fraction outside [0, 1]");
  }
  std::set<std::string_view> ids;
  for (const auto& o : observers) {
    if (o.id.empty()) throw ValidationError("synth: empty observer id");
    if (!ids.insert(o.id).second) throw ValidationError("synth: duplicate observer '" + o.id + "'");
    if (o.radius < 0.0 || !std::isfinite(o.radius)) {
      throw ValidationError("synth: observer '" + o.id + "' radius must be finite and >= 0");
    }
    if (o.participation <= 0.0 || o.participation > 1.0) {
      throw ValidationError("synth: observer '" + o.id + "' participation outside (0, 1]");
    }
    if (o.state_prob < 0.0 || o.state_prob > 1.0 || o.state_accuracy < 0.0 ||
        o.state_accuracy > 1.0) {
      throw ValidationError("synth: observer '" + o.id + "' status probabilities outside [0, 1]");
    }
  }
}

Corpus synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  Corpus corpus;

  for (int i = 0; i < cfg.n_cases; ++i) {
    Case cs;
    cs.case_id = case_name(i);

    const double half = cfg.extent_miles / 2.0;
    const geo::PlanarPoint found_planar{rng.uniform(-half, half), rng.uniform(-half, half)};
    const geo::GeoPoint found_geo = geo::unproject(found_planar, cfg.region_origin);
    const Status actual = rng.bernoulli(cfg.p_alive) ? Status::kAlive : Status::kDeceased;
    cs.found_status = actual;

    // Withholding the location still burns a draw, so the stream of draws per
    // case is fixed and corpora with different unlocated fractions stay
    // comparable case by case.
    const bool withhold = rng.uniform() < cfg.unlocated_fraction;
    if (!withhold) cs.found_location = found_geo;

    if (cfg.with_meta) {
      cs.meta.age = static_cast<double>(rng.uniform_int(1, 80));
      cs.meta.gender = rng.bernoulli(0.5) ? Gender::kMale : Gender::kFemale;
      cs.meta.reason = kReasons[rng.uniform_int(0, 8)];
      cs.meta.region = kRegions[rng.uniform_int(0, 4)];
    }

    for (const auto& o : cfg.observers) {
      if (!rng.bernoulli(o.participation)) continue;
      const double d = rng.uniform() * o.radius;
      const double theta = rng.uniform() * kTwoPi;
      Report r;
      r.observer_id = o.id;
      // Displace in a frame anchored at the true found location so the
      // planted distance survives the geographic round trip exactly.
      r.location = geo::unproject({d * std::cos(theta), d * std::sin(theta)}, found_geo);
      if (rng.bernoulli(o.state_prob)) {
        const bool correct = rng.bernoulli(o.state_accuracy);
        const Status stated =
            correct ? actual : (actual == Status::kAlive ? Status::kDeceased : Status::kAlive);
        r.stated_status = stated;
      }
      cs.reports.push_back(r);
    }

    if (cs.reports.empty()) {
      // Every case needs a report; conscript the most reliable participant.
      const SynthObserver* pick = &cfg.observers.front();
      for (const auto& o : cfg.observers) {
        if (o.participation > pick->participation) pick = &o;
      }
      const double d = rng.uniform() * pick->radius;
      const double theta = rng.uniform() * kTwoPi;
      Report r;
      r.observer_id = pick->id;
      r.location = geo::unproject({d * std::cos(theta), d * std::sin(theta)}, found_geo);
      cs.reports.push_back(r);
    }

    corpus.cases.push_back(std::move(cs));
  }

  validate(corpus);
  return corpus;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  json obs = json::array();
  for (const auto& o : cfg.observers) {
    obs.push_back({{"id", o.id},
                   {"radius", o.radius},
                   {"participation", o.participation},
                   {"state_prob", o.state_prob},
                   {"state_accuracy", o.state_accuracy}});
  }
  json j{{"n_cases", cfg.n_cases},
         {"observers", obs},
         {"extent_miles", cfg.extent_miles},
         {"region_origin", {{"lat", cfg.region_origin.lat}, {"lon", cfg.region_origin.lon}}},
         {"p_alive", cfg.p_alive},
         {"unlocated_fraction", cfg.unlocated_fraction},
         {"with_meta", cfg.with_meta}};
  return j.dump(2) + "\n";
}

SynthConfig synth_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth config: not valid JSON: ") + e.what());
  }
  SynthConfig cfg;
  cfg.observers.clear();
  try {
    if (j.contains("n_cases")) cfg.n_cases = j["n_cases"].get<int>();
    if (j.contains("extent_miles")) cfg.extent_miles = j["extent_miles"].get<double>();
    if (j.contains("region_origin")) {
      cfg.region_origin = {j["region_origin"]["lat"].get<double>(),
                           j["region_origin"]["lon"].get<double>()};
    }
    if (j.contains("p_alive")) cfg.p_alive = j["p_alive"].get<double>();
    if (j.contains("unlocated_fraction")) {
      cfg.unlocated_fraction = j["unlocated_fraction"].get<double>();
    }
    if (j.contains("with_meta")) cfg.with_meta = j["with_meta"].get<bool>();
    if (j.contains("observers")) {
      for (const auto& jo : j["observers"]) {
        SynthObserver o;
        o.id = jo.at("id").get<std::string>();
        if (jo.contains("radius")) o.radius = jo["radius"].get<double>();
        if (jo.contains("participation")) o.participation = jo["participation"].get<double>();
        if (jo.contains("state_prob")) o.state_prob = jo["state_prob"].get<double>();
        if (jo.contains("state_accuracy")) o.state_accuracy = jo["state_accuracy"].get<double>();
        cfg.observers.push_back(o);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace sarplan::corpus
