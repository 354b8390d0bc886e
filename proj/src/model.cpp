#include "sarplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sarplan/error.hpp"

namespace sarplan::model {

using nlohmann::json;

namespace {
constexpr const char* kModelSchema = "sarplan-model/1";
}

double clamp_prob(double p) {
  return std::min(1.0 - kProbFloor, std::max(kProbFloor, p));
}

double rho(const corpus::ObserverHistory& h, double beta) {
  if (h.pairs.empty()) {
    throw ValidationError("rho: observer '" + h.observer_id +
                          "' has no history; use the pooled fallback");
  }
  if (!(beta >= 0.0)) throw ValidationError("rho: beta must be >= 0");
  size_t hits = 0;
  for (const auto& [case_id, d] : h.pairs) {
    if (d <= beta) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(h.pairs.size());
}

double rho_reg(const corpus::ObserverHistory& h, double beta, double epsilon) {
  if (epsilon < 0.0) throw ValidationError("rho_reg: epsilon must be >= 0");
  return clamp_prob(rho(h, beta) - epsilon * (1.0 - h.eta));
}

RhoTable RhoTable::from_history(const corpus::ObserverHistory& h) {
  if (h.pairs.empty()) {
    throw ValidationError("RhoTable: observer '" + h.observer_id + "' has no history");
  }
  std::vector<double> ds;
  ds.reserve(h.pairs.size());
  for (const auto& [case_id, d] : h.pairs) ds.push_back(d);
  std::sort(ds.begin(), ds.end());

  RhoTable t;
  t.observer_id = h.observer_id;
  t.eta = h.eta;
  const auto n = static_cast<double>(ds.size());
  for (size_t i = 0; i < ds.size(); ++i) {
    if (i + 1 < ds.size() && ds[i + 1] == ds[i]) continue;  // keep the last duplicate
    t.radii.push_back(ds[i]);
    t.rho.push_back(static_cast<double>(i + 1) / n);
  }
  return t;
}

double RhoTable::rho_at(double beta) const {
  if (!(beta >= 0.0)) throw ValidationError("rho_at: beta must be >= 0");
  // Largest recorded radius <= beta carries the hit rate; below the smallest
  // radius nothing has been observed to land that close.
  auto it = std::upper_bound(radii.begin(), radii.end(), beta);
  if (it == radii.begin()) return 0.0;
  return rho[static_cast<size_t>(std::distance(radii.begin(), it)) - 1];
}

double RhoTable::rho_reg_at(double beta, double epsilon) const {
  if (epsilon < 0.0) throw ValidationError("rho_reg_at: epsilon must be >= 0");
  return clamp_prob(rho_at(beta) - epsilon * (1.0 - eta));
}

ObserverConstraint ObserverConstraint::single(std::string observer_id, double beta,
                                              double rho_beta_reg) {
  if (!(beta >= 0.0)) throw ValidationError("constraint: beta must be >= 0");
  ObserverConstraint c;
  c.observer_id = std::move(observer_id);
  c.alpha = 0.0;
  c.beta = beta;
  c.rho_alpha = clamp_prob(rho_beta_reg);
  c.rho_beta = clamp_prob(rho_beta_reg);
  c.log_in_alpha = std::log(c.rho_beta);
  c.log_in_ring = c.log_in_alpha;
  c.log_out = std::log(clamp_prob(1.0 - c.rho_beta));
  return c;
}

ObserverConstraint ObserverConstraint::dual(std::string observer_id, double alpha, double beta,
                                            double rho_alpha_reg, double rho_beta_reg) {
  if (!(alpha >= 0.0) || !(beta >= alpha)) {
    throw ValidationError("constraint: need 0 <= alpha <= beta");
  }
  ObserverConstraint c;
  c.observer_id = std::move(observer_id);
  c.alpha = alpha;
  c.beta = beta;
  c.rho_alpha = clamp_prob(rho_alpha_reg);
  c.rho_beta = clamp_prob(rho_beta_reg);
  c.log_in_alpha = std::log(c.rho_alpha);
  c.log_in_ring = std::log(clamp_prob(c.rho_beta - c.rho_alpha));
  c.log_out = std::log(clamp_prob(1.0 - c.rho_beta));
  return c;
}

double ObserverConstraint::log_zone(double dist) const {
  if (dist <= alpha) return log_in_alpha;
  if (dist <= beta) return log_in_ring;
  return log_out;
}

double score_point(const geo::PlanarPoint& p, std::span<const PlacedReport> reports,
                   const ConstraintSet& constraints, MissingObserver policy) {
  double total = 0.0;
  for (const auto& r : reports) {
    auto it = constraints.find(r.observer_id);
    if (it == constraints.end()) {
      if (policy == MissingObserver::kSkip) continue;
      throw NotFoundError("score_point: no constraint for observer '" + r.observer_id + "'");
    }
    total += it->second.log_zone(geo::distance(p, r.location));
  }
  return total;
}

std::vector<RankedPlanEntry> rank_candidates(std::span<const PlacedReport> reports,
                                             const ConstraintSet& constraints,
                                             MissingObserver policy) {
  std::vector<geo::PlanarPoint> candidates;
  for (const auto& r : reports) {
    if (std::find(candidates.begin(), candidates.end(), r.location) == candidates.end()) {
      candidates.push_back(r.location);
    }
  }
  std::vector<RankedPlanEntry> out;
  out.reserve(candidates.size());
  for (const auto& p : candidates) {
    out.push_back({p, score_point(p, reports, constraints, policy), 0});
  }
  std::sort(out.begin(), out.end(), [](const RankedPlanEntry& a, const RankedPlanEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.point.x != b.point.x) return a.point.x < b.point.x;
    return a.point.y < b.point.y;
  });
  for (size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

namespace {

json entry_to_json(const ModelEntry& e, double epsilon) {
  return json{{"alpha", e.alpha},       {"beta", e.beta}, {"rho_alpha", e.rho_alpha},
              {"rho_beta", e.rho_beta}, {"eta", e.eta},   {"epsilon", epsilon}};
}

ModelEntry entry_from_json(const std::string& id, const json& j) {
  ModelEntry e;
  e.observer_id = id;
  e.alpha = j.at("alpha").get<double>();
  e.beta = j.at("beta").get<double>();
  e.rho_alpha = j.at("rho_alpha").get<double>();
  e.rho_beta = j.at("rho_beta").get<double>();
  e.eta = j.at("eta").get<double>();
  return e;
}

// Single-mode entries must not rebuild as a dual band: their alpha is 0 and
// rho_alpha duplicates rho_beta, so the dual ring would collapse to the
// probability floor instead of carrying the within-beta mass.
ObserverConstraint constraint_from_entry(const ModelEntry& e, const std::string& mode) {
  if (mode == "single") return ObserverConstraint::single(e.observer_id, e.beta, e.rho_beta);
  return ObserverConstraint::dual(e.observer_id, e.alpha, e.beta, e.rho_alpha, e.rho_beta);
}

}  // namespace

ConstraintSet TrainedModel::constraints() const {
  ConstraintSet out;
  for (const auto& e : observers) out.emplace(e.observer_id, constraint_from_entry(e, mode));
  return out;
}

std::optional<ObserverConstraint> TrainedModel::pooled_constraint() const {
  if (!pooled) return std::nullopt;
  return constraint_from_entry(*pooled, mode);
}

std::string model_to_json(const TrainedModel& m) {
  json obs = json::object();
  for (const auto& e : m.observers) obs[e.observer_id] = entry_to_json(e, m.epsilon);
  json j{{"schema", kModelSchema}, {"mode", m.mode}, {"epsilon", m.epsilon}, {"observers", obs}};
  if (m.pooled) j["pooled"] = entry_to_json(*m.pooled, m.epsilon);
  return j.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: not valid JSON: ") + e.what());
  }
  TrainedModel m;
  try {
    if (j.at("schema").get<std::string>() != kModelSchema) {
      throw ValidationError("model: unsupported schema '" +
                            j.at("schema").get<std::string>() + "'");
    }
    m.mode = j.at("mode").get<std::string>();
    if (m.mode != "single" && m.mode != "double") {
      throw ValidationError("model: mode must be 'single' or 'double', got '" + m.mode + "'");
    }
  m.epsilon = j.at("epsilon").get<double>();
    for (const auto& item : j.at("observers").items()) {
      m.observers.push_back(entry_from_json(item.key(), item.value()));
    }
    if (j.contains("pooled")) m.pooled = entry_from_json("(pooled)", j["pooled"]);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
  std::sort(m.observers.begin(), m.observers.end(),
            [](const ModelEntry& a, const ModelEntry& b) { return a.observer_id < b.observer_id; });
  for (const auto& e : m.observers) {
    if (!(e.alpha >= 0.0) || !(e.beta >= e.alpha)) {
      throw ValidationError("model: observer '" + e.observer_id + "' violates 0 <= alpha <= beta");
    }
  }
  return m;
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file '" + path.string() + "'");
  out << model_to_json(m);
}

}  // namespace sarplan::model
