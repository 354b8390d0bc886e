#include "sarplan/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "sarplan/error.hpp"
#include "sarplan/util.hpp"

namespace sarplan::alloc {

using nlohmann::json;

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kMergedOverlap: return "merged-overlap";
    case Provenance::kObserverHistory: return "observer-history";
    case Provenance::kOptRank: return "opt-rank";
  }
  return "opt-rank";
}

std::string to_string(TieBreakPolicy p) {
  return p == TieBreakPolicy::kHeuristics ? "heuristics" : "lex";
}

TieBreakPolicy parse_tiebreak(std::string_view s) {
  if (s == "heuristics") return TieBreakPolicy::kHeuristics;
  if (s == "lex") return TieBreakPolicy::kLexicographic;
  throw ValidationError("tiebreak: expected 'heuristics' or 'lex', got '" + std::string(s) + "'");
}

namespace {

bool lex_less(const geo::PlanarPoint& a, const geo::PlanarPoint& b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

}  // namespace

CaseFrame make_case_frame(const corpus::Case& c) {
  if (c.reports.empty()) {
    throw ValidationError("case '" + c.case_id + "' has no reports to plan from");
  }
  CaseFrame f;
  double lat = 0.0, lon = 0.0;
  for (const auto& r : c.reports) {
    lat += r.location.lat;
    lon += r.location.lon;
  }
  const auto n = static_cast<double>(c.reports.size());
  f.origin = {lat / n, lon / n};
  geo::validate(f.origin, "case '" + c.case_id + "' frame origin");

  for (const auto& r : c.reports) {
    f.reports.push_back({r.observer_id, geo::project(r.location, f.origin)});
  }
  // Canonical report order makes downstream floating-point sums independent
  // of the order reports appeared in the input file.
  std::sort(f.reports.begin(), f.reports.end(),
            [](const model::PlacedReport& a, const model::PlacedReport& b) {
              if (a.observer_id != b.observer_id) return a.observer_id < b.observer_id;
              return lex_less(a.location, b.location);
            });

  for (const auto& r : f.reports) {
    if (std::find(f.candidates.begin(), f.candidates.end(), r.location) == f.candidates.end()) {
      f.candidates.push_back(r.location);
    }
  }
  std::sort(f.candidates.begin(), f.candidates.end(), lex_less);
  return f;
}

QualityMap observer_quality_hit_radius(const corpus::Corpus& training, double radius_miles) {
  if (!(radius_miles > 0.0)) {
    throw ValidationError("observer quality: radius must be positive");
  }
  QualityMap q;
  for (const auto& [id, h] : corpus::all_observer_histories(training)) {
    q[id] = model::rho(h, radius_miles);
  }
  return q;
}

namespace {

double quality_or_zero(const QualityMap& q, const std::string& id) {
  auto it = q.find(id);
  return it == q.end() ? 0.0 : it->second;
}

}  // namespace

SearchPlan baseline_plan(const corpus::Case& c, const QualityMap& quality, double side) {
  if (!(side > 0.0)) throw ValidationError("baseline_plan: side must be positive");
  const CaseFrame frame = make_case_frame(c);

  const auto& pts = frame.candidates;
  const size_t n = pts.size();

  // A square's quality is the best track record among the observers that
  // reported exactly that location.
  std::vector<double> sq_quality(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (const auto& r : frame.reports) {
      if (r.location == pts[i]) {
        sq_quality[i] = std::max(sq_quality[i], quality_or_zero(quality, r.observer_id));
      }
    }
  }

  // Overlap components. Closed boundaries: squares sharing only an edge still
  // merge, consistent with coverage elsewhere.
  std::vector<int> comp(n, -1);
  int n_comp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<size_t> stack{i};
    comp[i] = n_comp;
    while (!stack.empty()) {
      const size_t u = stack.back();
      stack.pop_back();
      for (size_t v = 0; v < n; ++v) {
        if (comp[v] >= 0) continue;
        if (std::abs(pts[u].x - pts[v].x) <= side && std::abs(pts[u].y - pts[v].y) <= side) {
          comp[v] = n_comp;
          stack.push_back(v);
        }
      }
    }
    ++n_comp;
  }

  struct Cluster {
    std::vector<size_t> members;
    double area{};
    double best_quality{};
    geo::PlanarPoint lex_min;
  };
  std::vector<Cluster> clusters(static_cast<size_t>(n_comp));
  for (size_t i = 0; i < n; ++i) clusters[static_cast<size_t>(comp[i])].members.push_back(i);

  std::vector<size_t> isolated;
  std::vector<Cluster*> merged;
  for (auto& cl : clusters) {
    if (cl.members.size() < 2) {
      isolated.push_back(cl.members.front());
      continue;
    }
    std::vector<geo::GridSquare> squares;
    cl.best_quality = 0.0;
    cl.lex_min = pts[cl.members.front()];
    for (size_t m : cl.members) {
      squares.push_back({pts[m], side});
      cl.best_quality = std::max(cl.best_quality, sq_quality[m]);
      if (lex_less(pts[m], cl.lex_min)) cl.lex_min = pts[m];
    }
    cl.area = geo::union_area(squares);
    merged.push_back(&cl);
  }

  std::sort(merged.begin(), merged.end(), [](const Cluster* a, const Cluster* b) {
    if (a->area != b->area) return a->area > b->area;
    if (a->best_quality != b->best_quality) return a->best_quality > b->best_quality;
    return lex_less(a->lex_min, b->lex_min);
  });

  auto by_quality = [&](size_t a, size_t b) {
    if (sq_quality[a] != sq_quality[b]) return sq_quality[a] > sq_quality[b];
    return lex_less(pts[a], pts[b]);
  };

  SearchPlan plan;
  plan.case_id = c.case_id;
  plan.side = side;
  for (Cluster* cl : merged) {
    std::sort(cl->members.begin(), cl->members.end(), by_quality);
    for (size_t m : cl->members) {
      plan.entries.push_back({{pts[m], side}, cl->area, Provenance::kMergedOverlap});
    }
  }
  std::sort(isolated.begin(), isolated.end(), by_quality);
  for (size_t m : isolated) {
    plan.entries.push_back({{pts[m], side}, sq_quality[m], Provenance::kObserverHistory});
  }
  return plan;
}

geo::PlanarPoint tiebreak(std::span<const geo::PlanarPoint> tied,
                          std::span<const model::PlacedReport> reports,
                          const QualityMap& priors, double side) {
  if (tied.empty()) throw ValidationError("tiebreak: no candidates");
  if (!(side > 0.0)) throw ValidationError("tiebreak: side must be positive");

  struct Keyed {
    geo::PlanarPoint p;
    int covered{};
    double prior_sum{};
  };
  std::vector<Keyed> keyed;
  keyed.reserve(tied.size());
  for (const auto& p : tied) {
    Keyed k{p, 0, 0.0};
    const geo::GridSquare sq{p, side};
    for (const auto& r : reports) {
      if (geo::square_covers(sq, r.location)) {
        ++k.covered;
        k.prior_sum += quality_or_zero(priors, r.observer_id);
      }
    }
    keyed.push_back(k);
  }
  const Keyed* best = &keyed.front();
  for (const auto& k : keyed) {
    if (k.covered > best->covered ||
        (k.covered == best->covered &&
         (k.prior_sum > best->prior_sum ||
          (k.prior_sum == best->prior_sum && lex_less(k.p, best->p))))) {
      best = &k;
    }
  }
  return best->p;
}

namespace {

struct PreparedCase {
  CaseFrame frame;
  learn::IPInstance ip;
  std::vector<size_t> block_order;  // blocks by decreasing best weight
  std::vector<int> best_var;        // per block
  QualityMap priors;                // hit rate at each observer's best radius
};

PreparedCase prepare_case(const corpus::Corpus& training, const corpus::Case& test,
                          const PlannerOptions& opt) {
  PreparedCase pc;
  pc.frame = make_case_frame(test);

  const auto histories = corpus::all_observer_histories(training);
  if (histories.empty()) {
    throw ValidationError("planner: training corpus has no located case");
  }
  auto streams = learn::weight_streams(training, opt.side, opt.negatives);

  std::vector<std::string> case_observers;
  for (const auto& r : pc.frame.reports) {
    if (case_observers.empty() || case_observers.back() != r.observer_id) {
      case_observers.push_back(r.observer_id);  // reports are sorted by observer
    }
  }

  corpus::ObserverHistory pooled;
  learn::ObserverStreams pooled_streams;
  bool pooled_ready = false;
  auto ensure_pooled = [&] {
    if (pooled_ready) return;
    pooled = corpus::pooled_history(training);
    for (const auto& [id, st] : streams) {
      pooled_streams.positives.insert(pooled_streams.positives.end(), st.positives.begin(),
                                      st.positives.end());
      pooled_streams.negatives.insert(pooled_streams.negatives.end(), st.negatives.begin(),
                                      st.negatives.end());
    }
    pooled_ready = true;
  };

  std::vector<learn::ObserverPart> parts;
  for (const auto& id : case_observers) {
    auto hit = histories.find(id);
    if (hit != histories.end()) {
      parts.push_back({id, hit->second, streams.at(id)});
      continue;
    }
    switch (opt.missing) {
      case MissingObserverPolicy::kPooled:
        ensure_pooled();
        parts.push_back({id, pooled, pooled_streams});
        break;
      case MissingObserverPolicy::kSkip:
        break;
      case MissingObserverPolicy::kError:
        throw NotFoundError("planner: observer '" + id + "' has no training history");
    }
  }
  if (parts.empty()) {
    throw ValidationError("planner: no case observer has usable history");
  }

  learn::BuildOptions bopt;
  bopt.mode = opt.mode;
  bopt.epsilon = opt.epsilon;
  bopt.side = opt.side;
  bopt.negatives = opt.negatives;
  pc.ip = learn::build_ip_from_parts(parts, bopt);

  pc.best_var.resize(pc.ip.blocks.size());
  pc.block_order.resize(pc.ip.blocks.size());
  for (size_t b = 0; b < pc.ip.blocks.size(); ++b) {
    pc.best_var[b] = learn::best_variable_index(pc.ip, static_cast<int>(b));
    pc.block_order[b] = b;
  }
  std::sort(pc.block_order.begin(), pc.block_order.end(), [&](size_t a, size_t b) {
    const double wa = pc.ip.vars[static_cast<size_t>(pc.best_var[a])].weight;
    const double wb = pc.ip.vars[static_cast<size_t>(pc.best_var[b])].weight;
    if (wa != wb) return wa > wb;
    return pc.ip.blocks[a].observer_id < pc.ip.blocks[b].observer_id;
  });

  for (size_t b = 0; b < pc.ip.blocks.size(); ++b) {
    const auto& block = pc.ip.blocks[b];
    const auto& v = pc.ip.vars[static_cast<size_t>(pc.best_var[b])];
    pc.priors[block.observer_id] = block.table.rho_at(v.beta);
  }
  return pc;
}

geo::PlanarPoint pick_point(const std::vector<geo::PlanarPoint>& remaining,
                            const CaseFrame& frame, const model::ConstraintSet& constraints,
                            const PlannerOptions& opt, const QualityMap& priors, double* score_out) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<geo::PlanarPoint> tied;
  for (const auto& q : remaining) {
    const double s =
        model::score_point(q, frame.reports, constraints, model::MissingObserver::kSkip);
    if (s > best) {
      best = s;
      tied.clear();
    }
    if (s == best) tied.push_back(q);
  }
  *score_out = best;
  if (tied.size() == 1) return tied.front();
  if (opt.tiebreak == TieBreakPolicy::kHeuristics) {
    return tiebreak(tied, frame.reports, priors, opt.side);
  }
  geo::PlanarPoint win = tied.front();
  for (const auto& p : tied) {
    if (lex_less(p, win)) win = p;
  }
  return win;
}

}  // namespace

SearchPlan iterative_plan(const corpus::Corpus& training, const corpus::Case& test,
                          const PlannerOptions& opt, PlanTrace* trace) {
  if (opt.points_per_step < 1) {
    throw ValidationError("planner: points_per_step must be >= 1");
  }
  PreparedCase pc = prepare_case(training, test, opt);

  SearchPlan plan;
  plan.case_id = test.case_id;
  plan.side = opt.side;

  std::vector<geo::PlanarPoint> remaining = pc.frame.candidates;
  model::ConstraintSet constraints;

  for (int k = 1; k <= pc.ip.n_observers(); ++k) {
    if (opt.fresh_resolve) {
      const auto sol = learn::solve_exact(pc.ip, k);
      model::ConstraintSet next;
      for (const auto& c : sol.selected) next.emplace(c.observer_id, c);
      if (trace) {
        for (const auto& [id, c] : next) {
          if (!constraints.count(id)) trace->steps.push_back({k, id, c.alpha, c.beta});
        }
      }
      constraints = std::move(next);
    } else {
      const size_t b = pc.block_order[static_cast<size_t>(k - 1)];
      const auto c = learn::make_constraint(pc.ip, pc.ip.vars[static_cast<size_t>(pc.best_var[b])]);
      if (trace) trace->steps.push_back({k, c.observer_id, c.alpha, c.beta});
      constraints.emplace(c.observer_id, c);
    }

    for (int pick = 0; pick < opt.points_per_step && !remaining.empty(); ++pick) {
      double score = 0.0;
      const geo::PlanarPoint p = pick_point(remaining, pc.frame, constraints, opt, pc.priors, &score);
      plan.entries.push_back({{p, opt.side}, score, Provenance::kOptRank});
      remaining.erase(std::find(remaining.begin(), remaining.end(), p));
    }
    if (remaining.empty()) break;
  }
  return plan;
}

SearchPlan model_plan(const model::TrainedModel& m, const corpus::Case& c, double side,
                      TieBreakPolicy tb, MissingObserverPolicy missing) {
  if (!(side > 0.0)) throw ValidationError("model_plan: side must be positive");
  const CaseFrame frame = make_case_frame(c);

  model::ConstraintSet constraints = m.constraints();
  QualityMap priors;
  for (const auto& e : m.observers) priors[e.observer_id] = e.rho_beta;

  for (const auto& r : frame.reports) {
    if (constraints.count(r.observer_id)) continue;
    switch (missing) {
      case MissingObserverPolicy::kPooled: {
        auto pooled = m.pooled_constraint();
        if (!pooled) {
          throw NotFoundError("model_plan: observer '" + r.observer_id +
                              "' not in model and the model has no pooled entry");
        }
        pooled->observer_id = r.observer_id;
        priors[r.observer_id] = pooled->rho_beta;
        constraints.emplace(r.observer_id, *pooled);
        break;
      }
      case MissingObserverPolicy::kSkip:
        break;
      case MissingObserverPolicy::kError:
        throw NotFoundError("model_plan: observer '" + r.observer_id + "' not in model");
    }
  }

  SearchPlan plan;
  plan.case_id = c.case_id;
  plan.side = side;

  std::vector<geo::PlanarPoint> remaining = frame.candidates;
  PlannerOptions opt;
  opt.side = side;
  opt.tiebreak = tb;
  while (!remaining.empty()) {
    double score = 0.0;
    const geo::PlanarPoint p = pick_point(remaining, frame, constraints, opt, priors, &score);
    plan.entries.push_back({{p, side}, score, Provenance::kOptRank});
    remaining.erase(std::find(remaining.begin(), remaining.end(), p));
  }
  return plan;
}

void write_plan_csv(const SearchPlan& plan, const geo::GeoPoint& origin, std::ostream& out) {
  out << "rank,center_lat,center_lon,side_miles,score,provenance\n";
  int rank = 1;
  for (const auto& e : plan.entries) {
    const geo::GeoPoint center = geo::unproject(e.square.center, origin);
    out << rank++ << ',' << fmt_double(center.lat, 8) << ',' << fmt_double(center.lon, 8) << ','
        << fmt_double(e.square.side, 2) << ',' << fmt_double(e.score, 6) << ','
        << to_string(e.provenance) << '\n';
  }
}

std::string plan_to_geojson(const SearchPlan& plan, const geo::GeoPoint& origin) {
  json features = json::array();
  int rank = 1;
  for (const auto& e : plan.entries) {
    const double h = e.square.side / 2.0;
    const auto& c = e.square.center;
    const geo::PlanarPoint corners[5] = {{c.x - h, c.y - h},
                                         {c.x + h, c.y - h},
                                         {c.x + h, c.y + h},
                                         {c.x - h, c.y + h},
                                         {c.x - h, c.y - h}};
    json ring = json::array();
    for (const auto& p : corners) {
      const geo::GeoPoint g = geo::unproject(p, origin);
      ring.push_back(json::array({g.lon, g.lat}));
    }
    const geo::GeoPoint center = geo::unproject(c, origin);
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
         {"properties",
          {{"rank", rank},
           {"score", e.score},
           {"provenance", to_string(e.provenance)},
           {"center_lat", center.lat},
           {"center_lon", center.lon}}}});
    ++rank;
  }
  json root{{"type", "FeatureCollection"},
            {"case_id", plan.case_id},
            {"side_miles", plan.side},
            {"origin", {{"lat", origin.lat}, {"lon", origin.lon}}},
            {"features", features}};
  return root.dump(2) + "\n";
}

}  // namespace sarplan::alloc
