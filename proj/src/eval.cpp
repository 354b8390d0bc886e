#include "sarplan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "sarplan/error.hpp"
#include "sarplan/util.hpp"

namespace sarplan::eval {

using nlohmann::json;

AreaResult area_until_found(const alloc::SearchPlan& plan, const geo::PlanarPoint& found,
                            const AreaOptions& opt) {
  if (plan.entries.empty()) throw ValidationError("area_until_found: empty plan");
  if (opt.expansion < 0.0) throw ValidationError("area_until_found: expansion must be >= 0");

  size_t stop = plan.entries.size();  // one past the last searched square
  bool hit = false;
  for (size_t i = 0; i < plan.entries.size(); ++i) {
    if (geo::square_covers(plan.entries[i].square, found, opt.expansion)) {
      stop = i + 1;
      hit = true;
      break;
    }
  }

  std::vector<geo::GridSquare> searched;
  searched.reserve(stop);
  for (size_t i = 0; i < stop; ++i) {
    geo::GridSquare sq = plan.entries[i].square;
    if (opt.expansion_in_area) sq.side += 2.0 * opt.expansion;
    searched.push_back(sq);
  }
  return {geo::union_area(searched), hit};
}

namespace {

std::string p_bound_string(double p) {
  // Smallest two-decimal bound strictly above p, e.g. 0.107 -> "p < 0.11".
  double b = std::floor(p * 100.0) / 100.0 + 0.01;
  if (b > 1.0) b = 1.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p < %.2f", b);
  return buf;
}

}  // namespace

TTest paired_t(std::span<const double> baseline, std::span<const double> method) {
  if (baseline.size() != method.size()) {
    throw ValidationError("paired_t: samples must have equal length");
  }
  const size_t n = baseline.size();
  if (n < 2) throw ValidationError("paired_t: need at least two pairs");

  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = baseline[i] - method[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTest r;
  r.df = static_cast<int>(n) - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.defined = true;
      r.t = 0.0;
      r.p_one_sided = 0.5;
    } else {
      // Constant nonzero difference: the statistic diverges. Flag it rather
      // than emitting an infinity.
      r.defined = false;
      r.t = 0.0;
      r.p_one_sided = mean > 0.0 ? 0.0 : 1.0;
    }
  } else {
    r.defined = true;
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    boost::math::students_t_distribution<double> dist(static_cast<double>(r.df));
    r.p_one_sided = boost::math::cdf(boost::math::complement(dist, r.t));
  }
  r.bound = p_bound_string(r.p_one_sided);
  return r;
}

std::vector<Aggregate> aggregate_rows(const std::vector<CaseResult>& cases) {
  std::vector<std::pair<double, bool>> keys;
  for (const auto& cr : cases) {
    for (const auto& row : cr.rows) {
      const std::pair<double, bool> key{row.side, row.dog};
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
  }

  std::vector<Aggregate> out;
  for (const auto& [side, dog] : keys) {
    Aggregate a;
    a.side = side;
    a.dog = dog;
    std::vector<double> base, opt;
    for (const auto& cr : cases) {
      for (const auto& row : cr.rows) {
        if (row.side != side || row.dog != dog) continue;
        if (!row.baseline.found || !row.opt.found) continue;
        base.push_back(row.baseline.area);
        opt.push_back(row.opt.area);
        const double diff = row.baseline.area - row.opt.area;
        if (diff > 1e-9) {
          ++a.improved;
        } else if (diff < -1e-9) {
          ++a.worsened;
        } else {
          ++a.tied;
        }
      }
    }
    a.n_pairs = static_cast<int>(base.size());
    if (a.n_pairs > 0) {
      for (double v : base) a.mean_baseline += v;
      for (double v : opt) a.mean_opt += v;
      a.mean_baseline /= a.n_pairs;
      a.mean_opt /= a.n_pairs;
      a.mean_reduction = a.mean_baseline - a.mean_opt;
    }
    if (a.n_pairs >= 2) {
      a.ttest = paired_t(base, opt);
    } else {
      a.ttest.defined = false;
      a.ttest.df = std::max(0, a.n_pairs - 1);
    }
    out.push_back(a);
  }
  return out;
}

EvalReport loo_evaluate(const corpus::Corpus& c, const EvalConfig& cfg) {
  if (cfg.sides.empty()) throw ValidationError("evaluate: no sides configured");
  for (double s : cfg.sides) {
    if (!(s > 0.0)) throw ValidationError("evaluate: sides must be positive");
  }
  if (!(cfg.dog_expansion >= 0.0)) throw ValidationError("evaluate: dog expansion must be >= 0");

  std::vector<const corpus::Case*> located;
  for (const auto& cs : c.cases) {
    if (cs.located()) located.push_back(&cs);
  }
  if (located.size() < 2) {
    throw ValidationError("evaluate: need at least two cases with found locations, have " +
                          std::to_string(located.size()));
  }

  std::vector<const corpus::Case*> tests;
  if (cfg.case_filter) {
    std::set<std::string> wanted(cfg.case_filter->begin(), cfg.case_filter->end());
    for (const auto* cs : located) {
      if (wanted.erase(cs->case_id)) tests.push_back(cs);
    }
    if (!wanted.empty()) {
      throw ValidationError("evaluate: case filter names unknown or unlocated case '" +
                            *wanted.begin() + "'");
    }
  } else {
    tests = located;
  }
  if (tests.empty()) throw ValidationError("evaluate: no cases to evaluate");

  EvalReport report;
  report.sides = cfg.sides;
  report.dog_variant = cfg.dog_variant;
  report.epsilon = cfg.epsilon;
  report.mode = learn::to_string(cfg.mode);

  for (const auto* test : tests) {
    corpus::Corpus training;
    training.cases.reserve(c.cases.size() - 1);
    for (const auto& cs : c.cases) {
      if (cs.case_id != test->case_id) training.cases.push_back(cs);
    }

    const alloc::QualityMap quality =
        cfg.custom_quality ? *cfg.custom_quality
                           : alloc::observer_quality_hit_radius(training, cfg.baseline_quality_radius);

    const alloc::CaseFrame frame = alloc::make_case_frame(*test);
    const geo::PlanarPoint found = geo::project(*test->found_location, frame.origin);

    CaseResult cr;
    cr.case_id = test->case_id;
    for (double side : cfg.sides) {
      alloc::PlannerOptions popt;
      popt.side = side;
      popt.epsilon = cfg.epsilon;
      popt.mode = cfg.mode;
      popt.negatives = cfg.negatives;
      popt.missing = cfg.missing;
      popt.tiebreak = cfg.tiebreak;
      popt.fresh_resolve = cfg.fresh_resolve;

      const alloc::SearchPlan base_plan = alloc::baseline_plan(*test, quality, side);
      const alloc::SearchPlan opt_plan = alloc::iterative_plan(training, *test, popt);

      std::vector<std::pair<bool, double>> variants{{false, 0.0}};
      if (cfg.dog_variant) variants.push_back({true, cfg.dog_expansion});
      for (const auto& [dog, expansion] : variants) {
        AreaOptions aopt;
        aopt.expansion = expansion;
        aopt.expansion_in_area = cfg.expansion_in_area;
        const AreaResult b = area_until_found(base_plan, found, aopt);
        const AreaResult o = area_until_found(opt_plan, found, aopt);
        cr.rows.push_back({side, dog, {b.area, b.found}, {o.area, o.found}});
      }
    }
    report.cases.push_back(std::move(cr));
  }

  report.aggregates = aggregate_rows(report.cases);
  return report;
}

std::vector<SweepRow> epsilon_sweep(const corpus::Corpus& c, std::span<const double> epsilons,
                                    const EvalConfig& cfg) {
  if (epsilons.empty()) throw ValidationError("sweep: no epsilon values");
  std::vector<SweepRow> rows;
  for (double eps : epsilons) {
    if (eps < 0.0) throw ValidationError("sweep: epsilon must be >= 0");
    EvalConfig run = cfg;
    run.epsilon = eps;
    run.sides = {1.0, 2.0};
    run.dog_variant = true;
    const EvalReport rep = loo_evaluate(c, run);

    SweepRow row;
    row.epsilon = eps;
    for (double side : run.sides) {
      for (bool dog : {false, true}) {
        double base_total = 0.0, opt_total = 0.0;
        for (const auto& cr : rep.cases) {
          for (const auto& r : cr.rows) {
            if (r.side != side || r.dog != dog) continue;
            base_total += r.baseline.area;
            opt_total += r.opt.area;
          }
        }
        const double frac = opt_total / base_total;
        if (side == 1.0 && !dog) row.fraction_1x1 = frac;
        if (side == 2.0 && !dog) row.fraction_2x2 = frac;
        if (side == 1.0 && dog) row.fraction_1x1_dog = frac;
        if (side == 2.0 && dog) row.fraction_2x2_dog = frac;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_eval_csv(const EvalReport& r, std::ostream& out) {
  out << "row,case_id,side,dog,baseline_area,baseline_found,opt_area,opt_found,"
         "n_pairs,mean_baseline,mean_opt,mean_reduction,improved,worsened,tied,"
         "t,df,p,p_bound\n";
  for (const auto& cr : r.cases) {
    for (const auto& row : cr.rows) {
      out << "case," << cr.case_id << ',' << fmt_double(row.side, 0) << ',' << (row.dog ? 1 : 0)
          << ',' << fmt_double(row.baseline.area, 4) << ',' << (row.baseline.found ? 1 : 0) << ','
          << fmt_double(row.opt.area, 4) << ',' << (row.opt.found ? 1 : 0)
          << ",,,,,,,,,,,\n";
    }
  }
  for (const auto& a : r.aggregates) {
    out << "aggregate,," << fmt_double(a.side, 0) << ',' << (a.dog ? 1 : 0) << ",,,,,"
        << a.n_pairs << ',' << fmt_double(a.mean_baseline, 4) << ',' << fmt_double(a.mean_opt, 4)
        << ',' << fmt_double(a.mean_reduction, 4) << ',' << a.improved << ',' << a.worsened << ','
        << a.tied << ',';
    if (a.ttest.defined) {
      out << fmt_double(a.ttest.t, 4) << ',' << a.ttest.df << ','
          << fmt_double(a.ttest.p_one_sided, 6) << ',' << a.ttest.bound;
    } else {
      out << "undefined," << a.ttest.df << ",,";
    }
    out << '\n';
  }
}

namespace {

json outcome_to_json(const Outcome& o) { return json{{"area", o.area}, {"found", o.found}}; }

json ttest_to_json(const TTest& t) {
  json j{{"defined", t.defined}, {"df", t.df}};
  if (t.defined) {
    j["t"] = t.t;
    j["p_one_sided"] = t.p_one_sided;
    j["p_bound"] = t.bound;
  }
  return j;
}

}  // namespace

std::string eval_to_json(const EvalReport& r) {
  json cases = json::array();
  for (const auto& cr : r.cases) {
    json rows = json::array();
    for (const auto& row : cr.rows) {
      rows.push_back({{"side", row.side},
                      {"dog", row.dog},
                      {"baseline", outcome_to_json(row.baseline)},
                      {"optimized", outcome_to_json(row.opt)}});
    }
    cases.push_back({{"case_id", cr.case_id}, {"rows", rows}});
  }
  json aggs = json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"side", a.side},
                    {"dog", a.dog},
                    {"n_pairs", a.n_pairs},
                    {"mean_baseline", a.mean_baseline},
                    {"mean_optimized", a.mean_opt},
                    {"mean_reduction", a.mean_reduction},
                    {"improved", a.improved},
                    {"worsened", a.worsened},
                    {"tied", a.tied},
                    {"ttest", ttest_to_json(a.ttest)}});
  }
  json root{{"sides", r.sides},       {"dog_variant", r.dog_variant},
            {"epsilon", r.epsilon},   {"mode", r.mode},
            {"cases", cases},         {"aggregates", aggs}};
  return root.dump(2) + "\n";
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "epsilon,fraction_1x1,fraction_2x2,fraction_1x1_dog,fraction_2x2_dog\n";
  for (const auto& r : rows) {
    out << fmt_double(r.epsilon, 2) << ',' << fmt_double(r.fraction_1x1, 6) << ','
        << fmt_double(r.fraction_2x2, 6) << ',' << fmt_double(r.fraction_1x1_dog, 6) << ','
        << fmt_double(r.fraction_2x2_dog, 6) << '\n';
  }
}

}  // namespace sarplan::eval
