#include "sarplan/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sarplan/error.hpp"

namespace sarplan::learn {

std::string to_string(Mode m) { return m == Mode::kSingle ? "single" : "double"; }

Mode parse_mode(std::string_view s) {
  if (s == "single") return Mode::kSingle;
  if (s == "double") return Mode::kDouble;
  throw ValidationError("mode: expected 'single' or 'double', got '" + std::string(s) + "'");
}

CandidateRadii candidate_radii(const corpus::ObserverHistory& h) {
  if (h.pairs.empty()) {
    throw ValidationError("candidate_radii: observer '" + h.observer_id + "' has no history");
  }
  std::vector<double> ds;
  ds.reserve(h.pairs.size());
  for (const auto& [case_id, d] : h.pairs) ds.push_back(d);
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  return {h.observer_id, std::move(ds)};
}

std::map<std::string, ObserverStreams> weight_streams(const corpus::Corpus& training,
                                                      double side, NegativePolicy policy) {
  if (!(side > 0.0)) throw ValidationError("weight_streams: side must be positive");
  std::map<std::string, ObserverStreams> out;

  for (const auto& cs : training.cases) {
    if (!cs.located()) continue;

    // Work in the case frame anchored at the found location: the found point
    // is the origin and every report projects around it.
    std::vector<std::pair<std::string, geo::PlanarPoint>> placed;
    placed.reserve(cs.reports.size());
    for (const auto& r : cs.reports) {
      placed.emplace_back(r.observer_id, geo::project(r.location, *cs.found_location));
    }

    std::vector<geo::PlanarPoint> candidates;
    for (const auto& [id, p] : placed) {
      if (std::find(candidates.begin(), candidates.end(), p) == candidates.end()) {
        candidates.push_back(p);
      }
    }

    std::vector<geo::PlanarPoint> negatives;
    for (const auto& p : candidates) {
      const bool drop = policy == NegativePolicy::kExcludeCoveringSquare
                            ? geo::square_covers({p, side}, {0.0, 0.0})
                            : p == geo::PlanarPoint{0.0, 0.0};
      if (!drop) negatives.push_back(p);
    }

    for (const auto& [id, p] : placed) {
      auto& st = out[id];
      st.positives.push_back(geo::distance(p, {0.0, 0.0}));
      for (const auto& q : negatives) st.negatives.push_back(geo::distance(q, p));
    }
  }
  return out;
}

namespace {

void append_block(IPInstance& ip, const std::string& observer_id,
                  const corpus::ObserverHistory& history, const ObserverStreams& streams) {
  ObserverBlock block;
  block.observer_id = observer_id;
  block.table = model::RhoTable::from_history(history);
  block.table.observer_id = observer_id;
  block.first_var = static_cast<int>(ip.vars.size());

  const auto& radii = block.table.radii;
  const int block_index = static_cast<int>(ip.blocks.size());
  auto add_var = [&](double alpha, double beta) {
    const auto c =
        ip.mode == Mode::kSingle
            ? model::ObserverConstraint::single(observer_id, beta,
                                                block.table.rho_reg_at(beta, ip.epsilon))
            : model::ObserverConstraint::dual(observer_id, alpha, beta,
                                              block.table.rho_reg_at(alpha, ip.epsilon),
                                              block.table.rho_reg_at(beta, ip.epsilon));
    double w = 0.0;
    for (double d : streams.positives) w += c.log_zone(d);
    for (double d : streams.negatives) w -= c.log_zone(d);
    ip.vars.push_back({block_index, c.alpha, c.beta, w});
  };

  for (size_t b = 0; b < radii.size(); ++b) {
    if (ip.mode == Mode::kSingle) {
      add_var(0.0, radii[b]);
    } else {
      for (size_t a = 0; a <= b; ++a) add_var(radii[a], radii[b]);
    }
  }

  block.n_vars = static_cast<int>(ip.vars.size()) - block.first_var;
  ip.blocks.push_back(std::move(block));
}

IPInstance make_instance(const BuildOptions& opt) {
  if (opt.epsilon < 0.0) throw ValidationError("build_ip: epsilon must be >= 0");
  if (!(opt.side > 0.0)) throw ValidationError("build_ip: side must be positive");
  IPInstance ip;
  ip.mode = opt.mode;
  ip.epsilon = opt.epsilon;
  ip.side = opt.side;
  ip.negatives = opt.negatives;
  return ip;
}

}  // namespace

IPInstance build_ip(const corpus::Corpus& training, const BuildOptions& opt) {
  IPInstance ip = make_instance(opt);
  const auto histories = corpus::all_observer_histories(training);
  if (histories.empty()) {
    throw ValidationError("build_ip: training corpus has no located case");
  }
  const auto streams = weight_streams(training, opt.side, opt.negatives);
  for (const auto& [id, h] : histories) {
    append_block(ip, id, h, streams.at(id));
  }
  return ip;
}

IPInstance build_ip_from_parts(const std::vector<ObserverPart>& parts, const BuildOptions& opt) {
  IPInstance ip = make_instance(opt);
  if (parts.empty()) throw ValidationError("build_ip: no observers");
  for (const auto& p : parts) append_block(ip, p.observer_id, p.history, p.streams);
  return ip;
}

model::ObserverConstraint make_constraint(const IPInstance& ip, const IPVariable& v) {
  const auto& block = ip.blocks.at(static_cast<size_t>(v.block));
  if (ip.mode == Mode::kSingle) {
    return model::ObserverConstraint::single(block.observer_id, v.beta,
                                             block.table.rho_reg_at(v.beta, ip.epsilon));
  }
  return model::ObserverConstraint::dual(block.observer_id, v.alpha, v.beta,
                                         block.table.rho_reg_at(v.alpha, ip.epsilon),
                                         block.table.rho_reg_at(v.beta, ip.epsilon));
}

int best_variable_index(const IPInstance& ip, int block) {
  const auto& b = ip.blocks.at(static_cast<size_t>(block));
  if (b.n_vars <= 0) throw SolveError("block '" + b.observer_id + "' has no variables");
  int best = b.first_var;
  for (int i = b.first_var + 1; i < b.first_var + b.n_vars; ++i) {
    const auto& v = ip.vars[static_cast<size_t>(i)];
    const auto& w = ip.vars[static_cast<size_t>(best)];
    if (v.weight > w.weight ||
        (v.weight == w.weight && (v.beta < w.beta || (v.beta == w.beta && v.alpha < w.alpha)))) {
      best = i;
    }
  }
  return best;
}

namespace {

void check_k(const IPInstance& ip, int k) {
  if (k < 1 || k > ip.n_observers()) {
    throw ValidationError("solve: k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(ip.n_observers()) + "]");
  }
}

}  // namespace

ConstraintSolution solve_exact(const IPInstance& ip, int k) {
  check_k(ip, k);
  std::vector<int> best_var(ip.blocks.size());
  for (size_t b = 0; b < ip.blocks.size(); ++b) {
    best_var[b] = best_variable_index(ip, static_cast<int>(b));
  }
  std::vector<size_t> order(ip.blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double wa = ip.vars[static_cast<size_t>(best_var[a])].weight;
    const double wb = ip.vars[static_cast<size_t>(best_var[b])].weight;
    if (wa != wb) return wa > wb;
    return ip.blocks[a].observer_id < ip.blocks[b].observer_id;
  });

  ConstraintSolution sol;
  for (int i = 0; i < k; ++i) {
    const auto& v = ip.vars[static_cast<size_t>(best_var[order[static_cast<size_t>(i)]])];
    sol.selected.push_back(make_constraint(ip, v));
    sol.objective += v.weight;
  }
  return sol;
}

ConstraintSolution solve_bruteforce(const IPInstance& ip, int k, std::uint64_t cap) {
  check_k(ip, k);
  // Assignment space: every block independently skips or picks one variable.
  std::uint64_t space = 1;
  for (const auto& b : ip.blocks) {
    const auto factor = static_cast<std::uint64_t>(b.n_vars) + 1;
    if (space > cap / factor) {
      throw SolveError("solve_bruteforce: assignment space exceeds cap " + std::to_string(cap) +
                       " (" + std::to_string(ip.n_observers()) + " observers, " +
                       std::to_string(ip.n_vars()) + " variables)");
    }
    space *= factor;
  }

  const int n = ip.n_observers();
  std::vector<int> chosen;      // variable index per selected block
  std::vector<int> best_choice;
  double best_obj = -std::numeric_limits<double>::infinity();
  bool found = false;

  auto recurse = [&](auto&& self, int block, int remaining, double acc) -> void {
    if (remaining > n - block) return;  // not enough blocks left
    if (block == n) {
      if (remaining == 0 && (!found || acc > best_obj)) {
        best_obj = acc;
        best_choice = chosen;
        found = true;
      }
      return;
    }
    self(self, block + 1, remaining, acc);  // skip this observer
    if (remaining > 0) {
      const auto& b = ip.blocks[static_cast<size_t>(block)];
      for (int i = b.first_var; i < b.first_var + b.n_vars; ++i) {
        chosen.push_back(i);
        self(self, block + 1, remaining - 1, acc + ip.vars[static_cast<size_t>(i)].weight);
        chosen.pop_back();
      }
    }
  };
  recurse(recurse, 0, k, 0.0);

  if (!found) throw SolveError("solve_bruteforce: no feasible assignment");
  ConstraintSolution sol;
  sol.objective = best_obj;
  for (int vi : best_choice) sol.selected.push_back(make_constraint(ip, ip.vars[static_cast<size_t>(vi)]));
  return sol;
}

size_t expected_var_count_single(const IPInstance& ip) {
  size_t total = 0;
  for (const auto& b : ip.blocks) total += b.table.radii.size();
  return total;
}

size_t expected_var_count_double(const IPInstance& ip) {
  size_t total = 0;
  for (const auto& b : ip.blocks) {
    const size_t n = b.table.radii.size();
    total += n * (n + 1) / 2;
  }
  return total;
}

}  // namespace sarplan::learn
