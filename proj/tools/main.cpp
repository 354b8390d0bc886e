// sarplan: rank ground-search squares for missing-person cases from observer
// reports and the observers' historical accuracy.
//
// Subcommands: synth | stats | train | rank | evaluate | sweep.
// A JSON config file may preload any flag value; explicit flags win.
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sarplan/alloc.hpp"
#include "sarplan/corpus.hpp"
#include "sarplan/error.hpp"
#include "sarplan/eval.hpp"
#include "sarplan/learn.hpp"
#include "sarplan/model.hpp"
#include "sarplan/synth.hpp"
#include "sarplan/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sarplan;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240811;

struct Options {
  std::string config_path;
  std::string corpus_path;
  std::string model_path;
  std::string out_dir = ".";
  std::string synth_config_path;
  std::string quality_file;
  std::string method = "opt";
  std::string case_id;
  std::string k = "auto";
  std::string mode = "double";
  std::string tiebreak = "heuristics";
  std::string baseline_quality = "hit1mi";
  std::string negatives = "covering";
  std::string epsilons = "0,0.1,0.2,0.3,0.4,0.5";
  double side = 1.0;
  bool side_given = false;
  double epsilon = 0.1;
  std::uint64_t seed = kDefaultSeed;
  int n_cases = 0;  // synth override, 0 = keep config value
  bool strict = false;
  bool dog = true;
  bool fresh_resolve = false;
  bool expansion_in_area = false;
};

// The config file must be read before CLI11 parses the flags it defaults, so
// pre-scan argv for --config.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void apply_config_file(Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw ValidationError("cannot open config file '" + o.config_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ValidationError("config file: not valid JSON: " + std::string(e.what()));
  }
  auto str = [&](const char* key, std::string& into) {
    if (j.contains(key)) into = j.at(key).get<std::string>();
  };
  str("corpus", o.corpus_path);
  str("model", o.model_path);
  str("out", o.out_dir);
  str("synth_config", o.synth_config_path);
  str("quality_file", o.quality_file);
  str("method", o.method);
  str("case", o.case_id);
  str("k", o.k);
  str("mode", o.mode);
  str("tiebreak", o.tiebreak);
  str("baseline_quality", o.baseline_quality);
  str("negatives", o.negatives);
  str("epsilons", o.epsilons);
  if (j.contains("side")) {
    o.side = j.at("side").get<double>();
    o.side_given = true;
  }
  if (j.contains("epsilon")) o.epsilon = j.at("epsilon").get<double>();
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("cases")) o.n_cases = j.at("cases").get<int>();
  if (j.contains("strict")) o.strict = j.at("strict").get<bool>();
  if (j.contains("dog")) o.dog = j.at("dog").get<bool>();
  if (j.contains("fresh_resolve")) o.fresh_resolve = j.at("fresh_resolve").get<bool>();
  if (j.contains("expansion_in_area")) o.expansion_in_area = j.at("expansion_in_area").get<bool>();
}

learn::NegativePolicy parse_negatives(const std::string& s) {
  if (s == "covering") return learn::NegativePolicy::kExcludeCoveringSquare;
  if (s == "literal") return learn::NegativePolicy::kExcludeFoundOnly;
  throw ValidationError("negatives: expected 'covering' or 'literal', got '" + s + "'");
}

std::vector<double> parse_epsilons(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("epsilons: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ValidationError("epsilons: empty list");
  return out;
}

alloc::QualityMap load_quality_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open quality file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ValidationError("quality file: not valid JSON: " + std::string(e.what()));
  }
  alloc::QualityMap q;
  for (const auto& item : j.items()) {
    if (!item.value().is_number()) {
      throw ValidationError("quality file: value for '" + item.key() + "' must be a number");
    }
    q[item.key()] = item.value().get<double>();
  }
  return q;
}

fs::path prepare_out_dir(const Options& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

corpus::SynthConfig default_synth_config() {
  corpus::SynthConfig cfg;
  cfg.observers = {{"o1", 0.5, 0.9, 0.3, 0.8},
                   {"o2", 1.0, 0.9, 0.3, 0.7},
                   {"o3", 2.0, 0.8, 0.3, 0.6},
                   {"o4", 4.0, 0.8, 0.3, 0.6},
                   {"o5", 2.0, 0.7, 0.3, 0.5}};
  return cfg;
}

int cmd_synth(const Options& o) {
  corpus::SynthConfig cfg = default_synth_config();
  if (!o.synth_config_path.empty()) {
    std::ifstream in(o.synth_config_path);
    if (!in) throw ValidationError("cannot open synth config '" + o.synth_config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    cfg = corpus::synth_config_from_json(buf.str());
  }
  if (o.n_cases != 0) cfg.n_cases = o.n_cases;
  cfg.validate();

  std::cout << "seed: " << o.seed << "\n";
  const corpus::Corpus c = corpus::synth_generate(cfg, o.seed);
  const fs::path dir = prepare_out_dir(o);
  corpus::save_corpus(c, dir / "corpus.json");

  json planted = json::parse(corpus::synth_config_to_json(cfg));
  planted["seed"] = o.seed;
  write_text(dir / "planted.json", planted.dump(2) + "\n");
  std::cout << "wrote " << (dir / "corpus.json").string() << " (" << c.cases.size()
            << " cases) and planted.json\n";
  return 0;
}

int cmd_stats(const Options& o) {
  if (o.corpus_path.empty()) throw ValidationError("stats: --corpus is required");
  const corpus::Corpus c = corpus::load_corpus(o.corpus_path, o.strict);
  const corpus::CorpusStats st = corpus::corpus_stats(c);
  const fs::path dir = prepare_out_dir(o);

  std::ostringstream csv;
  csv << "section,category,count\n";
  csv << "cases,total," << st.n_cases << "\n";
  csv << "cases,located," << st.n_located << "\n";
  csv << "reports,total," << st.n_reports << "\n";
  for (const auto& [k, v] : st.by_status) csv << "status," << k << ',' << v << "\n";
  for (const auto& [k, v] : st.by_gender) csv << "gender," << k << ',' << v << "\n";
  for (const auto& [k, v] : st.by_age_bucket) csv << "age," << k << ',' << v << "\n";
  for (const auto& [k, v] : st.by_reason) csv << "reason," << k << ',' << v << "\n";
  for (const auto& [k, v] : st.by_region) csv << "region," << k << ',' << v << "\n";
  for (const auto& [k, v] : st.participation_histogram) {
    csv << "participation," << k << ',' << v << "\n";
  }
  write_text(dir / "stats.csv", csv.str());

  const corpus::StatusStats ss = corpus::status_stats(c);
  if (ss.rows.empty()) {
    std::cout << "no stated statuses in corpus; status table omitted\n";
  } else {
    std::ostringstream sc;
    sc << "observer,stated_alive,correct_alive,confidence_alive,ratio_alive,"
          "stated_deceased,correct_deceased,confidence_deceased,ratio_deceased\n";
    auto cell = [](const std::optional<double>& v) {
      return v ? fmt_double(*v, 6) : std::string();
    };
    sc << "(prior),,," << fmt_double(ss.prior_alive, 6) << ",,,,"
       << fmt_double(ss.prior_deceased, 6) << ",\n";
    for (const auto& row : ss.rows) {
      sc << row.observer_id << ',' << row.stated_alive << ',' << row.correct_alive << ','
         << cell(row.confidence_alive) << ',' << cell(row.ratio_alive) << ','
         << row.stated_deceased << ',' << row.correct_deceased << ','
         << cell(row.confidence_deceased) << ',' << cell(row.ratio_deceased) << "\n";
    }
    write_text(dir / "status_stats.csv", sc.str());
  }
  std::cout << "wrote " << (dir / "stats.csv").string() << "\n";
  return 0;
}

learn::BuildOptions build_options(const Options& o) {
  learn::BuildOptions b;
  b.mode = learn::parse_mode(o.mode);
  b.epsilon = o.epsilon;
  b.side = o.side;
  b.negatives = parse_negatives(o.negatives);
  if (b.epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
  return b;
}

int resolve_k(const std::string& k, int n_observers) {
  if (k == "auto") return n_observers;
  int v = 0;
  try {
    v = std::stoi(k);
  } catch (const std::exception&) {
    throw ValidationError("k: expected 'auto' or an integer, got '" + k + "'");
  }
  return v;
}

int cmd_train(const Options& o) {
  if (o.corpus_path.empty()) throw ValidationError("train: --corpus is required");
  const corpus::Corpus c = corpus::load_corpus(o.corpus_path, o.strict);
  const learn::BuildOptions bopt = build_options(o);
  const learn::IPInstance ip = learn::build_ip(c, bopt);
  const int k = resolve_k(o.k, ip.n_observers());
  const learn::ConstraintSolution sol = learn::solve_exact(ip, k);

  model::TrainedModel m;
  m.mode = learn::to_string(bopt.mode);
  m.epsilon = bopt.epsilon;
  std::map<std::string, double> etas;
  for (const auto& b : ip.blocks) etas[b.observer_id] = b.table.eta;
  for (const auto& cst : sol.selected) {
    m.observers.push_back({cst.observer_id, cst.alpha, cst.beta, cst.rho_alpha, cst.rho_beta,
                           etas.at(cst.observer_id)});
  }
  std::sort(m.observers.begin(), m.observers.end(),
            [](const model::ModelEntry& a, const model::ModelEntry& b) {
              return a.observer_id < b.observer_id;
            });

  // Pooled fallback entry: calibrate the same way against everyone's history.
  {
    learn::ObserverPart part;
    part.observer_id = "(pooled)";
    part.history = corpus::pooled_history(c);
    for (const auto& [id, st] : learn::weight_streams(c, bopt.side, bopt.negatives)) {
      part.streams.positives.insert(part.streams.positives.end(), st.positives.begin(),
                                    st.positives.end());
      part.streams.negatives.insert(part.streams.negatives.end(), st.negatives.begin(),
                                    st.negatives.end());
    }
    const learn::IPInstance pooled_ip = learn::build_ip_from_parts({part}, bopt);
    const auto ps = learn::solve_exact(pooled_ip, 1);
    const auto& cst = ps.selected.front();
    m.pooled = model::ModelEntry{"(pooled)", cst.alpha, cst.beta, cst.rho_alpha, cst.rho_beta,
                                 part.history.eta};
  }

  const fs::path dir = prepare_out_dir(o);
  model::save_model(m, dir / "model.json");
  std::cout << "trained " << m.observers.size() << " observers (k=" << k << ", mode=" << m.mode
            << ", epsilon=" << m.epsilon << "); wrote " << (dir / "model.json").string() << "\n";
  return 0;
}

int cmd_rank(const Options& o) {
  if (o.corpus_path.empty()) throw ValidationError("rank: --corpus is required");
  if (o.case_id.empty()) throw ValidationError("rank: --case is required");
  const corpus::Corpus c = corpus::load_corpus(o.corpus_path, o.strict);
  const corpus::Case* test = c.find(o.case_id);
  if (!test) throw NotFoundError("rank: case '" + o.case_id + "' not in corpus");

  corpus::Corpus training;
  for (const auto& cs : c.cases) {
    if (cs.case_id != test->case_id) training.cases.push_back(cs);
  }

  alloc::SearchPlan plan;
  if (o.method == "baseline") {
    alloc::QualityMap quality;
    if (o.baseline_quality == "hit1mi") {
      quality = alloc::observer_quality_hit_radius(training, 1.0);
    } else if (o.baseline_quality == "custom") {
      if (o.quality_file.empty()) {
        throw ValidationError("rank: --baseline-quality custom needs --quality-file");
      }
      quality = load_quality_file(o.quality_file);
    } else {
      throw ValidationError("baseline-quality: expected 'hit1mi' or 'custom'");
    }
    plan = alloc::baseline_plan(*test, quality, o.side);
  } else if (o.method == "opt") {
    alloc::PlannerOptions popt;
    popt.side = o.side;
    popt.epsilon = o.epsilon;
    popt.mode = learn::parse_mode(o.mode);
    popt.negatives = parse_negatives(o.negatives);
    popt.missing = o.strict ? alloc::MissingObserverPolicy::kError
                            : alloc::MissingObserverPolicy::kPooled;
    popt.tiebreak = alloc::parse_tiebreak(o.tiebreak);
    popt.fresh_resolve = o.fresh_resolve;
    plan = alloc::iterative_plan(training, *test, popt);
  } else if (o.method == "model") {
    if (o.model_path.empty()) throw ValidationError("rank: --method model needs --model");
    const model::TrainedModel m = model::load_model(o.model_path);
    plan = alloc::model_plan(m, *test, o.side, alloc::parse_tiebreak(o.tiebreak),
                             o.strict ? alloc::MissingObserverPolicy::kError
                                      : alloc::MissingObserverPolicy::kPooled);
  } else {
    throw ValidationError("rank: method must be baseline, opt, or model");
  }

  const geo::GeoPoint origin = alloc::make_case_frame(*test).origin;
  const fs::path dir = prepare_out_dir(o);
  std::ostringstream csv;
  alloc::write_plan_csv(plan, origin, csv);
  write_text(dir / "plan.csv", csv.str());
  write_text(dir / "plan.geojson", alloc::plan_to_geojson(plan, origin));
  std::cout << "ranked " << plan.entries.size() << " squares for case '" << test->case_id
            << "'; wrote plan.csv and plan.geojson\n";
  return 0;
}

eval::EvalConfig eval_config(const Options& o) {
  eval::EvalConfig cfg;
  if (o.side_given) cfg.sides = {o.side};
  cfg.dog_variant = o.dog;
  cfg.expansion_in_area = o.expansion_in_area;
  cfg.epsilon = o.epsilon;
  cfg.mode = learn::parse_mode(o.mode);
  cfg.negatives = parse_negatives(o.negatives);
  cfg.missing = o.strict ? alloc::MissingObserverPolicy::kError
                         : alloc::MissingObserverPolicy::kPooled;
  cfg.tiebreak = alloc::parse_tiebreak(o.tiebreak);
  cfg.fresh_resolve = o.fresh_resolve;
  if (o.baseline_quality == "custom") {
    if (o.quality_file.empty()) {
      throw ValidationError("--baseline-quality custom needs --quality-file");
    }
    cfg.custom_quality = load_quality_file(o.quality_file);
  } else if (o.baseline_quality != "hit1mi") {
    throw ValidationError("baseline-quality: expected 'hit1mi' or 'custom'");
  }
  return cfg;
}

int cmd_evaluate(const Options& o) {
  if (o.corpus_path.empty()) throw ValidationError("evaluate: --corpus is required");
  const corpus::Corpus c = corpus::load_corpus(o.corpus_path, o.strict);
  const eval::EvalReport rep = eval::loo_evaluate(c, eval_config(o));
  const fs::path dir = prepare_out_dir(o);
  std::ostringstream csv;
  eval::write_eval_csv(rep, csv);
  write_text(dir / "eval.csv", csv.str());
  write_text(dir / "eval.json", eval::eval_to_json(rep));
  std::cout << "evaluated " << rep.cases.size() << " cases; wrote eval.csv and eval.json\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  if (o.corpus_path.empty()) throw ValidationError("sweep: --corpus is required");
  const corpus::Corpus c = corpus::load_corpus(o.corpus_path, o.strict);
  const std::vector<double> eps = parse_epsilons(o.epsilons);
  const auto rows = eval::epsilon_sweep(c, eps, eval_config(o));
  const fs::path dir = prepare_out_dir(o);
  std::ostringstream csv;
  eval::write_sweep_csv(rows, csv);
  write_text(dir / "sweep.csv", csv.str());
  std::cout << "swept " << rows.size() << " epsilon values; wrote sweep.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  try {
    o.config_path = find_config_arg(argc, argv);
    apply_config_file(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"search-square planning from observer reports"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "JSON config file preloading any flag");

  auto add_common = [&](CLI::App* cmd) {
    // The config file was already applied by the pre-scan; registering the
    // flag here just lets it appear after the subcommand name too.
    cmd->add_option("--config", o.config_path, "JSON config file preloading any flag");
    cmd->add_option("--corpus", o.corpus_path, "corpus JSON file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--strict", o.strict, "reject unknown fields and unknown observers");
  };
  auto add_modeling = [&](CLI::App* cmd) {
    cmd->add_option("--epsilon", o.epsilon, "participation regularizer");
    cmd->add_option("--mode", o.mode, "constraint mode: single|double")
        ->check(CLI::IsMember({"single", "double"}));
    cmd->add_option("--negatives", o.negatives, "negative-point policy: covering|literal")
        ->check(CLI::IsMember({"covering", "literal"}));
    cmd->add_option("--tiebreak", o.tiebreak, "tie policy: heuristics|lex")
        ->check(CLI::IsMember({"heuristics", "lex"}));
    cmd->add_flag("--fresh-resolve", o.fresh_resolve, "re-solve the program at every cardinality");
  };
  auto add_side = [&](CLI::App* cmd) {
    cmd->add_option("--side", o.side, "square side in miles: 1|2")
        ->check(CLI::IsMember({1.0, 2.0}))
        ->each([&](const std::string&) { o.side_given = true; });
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth);
  synth->add_option("--synth-config", o.synth_config_path, "generator config JSON");
  synth->add_option("--cases", o.n_cases, "number of cases (overrides config)");
  synth->add_option("--seed", o.seed, "RNG seed");

  CLI::App* stats = app.add_subcommand("stats", "corpus summary tables");
  add_common(stats);

  CLI::App* train = app.add_subcommand("train", "learn observer constraints");
  add_common(train);
  add_modeling(train);
  add_side(train);
  train->add_option("--k", o.k, "constraint cardinality: auto|N");

  CLI::App* rank = app.add_subcommand("rank", "order search squares for one case");
  add_common(rank);
  add_modeling(rank);
  add_side(rank);
  rank->add_option("--case", o.case_id, "case id to plan");
  rank->add_option("--method", o.method, "baseline|opt|model")
      ->check(CLI::IsMember({"baseline", "opt", "model"}));
  rank->add_option("--model", o.model_path, "trained model JSON (for --method model)");
  rank->add_option("--baseline-quality", o.baseline_quality, "hit1mi|custom")
      ->check(CLI::IsMember({"hit1mi", "custom"}));
  rank->add_option("--quality-file", o.quality_file, "observer->quality JSON");

  CLI::App* evaluate = app.add_subcommand("evaluate", "leave-one-out comparison");
  add_common(evaluate);
  add_modeling(evaluate);
  add_side(evaluate);
  evaluate->add_flag("--dog,!--no-dog", o.dog, "also score with a 1-mile detection buffer");
  evaluate->add_flag("--expansion-in-area", o.expansion_in_area,
                     "charge the detection buffer to searched area");
  evaluate->add_option("--baseline-quality", o.baseline_quality, "hit1mi|custom")
      ->check(CLI::IsMember({"hit1mi", "custom"}));
  evaluate->add_option("--quality-file", o.quality_file, "observer->quality JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate across epsilon values");
  add_common(sweep);
  add_modeling(sweep);
  sweep->add_option("--epsilons", o.epsilons, "comma-separated epsilon list");
  sweep->add_option("--baseline-quality", o.baseline_quality, "hit1mi|custom")
      ->check(CLI::IsMember({"hit1mi", "custom"}));
  sweep->add_option("--quality-file", o.quality_file, "observer->quality JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (stats->parsed()) return cmd_stats(o);
    if (train->parsed()) return cmd_train(o);
    if (rank->parsed()) return cmd_rank(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (sweep->parsed()) return cmd_sweep(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
