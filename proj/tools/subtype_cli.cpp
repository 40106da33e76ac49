// Command-line pipeline: synthetic corpus generation, supervised baselines,
// min-cut graph labeling, and cross-operator inference experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "subtype/io.hpp"
#include "subtype/pipeline.hpp"
#include "subtype/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subtype;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (path.empty() || !fs::exists(path))
    throw UsageError("input file not found: " + path);
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config,
                    const std::vector<std::string>& inputs) {
  json digests = json::object();
  for (const auto& p : inputs) digests[p] = io::file_digest(p);
  json manifest = {{"schema_version", 1},
                   {"tool_version", kToolVersion},
                   {"command", command},
                   {"config", config},
                   {"input_digests", digests}};
  io::write_json(out_dir + "/manifest.json", manifest);
}

json confusion_json(const ConfusionMatrix& cm) { return cm.to_json(); }

// ---------------------------------------------------------------- gen ----

int cmd_gen(const std::string& out_dir, SynthConfig cfg) {
  cfg.validate();
  fs::create_directories(out_dir);
  SynthCorpus corpus = generate_cdrs(cfg);
  io::write_cdrs(out_dir + "/cdrs.csv", corpus.records);
  io::write_truth(out_dir + "/truth.csv", corpus.truth);
  if (corpus.has_bipartite) {
    io::write_bipartite(out_dir + "/edges.csv", out_dir + "/sides.csv",
                        corpus.bipartite);
    // oracle-only file: hidden B labels for test scoring, not inference
    std::unordered_map<UserId, SubscriptionLabel> b_truth;
    for (size_t i = 0; i < corpus.bipartite.b_ids.size(); ++i)
      b_truth[corpus.bipartite.b_ids[i]] = corpus.hidden_b_labels[i];
    io::write_truth(out_dir + "/b_truth_oracle.csv", b_truth);
  }
  write_manifest(out_dir, "gen", cfg.to_json(), {});
  std::cout << "wrote " << corpus.records.size() << " records for "
            << cfg.n_users << " users to " << out_dir << "\n";
  return kExitOk;
}

// ----------------------------------------------------------- classify ----

int cmd_classify(const std::string& cdrs, const std::string& truth_path,
                 const std::string& out_dir, const ClassifyOptions& opt,
                 bool export_features) {
  require_file(cdrs);
  require_file(truth_path);
  fs::create_directories(out_dir);
  auto records = io::read_cdrs(cdrs);
  auto truth = io::read_truth(truth_path);
  if (truth.empty()) throw UsageError("truth file has no labels");

  ClassifyOutcome out = run_classify(records, truth, opt);

  json metrics = {{"schema_version", 1},
                  {"n_classified", out.n_classified},
                  {"train_per_class", out.train_per_class},
                  {"test_size", out.test_size},
                  {"portion_attributes", opt.portion},
                  {"naive_bayes", confusion_json(out.nb)},
                  {"adaboost", confusion_json(out.adaboost)}};
  io::write_json(out_dir + "/metrics.json", metrics);
  io::write_json(out_dir + "/nb_model.json", out.nb_model.to_json());
  io::write_json(out_dir + "/adaboost_model.json", out.ada_model.to_json());

  if (export_features) {
    ClassifiedData data =
        build_classified(records, truth, opt.filter, opt.portion);
    std::vector<io::FeatureRow> rows;
    for (size_t r = 0; r < data.nodes.size(); ++r)
      rows.push_back({data.graph.user_at(data.nodes[r]), data.labels[r],
                      data.features[r]});
    io::write_features(out_dir + "/features.csv", rows, opt.portion);
  }

  json config = {{"cdrs", cdrs},
                 {"truth", truth_path},
                 {"seed", opt.seed},
                 {"train_per_class", opt.train_per_class},
                 {"portion", opt.portion},
                 {"adaboost_rounds", opt.adaboost_rounds}};
  write_manifest(out_dir, "classify", config, {cdrs, truth_path});
  std::printf("nb accuracy %.4f, adaboost accuracy %.4f (test n=%zu)\n",
              out.nb.accuracy(), out.adaboost.accuracy(), out.test_size);
  return kExitOk;
}

// -------------------------------------------------------------- label ----

SmoothnessWeight parse_smoothness(const std::string& s) {
  if (s == "degree") return SmoothnessWeight::OutDegree;
  if (s == "calls") return SmoothnessWeight::CallCount;
  if (s == "duration") return SmoothnessWeight::CallDuration;
  throw UsageError("unknown smoothness weight: " + s);
}

int cmd_label(const std::string& cdrs, const std::string& truth_path,
              const std::string& out_dir, LabelOptions opt,
              const std::string& lambda_str, const std::string& sweep) {
  require_file(cdrs);
  require_file(truth_path);
  fs::create_directories(out_dir);
  auto records = io::read_cdrs(cdrs);
  auto truth = io::read_truth(truth_path);
  if (truth.empty()) throw UsageError("truth file has no labels");

  if (lambda_str == "inf") {
    opt.lambda_infinite = true;
  } else if (!lambda_str.empty()) {
    try {
      opt.lambda = std::stod(lambda_str);
    } catch (const std::exception&) {
      throw UsageError("bad --lambda value: " + lambda_str);
    }
    if (opt.lambda < 0) throw UsageError("--lambda must be >= 0");
  }

  if (!sweep.empty()) {
    double lo, hi;
    int steps;
    if (std::sscanf(sweep.c_str(), "%lf:%lf:%d", &lo, &hi, &steps) != 3 ||
        steps < 2 || lo < 0 || hi <= lo)
      throw UsageError("--lambda-sweep expects lo:hi:steps with hi > lo >= 0");
    auto out = io::open_out(out_dir + "/sweep.csv");
    out << "lambda,accuracy_nb,accuracy_labeling\n";
    for (int k = 0; k < steps; ++k) {
      double lam;
      if (lo > 0) {
        double t = static_cast<double>(k) / (steps - 1);
        lam = lo * std::pow(hi / lo, t);  // log spacing
      } else {
        lam = lo + (hi - lo) * k / (steps - 1);
      }
      LabelOptions o = opt;
      o.lambda = lam;
      o.lambda_infinite = false;
      LabelOutcome r = run_label(records, truth, o);
      out << io::fmt_double(lam) << ',' << io::fmt_double(r.nb.accuracy())
          << ',' << io::fmt_double(r.labeling.accuracy()) << '\n';
    }
  }

  LabelOutcome out = run_label(records, truth, opt);
  io::write_labels(out_dir + "/labels.csv", out.rows);
  json metrics = {{"schema_version", 1},
                  {"n_nodes", out.n_nodes},
                  {"n_fixed", out.n_fixed},
                  {"fixed_fraction",
                   out.n_nodes ? static_cast<double>(out.n_fixed) / out.n_nodes
                               : 0.0},
                  {"energy", out.energy},
                  {"flow_value", out.flow_value},
                  {"train_per_class", out.train_per_class},
                  {"naive_bayes", confusion_json(out.nb)},
                  {"labeling", confusion_json(out.labeling)}};
  io::write_json(out_dir + "/metrics.json", metrics);

  json config = {{"cdrs", cdrs},
                 {"truth", truth_path},
                 {"seed", opt.seed},
                 {"lambda", opt.lambda_infinite ? json("inf") : json(opt.lambda)},
                 {"prune", opt.prune},
                 {"tau1", opt.tau1},
                 {"tau2", opt.tau2},
                 {"train_per_class", opt.train_per_class}};
  write_manifest(out_dir, "label", config, {cdrs, truth_path});
  std::printf(
      "nb accuracy %.4f, labeling accuracy %.4f (nodes=%zu fixed=%zu)\n",
      out.nb.accuracy(), out.labeling.accuracy(), out.n_nodes, out.n_fixed);
  return kExitOk;
}

// ----------------------------------------------------------- crossnet ----

int cmd_crossnet_attr(const std::string& cdrs, const std::string& truth_path,
                      const std::string& out_dir, size_t train_per_class,
                      size_t rounds, uint64_t seed) {
  require_file(cdrs);
  require_file(truth_path);
  fs::create_directories(out_dir);
  auto records = io::read_cdrs(cdrs);
  auto truth = io::read_truth(truth_path);
  if (truth.empty()) throw UsageError("truth file has no labels");

  std::unordered_set<UserId> side_a, side_b;
  for (const auto& [u, l] : truth) side_a.insert(u);
  for (const auto& r : records) {
    if (!side_a.count(r.caller)) side_b.insert(r.caller);
    if (!side_a.count(r.callee)) side_b.insert(r.callee);
  }
  if (side_b.empty())
    throw DataError("no non-company users present in the records");

  auto attrs = inter_company_attributes(records, side_a, side_b);
  std::unordered_map<UserId, std::vector<double>> features;
  std::unordered_map<UserId, SubscriptionLabel> labels;
  for (const auto& [u, a] : attrs) {
    FeatureVector f = log_transform(a);
    features[u] = std::vector<double>(f.begin(), f.end());
    labels[u] = truth.at(u);
  }
  size_t count[2] = {0, 0};
  for (const auto& [u, l] : labels) count[static_cast<int>(l)]++;
  size_t n_train = std::max<size_t>(
      1, std::min(train_per_class, std::min(count[0], count[1]) / 2));
  TrainTestSplit split = sample_training_set(labels, n_train, seed);
  CrossClassifyResult res = classify_cross(features, labels, split, rounds);

  json metrics = {{"schema_version", 1},
                  {"mode", "attr"},
                  {"n_a_users_with_ab_calls", attrs.size()},
                  {"train_per_class", n_train},
                  {"naive_bayes", confusion_json(res.nb)},
                  {"adaboost", confusion_json(res.adaboost)}};
  io::write_json(out_dir + "/metrics.json", metrics);
  json config = {{"cdrs", cdrs},
                 {"truth", truth_path},
                 {"mode", "attr"},
                 {"seed", seed},
                 {"train_per_class", train_per_class}};
  write_manifest(out_dir, "crossnet", config, {cdrs, truth_path});
  std::printf("cross-attr nb accuracy %.4f, adaboost accuracy %.4f\n",
              res.nb.accuracy(), res.adaboost.accuracy());
  return kExitOk;
}

int cmd_crossnet_prop(const std::string& edges, const std::string& sides,
                      const std::string& out_dir, size_t realizations,
                      bool randomize, size_t swaps_per_edge, uint64_t seed) {
  require_file(edges);
  require_file(sides);
  fs::create_directories(out_dir);
  BipartiteGraph g = io::read_bipartite(edges, sides);

  size_t accepted = 0;
  if (randomize) {
    size_t n_swaps = swaps_per_edge * (g.ab_edges.size() + g.ba_edges.size());
    g = degree_preserving_randomize(g, n_swaps, seed, &accepted);
  }
  PropagationResult res = two_way_propagation(g, realizations, seed);

  json metrics = {{"schema_version", 1},
                  {"mode", "prop"},
                  {"randomized", randomize},
                  {"accepted_swaps", accepted},
                  {"realizations", res.realizations},
                  {"a_accuracy_mean", res.a_accuracy},
                  {"a_accuracy_std", res.accuracy_std},
                  {"scored_a_users", res.scored_a_users},
                  {"mean_b_in_degree", g.mean_b_in_degree()},
                  {"bidirectional_fraction", g.bidirectional_fraction()},
                  {"per_realization", res.per_realization}};
  io::write_json(out_dir + "/propagation.json", metrics);
  json config = {{"edges", edges},       {"sides", sides},
                 {"mode", "prop"},       {"seed", seed},
                 {"randomize", randomize}, {"realizations", realizations},
                 {"swaps_per_edge", swaps_per_edge}};
  write_manifest(out_dir, "crossnet", config, {edges, sides});
  std::printf("two-way propagation accuracy %.4f +- %.4f (%s structure)\n",
              res.a_accuracy, res.accuracy_std,
              randomize ? "randomized" : "original");
  return kExitOk;
}

// ---------------------------------------------------------------- eval ----

int cmd_eval(const std::string& pred, const std::string& truth_path,
             const std::string& out_dir) {
  require_file(pred);
  require_file(truth_path);
  auto predictions = io::read_predictions(pred);
  auto truth = io::read_truth(truth_path);
  ConfusionMatrix cm = evaluate(predictions, truth);
  json metrics = {{"schema_version", 1}, {"confusion", confusion_json(cm)}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    io::write_json(out_dir + "/metrics.json", metrics);
    write_manifest(out_dir, "eval",
                   {{"pred", pred}, {"truth", truth_path}},
                   {pred, truth_path});
  }
  std::cout << metrics.dump(2) << "\n";
  return kExitOk;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  require_file(path);
  return io::read_json(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prepaid/postpaid subscriber classification pipeline"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic CDR corpus");
  std::string gen_out, gen_config;
  size_t gen_users = 10000;
  uint64_t gen_seed = 1;
  double gen_postfrac = -1.0;
  size_t gen_b_users = 0;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--users", gen_users, "number of company users");
  gen->add_option("--seed", gen_seed, "run seed");
  gen->add_option("--postpaid-fraction", gen_postfrac,
                  "postpaid class fraction");
  gen->add_option("--bipartite-b", gen_b_users,
                  "also generate a bipartite B side with this many users");
  gen->add_option("--config", gen_config, "JSON config file (flags win)");

  // classify
  auto* classify =
      app.add_subcommand("classify", "supervised baselines (NB, AdaBoost)");
  std::string cl_cdrs, cl_truth, cl_out;
  ClassifyOptions cl_opt;
  bool cl_export = false;
  classify->add_option("--cdrs", cl_cdrs, "CDR csv (optionally .gz)")
      ->required();
  classify->add_option("--truth", cl_truth, "truth csv")->required();
  classify->add_option("--out", cl_out, "output directory")->required();
  classify->add_option("--seed", cl_opt.seed, "run seed");
  classify->add_option("--train-per-class", cl_opt.train_per_class,
                       "training users per class (auto-scaled down)");
  classify->add_flag("--portion", cl_opt.portion,
                     "add oracle portion attributes");
  classify->add_option("--rounds", cl_opt.adaboost_rounds, "AdaBoost rounds");
  classify->add_flag("--export-features", cl_export, "write features.csv");

  // label
  auto* label =
      app.add_subcommand("label", "min-cut graph labeling over the call graph");
  std::string lb_cdrs, lb_truth, lb_out, lb_lambda, lb_sweep, lb_smooth =
      "degree";
  LabelOptions lb_opt;
  label->add_option("--cdrs", lb_cdrs, "CDR csv (optionally .gz)")->required();
  label->add_option("--truth", lb_truth, "truth csv")->required();
  label->add_option("--out", lb_out, "output directory")->required();
  label->add_option("--seed", lb_opt.seed, "run seed");
  label->add_option("--lambda", lb_lambda,
                    "smoothness weight (number or 'inf', default 100)");
  label->add_flag("--prune", lb_opt.prune, "fix high-confidence labels");
  label->add_option("--tau1", lb_opt.tau1, "pruning own-posterior threshold");
  label->add_option("--tau2", lb_opt.tau2,
                    "pruning neighborhood-mean threshold");
  label->add_option("--lambda-sweep", lb_sweep,
                    "lo:hi:steps sweep written to sweep.csv");
  label->add_option("--smoothness", lb_smooth,
                    "edge weight rule: degree|calls|duration");
  label->add_option("--train-per-class", lb_opt.train_per_class,
                    "training users per class (auto-scaled down)");

  // crossnet
  auto* crossnet =
      app.add_subcommand("crossnet", "cross-operator inference experiments");
  std::string cn_mode, cn_cdrs, cn_truth, cn_edges, cn_sides, cn_out;
  size_t cn_realizations = 100, cn_train = 10000, cn_rounds = 50,
         cn_swaps = 10;
  bool cn_randomize = false;
  uint64_t cn_seed = 1;
  crossnet->add_option("--mode", cn_mode, "attr or prop")->required();
  crossnet->add_option("--cdrs", cn_cdrs, "CDR csv (attr mode)");
  crossnet->add_option("--truth", cn_truth, "A-side truth csv (attr mode)");
  crossnet->add_option("--edges", cn_edges, "bipartite edges csv (prop mode)");
  crossnet->add_option("--sides", cn_sides, "side manifest csv (prop mode)");
  crossnet->add_option("--out", cn_out, "output directory")->required();
  crossnet->add_option("--seed", cn_seed, "run seed");
  crossnet->add_option("--realizations", cn_realizations,
                       "propagation realizations");
  crossnet->add_flag("--randomize", cn_randomize,
                     "degree-preserving null model");
  crossnet->add_option("--swaps", cn_swaps, "swap attempts per edge");
  crossnet->add_option("--train-per-class", cn_train,
                       "training users per class (attr mode)");
  crossnet->add_option("--rounds", cn_rounds, "AdaBoost rounds (attr mode)");

  // eval
  auto* eval = app.add_subcommand("eval", "score predictions against truth");
  std::string ev_pred, ev_truth, ev_out;
  eval->add_option("--pred", ev_pred, "predictions csv")->required();
  eval->add_option("--truth", ev_truth, "truth csv")->required();
  eval->add_option("--out", ev_out, "output directory (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      json file_cfg = load_config_file(gen_config);
      SynthConfig cfg = SynthConfig::from_json(file_cfg);
      if (gen->count("--users")) cfg.n_users = gen_users;
      if (gen->count("--seed")) cfg.seed = gen_seed;
      if (gen->count("--postpaid-fraction"))
        cfg.postpaid_fraction = gen_postfrac;
      if (gen->count("--bipartite-b")) {
        cfg.has_bipartite = true;
        cfg.bipartite.n_b_users = gen_b_users;
      }
      if (!gen->count("--seed") && !file_cfg.contains("seed"))
        cfg.seed = gen_seed;
      try {
        return cmd_gen(gen_out, cfg);
      } catch (const std::invalid_argument& e) {
        // infeasible generator config is a config error
        throw UsageError(e.what());
      }
    }
    if (classify->parsed())
      return cmd_classify(cl_cdrs, cl_truth, cl_out, cl_opt, cl_export);
    if (label->parsed()) {
      lb_opt.smoothness = parse_smoothness(lb_smooth);
      return cmd_label(lb_cdrs, lb_truth, lb_out, lb_opt, lb_lambda, lb_sweep);
    }
    if (crossnet->parsed()) {
      if (cn_mode == "attr") {
        if (cn_cdrs.empty() || cn_truth.empty())
          throw UsageError("attr mode needs --cdrs and --truth");
        return cmd_crossnet_attr(cn_cdrs, cn_truth, cn_out, cn_train,
                                 cn_rounds, cn_seed);
      }
      if (cn_mode == "prop") {
        if (cn_edges.empty() || cn_sides.empty())
          throw UsageError("prop mode needs --edges and --sides");
        return cmd_crossnet_prop(cn_edges, cn_sides, cn_out, cn_realizations,
                                 cn_randomize, cn_swaps, cn_seed);
      }
      throw UsageError("unknown --mode: " + cn_mode);
    }
    if (eval->parsed()) return cmd_eval(ev_pred, ev_truth, ev_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CdrParseFatal& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
