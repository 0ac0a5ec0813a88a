#include "htlab/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "htlab/errors.hpp"
#include "htlab/numeric.hpp"
#include "json.hpp"

namespace htlab {

namespace {

using nlohmann::json;

const std::set<std::string> kTasks = {"propensity",      "classify", "unbiased-family",
                                      "moments",         "dominance", "shrinkage"};
const std::set<std::string> kDesignKinds = {"bernoulli", "crd", "cluster",
                                            "independent_set_ate",
                                            "independent_set_tte"};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
}

template <typename T>
T require(const json& j, const std::string& field, const std::string& context) {
  if (!j.contains(field)) {
    throw ConfigError("missing field '" + context + field + "'");
  }
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + context + field + "': " + e.what());
  }
}

template <typename T>
T optional_field(const json& j, const std::string& field, T fallback,
                 const std::string& context) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + context + field + "': " + e.what());
  }
}

std::string join(const std::set<std::string>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += v;
  }
  return out;
}

TreatmentExposure parse_tau(const json& j, const std::string& field) {
  const auto arr = j.get<std::vector<int>>();
  if (arr.size() != 2) {
    throw ConfigError("field '" + field + "' must be [z, e]");
  }
  if (arr[0] != 0 && arr[0] != 1) {
    throw ConfigError("field '" + field + "': z must be 0 or 1");
  }
  if (arr[1] < 0) throw ConfigError("field '" + field + "': e must be >= 0");
  return {arr[0], arr[1]};
}

}  // namespace

ScenarioConfig parse_config(const std::string& path) {
  const json j = read_json(path);
  ScenarioConfig cfg;
  cfg.graph_file = require<std::string>(j, "graph_file", "");
  cfg.model = require<std::string>(j, "model", "");
  parse_exposure_model(cfg.model);  // validates the name

  if (!j.contains("design")) throw ConfigError("missing field 'design'");
  const json& dj = j.at("design");
  cfg.design.kind = require<std::string>(dj, "kind", "design.");
  if (!kDesignKinds.count(cfg.design.kind)) {
    throw ConfigError("field 'design.kind': unknown design kind '" + cfg.design.kind +
                      "'; valid options: " + join(kDesignKinds));
  }
  if (cfg.design.kind == "bernoulli") {
    cfg.design.p = require<double>(dj, "p", "design.");
  } else if (cfg.design.kind == "crd") {
    cfg.design.n_t = require<int>(dj, "n_t", "design.");
  } else if (cfg.design.kind == "cluster") {
    cfg.design.k_t = require<int>(dj, "K_t", "design.");
    cfg.design.cluster_file = require<std::string>(dj, "cluster_file", "design.");
  } else {
    cfg.design.n_1 = require<int>(dj, "n_1", "design.");
  }

  if (!j.contains("estimand")) throw ConfigError("missing field 'estimand'");
  const json& ej = j.at("estimand");
  if (ej.contains("preset")) {
    cfg.estimand_preset = require<std::string>(ej, "preset", "estimand.");
    estimand_preset(cfg.estimand_preset);  // validates
  } else {
    if (!ej.contains("tau1") || !ej.contains("tau0")) {
      throw ConfigError("field 'estimand' needs either 'preset' or both 'tau1' and 'tau0'");
    }
    cfg.tau1 = parse_tau(ej.at("tau1"), "estimand.tau1");
    cfg.tau0 = parse_tau(ej.at("tau0"), "estimand.tau0");
    if (*cfg.tau1 == *cfg.tau0) {
      throw ConfigError("field 'estimand': tau1 and tau0 must differ");
    }
  }

  if (j.contains("table")) {
    const json& tj = j.at("table");
    TableSpec spec;
    spec.source = require<std::string>(tj, "source", "table.");
    if (spec.source == "file") {
      if (tj.contains("box") || tj.contains("seed")) {
        throw ConfigError("field 'table': exactly one source; 'file' does not take "
                          "'box' or 'seed'");
      }
      spec.path = require<std::string>(tj, "path", "table.");
    } else if (spec.source == "random") {
      const auto box = require<std::vector<double>>(tj, "box", "table.");
      if (box.size() != 2 || !(box[0] <= box[1])) {
        throw ConfigError("field 'table.box' must be [lo, hi] with lo <= hi");
      }
      spec.box_lo = box[0];
      spec.box_hi = box[1];
      spec.seed = optional_field<std::uint64_t>(tj, "seed", 0, "table.");
    } else {
      throw ConfigError("field 'table.source': unknown source '" + spec.source +
                        "'; valid options: file, random");
    }
    cfg.table = spec;
  }

  cfg.tasks = require<std::vector<std::string>>(j, "tasks", "");
  if (cfg.tasks.empty()) throw ConfigError("field 'tasks' must be nonempty");
  for (const auto& t : cfg.tasks) {
    if (!kTasks.count(t)) {
      throw ConfigError("field 'tasks': unknown task '" + t +
                        "'; valid options: " + join(kTasks));
    }
  }
  cfg.mode = optional_field<std::string>(j, "mode", "exact", "");
  if (cfg.mode != "exact" && cfg.mode != "mc") {
    throw ConfigError("field 'mode': must be 'exact' or 'mc'");
  }
  cfg.mc_reps = optional_field<long long>(j, "mc_reps", 100000, "");
  if (cfg.mc_reps < 2) throw ConfigError("field 'mc_reps' must be >= 2");
  cfg.seed = optional_field<std::uint64_t>(j, "seed", 1, "");
  cfg.workers = optional_field<int>(j, "workers", 1, "");
  if (cfg.workers < 1) throw ConfigError("field 'workers' must be >= 1");
  cfg.out_dir = optional_field<std::string>(j, "out_dir", "out", "");
  return cfg;
}

std::string ScenarioConfig::canonical_json() const {
  json j;
  j["graph_file"] = graph_file;
  j["model"] = model;
  j["design"]["kind"] = design.kind;
  if (design.kind == "bernoulli") j["design"]["p"] = design.p;
  if (design.kind == "crd") j["design"]["n_t"] = design.n_t;
  if (design.kind == "cluster") {
    j["design"]["K_t"] = design.k_t;
    j["design"]["cluster_file"] = design.cluster_file;
  }
  if (design.kind == "independent_set_ate" || design.kind == "independent_set_tte") {
    j["design"]["n_1"] = design.n_1;
  }
  if (!estimand_preset.empty()) {
    j["estimand"]["preset"] = estimand_preset;
  } else {
    j["estimand"]["tau1"] = {tau1->z, tau1->e};
    j["estimand"]["tau0"] = {tau0->z, tau0->e};
  }
  if (table.has_value()) {
    j["table"]["source"] = table->source;
    if (table->source == "file") j["table"]["path"] = table->path;
    if (table->source == "random") {
      j["table"]["box"] = {table->box_lo, table->box_hi};
      j["table"]["seed"] = table->seed;
    }
  }
  j["tasks"] = tasks;
  j["mode"] = mode;
  j["mc_reps"] = mc_reps;
  j["seed"] = seed;
  j["workers"] = workers;
  return j.dump();
}

ScenarioInstance instantiate(const ScenarioConfig& cfg) {
  InterferenceGraph graph = load_graph(cfg.graph_file);
  const ExposureModel model = parse_exposure_model(cfg.model);

  Estimand est = cfg.estimand_preset.empty()
                     ? make_estimand(*cfg.tau1, *cfg.tau0)
                     : estimand_preset(cfg.estimand_preset);

  const DesignSpec& ds = cfg.design;
  if (ds.kind == "bernoulli") {
    return {graph, model, Design::bernoulli(graph.num_units(), ds.p), est};
  }
  if (ds.kind == "crd") {
    return {graph, model, Design::completely_randomized(graph.num_units(), ds.n_t), est};
  }
  if (ds.kind == "cluster") {
    ClusterPartition part = load_clusters(ds.cluster_file, graph.num_units());
    return {graph, model, Design::cluster_randomized(std::move(part), ds.k_t), est};
  }
  const std::vector<int> set = greedy_independent_set(graph);
  if (ds.n_1 > static_cast<int>(set.size())) {
    throw ConfigError("field 'design.n_1': " + std::to_string(ds.n_1) +
                      " exceeds the independent set size " + std::to_string(set.size()));
  }
  Design d = ds.kind == "independent_set_ate"
                 ? Design::independent_set_ate(graph, set, ds.n_1)
                 : Design::independent_set_tte(graph, set, ds.n_1);
  return {graph, model, std::move(d), est};
}

namespace {

class OutputWriter {
 public:
  explicit OutputWriter(const std::string& dir) : dir_(dir) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ + "/" + name, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + dir_ + "/" + name);
    names_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& j) {
    auto out = open(name);
    out << j.dump(2) << '\n';
  }

  const std::vector<std::string>& names() const { return names_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

json summary_json(const ExposureCountSummary& s) {
  json j;
  j["tau"] = {s.tau.z, s.tau.e};
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["min_count"] = s.min_count;
  j["max_count"] = s.max_count;
  j["classification"] = s.fixed ? "Fixed" : "Random";
  j["approximate"] = s.approximate;
  if (s.approximate) j["reps"] = s.reps;
  return j;
}

void write_moment_row(std::ofstream& out, const std::string& table_id,
                      const std::string& estimator, const MomentReport& rep) {
  out << table_id << ',' << estimator << ',' << format_double(rep.expectation) << ','
      << format_double(rep.bias) << ',' << format_double(rep.variance) << ','
      << format_double(rep.mse) << ',' << format_double(rep.theta) << ',' << rep.mode
      << '\n';
}

void task_propensity(const ScenarioConfig& cfg, const ScenarioInstance& inst,
                     OutputWriter& writer) {
  auto out = writer.open("propensity.csv");
  out << "unit,z,e,pi,method,stderr\n";
  const auto emit = [&](const PropensityTable& t) {
    for (int i = 0; i < t.n; ++i) {
      for (int z = 0; z <= 1; ++z) {
        for (int e = 0; e < t.levels[i]; ++e) {
          const std::string method =
              t.entry_method.empty() ? t.method : t.entry_method[i][z * t.levels[i] + e];
          out << i << ',' << z << ',' << e << ','
              << format_double(t.pi[i][z * t.levels[i] + e]) << ',' << method << ',';
          if (!t.se.empty()) out << format_double(t.se[i][z * t.levels[i] + e]);
          out << '\n';
        }
      }
    }
  };
  if (cfg.mode == "mc") {
    emit(propensity_table_mc(inst.design, inst.graph, inst.model, cfg.mc_reps, cfg.seed));
    return;
  }
  emit(propensity_table_exact(inst.design, inst.graph, inst.model));
  emit(propensity_table_analytic(inst.design, inst.graph, inst.model));
}

void task_classify(const ScenarioConfig& cfg, const ScenarioInstance& inst,
                   OutputWriter& writer) {
  const DesignClassification cls =
      cfg.mode == "mc"
          ? classify_design_mc(inst.design, inst.graph, inst.model, inst.estimand.tau1,
                               inst.estimand.tau0, cfg.mc_reps, cfg.seed)
          : classify_design(inst.design, inst.graph, inst.model, inst.estimand.tau1,
                            inst.estimand.tau0);
  json j;
  j["design"] = inst.design.describe();
  j["estimand"] = {{"tau1", {inst.estimand.tau1.z, inst.estimand.tau1.e}},
                   {"tau0", {inst.estimand.tau0.z, inst.estimand.tau0.e}}};
  j["tau1"] = summary_json(cls.tau1);
  j["tau0"] = summary_json(cls.tau0);
  j["verdict"] = cls.verdict;
  j["mode"] = cfg.mode;
  writer.write_json("classify.json", j);
}

void task_unbiased_family(const ScenarioConfig&, const ScenarioInstance& inst,
                          OutputWriter& writer) {
  const UnbiasednessSystem sys =
      unbiasedness_system(inst.design, inst.graph, inst.model, inst.estimand);

  {
    auto out = writer.open("system.mtx");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << "% rows: (unit, combination) unbiasedness equations\n";
    out << "% cols: weight variables w_i(z), var = unit * |support| + point\n";
    std::size_t nnz = 0;
    for (double v : sys.matrix.a) nnz += v != 0.0 ? 1 : 0;
    out << sys.matrix.rows << ' ' << sys.matrix.cols << ' ' << nnz << '\n';
    for (std::size_t r = 0; r < sys.matrix.rows; ++r) {
      for (std::size_t c = 0; c < sys.matrix.cols; ++c) {
        const double v = sys.matrix.at(r, c);
        if (v != 0.0) out << r + 1 << ' ' << c + 1 << ' ' << format_double(v) << '\n';
      }
    }
  }
  {
    auto out = writer.open("system_rhs.mtx");
    out << "%%MatrixMarket matrix array real general\n";
    out << sys.rhs.size() << " 1\n";
    for (double v : sys.rhs) out << format_double(v) << '\n';
  }

  const UnbiasedFamily fam = unbiased_family(sys);
  json j;
  j["feasible"] = fam.feasible;
  j["null_dimension"] = fam.null_dim;
  j["rank"] = fam.rank;
  j["equations"] = sys.matrix.rows;
  j["variables"] = sys.matrix.cols;
  if (!fam.feasible) j["infeasible_reason"] = fam.infeasible_reason;
  j["tau0_unattainable_units"] = fam.tau0_unattainable_units;
  if (fam.feasible) {
    j["particular_residual"] = system_residual(sys, fam.particular);
    auto out = writer.open("weights_particular.csv");
    out << "unit,point,weight\n";
    const std::size_t s = sys.support.size();
    for (int i = 0; i < sys.n; ++i) {
      for (std::size_t p = 0; p < s; ++p) {
        out << i << ',' << p << ',' << format_double(fam.particular[i * s + p]) << '\n';
      }
    }
  }
  writer.write_json("family.json", j);

  const PropensityTable exact =
      propensity_table_exact(inst.design, inst.graph, inst.model);
  const auto violations =
      positivity_violations(exact, inst.estimand.tau1, inst.estimand.tau0);
  if (violations.empty()) {
    const RestrictedWeights ht = ht_weights(exact, inst.estimand);
    auto out = writer.open("weights_ht.csv");
    out << "unit,z,e,weight\n";
    for (int i = 0; i < exact.n; ++i) {
      for (int z = 0; z <= 1; ++z) {
        for (int e = 0; e < exact.levels[i]; ++e) {
          out << i << ',' << z << ',' << e << ','
              << format_double(ht.weight(i, {z, e})) << '\n';
        }
      }
    }
  }
}

PotentialOutcomeTable resolve_table(const ScenarioConfig& cfg,
                                    const ScenarioInstance& inst) {
  if (!cfg.table.has_value()) {
    throw ConfigError("task needs a table: add a 'table' section to the config");
  }
  if (cfg.table->source == "file") {
    return load_table_csv(cfg.table->path, inst.graph, inst.model);
  }
  const std::uint64_t seed = cfg.table->seed != 0 ? cfg.table->seed : cfg.seed;
  return random_table(inst.graph, inst.model, cfg.table->box_lo, cfg.table->box_hi,
                      seed);
}

void task_moments(const ScenarioConfig& cfg, const ScenarioInstance& inst,
                  OutputWriter& writer) {
  const PotentialOutcomeTable table = resolve_table(cfg, inst);
  const PropensityTable exact =
      propensity_table_exact(inst.design, inst.graph, inst.model);
  const RestrictedWeights ht = ht_weights(exact, inst.estimand);
  const MomentReport rep =
      cfg.mode == "mc"
          ? mc_moments(ht, inst.design, inst.graph, inst.model, table, inst.estimand,
                       cfg.mc_reps, cfg.seed, cfg.workers)
          : exact_moments(ht, inst.design, inst.graph, inst.model, table, inst.estimand);
  auto out = writer.open("moments.csv");
  out << "table_id,estimator,expectation,bias,variance,mse,theta,mode\n";
  write_moment_row(out, "config-table", "ht", rep);
}

std::vector<NamedTable> default_table_grid(const ScenarioInstance& inst,
                                           const PropensityTable& exact,
                                           std::uint64_t seed) {
  const TableSpace space = identified_table_space(inst.graph, inst.model, exact);
  std::vector<NamedTable> tables =
      sphere_tables(space, inst.graph, inst.model, 200, seed);
  for (auto& t : axis_tables(space, inst.graph, inst.model)) {
    tables.push_back(std::move(t));
  }
  return tables;
}

void task_dominance(const ScenarioConfig& cfg, const ScenarioInstance& inst,
                    OutputWriter& writer) {
  const PropensityTable exact =
      propensity_table_exact(inst.design, inst.graph, inst.model);
  ShrinkageSearch search;
  search.seed = cfg.seed;
  search.workers = cfg.workers;
  const ShrinkageResult shr =
      shrinkage_k(inst.design, inst.graph, inst.model, inst.estimand, search);

  json j;
  j["design"] = inst.design.describe();
  j["estimators"] = {"shrunk_ht", "ht"};
  if (shr.hypothesis_fails) {
    j["verdict"] = "shrinkage hypothesis fails";
    j["witness"] = shr.witness_note;
    writer.write_json("dominance.json", j);
    return;
  }
  const auto ht =
      std::make_shared<RestrictedWeights>(ht_weights_on_support(exact, inst.estimand));
  const auto shrunk = shrink(ht, shr.k);
  const std::vector<NamedTable> tables = default_table_grid(inst, exact, cfg.seed);
  const DominanceVerdict verdict =
      dominance_check(*shrunk, *ht, inst.design, inst.graph, inst.model, inst.estimand,
                      tables, 1e-12, 1e-9, cfg.workers);

  {
    auto out = writer.open("dominance.csv");
    out << "table_id,estimator,expectation,bias,variance,mse,theta,mode\n";
    for (const auto& [id, table] : tables) {
      write_moment_row(out, id, "shrunk_ht",
                       exact_moments(*shrunk, inst.design, inst.graph, inst.model,
                                     table, inst.estimand));
      write_moment_row(out, id, "ht",
                       exact_moments(*ht, inst.design, inst.graph, inst.model, table,
                                     inst.estimand));
    }
  }
  j["k"] = shr.k;
  j["k0"] = shr.k0;
  j["verdict"] = verdict.verdict == "A-dominates" ? "shrunk_ht dominates ht"
                                                  : verdict.verdict;
  j["witness_id"] = verdict.witness_id;
  j["tables"] = tables.size();
  j["rel_tol"] = verdict.rel_tol;
  j["strict_margin"] = verdict.strict_margin;
  writer.write_json("dominance.json", j);
}

void task_shrinkage(const ScenarioConfig& cfg, const ScenarioInstance& inst,
                    OutputWriter& writer) {
  ShrinkageSearch search;
  search.seed = cfg.seed;
  search.workers = cfg.workers;
  const ShrinkageResult shr =
      shrinkage_k(inst.design, inst.graph, inst.model, inst.estimand, search);
  json j;
  j["design"] = inst.design.describe();
  j["hypothesis_fails"] = shr.hypothesis_fails;
  if (shr.hypothesis_fails) {
    j["witness"] = shr.witness_note;
  } else {
    j["k"] = shr.k;
    j["k0"] = shr.k0;
    j["objective"] = shr.objective;
    j["certificate"] = shr.certified ? "global at tolerance" : "upper bound on k0 only";
    j["restarts"] = shr.restarts_run;
    j["iterations"] = shr.iterations_used;
  }
  j["search"] = {{"restarts", search.restarts},
                 {"iterations", search.iterations},
                 {"tolerance", search.tolerance},
                 {"seed", search.seed}};
  writer.write_json("shrinkage.json", j);
}

}  // namespace

RunResult run_scenario(ScenarioConfig cfg, const ScenarioOverrides& overrides) {
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.workers) cfg.workers = *overrides.workers;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.mode) cfg.mode = *overrides.mode;
  if (overrides.mc_reps) cfg.mc_reps = *overrides.mc_reps;
  return run_scenario(cfg);
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioInstance inst = instantiate(cfg);
  OutputWriter writer(cfg.out_dir);
  RunResult result;

  if (!inst.graph.is_symmetric()) {
    result.notes.push_back(
        "graph neighborhoods are asymmetric; independent-set machinery symmetrizes");
  }

  for (const std::string& task : cfg.tasks) {
    try {
      if (task == "propensity") {
        task_propensity(cfg, inst, writer);
      } else if (task == "classify") {
        task_classify(cfg, inst, writer);
      } else if (task == "unbiased-family") {
        task_unbiased_family(cfg, inst, writer);
      } else if (task == "moments") {
        task_moments(cfg, inst, writer);
      } else if (task == "dominance") {
        task_dominance(cfg, inst, writer);
      } else if (task == "shrinkage") {
        task_shrinkage(cfg, inst, writer);
      }
    } catch (const EnumerationBudgetError&) {
      throw;
    } catch (const PositivityError& e) {
      throw PositivityError("task '" + task + "': " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("task '" + task + "': " + e.what());
    }
  }

  // Manifest last: content hashes cover every file written above.
  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  json manifest;
  manifest["tool"] = "htlab";
  manifest["version"] = kToolVersion;
  {
    std::ostringstream hex;
    hex << std::hex << fnv1a(cfg.canonical_json());
    manifest["config_hash"] = hex.str();
  }
  manifest["seed"] = cfg.seed;
  manifest["workers"] = cfg.workers;
  manifest["mode"] = cfg.mode;
  manifest["design"] = inst.design.describe();
  manifest["wall_ms"] = wall_ms;
  manifest["notes"] = result.notes;
  json outputs = json::array();
  for (const std::string& name : writer.names()) {
    std::ifstream in(cfg.out_dir + "/" + name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    std::ostringstream hex;
    hex << std::hex << fnv1a(bytes);
    outputs.push_back({{"file", name}, {"fnv1a", hex.str()}});
  }
  manifest["outputs"] = outputs;
  {
    std::ofstream out(cfg.out_dir + "/manifest.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest in " + cfg.out_dir);
    out << manifest.dump(2) << '\n';
  }
  result.files_written = writer.names();
  result.files_written.push_back("manifest.json");
  return result;
}

}  // namespace htlab
