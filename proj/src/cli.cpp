#include "accel_alloc/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "accel_alloc/baselines.hpp"
#include "accel_alloc/ga_tuner.hpp"
#include "accel_alloc/rl_search.hpp"
#include "accel_alloc/serialization.hpp"
#include "accel_alloc/workloads.hpp"

namespace accel_alloc::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kSearchMethods = {"reinforce", "grid", "random", "sa", "ga",
                                                 "oracle"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void require_csv_safe(const std::string& value) {
  if (value.find_first_of(",\n\"") != std::string::npos)
    throw std::invalid_argument("value '" + value + "' cannot be written to CSV");
}

RunInfo run_info(const RunManifest& m, const SearchProblem& problem, std::optional<std::uint64_t> seed) {
  return RunInfo{problem.model().name,
                 m.dataflow,
                 m.scenario,
                 m.objective,
                 m.aggregation,
                 problem.constraint().describe(),
                 seed};
}

fs::path output_dir(const RunManifest& m) {
  fs::path dir = m.out.empty() ? fs::path(".") : fs::path(m.out);
  fs::create_directories(dir);
  return dir;
}

void write_result(const fs::path& dir, const std::string& stem, const SearchResult& result,
                  const RunInfo& info, const SearchProblem& problem) {
  json doc = result_to_json(result, info);
  if (problem.constraint().deployment == Deployment::LS && result.best_design) {
    const DesignPoint& p = result.best_design->front();
    doc["shared_design"] = {{"pe", p.pe}, {"k", p.k}, {"dataflow", std::string(to_string(p.dataflow))}};
  }
  write_text_file((dir / (stem + ".json")).string(), doc.dump(2) + "\n");
  write_text_file((dir / (stem + "_trace.csv")).string(), trace_to_csv(result.trace));
}

// Options shared by every model-driven subcommand.
void add_manifest_options(CLI::App& cmd, RunManifest& m) {
  cmd.add_option("--model", m.model_path, "Model JSON file");
  cmd.add_option("--builtin", m.builtin, "Built-in model: toy2, toy3, mobilenet_v2_like");
  cmd.add_option("--dataflow", m.dataflow, "dla, eye, shi or mix");
  cmd.add_option("--scenario", m.scenario, "ls or lp");
  cmd.add_option("--objective", m.objective, "latency or energy");
  cmd.add_option("--agg", m.aggregation, "sum or max");
  cmd.add_option("--constraint", m.constraint,
                 "area:X, power:X, counts:PE:BUF, unconstrained or a preset name");
  cmd.add_option("--config", m.config_path, "Config JSON (falls back to $ACCEL_ALLOC_CONFIG)");
  cmd.add_option("--levels", m.level_count, "Use an evenly spaced subset of L action levels");
}

struct SearchFlags {
  int stride = 1;
  std::string policy = "rnn";
  double learning_rate = 5e-3;
  double discount = 0.9;
  int hidden = 128;
  std::int64_t generations = 2000;
  int population = 20;
  int step = 4;
  double mutation = 0.05;
  double crossover = 0.2;
};

SearchResult run_method(const RunManifest& m, const SearchFlags& flags,
                        const SearchProblem& problem) {
  if (m.method == "reinforce") {
    RlConfig cfg;
    cfg.epochs = m.epochs;
    cfg.seed = m.seed;
    cfg.policy = parse_policy_kind(flags.policy);
    cfg.learning_rate = flags.learning_rate;
    cfg.discount = flags.discount;
    cfg.hidden = flags.hidden;
    return train(problem, cfg);
  }
  if (m.method == "oracle") return exhaustive_oracle(problem);
  BaselineConfig cfg;
  cfg.eps = m.epochs;
  cfg.seed = m.seed;
  cfg.grid_stride = flags.stride;
  if (m.method == "grid") return grid_search(problem, cfg);
  if (m.method == "random") return random_search(problem, cfg);
  if (m.method == "sa") return simulated_annealing(problem, cfg);
  return genetic_global(problem, cfg);
}

GaTunerConfig tuner_config(const RunManifest& m, const SearchFlags& flags) {
  GaTunerConfig cfg;
  cfg.population = flags.population;
  cfg.generations = flags.generations;
  cfg.crossover = flags.crossover;
  cfg.mutation = flags.mutation;
  cfg.step = flags.step;
  cfg.seed = m.seed;
  return cfg;
}

int cmd_evaluate(const RunManifest& m, const std::string& genome_path, std::ostream& out) {
  const AppConfig config = resolve_config(m.config_path);
  const SearchProblem problem = make_problem(m, config);
  const json doc = json::parse(read_text_file(genome_path));
  const json& entries = doc.is_object() ? doc.at("design") : doc;
  if (m.dataflow == "mix") {
    for (const auto& e : entries)
      if (!e.contains("dataflow"))
        throw std::invalid_argument("--dataflow mix needs a dataflow in every design entry");
  }
  const Design design = design_from_json(entries, &problem.levels(),
                                         problem.fixed_dataflow().value_or(Dataflow::DLA));
  const GenomeCost cost = design_cost(design, problem.model(), problem.constraint(),
                                      problem.objective(), problem.hw());

  json layers = json::array();
  double latency_total = 0.0;
  double energy_total = 0.0;
  for (std::size_t i = 0; i < design.size(); ++i) {
    const HwMetrics& mt = cost.layers[i];
    latency_total += mt.latency;
    energy_total += mt.energy;
    layers.push_back({{"index", i},
                      {"pe", design[i].pe},
                      {"k", design[i].k},
                      {"dataflow", std::string(to_string(design[i].dataflow))},
                      {"latency", mt.latency},
                      {"energy", mt.energy},
                      {"area", mt.area},
                      {"power", mt.power}});
  }
  json report;
  report["model"] = problem.model().name;
  report["constraint"] = problem.constraint().describe();
  report["layers"] = std::move(layers);
  report["totals"] = {{"value", cost.value},
                      {"latency", latency_total},
                      {"energy", energy_total},
                      {"consumption", cost.consumption.amount},
                      {"buffer_consumption", cost.consumption.buffers},
                      {"feasible", cost.feasible}};
  out << report.dump(2) << "\n";
  return cost.feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const RunManifest& m, std::size_t layer_index, std::ostream& out) {
  if (m.dataflow == "mix") throw std::invalid_argument("sweep needs a fixed dataflow");
  AppConfig config = resolve_config(m.config_path);
  if (m.level_count > 0) config.levels = config.levels.subsample(m.level_count);
  const ModelDesc model = resolve_model(m);
  if (layer_index >= model.layers.size())
    throw std::invalid_argument("layer index " + std::to_string(layer_index) +
                                " out of range for " + std::to_string(model.layers.size()) +
                                " layers");
  const std::string csv = sweep_to_csv(
      sweep_layer(model.layers[layer_index], parse_dataflow(m.dataflow), config.levels, config.hw));
  if (m.out.empty()) {
    out << csv;
  } else {
    const fs::path path(m.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_file(m.out, csv);
  }
  return kExitOk;
}

int cmd_search(const RunManifest& m, const SearchFlags& flags, std::ostream& out) {
  const AppConfig config = resolve_config(m.config_path);
  const SearchProblem problem = make_problem(m, config);
  const SearchResult result = run_method(m, flags, problem);
  const auto seed = m.method == "oracle" || m.method == "grid"
                        ? std::nullopt
                        : std::optional<std::uint64_t>(m.seed);
  const fs::path dir = output_dir(m);
  write_result(dir, "result", result, run_info(m, problem, seed), problem);
  out << m.method << ": " << (result.feasible ? "feasible" : "infeasible")
      << ", best " << format_number(result.best_value) << " after " << result.evaluations
      << " evaluations -> " << (dir / "result.json").string() << "\n";
  return result.feasible ? kExitOk : kExitInfeasible;
}

double improvement_pct(double before, double after) {
  return before > 0.0 ? (before - after) / before * 100.0 : 0.0;
}

int cmd_twostage(const RunManifest& m, const SearchFlags& flags, std::ostream& out) {
  if (m.method != "reinforce") throw std::invalid_argument("twostage requires --method reinforce");
  const AppConfig config = resolve_config(m.config_path);
  const SearchProblem problem = make_problem(m, config);
  const fs::path dir = output_dir(m);
  const RunInfo info = run_info(m, problem, m.seed);

  const SearchResult stage1 = run_method(m, flags, problem);
  write_result(dir, "stage1", stage1, info, problem);

  json report;
  report["model"] = problem.model().name;
  report["constraint"] = problem.constraint().describe();
  report["seed"] = m.seed;
  if (!stage1.feasible) {
    report["fine_tuning_skipped"] = true;
    report["initial_valid_value"] = nullptr;
    report["stage1_best"] = nullptr;
    report["stage2_best"] = nullptr;
    write_text_file((dir / "twostage.json").string(), report.dump(2) + "\n");
    out << "stage 1 found no feasible design; fine-tuning skipped\n";
    return kExitInfeasible;
  }

  const SearchResult stage2 = evolve(problem, *stage1.best_design, tuner_config(m, flags));
  write_result(dir, "stage2", stage2, info, problem);

  const double initial = stage1.first_feasible->best_value;
  const GenomeCost recheck = design_cost(*stage2.best_design, problem.model(),
                                         problem.constraint(), problem.objective(), problem.hw());
  report["fine_tuning_skipped"] = false;
  report["initial_valid_value"] = initial;
  report["initial_valid_epoch"] = stage1.first_feasible->epoch;
  report["stage1_best"] = stage1.best_value;
  report["stage2_best"] = stage2.best_value;
  report["stage1_improvement_pct"] = improvement_pct(initial, stage1.best_value);
  report["stage2_improvement_pct"] = improvement_pct(stage1.best_value, stage2.best_value);
  report["stage2_feasible"] = recheck.feasible;
  write_text_file((dir / "twostage.json").string(), report.dump(2) + "\n");
  out << "initial " << format_number(initial) << ", stage 1 " << format_number(stage1.best_value)
      << ", stage 2 " << format_number(stage2.best_value) << "\n";
  return kExitOk;
}

int cmd_tune(const RunManifest& m, const SearchFlags& flags, const std::string& seed_path,
             std::ostream& out) {
  const AppConfig config = resolve_config(m.config_path);
  const SearchProblem problem = make_problem(m, config);
  const SearchResult seed = result_from_json(json::parse(read_text_file(seed_path)));
  if (!seed.best_design) throw std::invalid_argument("seed result " + seed_path + " has no feasible design");
  const SearchResult tuned = evolve(problem, *seed.best_design, tuner_config(m, flags));
  const fs::path dir = output_dir(m);
  write_result(dir, "tuned", tuned, run_info(m, problem, m.seed), problem);
  out << "ga_tuner: " << format_number(seed.best_value) << " -> " << format_number(tuned.best_value)
      << "\n";
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& files, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
  if (files.empty()) throw CLI::ValidationError("report", "at least one result file is required");
  std::vector<ReportRow> rows;
  for (const auto& file : files) {
    try {
      RunInfo info;
      const SearchResult r = result_from_json(json::parse(read_text_file(file)), &info);
      rows.push_back({r.method, info.model, info.dataflow, info.scenario, info.objective,
                      info.constraint, r.best_value, r.feasible, r.evaluations});
    } catch (const std::exception& e) {
      err << "warning: skipping " << file << ": " << e.what() << "\n";
    }
  }
  if (rows.empty()) {
    err << "error: no readable result files\n";
    return kExitInputError;
  }
  const std::string csv = report_to_csv(rows);
  if (out_path.empty()) {
    out << csv;
  } else {
    write_text_file(out_path, csv);
  }
  return kExitOk;
}

}  // namespace

void RunManifest::validate() const {
  if (model_path.empty() == builtin.empty())
    throw std::invalid_argument("give exactly one of --model or --builtin");
  if (dataflow != "mix") parse_dataflow(dataflow);
  parse_deployment(scenario);
  parse_metric(objective);
  parse_aggregation(aggregation);
  if (std::find(kSearchMethods.begin(), kSearchMethods.end(), method) == kSearchMethods.end())
    throw std::invalid_argument("unknown method '" + method +
                                "' (expected reinforce, grid, random, sa, ga or oracle)");
  if (dataflow == "mix" && method != "reinforce" && method != "oracle")
    throw std::invalid_argument("--dataflow mix requires --method reinforce");
  if (epochs < 1) throw std::invalid_argument("--epochs must be >= 1");
  if (level_count < 0) throw std::invalid_argument("--levels must be positive");
}

AppConfig resolve_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_config(explicit_path);
  if (const char* env = std::getenv("ACCEL_ALLOC_CONFIG"); env != nullptr && *env != '\0')
    return load_config(env);
  return default_config();
}

ModelDesc resolve_model(const RunManifest& manifest) {
  if (!manifest.builtin.empty()) return builtin(manifest.builtin);
  return load_model(manifest.model_path);
}

SearchProblem make_problem(const RunManifest& manifest, const AppConfig& config) {
  manifest.validate();
  ActionLevels levels = config.levels;
  if (manifest.level_count > 0) levels = levels.subsample(manifest.level_count);
  const Deployment deployment = parse_deployment(manifest.scenario);
  std::optional<Dataflow> df;
  if (manifest.dataflow != "mix") df = parse_dataflow(manifest.dataflow);
  return SearchProblem(resolve_model(manifest), std::move(levels), df,
                       parse_constraint(manifest.constraint, deployment, config.presets),
                       Objective{parse_metric(manifest.objective),
                                 parse_aggregation(manifest.aggregation)},
                       config.hw);
}

std::vector<SweepRow> sweep_layer(const LayerShape& layer, Dataflow df, const ActionLevels& levels,
                                  const HwConstants& hw) {
  std::vector<SweepRow> rows;
  for (int p = 0; p < levels.size(); ++p) {
    for (int b = 0; b < levels.size(); ++b) {
      const HwMetrics m = evaluate(df, levels.pe_values[p], levels.buf_values[b], layer, hw);
      rows.push_back({p, b, m.latency, m.energy, m.area});
    }
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "pe_level,buf_level,latency,energy,area\n";
  for (const auto& r : rows) {
    out += std::to_string(r.pe_level) + "," + std::to_string(r.buf_level) + "," +
           format_number(r.latency) + "," + format_number(r.energy) + "," + format_number(r.area) +
           "\n";
  }
  return out;
}

std::vector<SweepRow> sweep_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "pe_level,buf_level,latency,energy,area")
    throw std::invalid_argument("sweep CSV must start with header pe_level,buf_level,latency,energy,area");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw std::invalid_argument("bad sweep row '" + line + "'");
    rows.push_back({std::stoi(cells[0]), std::stoi(cells[1]), parse_number(cells[2]),
                    parse_number(cells[3]), parse_number(cells[4])});
  }
  return rows;
}

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "method,model,dataflow,scenario,objective,constraint,best_value,feasible,evaluations\n";
  for (const auto& r : rows) {
    for (const auto* s : {&r.method, &r.model, &r.dataflow, &r.scenario, &r.objective, &r.constraint})
      require_csv_safe(*s);
    out += r.method + "," + r.model + "," + r.dataflow + "," + r.scenario + "," + r.objective + "," +
           r.constraint + "," + format_number(r.best_value) + "," + (r.feasible ? "true" : "false") +
           "," + std::to_string(r.evaluations) + "\n";
  }
  return out;
}

std::vector<ReportRow> report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,model,dataflow,scenario,objective,constraint,best_value,feasible,evaluations")
    throw std::invalid_argument("unexpected report CSV header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 9) throw std::invalid_argument("bad report row '" + line + "'");
    rows.push_back({c[0], c[1], c[2], c[3], c[4], c[5], parse_number(c[6]), c[7] == "true",
                    std::stoll(c[8])});
  }
  return rows;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-layer PE/buffer assignment search for DNN accelerators", "accel-alloc"};
  app.require_subcommand(1);

  RunManifest m;
  SearchFlags flags;
  std::string genome_path;
  std::string seed_result;
  std::size_t layer_index = 0;
  std::vector<std::string> report_files;
  std::string report_out;

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a design against the cost model");
  add_manifest_options(*evaluate_cmd, m);
  evaluate_cmd->add_option("--genome", genome_path, "Design JSON file")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Per-layer (PE level, buffer level) contour CSV");
  add_manifest_options(*sweep_cmd, m);
  sweep_cmd->add_option("--layer", layer_index, "Layer index")->required();
  sweep_cmd->add_option("--out", m.out, "Output CSV (stdout when absent)");

  auto add_search_options = [&](CLI::App& cmd) {
    add_manifest_options(cmd, m);
    cmd.add_option("--method", m.method, "reinforce, grid, random, sa, ga or oracle");
    cmd.add_option("--epochs", m.epochs, "Episodes (reinforce) or evaluation budget (baselines)");
    cmd.add_option("--seed", m.seed, "RNG seed");
    cmd.add_option("--out", m.out, "Output directory");
    cmd.add_option("--stride", flags.stride, "Grid stride in levels");
    cmd.add_option("--policy", flags.policy, "rnn or mlp");
    cmd.add_option("--lr", flags.learning_rate, "Policy learning rate");
    cmd.add_option("--discount", flags.discount, "Reward discount");
    cmd.add_option("--hidden", flags.hidden, "Policy hidden size");
  };
  auto add_tuner_options = [&](CLI::App& cmd) {
    cmd.add_option("--generations", flags.generations, "Fine-tuning generations");
    cmd.add_option("--population", flags.population, "Fine-tuning population");
    cmd.add_option("--ga-step", flags.step, "Local mutation step");
    cmd.add_option("--ga-mutation", flags.mutation, "Local mutation rate");
    cmd.add_option("--ga-crossover", flags.crossover, "Local crossover rate");
  };

  auto* search_cmd = app.add_subcommand("search", "Run one search method");
  add_search_options(*search_cmd);

  auto* twostage_cmd = app.add_subcommand("twostage", "REINFORCE search then local GA fine-tuning");
  add_search_options(*twostage_cmd);
  add_tuner_options(*twostage_cmd);

  auto* tune_cmd = app.add_subcommand("tune", "Local GA fine-tuning from a result file");
  add_manifest_options(*tune_cmd, m);
  add_tuner_options(*tune_cmd);
  tune_cmd->add_option("--from", seed_result, "Stage-1 result JSON")->required();
  tune_cmd->add_option("--seed", m.seed, "RNG seed");
  tune_cmd->add_option("--out", m.out, "Output directory");

  auto* report_cmd = app.add_subcommand("report", "Merge result files into a comparison CSV");
  report_cmd->add_option("files", report_files, "Result JSON files");
  report_cmd->add_option("--out", report_out, "Output CSV (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (evaluate_cmd->parsed()) return cmd_evaluate(m, genome_path, out);
    if (sweep_cmd->parsed()) return cmd_sweep(m, layer_index, out);
    if (search_cmd->parsed()) return cmd_search(m, flags, out);
    if (twostage_cmd->parsed()) return cmd_twostage(m, flags, out);
    if (tune_cmd->parsed()) return cmd_tune(m, flags, seed_result, out);
    if (report_cmd->parsed()) return cmd_report(report_files, report_out, out, err);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"accel-alloc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace accel_alloc::cli
