#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "sfca/config.hpp"
#include "sfca/csv_io.hpp"
#include "sfca/decode.hpp"
#include "sfca/eval.hpp"
#include "sfca/features.hpp"
#include "sfca/learners.hpp"
#include "sfca/pipeline.hpp"
#include "sfca/report.hpp"
#include "sfca/synth.hpp"
#include "sfca/transform.hpp"

namespace fs = std::filesystem;
using namespace sfca;

namespace {

struct ConfigError : Error {
  using Error::Error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "run configuration file (key = value)");
  cmd->add_option("--seed", c.seed, "master seed, overrides the config");
  cmd->add_option("--data", c.data, "data directory, overrides io.data_dir");
  cmd->add_option("--out", c.out, "output directory, overrides io.out_dir");
  cmd->add_option("--threads", c.threads, "OpenMP threads (0 = runtime default)");
}

RunConfig load_config(const Common& c) {
  RunConfig cfg;
  try {
    if (!c.config.empty()) cfg = RunConfig::load(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.data) cfg.data_dir = *c.data;
    if (c.out) cfg.out_dir = *c.out;
    if (c.threads) cfg.threads = *c.threads;
    cfg.synth.grid = cfg.grid;
    cfg.synth.seed = cfg.seed;
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  set_thread_limit(cfg.threads);
  return cfg;
}

fs::path data_file(const RunConfig& cfg, std::string_view name) { return fs::path(cfg.data_dir) / name; }
fs::path out_file(const RunConfig& cfg, std::string_view name) { return fs::path(cfg.out_dir) / name; }

std::string weeks_name(SignalSource s) { return "weeks_" + std::string(to_string(s)) + ".csv"; }

std::vector<CityYearRecord> load_records(const RunConfig& cfg, SignalSource source) {
  const auto weeks = read_weeks(csv::read_file(data_file(cfg, weeks_name(source))), cfg.grid.segments_per_day);
  const auto outcomes = read_outcomes(csv::read_file(data_file(cfg, "outcomes.csv")));
  const auto statics = read_static(csv::read_file(data_file(cfg, "static.csv")));
  return join_records(weeks, outcomes, statics);
}

std::vector<SignalSource> sources_of(const std::string& s) {
  if (s == "both") return {SignalSource::internet, SignalSource::electricity};
  return {parse_source(s)};
}

FeatureSchema schema_of(const RunConfig& cfg, SignalSource s) {
  return schema_for(s, cfg.benchmark_options());
}

std::vector<FeatureTable> tables_for(const RunConfig& cfg, const std::vector<CityYearRecord>& records,
                                     SignalSource source) {
  const auto schema = schema_of(cfg, source);
  std::vector<FeatureTable> tables;
  for (const auto& r : records) tables.push_back(assemble_features(r, schema, source));
  return tables;
}

std::string file_token(std::string s) {
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return s;
}

// Respondent weights scaled to mean one, as in the evaluation harness.
std::vector<double> mean_one(std::vector<double> w) {
  if (w.empty()) return w;
  double mean = 0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  for (double& v : w) v /= mean;
  return w;
}

void write(const fs::path& p, std::string_view text) {
  csv::write_file(p, text);
  std::cout << "wrote " << p.string() << '\n';
}

// Subcommands.

void run_synth(const RunConfig& base, std::optional<int> cities, std::optional<int> days,
               std::optional<int> years, std::optional<double> noise, std::optional<std::string> mode) {
  SynthOptions o = base.synth;
  if (cities) o.cities = *cities;
  if (days) o.days = *days;
  if (years) o.years = *years;
  if (noise) o.noise = *noise;
  if (mode) o.mode = parse_noise_mode(*mode);
  const auto corpus = generate_corpus(o);
  write(data_file(base, "traces.csv"), write_traces(corpus.traces));
  write(data_file(base, "clean_traces.csv"), write_traces(corpus.clean));
  write(data_file(base, "hourly.csv"), write_hourly(corpus.hourly));
  write(data_file(base, "outcomes.csv"), write_outcomes(corpus.outcomes));
  write(data_file(base, "static.csv"), write_static(corpus.statics));
}

void run_preprocess(const RunConfig& cfg) {
  const auto traces = read_traces(csv::read_file(data_file(cfg, "traces.csv")), cfg.grid.segments_per_day);
  write(data_file(cfg, weeks_name(SignalSource::internet)),
        write_weeks(preprocess_internet(traces, cfg.grid, cfg.preprocess), cfg.grid.segments_per_day));
  const auto hourly = read_hourly(csv::read_file(data_file(cfg, "hourly.csv")));
  write(data_file(cfg, weeks_name(SignalSource::electricity)),
        write_weeks(preprocess_electricity(hourly, cfg.grid, cfg.preprocess), cfg.grid.segments_per_day));
}

void run_features(const RunConfig& cfg, const std::string& source_opt, bool stacked) {
  for (auto source : sources_of(source_opt)) {
    const auto records = load_records(cfg, source);
    const auto tables = tables_for(cfg, records, source);
    write(data_file(cfg, "features_" + std::string(to_string(source)) + ".csv"), write_features(tables));
    if (!stacked) continue;
    const auto design = stack(tables);
    for (auto activity : {Activity::sleep, Activity::work}) {
      const auto labels = label_design(design, records, activity, cfg.grid);
      std::size_t warned = 0;
      for (const auto& b : balance_report(design.rows, labels)) warned += b.warning ? 1 : 0;
      if (warned)
        std::cerr << "warning: " << warned << " city-years have " << to_string(activity)
                  << " label balance outside [" << kBalanceLow << ", " << kBalanceHigh << "]\n";
      write(data_file(cfg, "stacked_" + std::string(to_string(source)) + "_" +
                               std::string(to_string(activity)) + ".csv"),
            write_stacked(design, labels));
    }
  }
}

void run_train(const RunConfig& cfg, const std::string& method, const std::string& source_opt,
               const std::string& activity_opt, const std::string& target_opt) {
  const auto source = parse_source(source_opt);
  const auto activity = parse_activity(activity_opt);
  const ModelSpec spec = cfg.spec_for(method);
  const auto records = load_records(cfg, source);
  const auto tables = tables_for(cfg, records, source);
  std::vector<double> raw_w;
  std::string name = file_token(spec.label()) + "_" + std::string(to_string(source)) + "_" +
                     std::string(to_string(activity));
  std::optional<FittedModel> model;
  if (is_classifier(spec.family)) {
    const auto design = stack(tables);
    const auto labels = label_design(design, records, activity, cfg.grid);
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.y.size()));
    for (std::size_t i = 0; i < labels.y.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels.y[i];
    if (spec.weighted)
      for (std::size_t i = 0, r = 0; r < records.size(); ++r)
        for (std::size_t k = 0; k < tables[r].segments.size(); ++k, ++i)
          raw_w.push_back(records[r].outcome(activity)->respondents);
    model = fit(spec, design.x, y, mean_one(raw_w), design.columns);
  } else {
    const auto target = parse_target(target_opt);
    name += "_" + std::string(to_string(target));
    Eigen::MatrixXd x;
    Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto row = wide_row(records[r], tables[r]);
      if (r == 0) x.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(row.size()));
      x.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
      y[static_cast<Eigen::Index>(r)] = regression_target(*records[r].outcome(activity), target);
      raw_w.push_back(records[r].outcome(activity)->respondents);
    }
    if (!spec.weighted) raw_w.clear();
    model = fit(spec, x, y, mean_one(raw_w), wide_columns(tables.front(), cfg.grid.segments_per_day));
  }
  for (const auto& w : model->warnings()) std::cerr << "warning: " << w << '\n';
  write(out_file(cfg, "model_" + name + ".json"), save_model_json(*model));
}

void run_evaluate(const RunConfig& cfg) {
  std::vector<CityYearRecord> internet, electricity;
  bool need[2] = {false, false};
  for (const auto& p : cfg.problems) need[p.source == SignalSource::internet ? 0 : 1] = true;
  if (need[0]) internet = load_records(cfg, SignalSource::internet);
  if (need[1]) electricity = load_records(cfg, SignalSource::electricity);
  const auto methods = cfg.method_specs();
  const auto report = benchmark_matrix({internet, electricity}, methods, cfg.problems, cfg.benchmark_options());
  write(out_file(cfg, "report.csv"), report_csv(report));
  write(out_file(cfg, "report.txt"), report_table(report));
  write(out_file(cfg, "scatter.csv"), scatter_csv(report, cfg.ci_sd));
  std::string folds = "method,source,activity,filter,held_out,training_rows,leaked_rows\n";
  for (const auto& f : report.folds)
    folds += f.method + ',' + std::string(to_string(f.source)) + ',' + std::string(to_string(f.activity)) + ',' +
             std::to_string(f.filter) + ',' + f.audit.held_out + ',' + std::to_string(f.audit.training_rows) +
             ',' + std::to_string(f.audit.leaked_rows) + '\n';
  write(out_file(cfg, "folds.csv"), folds);
  std::string exc;
  for (const auto& e : report.exceptions) exc += e + '\n';
  write(out_file(cfg, "exceptions.txt"), exc);
  std::cout << "leaked training rows across all folds: " << report.leaked_rows() << '\n';
  std::cout << report_table(report);
}

void run_decode(const RunConfig& cfg, const std::string& city, int year, const std::string& source_opt,
                const std::string& activity_opt, const std::string& method) {
  const auto source = parse_source(source_opt);
  const auto activity = parse_activity(activity_opt);
  ModelSpec spec = cfg.spec_for(method);
  if (!is_classifier(spec.family)) throw Error("decode needs a classification method, got " + spec.label());
  const auto records = load_records(cfg, source);
  const auto tables = tables_for(cfg, records, source);
  std::vector<FeatureTable> train;
  std::vector<CityYearRecord> train_records;
  const FeatureTable* held = nullptr;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].city_id == city) {
      if (records[i].year == year) held = &tables[i];
      continue;
    }
    train.push_back(tables[i]);
    train_records.push_back(records[i]);
  }
  if (!held) throw Error("no record for " + city + "/" + std::to_string(year));
  const auto design = stack(train);
  const auto labels = label_design(design, train_records, activity, cfg.grid);
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.y.size()));
  for (std::size_t i = 0; i < labels.y.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels.y[i];
  spec.seed = derive_seed(cfg.seed, city);
  const auto model = fit(spec, design.x, y, {}, design.columns);
  const auto held_design = stack(std::span<const FeatureTable>(held, 1));
  const Eigen::VectorXd s = predict(model, held_design.x, held_design.columns);
  ScoreTrace trace{city, year, activity, std::vector<double>(static_cast<std::size_t>(cfg.grid.segments_per_day), kMissing)};
  for (std::size_t k = 0; k < held->segments.size(); ++k)
    trace.scores[static_cast<std::size_t>(held->segments[k] - 1)] = std::clamp(s[static_cast<Eigen::Index>(k)], 0.0, 1.0);
  DecodeAudit audit;
  const auto t = decode_times(trace, cfg.grid, activity, cfg.decode, &audit);
  write(out_file(cfg, "decode_" + file_token(city) + "_" + std::to_string(year) + "_" +
                          std::string(to_string(activity)) + ".csv"),
        audit_csv(audit));
  std::cout << "start_min=" << t.start_min << " stop_min=" << t.stop_min << " duration_min=" << t.duration_min
            << '\n';
}

void run_report(const RunConfig& cfg) {
  const auto report = parse_report_csv(csv::read_file(out_file(cfg, "report.csv")));
  write(out_file(cfg, "report.txt"), report_table(report));
  const fs::path scatter_path = out_file(cfg, "scatter.csv");
  if (!fs::exists(scatter_path)) return;
  const auto points = parse_scatter_csv(csv::read_file(scatter_path));
  std::map<std::pair<std::string, std::string>, std::vector<ScatterPoint>> groups;
  for (const auto& p : points) groups[{p.method, p.problem.key()}].push_back(p);
  for (const auto& [key, pts] : groups)
    write(out_file(cfg, "scatter_" + file_token(key.first) + "_" + file_token(key.second) + ".svg"),
          scatter_svg(pts, key.first + "  " + key.second, cfg.ci_sd));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmented functional classification toolkit"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "generate the synthetic corpus");
  add_common(synth, common);
  std::optional<int> cities, days, years;
  std::optional<double> noise;
  std::optional<std::string> noise_mode;
  synth->add_option("--cities", cities, "number of cities");
  synth->add_option("--days", days, "days per city-year");
  synth->add_option("--years", years, "years per city");
  synth->add_option("--noise", noise, "Gaussian noise standard deviation");
  synth->add_option("--noise-mode", noise_mode, "gaussian or burst");

  auto* preprocess = app.add_subcommand("preprocess", "raw traces to synthetic weeks");
  add_common(preprocess, common);

  auto* features = app.add_subcommand("features", "engineered features per city-year");
  add_common(features, common);
  std::string source = "both";
  bool stacked = false;
  features->add_option("--source", source, "internet, electricity or both");
  features->add_flag("--stack", stacked, "also write the stacked, labelled designs");

  auto* train = app.add_subcommand("train", "fit one method on every city-year");
  add_common(train, common);
  std::string method = "c-tree(bg)", train_source = "internet", activity = "sleep", target = "start";
  train->add_option("--method", method, "method label, e.g. c-tree(bg) or lasso(w)");
  train->add_option("--source", train_source, "internet or electricity");
  train->add_option("--activity", activity, "sleep or work");
  train->add_option("--target", target, "start, stop or duration (regression methods)");

  auto* evaluate = app.add_subcommand("evaluate", "leave-one-city-out benchmark matrix");
  add_common(evaluate, common);

  auto* decode = app.add_subcommand("decode", "decode audit for one held-out city-year");
  add_common(decode, common);
  std::string city, decode_source = "internet", decode_activity = "sleep", decode_method = "c-tree(bg)";
  int year = 0;
  decode->add_option("--city", city, "city id")->required();
  decode->add_option("--year", year, "year")->required();
  decode->add_option("--source", decode_source, "internet or electricity");
  decode->add_option("--activity", decode_activity, "sleep or work");
  decode->add_option("--method", decode_method, "classification method label");

  auto* report = app.add_subcommand("report", "tables and charts from evaluate output");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const auto subs = app.get_subcommands();
    const CLI::App* where = subs.empty() ? &app : subs.front();
    std::cerr << "error\tcommand=" << (subs.empty() ? "-" : where->get_name())
              << "\tkind=usage\tmessage=" << e.what() << '\n';
    std::cerr << where->help();
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = load_config(common);
    if (command == "synth") run_synth(cfg, cities, days, years, noise, noise_mode);
    else if (command == "preprocess") run_preprocess(cfg);
    else if (command == "features") run_features(cfg, source, stacked);
    else if (command == "train") run_train(cfg, method, train_source, activity, target);
    else if (command == "evaluate") run_evaluate(cfg);
    else if (command == "decode") run_decode(cfg, city, year, decode_source, decode_activity, decode_method);
    else if (command == "report") run_report(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error\tcommand=" << command << "\tkind=config\tmessage=" << e.what() << '\n';
    std::cerr << app.get_subcommand(command)->help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error\tcommand=" << command << "\tkind=runtime\tmessage=" << e.what() << '\n';
    return 1;
  }
  return 0;
}
