#include "sfca/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sfca/transform.hpp"

namespace sfca {

std::string_view to_string(Target t) {
  switch (t) {
    case Target::start: return "start";
    case Target::stop: return "stop";
    case Target::duration: return "duration";
  }
  return "start";
}

Target parse_target(std::string_view s) {
  if (s == "start") return Target::start;
  if (s == "stop") return Target::stop;
  if (s == "duration") return Target::duration;
  throw Error("unknown target '" + std::string(s) + "'");
}

std::string ProblemSpec::key() const {
  return std::string(to_string(source)) + ":" + std::string(to_string(activity)) + ":" +
         std::string(to_string(target));
}

ProblemSpec ProblemSpec::parse(std::string_view key) {
  const auto a = key.find(':');
  const auto b = a == std::string_view::npos ? a : key.find(':', a + 1);
  if (b == std::string_view::npos) throw Error("problem key must be source:activity:target");
  return {parse_source(key.substr(0, a)), parse_activity(key.substr(a + 1, b - a - 1)),
          parse_target(key.substr(b + 1))};
}

std::vector<ProblemSpec> all_problems() {
  std::vector<ProblemSpec> out;
  for (auto s : {SignalSource::internet, SignalSource::electricity})
    for (auto a : {Activity::sleep, Activity::work})
      for (auto t : {Target::start, Target::stop, Target::duration}) out.push_back({s, a, t});
  return out;
}

std::vector<CityYearRecord> population_filter(std::span<const CityYearRecord> records,
                                              std::int64_t threshold) {
  std::vector<CityYearRecord> out;
  for (const auto& r : records) {
    if (r.outcomes.empty()) throw Error("record " + r.city_id + " has no population");
    if (r.population() > threshold) out.push_back(r);
  }
  if (out.empty()) throw Error("population filter > " + std::to_string(threshold) + " left no records");
  return out;
}

double rmse(std::span<const double> predicted, std::span<const double> observed, bool circular) {
  if (predicted.size() != observed.size()) throw Error("rmse: length mismatch");
  if (predicted.empty()) throw Error("rmse: no values");
  double ss = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    double d = std::abs(predicted[i] - observed[i]);
    if (circular) {
      d = std::fmod(d, kMinutesPerDay);
      d = std::min(d, kMinutesPerDay - d);
    }
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw Error("geometric mean of no values");
  double s = 0;
  for (double v : values) {
    if (!(v > 0)) throw Error("geometric mean needs positive values");
    s += std::log(v);
  }
  return std::exp(s / static_cast<double>(values.size()));
}

double regression_target(const ActivityOutcome& o, Target t) {
  switch (t) {
    case Target::start:
      if (o.activity == Activity::sleep && o.start_min < 720.0) return o.start_min + kMinutesPerDay;
      return o.start_min;
    case Target::stop:
      return o.stop_min;
    case Target::duration:
      return duration(o.start_min, o.stop_min, o.activity);
  }
  return 0;
}

namespace {

constexpr Target kTargets[] = {Target::start, Target::stop, Target::duration};

std::vector<double> normalized_weights(const std::vector<double>& raw) {
  double mean = 0;
  for (double v : raw) mean += v;
  mean /= static_cast<double>(raw.size());
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / mean;
  return out;
}

}  // namespace

namespace {

// One fold per held-out city, or a single fold training and predicting on
// everything when in_sample is set.
ActivityPredictions run_splits(std::span<const CityYearRecord> records,
                               std::span<const FeatureTable> tables, const ModelSpec& method,
                               Activity activity, const LoocvOptions& opts, bool in_sample) {
  if (records.size() != tables.size()) throw Error("loocv: records and feature tables differ");
  std::vector<std::string> cities;
  {
    std::set<std::string> seen;
    for (const auto& r : records) seen.insert(r.city_id);
    cities.assign(seen.begin(), seen.end());
  }
  if (in_sample) cities.assign(1, std::string());
  else if (cities.size() < 3) throw Error("loocv needs at least 3 cities, got " + std::to_string(cities.size()));
  method.validate();
  const bool classifier = is_classifier(method.family);
  const std::size_t n_rec = records.size();

  ActivityPredictions out;
  out.records.resize(n_rec);
  std::vector<const ActivityOutcome*> outcome(n_rec);
  for (std::size_t i = 0; i < n_rec; ++i) {
    const auto* o = records[i].outcome(activity);
    if (!o) throw Error("no " + std::string(to_string(activity)) + " outcome for " + records[i].city_id);
    outcome[i] = o;
    auto& rp = out.records[i];
    rp.city_id = records[i].city_id;
    rp.year = records[i].year;
    rp.respondents = o->respondents;
    rp.observed[0] = o->start_min;
    rp.observed[1] = o->stop_min;
    rp.observed[2] = duration(o->start_min, o->stop_min, activity);
  }

  // Shared designs built once; folds select rows.
  StackedDesign stacked;
  std::vector<std::size_t> row_begin(n_rec + 1, 0);
  std::vector<double> labels;
  Eigen::MatrixXd wide;
  std::vector<std::string> wide_names;
  if (classifier) {
    stacked = stack(tables);
    for (std::size_t i = 0; i < n_rec; ++i) {
      row_begin[i + 1] = row_begin[i] + tables[i].segments.size();
      for (auto v : threshold_labels(*outcome[i], opts.grid, tables[i].segments)) labels.push_back(v);
    }
  } else {
    for (std::size_t i = 0; i < n_rec; ++i) {
      const auto row = wide_row(records[i], tables[i]);
      if (i == 0) {
        wide.resize(static_cast<Eigen::Index>(n_rec), static_cast<Eigen::Index>(row.size()));
        wide_names = wide_columns(tables[i], opts.grid.segments_per_day);
      }
      if (static_cast<Eigen::Index>(row.size()) != wide.cols()) throw Error("wide rows differ in width");
      for (std::size_t j = 0; j < row.size(); ++j) wide(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }

  std::vector<FoldAudit> audits(cities.size());
  std::vector<std::vector<std::string>> fold_warnings(cities.size());

  auto run_fold = [&](std::size_t f) {
    const std::string& held = cities[f];
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n_rec; ++i) {
      if (in_sample) {
        train.push_back(i);
        test.push_back(i);
      } else {
        (records[i].city_id == held ? test : train).push_back(i);
      }
    }
    ModelSpec spec = method;
    spec.seed = derive_seed(opts.seed, in_sample ? std::string("in-sample") : held);
    FoldAudit& audit = audits[f];
    audit.held_out = held;
    try {
      if (classifier) {
        std::size_t rows = 0;
        for (auto i : train) rows += row_begin[i + 1] - row_begin[i];
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), stacked.x.cols());
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
        std::vector<double> raw_w;
        Eigen::Index at = 0;
        for (auto i : train) {
          for (std::size_t r = row_begin[i]; r < row_begin[i + 1]; ++r, ++at) {
            x.row(at) = stacked.x.row(static_cast<Eigen::Index>(r));
            y[at] = labels[r];
            if (!in_sample && stacked.rows[r].city_id == held) ++audit.leaked_rows;
            raw_w.push_back(static_cast<double>(outcome[i]->respondents));
          }
        }
        audit.training_rows = rows;
        const auto w = spec.weighted ? normalized_weights(raw_w) : std::vector<double>{};
        const auto model = fit(spec, x, y, w, stacked.columns, Execution::serial);
        fold_warnings[f] = model.warnings();
        for (auto i : test) {
          const Eigen::Index b = static_cast<Eigen::Index>(row_begin[i]);
          const Eigen::Index n = static_cast<Eigen::Index>(row_begin[i + 1] - row_begin[i]);
          const Eigen::VectorXd s =
              predict(model, stacked.x.middleRows(b, n), stacked.columns, Execution::serial);
          ScoreTrace trace{records[i].city_id, records[i].year, activity,
                           std::vector<double>(static_cast<std::size_t>(opts.grid.segments_per_day), kMissing)};
          for (Eigen::Index k = 0; k < n; ++k)
            trace.scores[static_cast<std::size_t>(tables[i].segments[static_cast<std::size_t>(k)] - 1)] =
                std::clamp(s[k], 0.0, 1.0);
          auto& rp = out.records[i];
          try {
            const auto t = decode_times(trace, opts.grid, activity, opts.decode);
            rp.predicted[0] = t.start_min;
            rp.predicted[1] = t.stop_min;
            rp.predicted[2] = t.duration_min;
          } catch (const Error& e) {
            rp.error = std::string("decode: ") + e.what();
          }
        }
      } else {
        const Eigen::Index n = static_cast<Eigen::Index>(train.size());
        Eigen::MatrixXd x(n, wide.cols());
        std::vector<double> raw_w;
        for (Eigen::Index k = 0; k < n; ++k) {
          const auto i = train[static_cast<std::size_t>(k)];
          x.row(k) = wide.row(static_cast<Eigen::Index>(i));
          if (!in_sample && records[i].city_id == held) ++audit.leaked_rows;
          raw_w.push_back(static_cast<double>(outcome[i]->respondents));
        }
        audit.training_rows = train.size();
        const auto w = spec.weighted ? normalized_weights(raw_w) : std::vector<double>{};
        Eigen::MatrixXd xt(static_cast<Eigen::Index>(test.size()), wide.cols());
        for (std::size_t k = 0; k < test.size(); ++k)
          xt.row(static_cast<Eigen::Index>(k)) = wide.row(static_cast<Eigen::Index>(test[k]));
        for (int t = 0; t < 3; ++t) {
          Eigen::VectorXd y(n);
          for (Eigen::Index k = 0; k < n; ++k)
            y[k] = regression_target(*outcome[train[static_cast<std::size_t>(k)]], kTargets[t]);
          const auto model = fit(spec, x, y, w, wide_names, Execution::serial);
          for (const auto& msg : model.warnings()) fold_warnings[f].push_back(msg);
          const Eigen::VectorXd p = predict(model, xt, wide_names, Execution::serial);
          for (std::size_t k = 0; k < test.size(); ++k)
            out.records[test[k]].predicted[t] =
                circular_target(kTargets[t]) ? wrap_minutes(p[static_cast<Eigen::Index>(k)])
                                             : p[static_cast<Eigen::Index>(k)];
        }
      }
    } catch (const std::exception& e) {
      for (auto i : test) out.records[i].error = std::string("fit: ") + e.what();
    }
  };

  const int folds = static_cast<int>(cities.size());
  if (opts.exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < folds; ++f) run_fold(static_cast<std::size_t>(f));
  } else {
    for (int f = 0; f < folds; ++f) run_fold(static_cast<std::size_t>(f));
  }

  out.folds = std::move(audits);
  std::set<std::string> seen;
  for (const auto& fw : fold_warnings)
    for (const auto& w : fw)
      if (seen.insert(w).second) out.warnings.push_back(w);
  return out;
}

}  // namespace

ActivityPredictions loocv(std::span<const CityYearRecord> records,
                          std::span<const FeatureTable> tables, const ModelSpec& method,
                          Activity activity, const LoocvOptions& opts) {
  return run_splits(records, tables, method, activity, opts, false);
}

ActivityPredictions resubstitute(std::span<const CityYearRecord> records,
                                 std::span<const FeatureTable> tables, const ModelSpec& method,
                                 Activity activity, const LoocvOptions& opts) {
  return run_splits(records, tables, method, activity, opts, true);
}

const CellResult* EvaluationReport::cell(std::string_view method, const ProblemSpec& p,
                                         std::int64_t filter) const {
  for (const auto& c : cells)
    if (c.method == method && c.problem == p && c.filter == filter) return &c;
  return nullptr;
}

const GmResult* EvaluationReport::gm(std::string_view method, const ProblemSpec& p) const {
  for (const auto& g : gms)
    if (g.method == method && g.problem == p) return &g;
  return nullptr;
}

std::size_t EvaluationReport::leaked_rows() const {
  std::size_t n = 0;
  for (const auto& f : folds) n += f.audit.leaked_rows;
  return n;
}

FeatureSchema schema_for(SignalSource source, const BenchmarkOptions& opts) {
  const int s = opts.loocv.grid.segments_per_day;
  return source == SignalSource::internet ? FeatureSchema::internet(s)
                                          : FeatureSchema::electricity(opts.electricity_latitude, s);
}

void annotate(EvaluationReport& report) {
  report.gms.clear();
  for (const auto& m : report.methods) {
    for (const auto& p : report.problems) {
      GmResult g;
      g.method = m;
      g.problem = p;
      std::vector<double> values;
      bool all_ok = true;
      for (auto f : report.filters) {
        const auto* c = report.cell(m, p, f);
        if (!c) {
          all_ok = false;
          continue;
        }
        g.type = c->type;
        if (!c->ok() || c->n == 0 || !(c->rmse > 0)) all_ok = false;
        else values.push_back(c->rmse);
      }
      if (all_ok && !values.empty()) {
        g.gm = geometric_mean(values);
        g.defined = true;
      }
      report.gms.push_back(std::move(g));
    }
  }
  auto is_regression = [](const std::string& type) { return type.rfind("SFCA", 0) != 0; };
  for (const auto& p : report.problems) {
    double best_reg = INFINITY, best_all = INFINITY;
    for (const auto& g : report.gms) {
      if (!(g.problem == p) || !g.defined) continue;
      best_all = std::min(best_all, g.gm);
      if (is_regression(g.type)) best_reg = std::min(best_reg, g.gm);
    }
    for (auto& g : report.gms) {
      if (!(g.problem == p) || !g.defined) continue;
      if (is_regression(g.type) && g.gm == best_reg) g.markers += '^';
      if (g.gm == best_all) g.markers += '*';
      if (!is_regression(g.type) && g.gm < best_reg) g.markers += '_';
    }
  }
}

EvaluationReport benchmark_matrix(const CorpusView& corpus, std::span<const ModelSpec> methods,
                                  std::span<const ProblemSpec> problems,
                                  const BenchmarkOptions& opts) {
  EvaluationReport report;
  for (const auto& m : methods) report.methods.push_back(m.label());
  report.problems.assign(problems.begin(), problems.end());
  report.filters = opts.filters;

  for (auto source : {SignalSource::internet, SignalSource::electricity}) {
    std::vector<Activity> activities;
    for (const auto& p : problems)
      if (p.source == source && std::find(activities.begin(), activities.end(), p.activity) == activities.end())
        activities.push_back(p.activity);
    if (activities.empty()) continue;

    const auto records = corpus.records(source);
    const FeatureSchema schema = schema_for(source, opts);
    std::vector<FeatureTable> tables(records.size());
    std::vector<std::string> table_errors(records.size());
    const int nrec = static_cast<int>(records.size());
#pragma omp parallel for schedule(dynamic) if (opts.loocv.exec == Execution::parallel)
    for (int i = 0; i < nrec; ++i) {
      try {
        tables[i] = assemble_features(records[i], schema, source);
      } catch (const std::exception& e) {
        table_errors[i] = e.what();
      }
    }
    for (int i = 0; i < nrec; ++i)
      if (!table_errors[i].empty())
        throw Error("features for " + records[i].city_id + "/" + std::to_string(records[i].year) +
                    ": " + table_errors[i]);

    for (auto filter : opts.filters) {
      std::vector<CityYearRecord> sub;
      std::vector<FeatureTable> sub_tables;
      for (int i = 0; i < nrec; ++i)
        if (records[i].population() > filter) {
          sub.push_back(records[i]);
          sub_tables.push_back(tables[i]);
        }
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const auto& method = methods[mi];
        const std::string label = report.methods[mi];
        const std::string type(family_type(method.family));
        for (auto activity : activities) {
          ActivityPredictions preds;
          std::string failure;
          try {
            if (sub.empty())
              throw Error("population filter > " + std::to_string(filter) + " left no records");
            preds = loocv(sub, sub_tables, method, activity, opts.loocv);
          } catch (const std::exception& e) {
            failure = e.what();
          }
          for (const auto& fa : preds.folds) report.folds.push_back({label, source, activity, filter, fa});
          for (const auto& w : preds.warnings)
            report.exceptions.push_back(label + " " + std::string(to_string(source)) + ":" +
                                        std::string(to_string(activity)) + " >" +
                                        std::to_string(filter) + " warning: " + w);
          for (const auto& p : problems) {
            if (p.source != source || p.activity != activity) continue;
            CellResult cell{label, type, p, filter, 0, 0, 0, failure};
            const int t = static_cast<int>(p.target);
            if (failure.empty()) {
              std::vector<double> pred, obs;
              for (const auto& r : preds.records) {
                if (!r.error.empty()) {
                  ++cell.excluded;
                  report.exceptions.push_back(label + " " + p.key() + " >" + std::to_string(filter) +
                                              " " + r.city_id + "/" + std::to_string(r.year) + ": " +
                                              r.error);
                  continue;
                }
                pred.push_back(r.predicted[t]);
                obs.push_back(r.observed[t]);
                if (filter == opts.filters.front())
                  report.scatter.push_back(
                      {label, p, r.city_id, r.year, r.observed[t], r.predicted[t], r.respondents});
              }
              cell.n = pred.size();
              if (pred.empty()) cell.error = "every record failed";
              else cell.rmse = rmse(pred, obs, circular_target(p.target));
            }
            report.cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  // Cells in method, problem, filter order regardless of evaluation order.
  std::vector<CellResult> ordered;
  for (const auto& m : report.methods)
    for (const auto& p : report.problems)
      for (auto f : report.filters)
        if (const auto* c = report.cell(m, p, f)) ordered.push_back(*c);
  report.cells = std::move(ordered);
  annotate(report);
  return report;
}

}  // namespace sfca
