#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfca/decode.hpp"
#include "sfca/features.hpp"
#include "sfca/learners.hpp"
#include "sfca/parallel.hpp"
#include "sfca/trajectory.hpp"

namespace sfca {

enum class Target { start, stop, duration };

std::string_view to_string(Target t);
Target parse_target(std::string_view s);

struct ProblemSpec {
  SignalSource source = SignalSource::internet;
  Activity activity = Activity::sleep;
  Target target = Target::start;

  /// "internet:sleep:start" style key.
  std::string key() const;
  static ProblemSpec parse(std::string_view key);
  bool operator==(const ProblemSpec&) const = default;
};

/// All 12 source x activity x target combinations.
std::vector<ProblemSpec> all_problems();

inline constexpr std::int64_t kDefaultFilters[] = {250000, 500000, 1000000, 2500000, 5000000};

/// Records whose population is strictly greater than `threshold`.
std::vector<CityYearRecord> population_filter(std::span<const CityYearRecord> records,
                                              std::int64_t threshold);

/// Root-mean-square error. Clock-time targets use the circular distance
/// min(|d|, 1440 - |d|).
double rmse(std::span<const double> predicted, std::span<const double> observed, bool circular);
double geometric_mean(std::span<const double> values);

/// True when predictions for `target` are clock times.
inline bool circular_target(Target t) { return t != Target::duration; }

struct LoocvOptions {
  SegmentGrid grid;
  DecodeOptions decode;
  std::uint64_t seed = 42;
  /// Parallelism across folds; learners run serially inside a fold.
  Execution exec = Execution::parallel;
};

struct FoldAudit {
  std::string held_out;
  std::size_t training_rows = 0;
  std::size_t leaked_rows = 0;  // training rows whose city_id equals held_out
};

struct RecordPrediction {
  std::string city_id;
  int year = 0;
  int respondents = 1;
  double observed[3] = {0, 0, 0};   // start, stop, duration
  double predicted[3] = {0, 0, 0};
  std::string error;  // non-empty when decode or prediction failed
};

struct ActivityPredictions {
  std::vector<RecordPrediction> records;
  std::vector<FoldAudit> folds;
  std::vector<std::string> warnings;
};

/// Holds out every city in turn (all of its years together), trains on the
/// remaining cities and predicts start, stop and duration for the held-out
/// city-years. Classifier families go through stack, threshold, fit,
/// predict and decode; regression families fit wide rows directly, one
/// model per target. `tables[i]` must be the features of `records[i]`.
ActivityPredictions loocv(std::span<const CityYearRecord> records,
                          std::span<const FeatureTable> tables, const ModelSpec& method,
                          Activity activity, const LoocvOptions& opts);

/// Fits once on every record and predicts the same records, through the
/// same route as loocv. Returns a single fold with an empty held-out id.
ActivityPredictions resubstitute(std::span<const CityYearRecord> records,
                                 std::span<const FeatureTable> tables, const ModelSpec& method,
                                 Activity activity, const LoocvOptions& opts);

/// Regression target: sleep start is unwrapped into [720, 2160) so the
/// over-midnight onset is continuous.
double regression_target(const ActivityOutcome& o, Target t);

struct CellResult {
  std::string method;
  std::string type;
  ProblemSpec problem;
  std::int64_t filter = 0;
  std::size_t n = 0;
  double rmse = 0;
  std::size_t excluded = 0;
  std::string error;
  bool ok() const { return error.empty(); }
};

struct GmResult {
  std::string method;
  std::string type;
  ProblemSpec problem;
  double gm = 0;
  bool defined = false;
  std::string markers;  // '^' best regression, '*' best overall, '_' SFCA beats best regression
};

struct ScatterPoint {
  std::string method;
  ProblemSpec problem;
  std::string city_id;
  int year = 0;
  double observed = 0;
  double predicted = 0;
  int respondents = 1;
};

struct FoldLog {
  std::string method;
  SignalSource source = SignalSource::internet;
  Activity activity = Activity::sleep;
  std::int64_t filter = 0;
  FoldAudit audit;
};

struct EvaluationReport {
  std::vector<std::string> methods;
  std::vector<ProblemSpec> problems;
  std::vector<std::int64_t> filters;
  std::vector<CellResult> cells;
  std::vector<GmResult> gms;
  std::vector<ScatterPoint> scatter;  // lowest filter only
  std::vector<FoldLog> folds;
  std::vector<std::string> exceptions;

  const CellResult* cell(std::string_view method, const ProblemSpec& p, std::int64_t filter) const;
  const GmResult* gm(std::string_view method, const ProblemSpec& p) const;
  std::size_t leaked_rows() const;
};

struct CorpusView {
  std::span<const CityYearRecord> internet;
  std::span<const CityYearRecord> electricity;
  std::span<const CityYearRecord> records(SignalSource s) const {
    return s == SignalSource::internet ? internet : electricity;
  }
};

struct BenchmarkOptions {
  LoocvOptions loocv;
  std::vector<std::int64_t> filters{std::begin(kDefaultFilters), std::end(kDefaultFilters)};
  bool electricity_latitude = false;
};

FeatureSchema schema_for(SignalSource source, const BenchmarkOptions& opts);

/// Full methods x problems x filters cross with GM aggregation and markers.
/// Failing cells are recorded and the run continues.
EvaluationReport benchmark_matrix(const CorpusView& corpus, std::span<const ModelSpec> methods,
                                  std::span<const ProblemSpec> problems,
                                  const BenchmarkOptions& opts);

/// Fills the GM table and markers from `cells`.
void annotate(EvaluationReport& report);

}  // namespace sfca
