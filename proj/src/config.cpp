#include "sfca/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "sfca/csv_io.hpp"
#include "sfca/wavelet.hpp"

namespace sfca {
namespace {

constexpr std::string_view kLearnerParams[] = {"lambda",        "n_trees",   "max_depth",
                                               "min_leaf",      "learning_rate", "subsample",
                                               "max_features",  "max_bins",  "svm_iterations"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto& f : csv::split_line(v)) {
    const auto t = trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

double as_double(std::string_view key, std::string_view v) {
  const double d = csv::to_double(v, key);
  if (!std::isfinite(d)) throw Error(std::string(key) + " needs a number");
  return d;
}

int as_int(std::string_view key, std::string_view v) { return static_cast<int>(csv::to_int(v, key)); }

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(std::string(key) + " needs true or false");
}

std::string fmt(double v) { return csv::format(v); }

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

void apply_learner_param(ModelSpec& s, std::string_view param, std::string_view value) {
  const std::string key = "learner." + std::string(family_id(s.family)) + "." + std::string(param);
  if (param == "lambda") s.lambda = as_double(key, value);
  else if (param == "n_trees") s.n_trees = as_int(key, value);
  else if (param == "max_depth") s.max_depth = as_int(key, value);
  else if (param == "min_leaf") s.min_leaf = as_double(key, value);
  else if (param == "learning_rate") s.learning_rate = as_double(key, value);
  else if (param == "subsample") s.subsample = as_double(key, value);
  else if (param == "max_features") s.max_features = as_int(key, value);
  else if (param == "max_bins") s.max_bins = as_int(key, value);
  else if (param == "svm_iterations") s.svm_iterations = as_int(key, value);
  else throw Error("unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> keys{
      "seed",
      "grid.segments_per_day",
      "grid.day_start_offset",
      "preprocess.week_penalty",
      "preprocess.robust",
      "preprocess.hourly_penalty",
      "features.electricity_latitude",
      "decode.smooth_penalty",
      "decode.wavelet",
      "decode.denoise",
      "decode.min_scores",
      "decode.sleep_split",
      "decode.work_split",
      "decode.work_day_start_offset",
      "eval.methods",
      "eval.problems",
      "eval.filters",
      "eval.threads",
      "eval.ci_sd",
      "synth.cities",
      "synth.years",
      "synth.first_year",
      "synth.days",
      "synth.noise",
      "synth.noise_mode",
      "io.data_dir",
      "io.out_dir",
  };
  for (auto f : all_families())
    for (auto p : kLearnerParams) keys.push_back("learner." + std::string(family_id(f)) + "." + std::string(p));
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k(key);
  if (k == "seed") {
    std::uint64_t v = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || r.ec != std::errc() || r.ptr != value.data() + value.size())
      throw Error("seed needs a non-negative integer");
    seed = v;
  } else if (k == "grid.segments_per_day") grid.segments_per_day = as_int(k, value);
  else if (k == "grid.day_start_offset") grid.day_start_offset = as_int(k, value);
  else if (k == "preprocess.week_penalty") preprocess.week.penalty = as_double(k, value);
  else if (k == "preprocess.robust") preprocess.week.robust = as_bool(k, value);
  else if (k == "preprocess.hourly_penalty") preprocess.hourly_penalty = as_double(k, value);
  else if (k == "features.electricity_latitude") electricity_latitude = as_bool(k, value);
  else if (k == "decode.smooth_penalty") decode.smooth_penalty = as_double(k, value);
  else if (k == "decode.wavelet") decode.wavelet = std::string(value);
  else if (k == "decode.denoise") {
    if (value == "zero_detail") decode.denoise = DenoiseRule::zero_detail;
    else if (value == "soft_universal") decode.denoise = DenoiseRule::soft_universal;
    else throw Error("decode.denoise must be zero_detail or soft_universal");
  } else if (k == "decode.min_scores") decode.min_scores = as_int(k, value);
  else if (k == "decode.sleep_split") decode.sleep_split = as_double(k, value);
  else if (k == "decode.work_split") decode.work_split = as_double(k, value);
  else if (k == "decode.work_day_start_offset") decode.work_day_start_offset = as_int(k, value);
  else if (k == "eval.methods") methods = split_list(value);
  else if (k == "eval.problems") {
    problems.clear();
    if (trim(value) == "all") problems = all_problems();
    else
      for (const auto& p : split_list(value)) problems.push_back(ProblemSpec::parse(p));
  } else if (k == "eval.filters") {
    filters.clear();
    for (const auto& f : split_list(value)) filters.push_back(csv::to_int(f, k));
  } else if (k == "eval.threads") threads = as_int(k, value);
  else if (k == "eval.ci_sd") ci_sd = as_double(k, value);
  else if (k == "synth.cities") synth.cities = as_int(k, value);
  else if (k == "synth.years") synth.years = as_int(k, value);
  else if (k == "synth.first_year") synth.first_year = as_int(k, value);
  else if (k == "synth.days") synth.days = as_int(k, value);
  else if (k == "synth.noise") synth.noise = as_double(k, value);
  else if (k == "synth.noise_mode") synth.mode = parse_noise_mode(value);
  else if (k == "io.data_dir") data_dir = std::string(value);
  else if (k == "io.out_dir") out_dir = std::string(value);
  else if (k.rfind("learner.", 0) == 0) {
    const auto dot = k.find('.', 8);
    if (dot == std::string::npos) throw Error("unknown config key '" + k + "'");
    Family f;
    try {
      f = parse_family(k.substr(8, dot - 8));
    } catch (const Error&) {
      throw Error("unknown config key '" + k + "'");
    }
    const std::string param = k.substr(dot + 1);
    ModelSpec probe = ModelSpec::defaults(f);
    apply_learner_param(probe, param, value);
    learner[f][param] = std::string(value);
  } else {
    throw Error("unknown config key '" + k + "'");
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::set<std::string> seen;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second)
      throw Error("config line " + std::to_string(line_no) + ": repeated key '" + std::string(key) + "'");
    try {
      c.set(key, value);
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(csv::read_file(path)); }

void RunConfig::validate() const {
  grid.validate();
  if (preprocess.week.penalty < 0 || preprocess.hourly_penalty < 0 || decode.smooth_penalty < 0)
    throw Error("smoothing penalties must be >= 0");
  Wavelet::named(decode.wavelet);
  if (decode.min_scores < 1 || decode.min_scores > grid.segments_per_day)
    throw Error("decode.min_scores must lie in [1, segments_per_day]");
  if (decode.work_day_start_offset < 1 || decode.work_day_start_offset > grid.segments_per_day)
    throw Error("decode.work_day_start_offset must lie on the grid");
  for (double s : {decode.sleep_split, decode.work_split})
    if (!(s >= 0 && s < kMinutesPerDay)) throw Error("decode splits must lie in [0, 1440)");
  if (methods.empty()) throw Error("eval.methods is empty");
  for (const auto& m : methods) spec_for(m).validate();
  if (problems.empty()) throw Error("eval.problems is empty");
  if (filters.empty()) throw Error("eval.filters is empty");
  if (!std::is_sorted(filters.begin(), filters.end())) throw Error("eval.filters must be ascending");
  if (threads < 0) throw Error("eval.threads must be >= 0");
  if (!(ci_sd > 0)) throw Error("eval.ci_sd must be > 0");
  if (synth.cities < 3) throw Error("synth.cities must be >= 3");
  if (synth.years < 1) throw Error("synth.years must be >= 1");
  if (synth.days < 7) throw Error("synth.days must be >= 7");
  if (!(synth.noise >= 0)) throw Error("synth.noise must be >= 0");
}

ModelSpec RunConfig::spec_for(std::string_view label) const {
  ModelSpec s = ModelSpec::from_label(label);
  if (auto it = learner.find(s.family); it != learner.end())
    for (const auto& [param, value] : it->second) apply_learner_param(s, param, value);
  s.seed = seed;
  return s;
}

std::vector<ModelSpec> RunConfig::method_specs() const {
  std::vector<ModelSpec> out;
  for (const auto& m : methods) out.push_back(spec_for(m));
  return out;
}

BenchmarkOptions RunConfig::benchmark_options() const {
  BenchmarkOptions b;
  b.loocv.grid = grid;
  b.loocv.decode = decode;
  b.loocv.seed = seed;
  b.loocv.exec = Execution::parallel;
  b.filters = filters;
  b.electricity_latitude = electricity_latitude;
  return b;
}

std::string RunConfig::dump() const {
  std::vector<std::string> problem_keys;
  for (const auto& p : problems) problem_keys.push_back(p.key());
  std::vector<std::string> filter_text;
  for (auto f : filters) filter_text.push_back(std::to_string(f));
  std::string s;
  auto line = [&](std::string_view k, const std::string& v) { s += std::string(k) + " = " + v + '\n'; };
  line("seed", std::to_string(seed));
  line("grid.segments_per_day", std::to_string(grid.segments_per_day));
  line("grid.day_start_offset", std::to_string(grid.day_start_offset));
  line("preprocess.week_penalty", fmt(preprocess.week.penalty));
  line("preprocess.robust", preprocess.week.robust ? "true" : "false");
  line("preprocess.hourly_penalty", fmt(preprocess.hourly_penalty));
  line("features.electricity_latitude", electricity_latitude ? "true" : "false");
  line("decode.smooth_penalty", fmt(decode.smooth_penalty));
  line("decode.wavelet", decode.wavelet);
  line("decode.denoise", decode.denoise == DenoiseRule::zero_detail ? "zero_detail" : "soft_universal");
  line("decode.min_scores", std::to_string(decode.min_scores));
  line("decode.sleep_split", fmt(decode.sleep_split));
  line("decode.work_split", fmt(decode.work_split));
  line("decode.work_day_start_offset", std::to_string(decode.work_day_start_offset));
  line("eval.methods", join(methods));
  line("eval.problems", join(problem_keys));
  line("eval.filters", join(filter_text));
  line("eval.threads", std::to_string(threads));
  line("eval.ci_sd", fmt(ci_sd));
  line("synth.cities", std::to_string(synth.cities));
  line("synth.years", std::to_string(synth.years));
  line("synth.first_year", std::to_string(synth.first_year));
  line("synth.days", std::to_string(synth.days));
  line("synth.noise", fmt(synth.noise));
  line("synth.noise_mode", std::string(to_string(synth.mode)));
  line("io.data_dir", data_dir);
  line("io.out_dir", out_dir);
  for (const auto& [f, params] : learner)
    for (const auto& [p, v] : params) line("learner." + std::string(family_id(f)) + "." + p, v);
  return s;
}

}  // namespace sfca
