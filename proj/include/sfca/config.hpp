#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sfca/decode.hpp"
#include "sfca/eval.hpp"
#include "sfca/learners.hpp"
#include "sfca/pipeline.hpp"
#include "sfca/synth.hpp"

namespace sfca {

/// Every tunable of a run. Loaded from a flat `key = value` file with
/// dotted keys; `#` starts a comment. Unknown or repeated keys are errors.
struct RunConfig {
  SegmentGrid grid;
  PreprocessOptions preprocess;
  bool electricity_latitude = false;
  DecodeOptions decode;
  std::vector<std::string> methods{"ols", "c-tree(bg)"};
  std::vector<ProblemSpec> problems = all_problems();
  std::vector<std::int64_t> filters{std::begin(kDefaultFilters), std::end(kDefaultFilters)};
  int threads = 0;  // 0: OpenMP default
  double ci_sd = 60.0;
  SynthOptions synth;
  std::uint64_t seed = 42;
  std::string data_dir = "data";
  std::string out_dir = "out";
  /// learner.<family-id>.<param> overrides, applied on top of family defaults.
  std::map<Family, std::map<std::string, std::string>> learner;

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  /// Sets one key; throws on unknown keys or invalid values.
  void set(std::string_view key, std::string_view value);
  void validate() const;

  ModelSpec spec_for(std::string_view label) const;
  std::vector<ModelSpec> method_specs() const;
  BenchmarkOptions benchmark_options() const;

  /// Effective configuration in the same file format.
  std::string dump() const;
  /// Every accepted key, in documentation order.
  static std::vector<std::string> known_keys();
};

}  // namespace sfca
