#ifndef INTEGRULE_PIPELINE_HPP
#define INTEGRULE_PIPELINE_HPP

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "integrule/datagen.hpp"
#include "integrule/quadrature.hpp"
#include "integrule/rulediscovery.hpp"
#include "integrule/symfit.hpp"

namespace integrule {

/// Environment variable that overrides output_dir (and nothing else).
inline constexpr const char* kOutputDirEnv = "INTEGRULE_OUTPUT_DIR";

struct PipelineConfig {
  GeneratorConfig generator;
  QuadratureConfig quadrature;
  FitterConfig fitter;
  RoundingPolicy rounding;  // shared by generation and fitting
  double r_threshold = 0.95;
  double const_prune = 0.01;
  std::string output_dir = ".";
  std::size_t workers = 0;  // 0: one per hardware thread

  void validate() const;  // throws Error(Config)
  RuleSearchConfig search() const;
  GeneratorConfig generator_config() const;
  std::size_t worker_count() const;
};

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

/// Overlays the keys present in `j`; unknown keys and wrong types throw
/// Error(Config). Does not validate.
void merge_config(PipelineConfig& cfg, const nlohmann::json& j);
void merge_config_file(PipelineConfig& cfg, const std::string& path);
/// Applies kOutputDirEnv when set and non-empty.
void apply_environment(PipelineConfig& cfg);

/// Path inside output_dir, unless `name` is already absolute.
std::string output_path(const PipelineConfig& cfg, const std::string& name);

// JSONL records.
std::string dataset_line(const DatasetRecord& r, RoundingPolicy rounding = {});
std::string pair_line(const IntegralPair& p, RoundingPolicy rounding = {});
DatasetRecord parse_dataset_line(const std::string& line);
IntegralPair parse_pair_line(const std::string& line);

std::vector<DatasetRecord> read_dataset(const std::string& path);
std::vector<IntegralPair> read_pairs(const std::string& path);

struct RejectedRecord {
  std::size_t id = 0;
  Family family = Family::Poly;
  std::string expr;
  std::string reason;  // fit-failure, exceeds-epsilon, eval-overflow
  std::string detail;
  std::optional<double> rel_error;
  std::optional<std::string> fitted;  // rounded best fit, when one exists
};

std::string rejected_line(const RejectedRecord& r);

struct RecordOutcome {
  std::optional<IntegralPair> pair;
  std::optional<RejectedRecord> rejected;
};

/// sample -> cumulative_trapezoid -> fit_best -> filter_pair for one record.
/// Never throws for per-record numeric failures.
RecordOutcome process_record(const DatasetRecord& record, const PipelineConfig& cfg);

struct PipelineSummary {
  std::array<std::size_t, 4> total{};  // indexed by Family
  std::array<std::size_t, 4> accepted{};
  std::map<std::string, std::size_t> rejected_by_reason;

  double retention(Family f) const;
  std::string line() const;  // one-line per-family retention
};

/// Writes the generated dataset; returns the record count.
std::size_t run_gen(const PipelineConfig& cfg, const std::string& dataset_path);

/// Processes every dataset record with a worker pool. Output order follows
/// record order regardless of worker count.
PipelineSummary run_pipeline(const PipelineConfig& cfg, const std::string& dataset_path,
                             const std::string& pairs_path, const std::string& rejected_path);

/// Rule discovery over the pairs whose source belongs to `family`. Writes the
/// JSON and text reports. Throws Error(InsufficientData) below 30 such pairs.
DiscoveryReport run_discover(const PipelineConfig& cfg, const std::string& pairs_path, Family family,
                             const std::string& json_path, const std::string& text_path);

/// "<f> entail <g>" per pair; returns the line count.
std::size_t run_export_training(const std::string& pairs_path, const std::string& corpus_path,
                                RoundingPolicy rounding = {});

std::string training_line(const IntegralPair& p, RoundingPolicy rounding = {});

}  // namespace integrule

#endif  // INTEGRULE_PIPELINE_HPP
