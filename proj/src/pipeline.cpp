#include "integrule/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "integrule/report.hpp"

namespace integrule {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::Config, what); };
  generator_config().validate();
  quadrature.validate();
  fitter.validate();
  if (!(fitter.epsilon < 1.0)) bad("epsilon must be in (0,1)");
  if (!(r_threshold > 0.0 && r_threshold < 1.0)) bad("r_threshold must be in (0,1)");
  if (!(const_prune > 0.0 && const_prune < 1.0)) bad("const_prune must be in (0,1)");
  if (output_dir.empty()) bad("output_dir must not be empty");
}

RuleSearchConfig PipelineConfig::search() const {
  RuleSearchConfig s;
  s.r_threshold = r_threshold;
  s.const_prune = const_prune;
  return s;
}

GeneratorConfig PipelineConfig::generator_config() const {
  GeneratorConfig g = generator;
  g.rounding = rounding;
  return g;
}

std::size_t PipelineConfig::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

ordered_json config_to_json(const PipelineConfig& c) {
  const auto& g = c.generator;
  const auto& f = c.fitter;
  return {
      {"generator",
       {{"seed", g.seed},
        {"n_polynomial", g.n_polynomial},
        {"n_transcendental", g.n_transcendental},
        {"max_degree", g.max_degree},
        {"coeff_min", g.coeff_min},
        {"coeff_max", g.coeff_max},
        {"min_magnitude", g.min_magnitude},
        {"integer_constants", g.integer_constants}}},
      {"quadrature", {{"T", c.quadrature.T}, {"n_points", c.quadrature.n_points}}},
      {"fitter",
       {{"epsilon", f.epsilon},
        {"simplicity_margin", f.simplicity_margin},
        {"rate_grid_points", f.rate_grid_points},
        {"rate_min", f.rate_min},
        {"rate_max", f.rate_max},
        {"refine_iters", f.refine_iters},
        {"refine_tol", f.refine_tol},
        {"scan_points", f.scan_points}}},
      {"rounding", {{"decimal_places", c.rounding.decimal_places}}},
      {"r_threshold", c.r_threshold},
      {"const_prune", c.const_prune},
      {"output_dir", c.output_dir},
      {"workers", c.workers},
  };
}

namespace {

class Overlay {
 public:
  Overlay(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(ErrorCode::Config, where_ + " must be a JSON object");
  }

  template <class T>
  Overlay& field(const char* key, T& dst) {
    seen_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) return *this;
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_unsigned())
          throw Error(ErrorCode::Config, where_ + key + " must be a non-negative integer");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw Error(ErrorCode::Config, where_ + key + " must be an integer");
      }
      dst = it->get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Config, where_ + key + ": " + e.what());
    }
    return *this;
  }

  template <class Fn>
  Overlay& section(const char* key, Fn fn) {
    seen_.push_back(key);
    auto it = j_.find(key);
    if (it != j_.end()) {
      Overlay sub(*it, where_ + key + ".");
      fn(sub);
      sub.finish();
    }
    return *this;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw Error(ErrorCode::Config, "unknown config key '" + where_ + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace

void merge_config(PipelineConfig& c, const json& j) {
  Overlay top(j, "");
  top.section("generator", [&](Overlay& o) {
       auto& g = c.generator;
       o.field("seed", g.seed)
           .field("n_polynomial", g.n_polynomial)
           .field("n_transcendental", g.n_transcendental)
           .field("max_degree", g.max_degree)
           .field("coeff_min", g.coeff_min)
           .field("coeff_max", g.coeff_max)
           .field("min_magnitude", g.min_magnitude)
           .field("integer_constants", g.integer_constants);
     })
      .section("quadrature", [&](Overlay& o) {
        o.field("T", c.quadrature.T).field("n_points", c.quadrature.n_points);
      })
      .section("fitter", [&](Overlay& o) {
        auto& f = c.fitter;
        o.field("epsilon", f.epsilon)
            .field("simplicity_margin", f.simplicity_margin)
            .field("rate_grid_points", f.rate_grid_points)
            .field("rate_min", f.rate_min)
            .field("rate_max", f.rate_max)
            .field("refine_iters", f.refine_iters)
            .field("refine_tol", f.refine_tol)
            .field("scan_points", f.scan_points);
      })
      .section("rounding", [&](Overlay& o) { o.field("decimal_places", c.rounding.decimal_places); })
      .field("r_threshold", c.r_threshold)
      .field("const_prune", c.const_prune)
      .field("output_dir", c.output_dir)
      .field("workers", c.workers);
  top.finish();
}

void merge_config_file(PipelineConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "config file '" + path + "': " + e.what());
  }
  merge_config(c, j);
}

void apply_environment(PipelineConfig& c) {
  if (const char* v = std::getenv(kOutputDirEnv); v != nullptr && *v != '\0') c.output_dir = v;
}

std::string output_path(const PipelineConfig& c, const std::string& name) {
  const fs::path p(name);
  if (p.is_absolute()) return name;
  return (fs::path(c.output_dir) / p).string();
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  return in;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error(ErrorCode::Io, "error writing '" + path + "'");
}

json parse_object(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed JSONL line: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Io, "JSONL line is not an object");
  return j;
}

template <class T, class Fn>
std::vector<T> read_lines(const std::string& path, Fn parse_line) {
  auto in = open_input(path);
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Io, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string dataset_line(const DatasetRecord& r, RoundingPolicy rounding) {
  ordered_json j{{"id", r.id}, {"family", to_string(r.family)}, {"expr", serialize(r.expression, rounding)}};
  return j.dump();
}

std::string pair_line(const IntegralPair& p, RoundingPolicy rounding) {
  ordered_json j{{"id", p.id},
                 {"f", serialize(p.f, rounding)},
                 {"g", serialize(p.g, rounding)},
                 {"rel_error", p.rel_error}};
  return j.dump();
}

std::string rejected_line(const RejectedRecord& r) {
  ordered_json j{{"id", r.id}, {"family", to_string(r.family)}, {"expr", r.expr}, {"reason", r.reason}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (r.rel_error) j["rel_error"] = *r.rel_error;
  if (r.fitted) j["fitted"] = *r.fitted;
  return j.dump();
}

DatasetRecord parse_dataset_line(const std::string& line) {
  const json j = parse_object(line);
  DatasetRecord r;
  r.id = j.at("id").get<std::size_t>();
  r.family = family_from_string(j.at("family").get<std::string>());
  r.expression = parse(j.at("expr").get<std::string>());
  return r;
}

IntegralPair parse_pair_line(const std::string& line) {
  const json j = parse_object(line);
  IntegralPair p;
  p.id = j.at("id").get<std::size_t>();
  p.f = parse(j.at("f").get<std::string>());
  p.g = parse(j.at("g").get<std::string>());
  p.rel_error = j.at("rel_error").get<double>();
  return p;
}

std::vector<DatasetRecord> read_dataset(const std::string& path) {
  return read_lines<DatasetRecord>(path, parse_dataset_line);
}

std::vector<IntegralPair> read_pairs(const std::string& path) {
  return read_lines<IntegralPair>(path, parse_pair_line);
}

// ---------------------------------------------------------------------------
// Stages

RecordOutcome process_record(const DatasetRecord& record, const PipelineConfig& cfg) {
  RecordOutcome out;
  RejectedRecord rej;
  rej.id = record.id;
  rej.family = record.family;
  rej.expr = serialize(record.expression, cfg.rounding);
  try {
    const SampledCurve g = cumulative_trapezoid(sample(record.expression, cfg.quadrature));
    const FitResult fit = fit_best(g, cfg.fitter, cfg.rounding);
    FilterOutcome f = filter_pair(record.id, record.expression, fit, cfg.fitter);
    if (f.accepted) {
      out.pair = std::move(f.pair);
      return out;
    }
    rej.reason = f.reason;
    rej.rel_error = fit.rel_error;
    rej.fitted = serialize(fit.expression, cfg.rounding);
  } catch (const EvaluationError& e) {
    rej.reason = to_string(ErrorCode::Evaluation);
    rej.detail = e.what();
  } catch (const Error& e) {
    rej.reason = to_string(ErrorCode::Fit);
    rej.detail = e.what();
  }
  out.rejected = std::move(rej);
  return out;
}

double PipelineSummary::retention(Family f) const {
  const auto i = static_cast<std::size_t>(f);
  return total[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / static_cast<double>(total[i]);
}

std::string PipelineSummary::line() const {
  std::ostringstream s;
  std::size_t all = 0, kept = 0;
  bool first = true;
  for (Family f : {Family::Poly, Family::Sin, Family::Cos, Family::Exp}) {
    const auto i = static_cast<std::size_t>(f);
    all += total[i];
    kept += accepted[i];
    if (total[i] == 0) continue;
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.1f%%", 100.0 * retention(f));
    s << (first ? "" : ", ") << to_string(f) << " " << accepted[i] << "/" << total[i] << " (" << pct << ")";
    first = false;
  }
  std::ostringstream head;
  head << "kept " << kept << "/" << all;
  if (!first) head << ": " << s.str();
  for (const auto& [reason, n] : rejected_by_reason) head << "; " << reason << " " << n;
  return head.str();
}

std::size_t run_gen(const PipelineConfig& cfg, const std::string& dataset_path) {
  cfg.validate();
  const auto records = generate(cfg.generator_config());
  auto out = open_output(dataset_path);
  for (const auto& r : records) out << dataset_line(r, cfg.rounding) << '\n';
  close_output(out, dataset_path);
  return records.size();
}

PipelineSummary run_pipeline(const PipelineConfig& cfg, const std::string& dataset_path,
                             const std::string& pairs_path, const std::string& rejected_path) {
  cfg.validate();
  const auto records = read_dataset(dataset_path);
  std::vector<RecordOutcome> results(records.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) results[i] = process_record(records[i], cfg);
  };
  const std::size_t n_workers = std::min(cfg.worker_count(), std::max<std::size_t>(records.size(), 1));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });

  PipelineSummary summary;
  auto pairs = open_output(pairs_path);
  auto rejected = open_output(rejected_path);
  for (std::size_t i : order) {
    const auto fam = static_cast<std::size_t>(records[i].family);
    ++summary.total[fam];
    if (results[i].pair) {
      ++summary.accepted[fam];
      pairs << pair_line(*results[i].pair, cfg.rounding) << '\n';
    } else {
      ++summary.rejected_by_reason[results[i].rejected->reason];
      rejected << rejected_line(*results[i].rejected) << '\n';
    }
  }
  close_output(pairs, pairs_path);
  close_output(rejected, rejected_path);
  return summary;
}

DiscoveryReport run_discover(const PipelineConfig& cfg, const std::string& pairs_path, Family family,
                             const std::string& json_path, const std::string& text_path) {
  cfg.validate();
  std::vector<IntegralPair> pairs;
  for (auto& p : read_pairs(pairs_path))
    if (p.f.form().family() == family) pairs.push_back(std::move(p));
  const RuleSearchConfig search = cfg.search();
  if (pairs.size() < search.min_pairs)
    throw Error(ErrorCode::InsufficientData, "need at least " + std::to_string(search.min_pairs) + " " +
                                                 to_string(family) + " pairs, found " +
                                                 std::to_string(pairs.size()));
  DiscoveryReport rep = build_report(pairs, search);
  const ordered_json j = report_to_json(rep);
  auto jo = open_output(json_path);
  jo << j.dump(2) << '\n';
  close_output(jo, json_path);
  auto to = open_output(text_path);
  to << render_text(j);
  close_output(to, text_path);
  return rep;
}

std::string training_line(const IntegralPair& p, RoundingPolicy rounding) {
  return serialize(p.f, rounding) + " entail " + serialize(p.g, rounding);
}

std::size_t run_export_training(const std::string& pairs_path, const std::string& corpus_path,
                                RoundingPolicy rounding) {
  const auto pairs = read_pairs(pairs_path);
  auto out = open_output(corpus_path);
  for (const auto& p : pairs) out << training_line(p, rounding) << '\n';
  close_output(out, corpus_path);
  return pairs.size();
}

}  // namespace integrule
