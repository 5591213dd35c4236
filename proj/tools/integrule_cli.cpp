#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "integrule/integrule.h"

namespace {

struct Flags {
  std::string config_file;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> workers;

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_poly, n_trans;
  std::optional<int> max_degree;
  std::optional<double> coeff_min, coeff_max, min_magnitude;
  bool integer_constants = false;
  std::optional<int> decimals;

  std::optional<double> T;
  std::optional<std::size_t> n_points;
  std::optional<double> epsilon, simplicity_margin, rate_min, rate_max;
  std::optional<std::size_t> rate_grid;

  std::optional<double> r_threshold, const_prune;
};

template <class T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

nlohmann::json overlay(const Flags& f) {
  nlohmann::json g = nlohmann::json::object(), q = nlohmann::json::object(), fit = nlohmann::json::object();
  put(g, "seed", f.seed);
  put(g, "n_polynomial", f.n_poly);
  put(g, "n_transcendental", f.n_trans);
  put(g, "max_degree", f.max_degree);
  put(g, "coeff_min", f.coeff_min);
  put(g, "coeff_max", f.coeff_max);
  put(g, "min_magnitude", f.min_magnitude);
  if (f.integer_constants) g["integer_constants"] = true;
  put(q, "T", f.T);
  put(q, "n_points", f.n_points);
  put(fit, "epsilon", f.epsilon);
  put(fit, "simplicity_margin", f.simplicity_margin);
  put(fit, "rate_min", f.rate_min);
  put(fit, "rate_max", f.rate_max);
  put(fit, "rate_grid_points", f.rate_grid);

  nlohmann::json j = nlohmann::json::object();
  if (!g.empty()) j["generator"] = g;
  if (!q.empty()) j["quadrature"] = q;
  if (!fit.empty()) j["fitter"] = fit;
  if (f.decimals) j["rounding"] = {{"decimal_places", *f.decimals}};
  put(j, "r_threshold", f.r_threshold);
  put(j, "const_prune", f.const_prune);
  put(j, "output_dir", f.output_dir);
  put(j, "workers", f.workers);
  return j;
}

struct Failure {
  int exit_code;
};

void check(integrule_status s, const char* what) {
  if (s == INTEGRULE_OK) return;
  std::cerr << "integrule: " << what << ": " << integrule_status_string(s);
  const std::string msg = integrule_last_error_message();
  if (!msg.empty()) std::cerr << ": " << msg;
  std::cerr << "\n";
  throw Failure{s == INTEGRULE_CONFIG_ERROR ? 2 : 1};
}

template <class Fn>
std::string fetch(Fn fn, const char* what) {
  size_t len = 0;
  integrule_status s = fn(nullptr, 0, &len);
  if (s != INTEGRULE_BUFFER_TOO_SMALL) check(s, what);
  std::vector<char> buf(len + 1);
  check(fn(buf.data(), buf.size(), &len), what);
  return std::string(buf.data(), len);
}

class Config {
 public:
  explicit Config(const Flags& f) {
    check(integrule_config_create(&cfg_), "config");
    if (!f.config_file.empty()) check(integrule_config_load_file(cfg_, f.config_file.c_str()), "config file");
    check(integrule_config_apply_env(cfg_), "environment");
    check(integrule_config_merge_json(cfg_, overlay(f).dump().c_str()), "flags");
    check(integrule_config_validate(cfg_), "config");
  }
  ~Config() { integrule_config_destroy(cfg_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  const integrule_config* get() const { return cfg_; }

  // Explicit paths are used as given; defaults live under output_dir.
  std::string resolve(const std::string& given, const std::string& fallback) const {
    if (!given.empty()) return given;
    return fetch([&](char* b, size_t c, size_t* l) { return integrule_config_output_path(cfg_, fallback.c_str(), b, c, l); },
                 "output path");
  }

 private:
  integrule_config* cfg_ = nullptr;
};

void add_generator_flags(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--poly", f.n_poly, "Number of polynomial records");
  app->add_option("--transcendental", f.n_trans, "Number of sin/cos/exp records");
  app->add_option("--max-degree", f.max_degree, "Highest polynomial degree (1..6)");
  app->add_option("--coeff-min", f.coeff_min, "Lower coefficient bound");
  app->add_option("--coeff-max", f.coeff_max, "Upper coefficient bound");
  app->add_option("--min-magnitude", f.min_magnitude, "Floor on |rate|, |amplitude| and leading coefficient");
  app->add_flag("--integer-constants", f.integer_constants, "Draw integer coefficients");
}

void add_fitter_flags(CLI::App* app, Flags& f) {
  app->add_option("--T", f.T, "Integration interval upper bound");
  app->add_option("--n-points", f.n_points, "Grid points on [0, T]");
  app->add_option("--epsilon", f.epsilon, "Maximum accepted relative difference");
  app->add_option("--simplicity-margin", f.simplicity_margin, "Error slack favouring simpler templates");
  app->add_option("--rate-min", f.rate_min, "Smallest |rate| scanned");
  app->add_option("--rate-max", f.rate_max, "Largest |rate| scanned");
  app->add_option("--rate-grid", f.rate_grid, "Points in the rate scan");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical integration, template fitting and rule discovery for integrals"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", integrule_version());

  Flags f;
  app.add_option("-c,--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--output-dir", f.output_dir, "Directory for default output files");
  app.add_option("--workers", f.workers, "Worker threads for the pipeline (0: all cores)");
  app.add_option("--decimals", f.decimals, "Decimal places kept in coefficients");

  std::string dataset, pairs, rejected, json_out, text_out, corpus, family, report_in, report_out;

  auto* gen = app.add_subcommand("gen", "Generate a random function dataset");
  add_generator_flags(gen, f);
  gen->add_option("-o,--out", dataset, "Dataset path (default <output_dir>/dataset.jsonl)");

  auto* pipe = app.add_subcommand("pipeline", "Integrate and fit every dataset record");
  add_fitter_flags(pipe, f);
  pipe->add_option("-d,--dataset", dataset, "Dataset path (default <output_dir>/dataset.jsonl)");
  pipe->add_option("--pairs", pairs, "Accepted pairs (default <output_dir>/pairs.jsonl)");
  pipe->add_option("--rejected", rejected, "Rejected records (default <output_dir>/rejected.jsonl)");

  auto* disc = app.add_subcommand("discover", "Search coefficient rules for one source family");
  disc->add_option("-f,--family", family, "poly, sin, cos or exp")
      ->required()
      ->check(CLI::IsMember({"poly", "sin", "cos", "exp"}));
  disc->add_option("--pairs", pairs, "Pairs path (default <output_dir>/pairs.jsonl)");
  disc->add_option("--json", json_out, "JSON report (default <output_dir>/report_<family>.json)");
  disc->add_option("--text", text_out, "Text report (default <output_dir>/report_<family>.txt)");
  disc->add_option("--r-threshold", f.r_threshold, "Minimum |r| for a rule");
  disc->add_option("--const-prune", f.const_prune, "Constants below this are dropped");

  auto* exp = app.add_subcommand("export-training", "Write the 'f entail g' training corpus");
  exp->add_option("--pairs", pairs, "Pairs path (default <output_dir>/pairs.jsonl)");
  exp->add_option("-o,--out", corpus, "Corpus path (default <output_dir>/corpus.txt)");

  auto* rep = app.add_subcommand("report", "Print a saved JSON report as text");
  rep->add_option("input", report_in, "JSON report")->required()->check(CLI::ExistingFile);
  rep->add_option("-o,--out", report_out, "Write the text here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rep) {
      const std::string text = fetch(
          [&](char* b, size_t c, size_t* l) { return integrule_render_report(report_in.c_str(), b, c, l); },
          "report");
      if (report_out.empty()) {
        std::cout << text;
      } else {
        std::FILE* out = std::fopen(report_out.c_str(), "wb");
        if (out == nullptr || std::fwrite(text.data(), 1, text.size(), out) != text.size()) {
          if (out != nullptr) std::fclose(out);
          std::cerr << "integrule: cannot write '" << report_out << "'\n";
          return 1;
        }
        std::fclose(out);
      }
      return 0;
    }

    const Config cfg(f);
    if (*gen) {
      const std::string path = cfg.resolve(dataset, "dataset.jsonl");
      size_t n = 0;
      check(integrule_run_gen(cfg.get(), path.c_str(), &n), "gen");
      std::cout << "wrote " << n << " records to " << path << "\n";
    } else if (*pipe) {
      const std::string in = cfg.resolve(dataset, "dataset.jsonl");
      const std::string p = cfg.resolve(pairs, "pairs.jsonl");
      const std::string r = cfg.resolve(rejected, "rejected.jsonl");
      integrule_pipeline_summary s{};
      check(integrule_run_pipeline(cfg.get(), in.c_str(), p.c_str(), r.c_str(), &s), "pipeline");
      std::cout << fetch([&](char* b, size_t c, size_t* l) { return integrule_summary_line(&s, b, c, l); },
                         "summary")
                << "\n";
    } else if (*disc) {
      const std::string p = cfg.resolve(pairs, "pairs.jsonl");
      const std::string j = cfg.resolve(json_out, "report_" + family + ".json");
      const std::string t = cfg.resolve(text_out, "report_" + family + ".txt");
      check(integrule_run_discover(cfg.get(), p.c_str(), family.c_str(), j.c_str(), t.c_str()), "discover");
      std::cout << fetch([&](char* b, size_t c, size_t* l) { return integrule_render_report(j.c_str(), b, c, l); },
                         "report");
    } else if (*exp) {
      const std::string p = cfg.resolve(pairs, "pairs.jsonl");
      const std::string out = cfg.resolve(corpus, "corpus.txt");
      size_t n = 0;
      check(integrule_run_export_training(p.c_str(), out.c_str(), &n), "export-training");
      std::cout << "wrote " << n << " lines to " << out << "\n";
    }
  } catch (const Failure& e) {
    return e.exit_code;
  }
  return 0;
}
