#include "integrule/integrule.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "integrule/pipeline.hpp"
#include "integrule/report.hpp"

struct integrule_config {
  integrule::PipelineConfig cfg;
};

struct integrule_expr {
  integrule::Expression e;
};

namespace {

using integrule::ErrorCode;

thread_local std::string g_last_error;

integrule_status status_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return INTEGRULE_INVALID_ARGUMENT;
    case ErrorCode::InvalidExpression: return INTEGRULE_INVALID_EXPRESSION;
    case ErrorCode::Parse: return INTEGRULE_PARSE_ERROR;
    case ErrorCode::Evaluation: return INTEGRULE_EVAL_OVERFLOW;
    case ErrorCode::Degenerate: return INTEGRULE_DEGENERATE;
    case ErrorCode::Config: return INTEGRULE_CONFIG_ERROR;
    case ErrorCode::GridMismatch: return INTEGRULE_GRID_MISMATCH;
    case ErrorCode::Fit: return INTEGRULE_FIT_FAILURE;
    case ErrorCode::Regression: return INTEGRULE_REGRESSION_ERROR;
    case ErrorCode::AmbiguousForm: return INTEGRULE_AMBIGUOUS_FORM;
    case ErrorCode::InsufficientData: return INTEGRULE_INSUFFICIENT_DATA;
    case ErrorCode::NoRule: return INTEGRULE_NO_RULE;
    case ErrorCode::Io: return INTEGRULE_IO_ERROR;
  }
  return INTEGRULE_INTERNAL_ERROR;
}

integrule_status fail(integrule_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class Fn>
integrule_status guarded(Fn fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const integrule::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(INTEGRULE_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(INTEGRULE_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(INTEGRULE_INTERNAL_ERROR, "unknown exception");
  }
}

integrule_status copy_out(const std::string& s, char* buf, size_t cap, size_t* len) {
  if (len != nullptr) *len = s.size();
  if (buf == nullptr && cap != 0) return fail(INTEGRULE_INVALID_ARGUMENT, "buffer is null");
  if (cap < s.size() + 1) return fail(INTEGRULE_BUFFER_TOO_SMALL, "buffer needs " + std::to_string(s.size() + 1) + " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return INTEGRULE_OK;
}

integrule_status null_arg(const char* what) {
  return fail(INTEGRULE_INVALID_ARGUMENT, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* integrule_version(void) { return "0.3.0"; }

const char* integrule_status_string(integrule_status s) {
  switch (s) {
    case INTEGRULE_OK: return "ok";
    case INTEGRULE_INVALID_ARGUMENT: return "invalid-argument";
    case INTEGRULE_INVALID_EXPRESSION: return "invalid-expression";
    case INTEGRULE_PARSE_ERROR: return "parse-error";
    case INTEGRULE_EVAL_OVERFLOW: return "eval-overflow";
    case INTEGRULE_DEGENERATE: return "degenerate-expression";
    case INTEGRULE_CONFIG_ERROR: return "config-error";
    case INTEGRULE_GRID_MISMATCH: return "grid-mismatch";
    case INTEGRULE_FIT_FAILURE: return "fit-failure";
    case INTEGRULE_REGRESSION_ERROR: return "regression-error";
    case INTEGRULE_AMBIGUOUS_FORM: return "ambiguous-form";
    case INTEGRULE_INSUFFICIENT_DATA: return "insufficient-data";
    case INTEGRULE_NO_RULE: return "no-rule-found";
    case INTEGRULE_IO_ERROR: return "io-error";
    case INTEGRULE_BUFFER_TOO_SMALL: return "buffer-too-small";
    case INTEGRULE_INTERNAL_ERROR: return "internal-error";
  }
  return "unknown";
}

const char* integrule_last_error_message(void) { return g_last_error.c_str(); }

integrule_status integrule_config_create(integrule_config** out) {
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    *out = new integrule_config{};
    return INTEGRULE_OK;
  });
}

void integrule_config_destroy(integrule_config* cfg) { delete cfg; }

integrule_status integrule_config_load_file(integrule_config* cfg, const char* path) {
  if (cfg == nullptr) return null_arg("cfg");
  if (path == nullptr) return null_arg("path");
  return guarded([&] {
    integrule::PipelineConfig next = cfg->cfg;
    integrule::merge_config_file(next, path);
    cfg->cfg = std::move(next);
    return INTEGRULE_OK;
  });
}

integrule_status integrule_config_merge_json(integrule_config* cfg, const char* json_text) {
  if (cfg == nullptr) return null_arg("cfg");
  if (json_text == nullptr) return null_arg("json_text");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      return fail(INTEGRULE_CONFIG_ERROR, e.what());
    }
    integrule::PipelineConfig next = cfg->cfg;
    integrule::merge_config(next, j);
    cfg->cfg = std::move(next);
    return INTEGRULE_OK;
  });
}

integrule_status integrule_config_apply_env(integrule_config* cfg) {
  if (cfg == nullptr) return null_arg("cfg");
  return guarded([&] {
    integrule::apply_environment(cfg->cfg);
    return INTEGRULE_OK;
  });
}

integrule_status integrule_config_validate(const integrule_config* cfg) {
  if (cfg == nullptr) return null_arg("cfg");
  return guarded([&] {
    cfg->cfg.validate();
    return INTEGRULE_OK;
  });
}

integrule_status integrule_config_to_json(const integrule_config* cfg, char* buf, size_t cap, size_t* len) {
  if (cfg == nullptr) return null_arg("cfg");
  return guarded([&] { return copy_out(integrule::config_to_json(cfg->cfg).dump(2), buf, cap, len); });
}

integrule_status integrule_config_output_path(const integrule_config* cfg, const char* name, char* buf,
                                              size_t cap, size_t* len) {
  if (cfg == nullptr) return null_arg("cfg");
  if (name == nullptr) return null_arg("name");
  return guarded([&] { return copy_out(integrule::output_path(cfg->cfg, name), buf, cap, len); });
}

integrule_status integrule_expr_parse(const char* text, integrule_expr** out) {
  if (text == nullptr) return null_arg("text");
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    *out = new integrule_expr{integrule::parse(text)};
    return INTEGRULE_OK;
  });
}

void integrule_expr_destroy(integrule_expr* e) { delete e; }

integrule_status integrule_expr_evaluate(const integrule_expr* e, double x, double* out) {
  if (e == nullptr) return null_arg("e");
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    *out = integrule::evaluate(e->e, x);
    return INTEGRULE_OK;
  });
}

integrule_status integrule_expr_serialize(const integrule_expr* e, char* buf, size_t cap, size_t* len) {
  if (e == nullptr) return null_arg("e");
  return guarded([&] { return copy_out(integrule::serialize(e->e), buf, cap, len); });
}

integrule_status integrule_integrate(const integrule_config* cfg, const char* f_text, char* buf, size_t cap,
                                     size_t* len, double* rel_error) {
  if (cfg == nullptr) return null_arg("cfg");
  if (f_text == nullptr) return null_arg("f_text");
  return guarded([&] {
    const auto& c = cfg->cfg;
    c.validate();
    const auto f = integrule::parse(f_text);
    const auto curve = integrule::cumulative_trapezoid(integrule::sample(f, c.quadrature));
    const auto fit = integrule::fit_best(curve, c.fitter, c.rounding);
    const auto g = integrule::align_rate_sign(fit.expression, f);
    if (rel_error != nullptr) *rel_error = fit.rel_error;
    if (buf == nullptr && cap == 0 && len == nullptr) return INTEGRULE_OK;
    return copy_out(integrule::serialize(g, c.rounding), buf, cap, len);
  });
}

integrule_status integrule_run_gen(const integrule_config* cfg, const char* dataset_path, size_t* records) {
  if (cfg == nullptr) return null_arg("cfg");
  if (dataset_path == nullptr) return null_arg("dataset_path");
  return guarded([&] {
    const auto n = integrule::run_gen(cfg->cfg, dataset_path);
    if (records != nullptr) *records = n;
    return INTEGRULE_OK;
  });
}

integrule_status integrule_run_pipeline(const integrule_config* cfg, const char* dataset_path,
                                        const char* pairs_path, const char* rejected_path,
                                        integrule_pipeline_summary* summary) {
  if (cfg == nullptr) return null_arg("cfg");
  if (dataset_path == nullptr || pairs_path == nullptr || rejected_path == nullptr) return null_arg("path");
  return guarded([&] {
    const auto s = integrule::run_pipeline(cfg->cfg, dataset_path, pairs_path, rejected_path);
    if (summary != nullptr) {
      *summary = integrule_pipeline_summary{};
      for (std::size_t i = 0; i < 4; ++i) {
        summary->total[i] = s.total[i];
        summary->accepted[i] = s.accepted[i];
      }
      auto count = [&](const char* reason) {
        auto it = s.rejected_by_reason.find(reason);
        return it == s.rejected_by_reason.end() ? std::size_t{0} : it->second;
      };
      summary->fit_failure = count("fit-failure");
      summary->exceeds_epsilon = count("exceeds-epsilon");
      summary->eval_overflow = count("eval-overflow");
    }
    return INTEGRULE_OK;
  });
}

integrule_status integrule_run_discover(const integrule_config* cfg, const char* pairs_path, const char* family,
                                        const char* json_path, const char* text_path) {
  if (cfg == nullptr) return null_arg("cfg");
  if (pairs_path == nullptr || json_path == nullptr || text_path == nullptr) return null_arg("path");
  if (family == nullptr) return null_arg("family");
  return guarded([&] {
    integrule::run_discover(cfg->cfg, pairs_path, integrule::family_from_string(family), json_path, text_path);
    return INTEGRULE_OK;
  });
}

integrule_status integrule_run_export_training(const char* pairs_path, const char* corpus_path, size_t* lines) {
  if (pairs_path == nullptr || corpus_path == nullptr) return null_arg("path");
  return guarded([&] {
    const auto n = integrule::run_export_training(pairs_path, corpus_path);
    if (lines != nullptr) *lines = n;
    return INTEGRULE_OK;
  });
}

integrule_status integrule_render_report(const char* json_path, char* buf, size_t cap, size_t* len) {
  if (json_path == nullptr) return null_arg("json_path");
  return guarded([&] {
    std::ifstream in(json_path);
    if (!in) return fail(INTEGRULE_IO_ERROR, std::string("cannot read '") + json_path + "'");
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(in);
      return copy_out(integrule::render_text(j), buf, cap, len);
    } catch (const nlohmann::json::exception& e) {
      return fail(INTEGRULE_IO_ERROR, std::string("not a report: ") + e.what());
    }
  });
}

integrule_status integrule_summary_line(const integrule_pipeline_summary* summary, char* buf, size_t cap,
                                        size_t* len) {
  if (summary == nullptr) return null_arg("summary");
  return guarded([&] {
    integrule::PipelineSummary s;
    for (std::size_t i = 0; i < 4; ++i) {
      s.total[i] = summary->total[i];
      s.accepted[i] = summary->accepted[i];
    }
    if (summary->fit_failure) s.rejected_by_reason["fit-failure"] = summary->fit_failure;
    if (summary->exceeds_epsilon) s.rejected_by_reason["exceeds-epsilon"] = summary->exceeds_epsilon;
    if (summary->eval_overflow) s.rejected_by_reason["eval-overflow"] = summary->eval_overflow;
    return copy_out(s.line(), buf, cap, len);
  });
}

}  // extern "C"
