#include "integrule/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

namespace integrule {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidExpression: return "invalid-expression";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::Evaluation: return "eval-overflow";
    case ErrorCode::Degenerate: return "degenerate-expression";
    case ErrorCode::Config: return "config-error";
    case ErrorCode::GridMismatch: return "grid-mismatch";
    case ErrorCode::Fit: return "fit-failure";
    case ErrorCode::Regression: return "regression-error";
    case ErrorCode::AmbiguousForm: return "ambiguous-form";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::NoRule: return "no-rule-found";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

const char* to_string(Family f) {
  switch (f) {
    case Family::Poly: return "poly";
    case Family::Sin: return "sin";
    case Family::Cos: return "cos";
    case Family::Exp: return "exp";
  }
  return "?";
}

Family family_from_string(std::string_view s) {
  if (s == "poly") return Family::Poly;
  if (s == "sin") return Family::Sin;
  if (s == "cos") return Family::Cos;
  if (s == "exp") return Family::Exp;
  throw Error(ErrorCode::InvalidArgument, "unknown family '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Template

Template Template::poly(int degree) {
  if (degree < 0 || degree > kMaxPolyDegree)
    throw Error(ErrorCode::InvalidArgument,
                "polynomial degree out of range: " + std::to_string(degree));
  return Template(Family::Poly, degree);
}

Template Template::integral_form_of(Family source, int source_degree) {
  switch (source) {
    case Family::Poly: return poly(source_degree + 1);
    case Family::Sin: return sin_integral_form();
    case Family::Cos: return cos_integral_form();
    case Family::Exp: return exp_integral_form();
  }
  throw Error(ErrorCode::InvalidArgument, "bad family");
}

std::size_t Template::slot_count() const noexcept {
  return is_polynomial() ? static_cast<std::size_t>(degree_) + 1 : 5;
}

std::vector<std::string> Template::slot_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < slot_count(); ++i) out.push_back("a" + std::to_string(i));
  return out;
}

std::string Template::name() const {
  switch (family_) {
    case Family::Poly: return "POLY(" + std::to_string(degree_) + ")";
    case Family::Sin: return "SIN";
    case Family::Cos: return "COS";
    case Family::Exp: return "EXP";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expression

Expression::Expression(Template t, std::vector<double> coefficients)
    : template_(t), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != template_.slot_count())
    throw Error(ErrorCode::InvalidExpression,
                template_.name() + " expects " + std::to_string(template_.slot_count()) +
                    " coefficients, got " + std::to_string(coeffs_.size()));
  for (double c : coeffs_)
    if (!std::isfinite(c))
      throw Error(ErrorCode::InvalidExpression, "non-finite coefficient");
  if (template_.is_transcendental() && coeffs_[kRateSlot] == 0.0)
    throw Error(ErrorCode::Degenerate, "transcendental rate a3 is zero");
  if (template_.is_polynomial() && template_.degree() >= 1 && coeffs_.back() == 0.0)
    throw Error(ErrorCode::InvalidExpression, "leading polynomial coefficient is zero");
}

Expression Expression::polynomial(std::vector<double> ascending) {
  while (ascending.size() > 1 && ascending.back() == 0.0) ascending.pop_back();
  if (ascending.empty()) ascending.push_back(0.0);
  const int degree = static_cast<int>(ascending.size()) - 1;
  return Expression(Template::poly(degree), std::move(ascending));
}

Expression Expression::transcendental(Family osc, double a0, double a1, double a2,
                                      double a3, double a4) {
  if (osc == Family::Poly)
    throw Error(ErrorCode::InvalidArgument, "transcendental() needs sin, cos or exp");
  const Template t = osc == Family::Sin   ? Template::sin_form()
                     : osc == Family::Cos ? Template::cos_form()
                                          : Template::exp_form();
  return Expression(t, {a0, a1, a2, a3, a4});
}

namespace {

double oscillate(Family f, double u) {
  switch (f) {
    case Family::Sin: return std::sin(u);
    case Family::Cos: return std::cos(u);
    case Family::Exp: return std::exp(u);
    case Family::Poly: break;
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expression& e, double x) {
  const auto c = e.coefficients();
  double y = 0.0;
  if (e.form().is_polynomial()) {
    for (std::size_t i = c.size(); i-- > 0;) y = y * x + c[i];
  } else {
    y = c[kAmplitudeSlot] * oscillate(e.form().family(), c[kRateSlot] * x + c[kPhaseSlot]) +
        c[kLinearSlot] * x + c[kOffsetSlot];
  }
  if (!std::isfinite(y)) throw EvaluationError(x);
  return y;
}

// ---------------------------------------------------------------------------
// Rounding and formatting

double round_to(double v, int places) {
  const double scale = std::pow(10.0, places);
  const double r = std::round(v * scale) / scale;  // std::round is half-away-from-zero
  return r == 0.0 ? 0.0 : r;                        // no negative zero
}

std::string format_coefficient(double v, int places) {
  const double r = round_to(v, places);
  const double scale = std::pow(10.0, places);
  const double scaled = std::fabs(r) * scale;
  std::string out;
  if (scaled < 9.0e18) {
    const auto units = static_cast<unsigned long long>(std::llround(scaled));
    const auto p10 = static_cast<unsigned long long>(std::llround(scale));
    out = std::to_string(units / p10);
    std::string frac;
    if (places > 0) {
      frac = std::to_string(units % p10);
      frac.insert(0, static_cast<std::size_t>(places) - frac.size(), '0');
      while (!frac.empty() && frac.back() == '0') frac.pop_back();
    }
    if (!frac.empty()) out += "." + frac;
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, std::fabs(r));
    out = buf;
    if (out.find('.') != std::string::npos) {
      while (out.back() == '0') out.pop_back();
      if (out.back() == '.') out.pop_back();
    }
  }
  if (r < 0.0 && out != "0") out.insert(0, "-");
  return out;
}

Expression round_coefficients(const Expression& e, RoundingPolicy policy) {
  std::vector<double> c(e.coefficients().begin(), e.coefficients().end());
  for (double& v : c) v = round_to(v, policy.decimal_places);
  if (e.form().is_polynomial()) return Expression::polynomial(std::move(c));
  if (c[kRateSlot] == 0.0)
    throw Error(ErrorCode::Degenerate, "rate coefficient rounds to zero");
  return Expression(e.form(), std::move(c));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

struct Term {
  double coef;
  std::string atom;  // empty for a constant
};

void append_terms(std::string& out, const std::vector<Term>& terms, int places) {
  for (const Term& t : terms) {
    const std::string mag = format_coefficient(std::fabs(t.coef), places);
    const bool negative = round_to(t.coef, places) < 0.0;
    if (negative)
      out += '-';
    else if (!out.empty())
      out += '+';
    if (t.atom.empty()) {
      out += mag;
    } else {
      if (mag != "1") out += mag + "*";
      out += t.atom;
    }
  }
}

bool prints_as_zero(double v, int places) { return round_to(v, places) == 0.0; }

std::string inner_text(double rate, double phase, int places) {
  std::string s;
  const std::string r = format_coefficient(rate, places);
  if (r == "1")
    s = "x";
  else if (r == "-1")
    s = "-x";
  else
    s = r + "*x";
  if (!prints_as_zero(phase, places)) {
    if (round_to(phase, places) > 0.0) s += '+';
    s += format_coefficient(phase, places);
  }
  return s;
}

}  // namespace

std::string serialize(const Expression& e, RoundingPolicy policy) {
  const int places = policy.decimal_places;
  const auto c = e.coefficients();
  std::vector<Term> terms;
  if (e.form().is_polynomial()) {
    for (std::size_t p = c.size(); p-- > 0;) {
      if (prints_as_zero(c[p], places)) continue;
      std::string atom = p == 0 ? "" : p == 1 ? "x" : "x**" + std::to_string(p);
      terms.push_back({c[p], std::move(atom)});
    }
  } else {
    const std::string osc = to_string(e.form().family());
    std::string atom = osc + "(" + inner_text(c[kRateSlot], c[kPhaseSlot], places) + ")";
    // A zero amplitude still prints, otherwise the template would be lost.
    std::string out;
    if (prints_as_zero(c[kAmplitudeSlot], places)) {
      out = "0*" + atom;
    } else {
      terms.push_back({c[kAmplitudeSlot], std::move(atom)});
    }
    if (!prints_as_zero(c[kLinearSlot], places)) terms.push_back({c[kLinearSlot], "x"});
    if (!prints_as_zero(c[kOffsetSlot], places)) terms.push_back({c[kOffsetSlot], ""});
    append_terms(out, terms, places);
    return out;
  }
  if (terms.empty()) return "0";
  std::string out;
  append_terms(out, terms, places);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expression run() {
    skip_ws();
    if (pos_ >= s_.size()) fail("empty expression");
    bool first = true;
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) break;
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      parse_term(sign);
      first = false;
    }
    return build();
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
    throw ParseError(at, what);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  void expect(char ch) {
    skip_ws();
    if (peek() != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }
  bool is_number_start() const {
    const char ch = peek();
    return (ch >= '0' && ch <= '9') || ch == '.';
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && ((s_[pos_] >= '0' && s_[pos_] <= '9') || s_[pos_] == '.')) ++pos_;
    if (start == pos_) fail("expected number");
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) fail_at(start, "malformed number");
    return v;
  }

  int integer() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int v = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, v);
    return v;
  }

  void parse_term(double sign) {
    skip_ws();
    const std::size_t term_start = pos_;
    double coef = sign;
    if (is_number_start()) {
      coef *= number();
      skip_ws();
      if (peek() != '*') {
        add_power(0, coef, term_start);
        return;
      }
      ++pos_;
      skip_ws();
    }
    parse_atom(coef, term_start);
  }

  void parse_atom(double coef, std::size_t term_start) {
    if (peek() == 'x' && !(pos_ + 1 < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_ + 1])))) {
      ++pos_;
      if (s_.substr(pos_, 2) == "**") {
        pos_ += 2;
        add_power(integer(), coef, term_start);
      } else {
        add_power(1, coef, term_start);
      }
      return;
    }
    const std::size_t name_start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (name_start == pos_) fail("expected term");
    const std::string_view name = s_.substr(name_start, pos_ - name_start);
    Family f;
    if (name == "sin")
      f = Family::Sin;
    else if (name == "cos")
      f = Family::Cos;
    else if (name == "exp")
      f = Family::Exp;
    else
      fail_at(name_start, "unknown function '" + std::string(name) + "'");
    if (osc_)
      fail_at(term_start, "duplicate function term");
    expect('(');
    skip_ws();
    double rate = 1.0;
    if (peek() == '-') {
      rate = -1.0;
      ++pos_;
      skip_ws();
    }
    if (is_number_start()) {
      rate *= number();
      expect('*');
      skip_ws();
    }
    if (peek() != 'x') fail("expected 'x' in function argument");
    ++pos_;
    skip_ws();
    double phase = 0.0;
    if (peek() == '+' || peek() == '-') {
      const double s = peek() == '-' ? -1.0 : 1.0;
      ++pos_;
      phase = s * number();
    }
    expect(')');
    osc_ = Osc{f, coef, rate, phase, term_start};
  }

  void add_power(int p, double coef, std::size_t at) {
    if (p < 0 || p > kMaxPolyDegree) fail_at(at, "power out of range");
    if (!powers_.emplace(p, coef).second)
      fail_at(at, "duplicate power " + std::to_string(p));
  }

  Expression build() {
    if (osc_) {
      double a0 = 0.0, a1 = 0.0;
      for (auto [p, c] : powers_) {
        if (p == 0)
          a0 = c;
        else if (p == 1)
          a1 = c;
        else
          fail_at(0, "power " + std::to_string(p) + " not allowed beside a function term");
      }
      if (osc_->rate == 0.0) fail_at(osc_->at, "zero rate in function argument");
      return Expression::transcendental(osc_->family, a0, a1, osc_->phase, osc_->rate,
                                        osc_->amplitude);
    }
    std::vector<double> c(kMaxPolyDegree + 1, 0.0);
    for (auto [p, v] : powers_) c[static_cast<std::size_t>(p)] = v;
    return Expression::polynomial(std::move(c));
  }

  struct Osc {
    Family family;
    double amplitude, rate, phase;
    std::size_t at;
  };

  std::string_view s_;
  std::size_t pos_ = 0;
  std::map<int, double> powers_;
  std::optional<Osc> osc_;
};

}  // namespace

Expression parse(std::string_view text) { return Parser(text).run(); }

}  // namespace integrule
