#ifndef INTEGRULE_EXPR_HPP
#define INTEGRULE_EXPR_HPP

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "integrule/error.hpp"

namespace integrule {

/// Shape of an expression. Polynomials carry their degree; the three
/// transcendental shapes share one 5-slot layout
///   a4 * osc(a3*x + a2) + a1*x + a0
/// and are keyed by the oscillator they use, so a cosine source and the
/// integral of a sine source are the same template.
enum class Family { Poly, Sin, Cos, Exp };

const char* to_string(Family f);
Family family_from_string(std::string_view s);

inline constexpr int kMaxPolyDegree = 7;

// Slot indices of the transcendental layout.
inline constexpr std::size_t kOffsetSlot = 0;
inline constexpr std::size_t kLinearSlot = 1;
inline constexpr std::size_t kPhaseSlot = 2;
inline constexpr std::size_t kRateSlot = 3;
inline constexpr std::size_t kAmplitudeSlot = 4;

class Template {
 public:
  static Template poly(int degree);
  static Template sin_form() { return Template(Family::Sin, -1); }
  static Template cos_form() { return Template(Family::Cos, -1); }
  static Template exp_form() { return Template(Family::Exp, -1); }

  // Integral forms of the transcendental source families.
  static Template sin_integral_form() { return cos_form(); }
  static Template cos_integral_form() { return sin_form(); }
  static Template exp_integral_form() { return exp_form(); }

  /// Template a source of the given family integrates to; polynomial sources
  /// need a degree.
  static Template integral_form_of(Family source, int source_degree = -1);

  Family family() const noexcept { return family_; }
  int degree() const noexcept { return degree_; }
  bool is_polynomial() const noexcept { return family_ == Family::Poly; }
  bool is_transcendental() const noexcept { return !is_polynomial(); }
  std::size_t slot_count() const noexcept;
  std::vector<std::string> slot_names() const;
  std::string name() const;

  auto operator<=>(const Template&) const = default;

 private:
  Template(Family f, int degree) : family_(f), degree_(degree) {}
  Family family_;
  int degree_;
};

struct RoundingPolicy {
  int decimal_places = 2;
};

/// Half-away-from-zero rounding to `places` decimals. Idempotent.
double round_to(double v, int places);

/// Immutable (template, coefficients) pair. Construction validates:
/// slot count, finiteness, nonzero rate for transcendental templates and a
/// nonzero leading coefficient for polynomials of degree >= 1.
class Expression {
 public:
  Expression(Template t, std::vector<double> coefficients);

  /// Polynomial from ascending coefficients; trailing zeros lower the degree.
  static Expression polynomial(std::vector<double> ascending);
  static Expression zero() { return polynomial({0.0}); }
  static Expression transcendental(Family osc, double a0, double a1, double a2,
                                   double a3, double a4);

  const Template& form() const noexcept { return template_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }
  double operator[](std::size_t slot) const { return coeffs_.at(slot); }

  bool operator==(const Expression&) const = default;

 private:
  Template template_;
  std::vector<double> coeffs_;
};

/// Value of `e` at `x`. Throws EvaluationError on overflow to a non-finite value.
double evaluate(const Expression& e, double x);

/// Canonical text form, e.g. "2*x**2+3.55*x-1.4" or "-2.5*cos(2*x)+3*x+2.5".
std::string serialize(const Expression& e, RoundingPolicy policy = {});

/// Inverse of serialize. Throws ParseError with a byte offset.
Expression parse(std::string_view text);

/// Rounds every coefficient. A polynomial whose leading coefficient rounds
/// to zero loses degree; a transcendental rate that rounds to zero throws
/// ErrorCode::Degenerate.
Expression round_coefficients(const Expression& e, RoundingPolicy policy = {});

/// Coefficient formatted with at most `places` decimals, trailing zeros
/// trimmed ("2", "3.55", "-1.4").
std::string format_coefficient(double v, int places = 2);

}  // namespace integrule

#endif  // INTEGRULE_EXPR_HPP
