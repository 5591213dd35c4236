#include "integrule/datagen.hpp"

#include <cmath>
#include <map>

namespace integrule {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr int kMaxPerturbAttempts = 32;

}  // namespace

void GeneratorConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::Config, what); };
  if (n_polynomial == 0) bad("n_polynomial must be > 0");
  if (n_transcendental == 0) bad("n_transcendental must be > 0");
  if (max_degree < 1 || max_degree > kMaxPolyDegree - 1) bad("max_degree must be in 1..6");
  if (!(coeff_min < coeff_max) || !std::isfinite(coeff_min) || !std::isfinite(coeff_max))
    bad("coeff range must satisfy min < max");
  if (!(min_magnitude >= 0.0)) bad("min_magnitude must be >= 0");
  if (!(min_magnitude < std::max(std::fabs(coeff_min), std::fabs(coeff_max))))
    bad("min_magnitude must be below the largest magnitude in the coefficient range");
  if (rounding.decimal_places < 0 || rounding.decimal_places > 9)
    bad("decimal_places must be in 0..9");
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : engine_(splitmix64(seed ^ splitmix64(stream_id ^ 0xD1B54A32D192ED03ull))) {}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

int RngStream::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(static_cast<std::uint64_t>(uniform01() * static_cast<double>(span)));
}

std::optional<double> perturb_constant(double value, PerturbOp op, int k, RoundingPolicy rounding) {
  double r = value;
  switch (op) {
    case PerturbOp::Add: r = value + k; break;
    case PerturbOp::Subtract: r = value - k; break;
    case PerturbOp::Multiply: r = value * k; break;
    case PerturbOp::Divide: r = value / k; break;
  }
  r = round_to(r, rounding.decimal_places);
  if (r == 0.0 || std::signbit(r) != std::signbit(value)) return std::nullopt;
  return r;
}

namespace {

PerturbOp draw_op(RngStream& rng) { return static_cast<PerturbOp>(rng.uniform_int(0, 3)); }

double perturb_coefficient(double c, RngStream& rng, RoundingPolicy rounding) {
  if (c == 0.0) return c;
  for (int attempt = 0; attempt < kMaxPerturbAttempts; ++attempt) {
    const PerturbOp op = draw_op(rng);
    const int k = rng.uniform_int(1, 3);
    if (auto r = perturb_constant(c, op, k, rounding)) return *r;
  }
  return c;
}

int perturb_exponent(int p, RngStream& rng, int max_degree) {
  for (int attempt = 0; attempt < kMaxPerturbAttempts; ++attempt) {
    const PerturbOp op = draw_op(rng);
    const int k = rng.uniform_int(1, 3);
    int r = p;
    switch (op) {
      case PerturbOp::Add: r = p + k; break;
      case PerturbOp::Subtract: r = p - k; break;
      case PerturbOp::Multiply: r = p * k; break;
      case PerturbOp::Divide:
        if (p % k != 0) continue;  // exponents stay integral
        r = p / k;
        break;
    }
    if (r >= 1 && r <= max_degree) return r;
  }
  return p;
}

}  // namespace

Expression randomize_constants(const Expression& e, RngStream& rng, int max_degree,
                               RoundingPolicy rounding) {
  const auto c = e.coefficients();
  if (e.form().is_transcendental()) {
    std::vector<double> out(c.begin(), c.end());
    for (double& v : out) v = perturb_coefficient(v, rng, rounding);
    return Expression(e.form(), std::move(out));
  }

  std::map<int, double> merged;
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (c[p] == 0.0) continue;
    const double coef = perturb_coefficient(c[p], rng, rounding);
    const int power = p == 0 ? 0 : perturb_exponent(static_cast<int>(p), rng, max_degree);
    merged[power] += coef;
  }
  std::vector<double> out(static_cast<std::size_t>(max_degree) + 1, 0.0);
  for (auto [p, v] : merged) out[static_cast<std::size_t>(p)] = round_to(v, rounding.decimal_places);
  Expression result = Expression::polynomial(std::move(out));
  // A merge that cancels every non-constant term would leave the family.
  if (e.form().degree() >= 1 && result.form().degree() < 1) return e;
  return result;
}

namespace {

double draw_constant(const GeneratorConfig& cfg, RngStream& rng) {
  if (cfg.integer_constants)
    return static_cast<double>(rng.uniform_int(static_cast<int>(std::ceil(cfg.coeff_min)),
                                               static_cast<int>(std::floor(cfg.coeff_max))));
  return round_to(rng.uniform(cfg.coeff_min, cfg.coeff_max), cfg.rounding.decimal_places);
}

double draw_floored(const GeneratorConfig& cfg, RngStream& rng) {
  while (true) {
    const double v = draw_constant(cfg, rng);
    if (v != 0.0 && std::fabs(v) >= cfg.min_magnitude) return v;
  }
}

Expression base_polynomial(const GeneratorConfig& cfg, RngStream& rng) {
  const int degree = rng.uniform_int(1, cfg.max_degree);
  std::vector<double> c(static_cast<std::size_t>(degree) + 1);
  for (int p = 0; p < degree; ++p) c[static_cast<std::size_t>(p)] = draw_constant(cfg, rng);
  c.back() = draw_floored(cfg, rng);
  return Expression::polynomial(std::move(c));
}

Expression transcendental_source(Family f, const GeneratorConfig& cfg, RngStream& rng) {
  const double a0 = draw_constant(cfg, rng);
  const double a3 = draw_floored(cfg, rng);
  const double a4 = draw_floored(cfg, rng);
  return Expression::transcendental(f, a0, 0.0, 0.0, a3, a4);
}

}  // namespace

std::vector<DatasetRecord> generate(const GeneratorConfig& config) {
  config.validate();
  std::vector<DatasetRecord> records;
  records.reserve(config.n_polynomial + config.n_transcendental);

  // Polynomials alternate base draw / perturbed copy of that same base draw.
  for (std::size_t id = 0; id < config.n_polynomial; ++id) {
    if (id % 2 == 0) {
      RngStream rng(config.seed, id);
      records.push_back({id, Family::Poly, base_polynomial(config, rng)});
    } else {
      RngStream base_rng(config.seed, id - 1);
      const Expression base = base_polynomial(config, base_rng);
      RngStream rng(config.seed, id);
      records.push_back(
          {id, Family::Poly, randomize_constants(base, rng, config.max_degree, config.rounding)});
    }
  }

  constexpr Family kCycle[] = {Family::Sin, Family::Cos, Family::Exp};
  for (std::size_t j = 0; j < config.n_transcendental; ++j) {
    const std::size_t id = config.n_polynomial + j;
    const Family f = kCycle[j % 3];
    RngStream rng(config.seed, id);
    records.push_back({id, f, transcendental_source(f, config, rng)});
  }
  return records;
}

}  // namespace integrule
