#ifndef INTEGRULE_DATAGEN_HPP
#define INTEGRULE_DATAGEN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "integrule/expr.hpp"

namespace integrule {

struct GeneratorConfig {
  std::uint64_t seed = 0;
  std::size_t n_polynomial = 2000;
  std::size_t n_transcendental = 3000;  // split evenly among sin, cos, exp
  int max_degree = 6;
  double coeff_min = -10.0;
  double coeff_max = 10.0;
  // Floor on |a3|, |a4| and on the leading polynomial coefficient. Zero
  // reproduces an unfloored draw.
  double min_magnitude = 0.5;
  bool integer_constants = false;
  RoundingPolicy rounding{};

  void validate() const;  // throws Error(ErrorCode::Config)
};

struct DatasetRecord {
  std::size_t id = 0;
  Family family = Family::Poly;
  Expression expression = Expression::zero();
};

/// Per-record random stream. Output depends only on (seed, id), so records can
/// be generated in any order or in parallel.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

enum class PerturbOp { Add, Subtract, Multiply, Divide };

/// One application of the randomization operator to a constant. Returns
/// nullopt when the result would change sign or become zero.
std::optional<double> perturb_constant(double value, PerturbOp op, int k,
                                       RoundingPolicy rounding = {});

/// Randomly increases, decreases, multiplies or divides each nonzero constant
/// (polynomial exponents included) by k in {1,2,3} without changing its sign.
/// Rejected draws are retried up to 32 times, then the constant is kept.
/// Exponents stay integers within 1..max_degree; colliding powers are merged
/// by adding their coefficients.
Expression randomize_constants(const Expression& e, RngStream& rng, int max_degree,
                               RoundingPolicy rounding = {});

std::vector<DatasetRecord> generate(const GeneratorConfig& config);

}  // namespace integrule

#endif  // INTEGRULE_DATAGEN_HPP
