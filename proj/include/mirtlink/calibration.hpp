#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mirtlink/items.hpp"
#include "mirtlink/responses.hpp"
#include "mirtlink/small_linalg.hpp"
#include "mirtlink/transform.hpp"

namespace mirtlink {

enum class CalibrationMode { OracleNoise, MCMC };

CalibrationMode calibration_mode_from_string(const std::string& s);
std::string to_string(CalibrationMode mode);

struct CalibrationSpec {
  CalibrationMode mode = CalibrationMode::MCMC;
  ModelFamily model_family = ModelFamily::UIRT;
  int chain_length = 2000;
  int burn_in = 1000;
  double item_proposal_scale = 0.08;
  double theta_proposal_scale = 0.6;
  double rho_proposal_scale = 0.15;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;  // OracleNoise only
};

void validate_spec(const CalibrationSpec& spec);

struct CalibrationResult {
  std::vector<Item> items;
  Population population;
  std::vector<std::pair<std::string, double>> acceptance_rates;
  std::uint64_t seed_used = 0;
  std::vector<std::string> warnings;
  Matrix theta_last;  // final (standardized) theta draws; MCMC only
};

// Joint log-likelihood over persons x items; missing cells contribute zero.
// thetas is n_persons x D.  The parallel version and the naive serial
// reference produce bitwise-identical sums.
double log_likelihood(const ResponseMatrix& responses, std::span<const Item> items,
                      const Matrix& thetas);
double log_likelihood_serial(const ResponseMatrix& responses, std::span<const Item> items,
                             const Matrix& thetas);

// Truth plus seeded Gaussian noise on ln(a) (nonzero entries), d / delta and
// logit(c); sigma = 0 reproduces the truth exactly.  The simple-structure
// truth is first mapped into spec.model_family's parameter space (UIRT: the
// single nonzero slope; bifactor: general slope = nonzero slope, specifics 0).
CalibrationResult calibrate_oracle(std::span<const Item> true_items,
                                   const Population& true_pop, const CalibrationSpec& spec);

// Metropolis-within-Gibbs sampler; see module docs in the implementation.
CalibrationResult calibrate_mcmc(const ResponseMatrix& responses, const TestForm& skeleton,
                                 const CalibrationSpec& spec);

// Map a simple-structure item/population into an analysis family's space.
Item map_item_to_family(const Item& item, ModelFamily family);
Population map_population_to_family(const Population& pop, ModelFamily family);

}  // namespace mirtlink
