#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quakealarm/alarm.hpp"
#include "quakealarm/catalog.hpp"

namespace quakealarm {

/// Outcome of a Monte-Carlo significance test.
///
/// The p-value is the plain fraction of replicates whose statistic is at
/// least the observed one. With no such replicate the estimate is reported as
/// 0 and `p_is_upper_bound` marks it as "< 1/n_reps".
struct TestReport {
  double observed = 0.0;
  std::size_t n_reps = 0;
  std::size_t sims_geq = 0;
  std::size_t sims_gt = 0;
  double p_estimate = 0.0;
  bool p_is_upper_bound = false;
  double max_sim = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<double> sims;

  static TestReport from_sims(double observed, std::vector<double> sims,
                              std::uint64_t seed, nlohmann::json config);

  /// "<0.001" style text when p is an upper bound, otherwise the fraction.
  std::string p_display() const;
  /// Stable keys: observed, n_reps, sims_geq, p_estimate, p_is_upper_bound,
  /// max_sim, seed, config (plus p_display).
  nlohmann::json to_json() const;
};

/// Counts predicted events for a fixed alarm set and fixed event marks while
/// the event times vary. Each event's spatially covering alarms are found
/// once (minus the alarm it triggered itself), so a replicate only tests
/// time intervals and magnitude floors.
class PermutationScorer {
 public:
  /// Event k of `targets` is matched against trigger_index k.
  PermutationScorer(const Catalog& targets, const AlarmSet& alarms);

  std::size_t size() const { return magnitudes_.size(); }
  const std::vector<Instant>& observed_times() const { return times_; }

  /// times[k] is the time assigned to event k.
  std::size_t count(std::span<const Instant> times) const;
  /// Event k takes the observed time of event perm[k].
  std::size_t count_permuted(std::span<const std::size_t> perm) const;

 private:
  struct Cover {
    Instant t_start;
    Instant t_end;
    double floor;
  };
  bool predicted(std::size_t k, Instant t) const;

  std::vector<Instant> times_;
  std::vector<std::optional<double>> magnitudes_;
  std::vector<std::size_t> offsets_;  // covers_[offsets_[k], offsets_[k+1])
  std::vector<Cover> covers_;
};

/// Generates alarms once from `catalog`, holds them fixed, and compares the
/// observed number of predicted events with `n_reps` random permutations of
/// the event times. Replicate r uses Rng(seed, r); `threads` only affects
/// speed.
TestReport permutation_test(const Catalog& catalog, const AlarmConfig& config,
                            PredictorMode mode, std::size_t n_reps, std::uint64_t seed,
                            unsigned threads = 1);

/// Same engine for an alarm set supplied by the caller.
TestReport permutation_test_fixed(const Catalog& targets, const AlarmSet& alarms,
                                  std::size_t n_reps, std::uint64_t seed,
                                  unsigned threads = 1);

inline constexpr std::size_t kMaxExactPermutationEvents = 8;

struct ExactPValue {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

/// Enumerates all n! time permutations (n <= kMaxExactPermutationEvents).
ExactPValue exact_permutation_pvalue(const Catalog& catalog, const AlarmConfig& config,
                                     PredictorMode mode);
ExactPValue exact_permutation_pvalue_fixed(const Catalog& targets, const AlarmSet& alarms);

/// P(X >= S) for X ~ Binomial(Q, pi).
double binomial_tail_pvalue(std::size_t S, std::size_t Q, double pi);

/// Normalized product measure of the union of alarms: uniform in time times
/// counting measure over historical epicenters, i.e. the mean over
/// epicenters of the fraction of `interval` during which that epicenter is
/// inside some alarm. Exact interval arithmetic.
double alarm_measure_pi(const AlarmSet& alarms, std::span<const GeoPoint> epicenters,
                        const TimeInterval& interval);

namespace poisson_binomial {
struct ExactDP {};
struct Simulate {
  std::size_t n_reps = 100000;
  std::uint64_t seed = 0;
};
struct PoissonApprox {};
}  // namespace poisson_binomial

using PoissonBinomialMethod =
    std::variant<poisson_binomial::ExactDP, poisson_binomial::Simulate,
                 poisson_binomial::PoissonApprox>;

/// Distribution of a sum of independent Bernoulli(p_j); O(A^2) convolution.
std::vector<double> poisson_binomial_pmf(std::span<const double> probs);

/// P(S >= s_obs) where S is the sum of independent Bernoulli(probs[j]).
double poisson_binomial_pvalue(std::size_t s_obs, std::span<const double> probs,
                               const PoissonBinomialMethod& method);

/// Per-cell prediction and occurrence flags.
struct GridOutcome {
  std::vector<bool> predicted;
  std::vector<bool> occurred;

  GridOutcome(std::vector<bool> predicted, std::vector<bool> occurred);
  std::size_t n_cells() const { return predicted.size(); }
};

/// Hit rate over cells with earthquakes minus false-alarm rate over
/// aseismic cells. Throws ArgumentError naming an empty denominator.
double r_score(const GridOutcome& grid);

enum class BaselineScheme {
  UniformCells = 1,   ///< n_predicted cells, equal chance, without replacement
  RateCoins = 2,      ///< independent coin per cell, p_j proportional to rate
  WeightedCells = 3,  ///< n_predicted cells without replacement, chance ~ rate
};

struct BaselineOptions {
  /// Historical annual average number of cells with events. Defaults to
  /// sum_j (1 - exp(-rate_j)) with rates per year.
  std::optional<double> avg_cells_with_events;
  /// Observed R to compute a p-value for.
  std::optional<double> observed;
};

struct BaselineReport {
  BaselineScheme scheme = BaselineScheme::UniformCells;
  std::size_t n_reps = 0;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0, q50 = 0.0, q95 = 0.0;
  std::optional<double> observed;
  std::size_t sims_geq = 0;
  double p_estimate = 0.0;
  /// Cells whose scheme-2 coin probability exceeded 1 and was clipped.
  std::size_t clipped_cells = 0;
  double proportionality = 0.0;
  /// Design expectation and simulated mean of the number of predicted cells.
  double expected_predicted_cells = 0.0;
  double mean_predicted_cells = 0.0;
  std::string sampling_design;
  std::uint64_t seed = 0;
  std::vector<double> sims;

  nlohmann::json to_json() const;
};

/// Distribution of the R-score of random predictions against fixed
/// outcomes. `rates_per_year` are historical per-cell rates (schemes 2, 3).
BaselineReport r_score_baseline(BaselineScheme scheme, std::span<const double> rates_per_year,
                                std::size_t n_predicted, const std::vector<bool>& occurred,
                                std::size_t n_reps, std::uint64_t seed,
                                const BaselineOptions& options = {});

const char* to_string(PredictorMode mode);

}  // namespace quakealarm
