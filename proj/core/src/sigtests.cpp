#include "quakealarm/sigtests.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "quakealarm/errors.hpp"
#include "quakealarm/nullmodels.hpp"

namespace quakealarm {

namespace {

// Replicate r always runs fn(r); the thread count only changes scheduling.
template <class Fn>
void run_replicates(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t r = 0; r < n; ++r) fn(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, w, workers, n] {
      for (std::size_t r = w; r < n; r += workers) fn(r);
    });
  }
}

nlohmann::json alarm_config_json(const AlarmConfig& config, PredictorMode mode) {
  return {{"mag_threshold", config.mag_threshold},
          {"window_days", config.window_days},
          {"radius_km", config.radius_km},
          {"predictor", to_string(mode)}};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ArgumentError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

const char* to_string(PredictorMode mode) {
  switch (mode) {
    case PredictorMode::I: return "i";
    case PredictorMode::II: return "ii";
    case PredictorMode::External: return "external";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// TestReport

TestReport TestReport::from_sims(double observed, std::vector<double> sims,
                                 std::uint64_t seed, nlohmann::json config) {
  TestReport r;
  r.observed = observed;
  r.n_reps = sims.size();
  r.seed = seed;
  r.config = std::move(config);
  for (const double s : sims) {
    if (s >= observed) ++r.sims_geq;
    if (s > observed) ++r.sims_gt;
  }
  r.max_sim = sims.empty() ? 0.0 : *std::max_element(sims.begin(), sims.end());
  if (r.sims_geq > 0) {
    r.p_estimate = static_cast<double>(r.sims_geq) / static_cast<double>(r.n_reps);
  } else {
    r.p_estimate = 0.0;
    r.p_is_upper_bound = true;
  }
  r.sims = std::move(sims);
  return r;
}

std::string TestReport::p_display() const {
  char buf[64];
  if (p_is_upper_bound) {
    std::snprintf(buf, sizeof buf, "<%.6g", n_reps ? 1.0 / static_cast<double>(n_reps) : 1.0);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", p_estimate);
  }
  return buf;
}

nlohmann::json TestReport::to_json() const {
  return {{"observed", observed},
          {"n_reps", n_reps},
          {"sims_geq", sims_geq},
          {"p_estimate", p_estimate},
          {"p_is_upper_bound", p_is_upper_bound},
          {"p_display", p_display()},
          {"max_sim", max_sim},
          {"seed", seed},
          {"config", config}};
}

// ---------------------------------------------------------------------------
// Permutation engine

PermutationScorer::PermutationScorer(const Catalog& targets, const AlarmSet& alarms) {
  const std::size_t n = targets.size();
  times_.reserve(n);
  magnitudes_.reserve(n);
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  for (std::size_t k = 0; k < n; ++k) {
    const Event& e = targets[k];
    times_.push_back(e.time);
    magnitudes_.push_back(targets.magnitude(k));
    for (const Alarm& a : alarms) {
      if (a.trigger_index == k) continue;
      // Any time inside the alarm interval: only the spatial test matters here.
      if (a.covers(e.epicenter, a.t_end)) covers_.push_back({a.t_start, a.t_end, a.mag_floor});
    }
    offsets_.push_back(covers_.size());
  }
}

bool PermutationScorer::predicted(std::size_t k, Instant t) const {
  const auto& mag = magnitudes_[k];
  if (!mag) return false;
  bool covered = false;
  double max_floor = -std::numeric_limits<double>::infinity();
  for (std::size_t i = offsets_[k]; i < offsets_[k + 1]; ++i) {
    const Cover& c = covers_[i];
    if (c.t_start < t && t <= c.t_end) {
      covered = true;
      max_floor = std::max(max_floor, c.floor);
    }
  }
  return covered && *mag >= max_floor;
}

std::size_t PermutationScorer::count(std::span<const Instant> times) const {
  if (times.size() != size()) throw ArgumentError("time vector length mismatch");
  std::size_t total = 0;
  for (std::size_t k = 0; k < times.size(); ++k) total += predicted(k, times[k]) ? 1 : 0;
  return total;
}

std::size_t PermutationScorer::count_permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != size()) throw ArgumentError("permutation length mismatch");
  std::size_t total = 0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    total += predicted(k, times_[perm[k]]) ? 1 : 0;
  }
  return total;
}

TestReport permutation_test_fixed(const Catalog& targets, const AlarmSet& alarms,
                                  std::size_t n_reps, std::uint64_t seed, unsigned threads) {
  if (n_reps == 0) throw ArgumentError("n_reps must be >= 1");
  const PermutationScorer scorer(targets, alarms);
  const auto observed = static_cast<double>(scorer.count(scorer.observed_times()));
  std::vector<double> sims(n_reps, 0.0);
  run_replicates(n_reps, threads, [&](std::size_t r) {
    Rng rng(seed, r);
    const auto perm = fisher_yates_permutation(scorer.size(), rng);
    sims[r] = static_cast<double>(scorer.count_permuted(perm));
  });
  nlohmann::json config = {{"statistic", "predicted_events"},
                           {"null", "permuted_times"},
                           {"n_events", targets.size()},
                           {"n_alarms", alarms.size()},
                           {"predictor", to_string(alarms.mode())}};
  if (alarms.config()) {
    config.update(alarm_config_json(*alarms.config(), alarms.mode()));
  }
  return TestReport::from_sims(observed, std::move(sims), seed, std::move(config));
}

TestReport permutation_test(const Catalog& catalog, const AlarmConfig& config,
                            PredictorMode mode, std::size_t n_reps, std::uint64_t seed,
                            unsigned threads) {
  if (n_reps == 0) throw ArgumentError("n_reps must be >= 1");
  const AlarmSet alarms = generate_alarms(catalog, config, mode);
  return permutation_test_fixed(catalog, alarms, n_reps, seed, threads);
}

static void check_exact_guard(std::size_t n) {
  if (n > kMaxExactPermutationEvents) {
    throw ArgumentError("exact permutation p-value refuses " + std::to_string(n) +
                        " events; the enumeration guard kMaxExactPermutationEvents is " +
                        std::to_string(kMaxExactPermutationEvents));
  }
}

ExactPValue exact_permutation_pvalue_fixed(const Catalog& targets, const AlarmSet& alarms) {
  check_exact_guard(targets.size());
  const PermutationScorer scorer(targets, alarms);
  const std::size_t observed = scorer.count(scorer.observed_times());
  std::vector<std::size_t> perm(scorer.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  ExactPValue p{0, 0};
  do {
    ++p.denominator;
    if (scorer.count_permuted(perm) >= observed) ++p.numerator;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return p;
}

ExactPValue exact_permutation_pvalue(const Catalog& catalog, const AlarmConfig& config,
                                     PredictorMode mode) {
  check_exact_guard(catalog.size());
  return exact_permutation_pvalue_fixed(catalog, generate_alarms(catalog, config, mode));
}

// ---------------------------------------------------------------------------
// Binomial and Poisson-binomial tails

double binomial_tail_pvalue(std::size_t S, std::size_t Q, double pi) {
  check_probability(pi, "pi");
  if (S > Q) throw ArgumentError("binomial tail needs S <= Q");
  if (S == 0) return 1.0;
  if (pi == 0.0) return 0.0;
  if (pi == 1.0) return 1.0;
  const double log_pi = std::log(pi);
  const double log_q = std::log1p(-pi);
  const double lg_q1 = std::lgamma(static_cast<double>(Q) + 1.0);
  double total = 0.0;
  for (std::size_t x = S; x <= Q; ++x) {
    const double xd = static_cast<double>(x);
    const double log_term = lg_q1 - std::lgamma(xd + 1.0) -
                            std::lgamma(static_cast<double>(Q - x) + 1.0) + xd * log_pi +
                            static_cast<double>(Q - x) * log_q;
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

double alarm_measure_pi(const AlarmSet& alarms, std::span<const GeoPoint> epicenters,
                        const TimeInterval& interval) {
  if (epicenters.empty()) throw ArgumentError("alarm_measure_pi needs at least one epicenter");
  if (!(interval.start < interval.end)) throw ArgumentError("empty time interval");
  const double span_s = interval.seconds();
  double sum = 0.0;
  std::vector<std::pair<Instant, Instant>> pieces;
  for (const GeoPoint& r : epicenters) {
    pieces.clear();
    for (const Alarm& a : alarms) {
      if (great_circle_km(a.center, r) > a.radius_km) continue;
      const Instant lo = std::max(a.t_start, interval.start);
      const Instant hi = std::min(a.t_end, interval.end);
      if (lo < hi) pieces.emplace_back(lo, hi);
    }
    std::sort(pieces.begin(), pieces.end());
    Duration covered{0};
    std::optional<std::pair<Instant, Instant>> run;
    for (const auto& piece : pieces) {
      if (run && piece.first <= run->second) {
        run->second = std::max(run->second, piece.second);
      } else {
        if (run) covered += run->second - run->first;
        run = piece;
      }
    }
    if (run) covered += run->second - run->first;
    sum += to_seconds(covered) / span_s;
  }
  return sum / static_cast<double>(epicenters.size());
}

std::vector<double> poisson_binomial_pmf(std::span<const double> probs) {
  std::vector<double> pmf(probs.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    check_probability(p, "Bernoulli probability");
    for (std::size_t x = j + 1; x > 0; --x) {
      pmf[x] = pmf[x] * (1.0 - p) + pmf[x - 1] * p;
    }
    pmf[0] *= 1.0 - p;
  }
  return pmf;
}

double poisson_binomial_pvalue(std::size_t s_obs, std::span<const double> probs,
                               const PoissonBinomialMethod& method) {
  for (const double p : probs) check_probability(p, "Bernoulli probability");
  if (s_obs > probs.size()) throw ArgumentError("observed count exceeds number of alarms");
  if (s_obs == 0) return 1.0;

  struct Visitor {
    std::size_t s_obs;
    std::span<const double> probs;

    double operator()(const poisson_binomial::ExactDP&) const {
      const auto pmf = poisson_binomial_pmf(probs);
      double tail = 0.0;
      for (std::size_t x = pmf.size(); x-- > s_obs;) tail += pmf[x];
      return std::min(1.0, tail);
    }
    double operator()(const poisson_binomial::Simulate& sim) const {
      if (sim.n_reps == 0) throw ArgumentError("n_reps must be >= 1");
      Rng rng(sim.seed);
      std::size_t geq = 0;
      for (std::size_t r = 0; r < sim.n_reps; ++r) {
        std::size_t s = 0;
        for (const double p : probs) s += rng.bernoulli(p) ? 1 : 0;
        if (s >= s_obs) ++geq;
      }
      return static_cast<double>(geq) / static_cast<double>(sim.n_reps);
    }
    double operator()(const poisson_binomial::PoissonApprox&) const {
      const double mu = std::accumulate(probs.begin(), probs.end(), 0.0);
      if (mu <= 0.0) return 0.0;
      // P(X >= s) = regularized lower incomplete gamma P(s, mu).
      return boost::math::gamma_p(static_cast<double>(s_obs), mu);
    }
  };
  return std::visit(Visitor{s_obs, probs}, method);
}

// ---------------------------------------------------------------------------
// R-score

GridOutcome::GridOutcome(std::vector<bool> predicted_, std::vector<bool> occurred_)
    : predicted(std::move(predicted_)), occurred(std::move(occurred_)) {
  if (predicted.size() != occurred.size()) {
    throw ArgumentError("predicted and occurred flags differ in length");
  }
  if (predicted.empty()) throw ArgumentError("grid must have at least one cell");
}

double r_score(const GridOutcome& grid) {
  std::size_t occ = 0, hits = 0, aseismic = 0, false_alarms = 0;
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    if (grid.occurred[i]) {
      ++occ;
      if (grid.predicted[i]) ++hits;
    } else {
      ++aseismic;
      if (grid.predicted[i]) ++false_alarms;
    }
  }
  if (occ == 0) throw ArgumentError("R-score undefined: no cell in which earthquakes occur");
  if (aseismic == 0) throw ArgumentError("R-score undefined: no aseismic cell");
  return static_cast<double>(hits) / static_cast<double>(occ) -
         static_cast<double>(false_alarms) / static_cast<double>(aseismic);
}

nlohmann::json BaselineReport::to_json() const {
  nlohmann::json j = {{"scheme", static_cast<int>(scheme)},
                      {"n_reps", n_reps},
                      {"mean", mean},
                      {"sd", sd},
                      {"quantiles", {{"q05", q05}, {"q50", q50}, {"q95", q95}}},
                      {"clipped_cells", clipped_cells},
                      {"proportionality", proportionality},
                      {"expected_predicted_cells", expected_predicted_cells},
                      {"mean_predicted_cells", mean_predicted_cells},
                      {"sampling_design", sampling_design},
                      {"seed", seed}};
  if (observed) {
    j["observed"] = *observed;
    j["sims_geq"] = sims_geq;
    j["p_estimate"] = p_estimate;
  }
  return j;
}

BaselineReport r_score_baseline(BaselineScheme scheme, std::span<const double> rates_per_year,
                                std::size_t n_predicted, const std::vector<bool>& occurred,
                                std::size_t n_reps, std::uint64_t seed,
                                const BaselineOptions& options) {
  const std::size_t n_cells = occurred.size();
  if (n_reps == 0) throw ArgumentError("n_reps must be >= 1");
  if (n_predicted > n_cells) throw ArgumentError("n_predicted exceeds the number of cells");
  // Denominators depend only on the outcomes; validate them once.
  r_score(GridOutcome(std::vector<bool>(n_cells, false), occurred));

  const bool uses_rates = scheme != BaselineScheme::UniformCells;
  if (uses_rates) {
    if (rates_per_year.size() != n_cells) {
      throw ArgumentError("rates must have one entry per cell");
    }
    for (const double r : rates_per_year) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("rates must be finite and >= 0");
    }
  }

  BaselineReport report;
  report.scheme = scheme;
  report.n_reps = n_reps;
  report.seed = seed;
  report.observed = options.observed;

  std::vector<double> coin;
  if (scheme == BaselineScheme::RateCoins) {
    double avg = 0.0;
    if (options.avg_cells_with_events) {
      avg = *options.avg_cells_with_events;
    } else {
      for (const double r : rates_per_year) avg += -std::expm1(-r);
    }
    if (!(avg > 0.0)) throw ArgumentError("historical average number of active cells must be > 0");
    report.proportionality = static_cast<double>(n_predicted) / avg;
    coin.resize(n_cells);
    for (std::size_t j = 0; j < n_cells; ++j) {
      coin[j] = report.proportionality * rates_per_year[j];
      if (coin[j] > 1.0) {
        coin[j] = 1.0;
        ++report.clipped_cells;
      }
    }
    report.expected_predicted_cells = std::accumulate(coin.begin(), coin.end(), 0.0);
    report.sampling_design = "independent coin per cell, p_j = c * rate_j clipped to [0, 1]";
  } else if (scheme == BaselineScheme::WeightedCells) {
    const auto positive = static_cast<std::size_t>(std::count_if(
        rates_per_year.begin(), rates_per_year.end(), [](double r) { return r > 0.0; }));
    if (positive < n_predicted) {
      throw ArgumentError("fewer cells with positive rate than n_predicted");
    }
    report.expected_predicted_cells = static_cast<double>(n_predicted);
    report.sampling_design =
        "successive sampling without replacement, chance proportional to rate "
        "(exponential-key implementation)";
  } else {
    report.expected_predicted_cells = static_cast<double>(n_predicted);
    report.sampling_design = "uniform sampling without replacement";
  }

  std::vector<double> sims(n_reps, 0.0);
  std::vector<std::size_t> cells(n_cells);
  std::vector<std::pair<double, std::size_t>> keys;
  std::vector<bool> predicted(n_cells);
  std::size_t total_predicted = 0;
  for (std::size_t r = 0; r < n_reps; ++r) {
    Rng rng(seed, r);
    std::fill(predicted.begin(), predicted.end(), false);
    switch (scheme) {
      case BaselineScheme::UniformCells: {
        std::iota(cells.begin(), cells.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_predicted; ++i) {
          std::swap(cells[i], cells[i + rng.uniform_index(n_cells - i)]);
          predicted[cells[i]] = true;
        }
        break;
      }
      case BaselineScheme::RateCoins:
        for (std::size_t j = 0; j < n_cells; ++j) predicted[j] = rng.bernoulli(coin[j]);
        break;
      case BaselineScheme::WeightedCells: {
        // Taking the k largest log(U)/w reproduces successive weighted draws.
        keys.clear();
        for (std::size_t j = 0; j < n_cells; ++j) {
          if (rates_per_year[j] <= 0.0) continue;
          const double u = 1.0 - rng.uniform01();
          keys.emplace_back(std::log(u) / rates_per_year[j], j);
        }
        std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_predicted),
                          keys.end(), std::greater<>());
        for (std::size_t i = 0; i < n_predicted; ++i) predicted[keys[i].second] = true;
        break;
      }
    }
    total_predicted += static_cast<std::size_t>(std::count(predicted.begin(), predicted.end(), true));
    sims[r] = r_score(GridOutcome(predicted, occurred));
  }

  double sum = 0.0, sum2 = 0.0;
  for (const double s : sims) {
    sum += s;
    sum2 += s * s;
    if (options.observed && s >= *options.observed) ++report.sims_geq;
  }
  const auto n = static_cast<double>(n_reps);
  report.mean = sum / n;
  report.mean_predicted_cells = static_cast<double>(total_predicted) / n;
  report.sd = n_reps > 1 ? std::sqrt(std::max(0.0, (sum2 - n * report.mean * report.mean) / (n - 1))) : 0.0;
  if (options.observed) report.p_estimate = static_cast<double>(report.sims_geq) / n;
  std::vector<double> sorted = sims;
  std::sort(sorted.begin(), sorted.end());
  report.q05 = quantile_sorted(sorted, 0.05);
  report.q50 = quantile_sorted(sorted, 0.50);
  report.q95 = quantile_sorted(sorted, 0.95);
  report.sims = std::move(sims);
  return report;
}

}  // namespace quakealarm
