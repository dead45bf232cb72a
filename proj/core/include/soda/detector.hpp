#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "soda/autoencoder.hpp"
#include "soda/numeric.hpp"
#include "soda/service_model.hpp"

namespace soda {

enum class Verdict : std::uint8_t { benign = 0, adversarial = 1 };

enum class LeakageComponent : std::uint8_t {
  reconstruction = 0,
  distance = 1,
  entropy = 2,
};

/// Weights and threshold band for the leakage rate. The weights must be
/// non-negative and sum to 1 (within 1e-9); the band half-width delta is
/// relative to the reference leakage and must be positive.
struct DetectorConfig {
  double alpha = 1.0 / 3.0;  // cumulative reconstruction error weight
  double beta = 1.0 / 3.0;   // cumulative median encoded distance weight
  double gamma = 1.0 / 3.0;  // output entropy weight
  double delta = 0.2;
  std::size_t max_horizon = 500;

  /// Throws DomainError when any constraint is violated.
  void validate() const;

  /// Copy with weights rescaled to sum exactly 1 (accepts inputs such as
  /// 0.33/0.33/0.33). Throws DomainError if the sum is not positive.
  DetectorConfig normalized() const;

  bool operator==(const DetectorConfig&) const = default;
};

/// Per-session running values. The invariant t == encoded_history.size()
/// == sum(class_counts) == verdicts.size() holds between observe() calls;
/// the fine-grained update functions each advance one piece and are
/// committed together by observe().
struct DetectorState {
  std::size_t t = 0;
  double r_cum = 0.0;
  double d_cum = 0.0;
  std::vector<std::uint64_t> class_counts;  // one per class
  std::vector<std::vector<double>> encoded_history;
  std::vector<Verdict> verdicts;

  bool operator==(const DetectorState&) const = default;
};

/// Per-timestep benign envelope (min/max of each raw component over the
/// calibration sessions) and the reference leakage trajectory.
struct CalibrationTable {
  std::vector<double> r_min, r_max;
  std::vector<double> d_min, d_max;
  std::vector<double> o_min, o_max;
  std::vector<double> leakage_ref;

  std::size_t horizon() const { return leakage_ref.size(); }
  bool operator==(const CalibrationTable&) const = default;
};

/// Everything computed for one query: raw and normalized components, the
/// aggregated leakage rate, the verdict, and per-component wall times.
struct LeakageBreakdown {
  std::size_t t = 0;
  double raw_r = 0.0, raw_d = 0.0, raw_o = 0.0;
  double norm_r = 0.0, norm_d = 0.0, norm_o = 0.0;
  double leakage = 0.0;
  Verdict verdict = Verdict::benign;
  double timing_us_r = 0.0, timing_us_d = 0.0, timing_us_o = 0.0;
};

/// One JSON object per line:
/// {"t":..,"raw_r":..,...,"l":..,"verdict":"benign","timing_us":{"r":..,...}}
void write_jsonl(std::ostream& out, const LeakageBreakdown& row);

enum class ExecMode : std::uint8_t { sequential = 0, concurrent = 1 };

/// r_cum += reconstruction MSE of x; returns the new cumulative value.
double update_reconstruction(DetectorState& state, std::span<const double> x,
                             const Autoencoder& model);

/// d_cum += median distance from z to every earlier encoded query, then
/// appends z. The first query contributes zero (no predecessors).
double update_distance(DetectorState& state, std::vector<double> z);

/// Entropy (natural log) of the empirical prediction histogram
/// class_counts/t; 0*log(0) counts as 0. Range [0, ln C].
/// Throws DomainError when t == 0.
double output_entropy(const DetectorState& state);

/// Min-max normalization of a raw component value against the benign
/// envelope at timestep t (1-based). Values are deliberately NOT clamped:
/// leaving [0,1] is the adversarial signal. A degenerate envelope
/// (max == min) maps everything to 0. Throws HorizonError when t exceeds
/// the table, DomainError when t == 0.
double normalize_component(double value, std::size_t t, LeakageComponent which,
                           const CalibrationTable& table);

/// Weighted aggregation alpha*r + beta*d + gamma*o of normalized components.
double leakage_rate(double norm_r, double norm_d, double norm_o,
                    const DetectorConfig& cfg);

/// Band test around the reference leakage: adversarial iff
/// l < ref*(1-delta) or l > ref*(1+delta). A zero reference collapses the
/// band to the point {0}.
Verdict classify(double leakage, std::size_t t, const DetectorConfig& cfg,
                 const CalibrationTable& table);

/// Full per-query step: encode, predict, update all three components,
/// normalize, aggregate, classify, commit. With ExecMode::concurrent the
/// three component computations run on separate threads; results are
/// bit-identical to sequential execution.
LeakageBreakdown observe(DetectorState& state, std::span<const double> x,
                         const Autoencoder& ae, const ServiceModel& model,
                         const DetectorConfig& cfg,
                         const CalibrationTable& table,
                         ExecMode mode = ExecMode::sequential);

/// Simulates `sessions` benign sessions of length cfg.max_horizon, each
/// sampling rows from `train_features` uniformly without replacement, and
/// builds the per-timestep envelope plus the reference leakage (mean of the
/// sessions' normalized leakage). Throws DomainError when sessions < 2 or
/// the training set is smaller than the horizon.
CalibrationTable calibrate(const Matrix& train_features, const Autoencoder& ae,
                           const ServiceModel& model, const DetectorConfig& cfg,
                           std::size_t sessions, Rng& rng);

}  // namespace soda
