#include "soda/detector.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "soda/error.hpp"

namespace soda {

void DetectorConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
    throw DomainError("detector config: weights must be non-negative");
  }
  if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) {
    throw DomainError("detector config: weights must sum to 1");
  }
  if (!(delta > 0.0)) {
    throw DomainError("detector config: delta must be positive");
  }
  if (max_horizon == 0) {
    throw DomainError("detector config: max_horizon must be positive");
  }
}

DetectorConfig DetectorConfig::normalized() const {
  const double sum = alpha + beta + gamma;
  if (!(sum > 0.0)) {
    throw DomainError("detector config: weight sum must be positive");
  }
  DetectorConfig out = *this;
  out.alpha = alpha / sum;
  out.beta = beta / sum;
  out.gamma = gamma / sum;
  return out;
}

void write_jsonl(std::ostream& out, const LeakageBreakdown& row) {
  nlohmann::ordered_json j;
  j["t"] = row.t;
  j["raw_r"] = row.raw_r;
  j["raw_d"] = row.raw_d;
  j["raw_o"] = row.raw_o;
  j["norm_r"] = row.norm_r;
  j["norm_d"] = row.norm_d;
  j["norm_o"] = row.norm_o;
  j["l"] = row.leakage;
  j["verdict"] = row.verdict == Verdict::adversarial ? "adversarial" : "benign";
  j["timing_us"] = {{"r", row.timing_us_r},
                    {"d", row.timing_us_d},
                    {"o", row.timing_us_o}};
  out << j.dump() << '\n';
}

double update_reconstruction(DetectorState& state, std::span<const double> x,
                             const Autoencoder& model) {
  state.r_cum += model.reconstruction_mse(x);
  return state.r_cum;
}

double update_distance(DetectorState& state, std::vector<double> z) {
  if (!state.encoded_history.empty()) {
    std::vector<double> dists;
    dists.reserve(state.encoded_history.size());
    for (const auto& prev : state.encoded_history) {
      dists.push_back(euclidean(prev, z));
    }
    state.d_cum += median(dists);
  }
  state.encoded_history.push_back(std::move(z));
  return state.d_cum;
}

double output_entropy(const DetectorState& state) {
  if (state.t == 0) throw DomainError("output_entropy: no predictions yet");
  double entropy = 0.0;
  const double total = static_cast<double>(state.t);
  for (const std::uint64_t count : state.class_counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / total;
    entropy -= p * std::log(p);
  }
  return entropy;
}

double normalize_component(double value, std::size_t t, LeakageComponent which,
                           const CalibrationTable& table) {
  if (t == 0) throw DomainError("normalize_component: t is 1-based");
  if (t > table.horizon()) {
    throw HorizonError("normalize_component: t=" + std::to_string(t) +
                       " beyond calibrated horizon " +
                       std::to_string(table.horizon()));
  }
  const std::size_t i = t - 1;
  double lo = 0.0, hi = 0.0;
  switch (which) {
    case LeakageComponent::reconstruction:
      lo = table.r_min[i];
      hi = table.r_max[i];
      break;
    case LeakageComponent::distance:
      lo = table.d_min[i];
      hi = table.d_max[i];
      break;
    case LeakageComponent::entropy:
      lo = table.o_min[i];
      hi = table.o_max[i];
      break;
  }
  if (hi == lo) return 0.0;
  return (value - lo) / (hi - lo);
}

double leakage_rate(double norm_r, double norm_d, double norm_o,
                    const DetectorConfig& cfg) {
  cfg.validate();
  return cfg.alpha * norm_r + cfg.beta * norm_d + cfg.gamma * norm_o;
}

Verdict classify(double leakage, std::size_t t, const DetectorConfig& cfg,
                 const CalibrationTable& table) {
  if (t == 0) throw DomainError("classify: t is 1-based");
  if (t > table.horizon()) {
    throw HorizonError("classify: t=" + std::to_string(t) +
                       " beyond calibrated horizon " +
                       std::to_string(table.horizon()));
  }
  const double ref = table.leakage_ref[t - 1];
  const double lo = ref * (1.0 - cfg.delta);
  const double hi = ref * (1.0 + cfg.delta);
  return (leakage < lo || leakage > hi) ? Verdict::adversarial
                                        : Verdict::benign;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start)
      .count();
}

struct ComponentResults {
  double r_new = 0.0;
  double d_increment = 0.0;
  double o_new = 0.0;
  double us_r = 0.0, us_d = 0.0, us_o = 0.0;
};

}  // namespace

LeakageBreakdown observe(DetectorState& state, std::span<const double> x,
                         const Autoencoder& ae, const ServiceModel& model,
                         const DetectorConfig& cfg,
                         const CalibrationTable& table, ExecMode mode) {
  cfg.validate();
  if (x.empty() || x.size() != ae.input_dim()) {
    throw ShapeError("observe: query length " + std::to_string(x.size()) +
                     " != input dim " + std::to_string(ae.input_dim()));
  }
  if (state.class_counts.empty()) {
    state.class_counts.assign(model.num_classes(), 0);
  }
  const std::size_t t_next = state.t + 1;
  if (t_next > table.horizon()) {
    throw HorizonError("observe: session exceeded calibrated horizon");
  }

  const std::vector<double> z = ae.encode(x);
  const std::size_t predicted = model.predict(z);

  // The three components read disjoint parts of the state, so they can run
  // concurrently; their results are committed in one step below and are
  // bit-identical either way.
  auto reconstruction_task = [&]() -> std::pair<double, double> {
    const auto start = Clock::now();
    const double r = state.r_cum + ae.reconstruction_mse(x);
    return {r, elapsed_us(start)};
  };
  auto distance_task = [&]() -> std::pair<double, double> {
    const auto start = Clock::now();
    double increment = 0.0;
    if (!state.encoded_history.empty()) {
      std::vector<double> dists;
      dists.reserve(state.encoded_history.size());
      for (const auto& prev : state.encoded_history) {
        dists.push_back(euclidean(prev, z));
      }
      increment = median(dists);
    }
    return {increment, elapsed_us(start)};
  };
  auto entropy_task = [&]() -> std::pair<double, double> {
    const auto start = Clock::now();
    double entropy = 0.0;
    const double total = static_cast<double>(t_next);
    for (std::size_t c = 0; c < state.class_counts.size(); ++c) {
      const std::uint64_t count =
          state.class_counts[c] + (c == predicted ? 1 : 0);
      if (count == 0) continue;
      const double p = static_cast<double>(count) / total;
      entropy -= p * std::log(p);
    }
    return {entropy, elapsed_us(start)};
  };

  ComponentResults results;
  if (mode == ExecMode::concurrent) {
    auto fr = std::async(std::launch::async, reconstruction_task);
    auto fd = std::async(std::launch::async, distance_task);
    auto fo = std::async(std::launch::async, entropy_task);
    std::tie(results.r_new, results.us_r) = fr.get();
    std::tie(results.d_increment, results.us_d) = fd.get();
    std::tie(results.o_new, results.us_o) = fo.get();
  } else {
    std::tie(results.r_new, results.us_r) = reconstruction_task();
    std::tie(results.d_increment, results.us_d) = distance_task();
    std::tie(results.o_new, results.us_o) = entropy_task();
  }

  LeakageBreakdown row;
  row.t = t_next;
  row.raw_r = results.r_new;
  row.raw_d = state.d_cum + results.d_increment;
  row.raw_o = results.o_new;
  row.norm_r = normalize_component(row.raw_r, t_next,
                                   LeakageComponent::reconstruction, table);
  row.norm_d =
      normalize_component(row.raw_d, t_next, LeakageComponent::distance, table);
  row.norm_o =
      normalize_component(row.raw_o, t_next, LeakageComponent::entropy, table);
  row.leakage = leakage_rate(row.norm_r, row.norm_d, row.norm_o, cfg);
  row.verdict = classify(row.leakage, t_next, cfg, table);
  row.timing_us_r = results.us_r;
  row.timing_us_d = results.us_d;
  row.timing_us_o = results.us_o;

  // Atomic commit of the whole step.
  state.t = t_next;
  state.r_cum = row.raw_r;
  state.d_cum = row.raw_d;
  state.class_counts[predicted] += 1;
  state.encoded_history.push_back(z);
  state.verdicts.push_back(row.verdict);
  return row;
}

CalibrationTable calibrate(const Matrix& train_features, const Autoencoder& ae,
                           const ServiceModel& model, const DetectorConfig& cfg,
                           std::size_t sessions, Rng& rng) {
  cfg.validate();
  const std::size_t horizon = cfg.max_horizon;
  if (sessions < 2) {
    throw DomainError("calibrate: need at least 2 sessions");
  }
  if (train_features.rows < horizon) {
    throw DomainError("calibrate: training set smaller than the horizon");
  }

  // Raw component trajectories per session.
  std::vector<std::vector<double>> r_traj(sessions), d_traj(sessions),
      o_traj(sessions);
  for (std::size_t s = 0; s < sessions; ++s) {
    Rng session_rng = rng.fork();
    const std::vector<std::size_t> picks =
        session_rng.sample_without_replacement(train_features.rows, horizon);
    DetectorState state;
    state.class_counts.assign(model.num_classes(), 0);
    r_traj[s].reserve(horizon);
    d_traj[s].reserve(horizon);
    o_traj[s].reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const auto x = train_features.row(picks[t]);
      std::vector<double> z = ae.encode(x);
      const std::size_t predicted = model.predict(z);
      update_reconstruction(state, x, ae);
      update_distance(state, std::move(z));
      state.class_counts[predicted] += 1;
      state.t += 1;
      r_traj[s].push_back(state.r_cum);
      d_traj[s].push_back(state.d_cum);
      o_traj[s].push_back(output_entropy(state));
    }
  }

  CalibrationTable table;
  table.r_min.assign(horizon, 0.0);
  table.r_max.assign(horizon, 0.0);
  table.d_min.assign(horizon, 0.0);
  table.d_max.assign(horizon, 0.0);
  table.o_min.assign(horizon, 0.0);
  table.o_max.assign(horizon, 0.0);
  table.leakage_ref.assign(horizon, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    double rmin = r_traj[0][t], rmax = r_traj[0][t];
    double dmin = d_traj[0][t], dmax = d_traj[0][t];
    double omin = o_traj[0][t], omax = o_traj[0][t];
    for (std::size_t s = 1; s < sessions; ++s) {
      rmin = std::min(rmin, r_traj[s][t]);
      rmax = std::max(rmax, r_traj[s][t]);
      dmin = std::min(dmin, d_traj[s][t]);
      dmax = std::max(dmax, d_traj[s][t]);
      omin = std::min(omin, o_traj[s][t]);
      omax = std::max(omax, o_traj[s][t]);
    }
    table.r_min[t] = rmin;
    table.r_max[t] = rmax;
    table.d_min[t] = dmin;
    table.d_max[t] = dmax;
    table.o_min[t] = omin;
    table.o_max[t] = omax;
  }

  // Reference leakage: mean of the sessions' normalized leakage per step.
  for (std::size_t t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (std::size_t s = 0; s < sessions; ++s) {
      const double nr = normalize_component(
          r_traj[s][t], t + 1, LeakageComponent::reconstruction, table);
      const double nd = normalize_component(d_traj[s][t], t + 1,
                                            LeakageComponent::distance, table);
      const double no = normalize_component(o_traj[s][t], t + 1,
                                            LeakageComponent::entropy, table);
      sum += leakage_rate(nr, nd, no, cfg);
    }
    table.leakage_ref[t] = sum / static_cast<double>(sessions);
  }
  return table;
}

}  // namespace soda
