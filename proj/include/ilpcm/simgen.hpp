#pragma once

#include "ilpcm/multiplex.hpp"
#include "ilpcm/random.hpp"

#include <armadillo>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ilpcm {

enum class Scenario { I, II, III, IV };

// Accepts "I".."IV" or "1".."4".
Scenario parse_scenario(const std::string& s);
std::string to_string(Scenario s);

struct ScenarioSpec {
  Scenario scenario = Scenario::I;
  std::size_t n = 25;
  std::size_t K = 3;
  std::size_t G = 2;
  std::uint64_t seed = 1;
  std::size_t p = 2;
  std::size_t max_retries = 200;

  void validate() const;
};

// Mean edge probabilities over same-cluster and cross-cluster dyads, pooled
// over views. A side with no dyads is absent.
struct EdgeRates {
  std::optional<double> within;
  std::optional<double> between;
};

struct RateTargets {
  double within_lo, within_hi;
  double between_lo, between_hi;
};
RateTargets scenario_targets(Scenario s);

// Mixing weights of a scenario; only Scenario III consumes randomness.
std::vector<double> scenario_weights(Scenario s, std::size_t G, Rng& rng);

// Per-dimension prior variance of the true cluster means: log G + 1.5 G.
double cluster_mean_variance(std::size_t G);

struct GroundTruth {
  arma::mat Z;                       // n x p
  std::vector<std::size_t> labels;   // 0-based
  std::vector<double> alpha, beta;   // per view
  std::vector<arma::vec> mu, sigma2; // per component
  std::vector<double> weights;
  EdgeRates rates;
  std::size_t attempts = 1;
};

struct SimulatedData {
  Multiplex multiplex;
  GroundTruth truth;
};

// Draws instances until the edge-rate targets hold and no component is
// empty. Throws DataError with the last rates once max_retries is reached.
SimulatedData generate(const ScenarioSpec& spec);

EdgeRates empirical_edge_rates(const Multiplex& m, const GroundTruth& gt);

nlohmann::json to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const nlohmann::json& j);
void save_truth_json(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth load_truth_json(const std::filesystem::path& path);

}  // namespace ilpcm
