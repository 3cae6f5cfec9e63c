#include "ilpcm/simgen.hpp"

#include "ilpcm/errors.hpp"
#include "ilpcm/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ilpcm {

Scenario parse_scenario(const std::string& s) {
  if (s == "I" || s == "1") return Scenario::I;
  if (s == "II" || s == "2") return Scenario::II;
  if (s == "III" || s == "3") return Scenario::III;
  if (s == "IV" || s == "4") return Scenario::IV;
  throw UsageError("unknown scenario '" + s + "' (expected I, II, III or IV)");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::III: return "III";
    case Scenario::IV: return "IV";
  }
  return "?";
}

void ScenarioSpec::validate() const {
  if (n < 3) throw UsageError("scenario needs at least 3 nodes");
  if (K < 1) throw UsageError("scenario needs at least one view");
  if (G < 1 || G > n) throw UsageError("scenario needs 1 <= G <= n");
  if (p < 1) throw UsageError("latent dimension must be >= 1");
  if (max_retries < 1) throw UsageError("max_retries must be >= 1");
}

RateTargets scenario_targets(Scenario s) {
  switch (s) {
    case Scenario::I:
    case Scenario::II: return {0.40, 0.80, 0.0, 0.20};
    case Scenario::III: return {0.40, 0.80, 0.0, 0.40};
    case Scenario::IV: return {0.15, 0.80, 0.20, 0.40};
  }
  return {0.0, 1.0, 0.0, 1.0};
}

std::vector<double> scenario_weights(Scenario s, std::size_t G, Rng& rng) {
  std::vector<double> w(G, 1.0 / double(G));
  if (G == 1) return w;
  if (s == Scenario::II) {
    if (G == 2) return {0.2, 0.8};
    const double small = 0.1;
    const double big = 1.0 - small * double(G - 1);
    if (big <= small) return w;
    w.assign(G, small);
    w.back() = big;
  } else if (s == Scenario::III) {
    double total = 0.0;
    for (auto& v : w) {
      v = 0.3 + 0.5 * rng.uniform();
      total += v;
    }
    for (auto& v : w) v /= total;
  }
  return w;
}

double cluster_mean_variance(std::size_t G) {
  return std::log(double(G)) + 1.5 * double(G);
}

namespace {

GroundTruth draw_truth(const ScenarioSpec& spec, Rng& rng) {
  const std::size_t n = spec.n, p = spec.p, G = spec.G;
  GroundTruth gt;
  for (std::size_t k = 0; k < spec.K; ++k) {
    gt.alpha.push_back(rng.truncated_normal(1.5, 0.6, -0.5));
    gt.beta.push_back(rng.truncated_normal(0.7, 0.3, 0.0));
  }
  const double mean_sd = std::sqrt(cluster_mean_variance(G));
  const bool wide = spec.scenario == Scenario::III;
  const double v_lo = wide ? 0.1 * 0.1 : 0.05 * 0.05;
  const double v_hi = wide ? 0.3 * 0.3 : 0.10 * 0.10;
  for (std::size_t g = 0; g < G; ++g) {
    arma::vec mu(p), s2(p);
    for (std::size_t r = 0; r < p; ++r) mu(r) = rng.normal(0.0, mean_sd);
    for (std::size_t r = 0; r < p; ++r) s2(r) = v_lo + (v_hi - v_lo) * rng.uniform();
    gt.mu.push_back(mu);
    gt.sigma2.push_back(s2);
  }
  gt.weights = scenario_weights(spec.scenario, G, rng);
  gt.labels.resize(n);
  gt.Z.set_size(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = rng.categorical(gt.weights);
    gt.labels[i] = g;
    if (spec.scenario == Scenario::IV) {
      // Location-scale multivariate t with 3 degrees of freedom.
      const double w = std::sqrt(rng.chi_squared(3.0) / 3.0);
      for (std::size_t r = 0; r < p; ++r) {
        gt.Z(i, r) = gt.mu[g](r) + std::sqrt(gt.sigma2[g](r)) * rng.normal() / w;
      }
    } else {
      for (std::size_t r = 0; r < p; ++r) {
        gt.Z(i, r) = rng.normal(gt.mu[g](r), std::sqrt(gt.sigma2[g](r)));
      }
    }
  }
  return gt;
}

EdgeRates rates_from(const arma::mat& Z, const std::vector<std::size_t>& labels,
                     const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t n = Z.n_rows;
  double sw = 0.0, sb = 0.0, cw = 0.0, cb = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = arma::accu(arma::square(Z.row(i) - Z.row(j)));
        const double pr = edge_prob(alpha[k], beta[k], d);
        if (labels[i] == labels[j]) {
          sw += pr;
          cw += 1.0;
        } else {
          sb += pr;
          cb += 1.0;
        }
      }
    }
  }
  EdgeRates r;
  if (cw > 0.0) r.within = sw / cw;
  if (cb > 0.0) r.between = sb / cb;
  return r;
}

bool meets(const EdgeRates& r, const RateTargets& t) {
  if (r.within && (*r.within < t.within_lo || *r.within > t.within_hi)) return false;
  if (r.between && (*r.between < t.between_lo || *r.between > t.between_hi)) return false;
  return true;
}

}  // namespace

EdgeRates empirical_edge_rates(const Multiplex& m, const GroundTruth& gt) {
  if (gt.Z.n_rows != m.n() || gt.labels.size() != m.n() || gt.alpha.size() != m.K()) {
    throw UsageError("ground truth does not match the multiplex");
  }
  return rates_from(gt.Z, gt.labels, gt.alpha, gt.beta);
}

SimulatedData generate(const ScenarioSpec& spec) {
  spec.validate();
  const RateTargets targets = scenario_targets(spec.scenario);
  EdgeRates last;
  for (std::size_t attempt = 0; attempt < spec.max_retries; ++attempt) {
    Rng rng(spec.seed, attempt);
    GroundTruth gt = draw_truth(spec, rng);
    std::vector<std::size_t> sizes(spec.G, 0);
    for (std::size_t l : gt.labels) ++sizes[l];
    bool empty = false;
    for (std::size_t s : sizes) empty = empty || s == 0;
    if (empty) continue;
    gt.rates = rates_from(gt.Z, gt.labels, gt.alpha, gt.beta);
    last = gt.rates;
    if (!meets(gt.rates, targets)) continue;
    gt.attempts = attempt + 1;

    std::vector<View> views;
    for (std::size_t k = 0; k < spec.K; ++k) {
      View v;
      v.name = "view" + std::to_string(k + 1);
      v.directed = true;
      v.adjacency.zeros(spec.n, spec.n);
      for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = 0; j < spec.n; ++j) {
          if (i == j) continue;
          const double d = arma::accu(arma::square(gt.Z.row(i) - gt.Z.row(j)));
          v.adjacency(i, j) = rng.uniform() < edge_prob(gt.alpha[k], gt.beta[k], d) ? 1.0 : 0.0;
        }
      }
      views.push_back(std::move(v));
    }
    return SimulatedData{Multiplex(std::move(views), 0), std::move(gt)};
  }
  std::ostringstream msg;
  msg << "scenario " << to_string(spec.scenario) << ": no instance met the edge-rate targets in "
      << spec.max_retries << " attempts (last within="
      << (last.within ? std::to_string(*last.within) : "absent")
      << ", between=" << (last.between ? std::to_string(*last.between) : "absent") << ")";
  throw DataError(msg.str());
}

nlohmann::json to_json(const GroundTruth& gt) {
  nlohmann::json j;
  std::vector<std::vector<double>> Z(gt.Z.n_rows);
  for (std::size_t i = 0; i < gt.Z.n_rows; ++i) {
    Z[i] = arma::conv_to<std::vector<double>>::from(arma::rowvec(gt.Z.row(i)));
  }
  j["Z"] = Z;
  std::vector<std::size_t> labels1;
  for (std::size_t l : gt.labels) labels1.push_back(l + 1);
  j["labels"] = labels1;
  j["alpha"] = gt.alpha;
  j["beta"] = gt.beta;
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t g = 0; g < gt.mu.size(); ++g) {
    comps.push_back({{"mu", arma::conv_to<std::vector<double>>::from(gt.mu[g])},
                     {"sigma2", arma::conv_to<std::vector<double>>::from(gt.sigma2[g])},
                     {"weight", gt.weights.at(g)}});
  }
  j["components"] = comps;
  j["edge_rates"] = {{"within", gt.rates.within ? nlohmann::json(*gt.rates.within) : nullptr},
                     {"between", gt.rates.between ? nlohmann::json(*gt.rates.between) : nullptr}};
  j["attempts"] = gt.attempts;
  return j;
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  try {
    GroundTruth gt;
    const auto Z = j.at("Z").get<std::vector<std::vector<double>>>();
    const std::size_t n = Z.size(), p = n ? Z.front().size() : 0;
    gt.Z.set_size(n, p);
    for (std::size_t i = 0; i < n; ++i) {
      if (Z[i].size() != p) throw DataError("truth coordinates are ragged");
      for (std::size_t r = 0; r < p; ++r) gt.Z(i, r) = Z[i][r];
    }
    for (std::size_t l : j.at("labels").get<std::vector<std::size_t>>()) {
      if (l < 1) throw DataError("truth labels are 1-based");
      gt.labels.push_back(l - 1);
    }
    gt.alpha = j.at("alpha").get<std::vector<double>>();
    gt.beta = j.at("beta").get<std::vector<double>>();
    for (const auto& c : j.value("components", nlohmann::json::array())) {
      gt.mu.push_back(arma::conv_to<arma::vec>::from(c.at("mu").get<std::vector<double>>()));
      gt.sigma2.push_back(
          arma::conv_to<arma::vec>::from(c.at("sigma2").get<std::vector<double>>()));
      gt.weights.push_back(c.at("weight").get<double>());
    }
    if (j.contains("edge_rates")) {
      const auto& r = j.at("edge_rates");
      if (r.contains("within") && !r.at("within").is_null()) gt.rates.within = r.at("within").get<double>();
      if (r.contains("between") && !r.at("between").is_null()) {
        gt.rates.between = r.at("between").get<double>();
      }
    }
    gt.attempts = j.value("attempts", std::size_t{1});
    if (gt.labels.size() != n) throw DataError("truth labels and coordinates disagree");
    return gt;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed truth file: ") + e.what());
  }
}

void save_truth_json(const GroundTruth& gt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(gt).dump(2) << '\n';
}

GroundTruth load_truth_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed truth file: " + std::string(e.what()));
  }
  return ground_truth_from_json(j);
}

}  // namespace ilpcm
