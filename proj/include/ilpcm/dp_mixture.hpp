#pragma once

#include "ilpcm/model.hpp"
#include "ilpcm/random.hpp"

#include <armadillo>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ilpcm {

// Dirichlet-process mixture state over node coordinates. Component indices
// are 0-based and dense: every component in [0, G) has at least one member.
struct MixtureState {
  std::vector<std::size_t> labels;  // per node
  std::vector<arma::vec> mu;        // per component, p entries
  std::vector<arma::vec> sigma2;    // per component, diagonal variances
  std::vector<std::size_t> counts;  // per component
  arma::vec base_mean;              // m_r
  double psi = 0.5;                 // concentration

  std::size_t G() const { return mu.size(); }
  std::size_t n() const { return labels.size(); }

  // Throws std::logic_error on a broken invariant.
  void validate() const;
  // Relabel components in order of first appearance along the node index.
  void canonicalize();
  // Drop component g and shift higher indices down by one. g must be empty.
  void remove_component(std::size_t g);
};

// Builds a state from a partition, with per-component parameters set to the
// sample means/variances of the members (variances floored at var_floor).
MixtureState mixture_from_partition(const arma::mat& Z, std::span<const std::size_t> labels,
                                    const arma::vec& base_mean, double psi,
                                    double var_floor = 1e-3);

inline constexpr std::size_t kNewComponent = std::numeric_limits<std::size_t>::max();

struct LabelConditional {
  // Normalized probabilities; the last entry is the new-component option.
  std::vector<double> prob;
  // State component index for each entry of prob (kNewComponent for the last).
  std::vector<std::size_t> component;
};

// Full conditional of node i's label with i removed from its component. A
// component that i alone occupied is not offered.
LabelConditional label_full_conditional(std::size_t i, const arma::mat& Z,
                                        const MixtureState& st, const PriorConfig& cfg);

enum class BirthRule {
  exact_posterior,  // (mu, Sigma) | z_i from the Normal-Inverse-Gamma posterior
  two_step,         // mu := z_i, Sigma | mu, then mu | Sigma
};

struct LabelSweepOptions {
  bool ignore_coordinates = false;  // CRP-only weights (test hook)
  BirthRule birth = BirthRule::exact_posterior;
};

// One sequential sweep over all nodes. Births append a component, emptied
// components are removed immediately.
void resample_labels(const arma::mat& Z, MixtureState& st, const PriorConfig& cfg, Rng& rng,
                     const LabelSweepOptions& opts = {});

// Conjugate draws for component g, all dimensions.
void draw_component_variance(const arma::mat& Z, MixtureState& st, std::size_t g,
                             const PriorConfig& cfg, Rng& rng);
void draw_component_mean(const arma::mat& Z, MixtureState& st, std::size_t g,
                         const PriorConfig& cfg, Rng& rng);

// Posterior mean and variance of mu_rg given sigma2 (closed form).
struct NormalMoments {
  double mean;
  double var;
};
NormalMoments component_mean_conditional(const arma::mat& Z, const MixtureState& st,
                                         std::size_t g, std::size_t r, const PriorConfig& cfg);
struct InvGammaParams {
  double shape;
  double scale;
};
InvGammaParams component_variance_conditional(const arma::mat& Z, const MixtureState& st,
                                              std::size_t g, std::size_t r,
                                              const PriorConfig& cfg);

// sigma2 then mu for every component.
void update_component_params(const arma::mat& Z, MixtureState& st, const PriorConfig& cfg,
                             Rng& rng);

// m_r | mu, sigma2 under a N(0, 1) hyperprior. No-op when the config
// freezes the base mean.
void update_base_mean(MixtureState& st, const PriorConfig& cfg, Rng& rng);

struct ConcentrationStep {
  double s;    // odds of the larger-shape Gamma
  double eta;  // s / (1 + s)
};
ConcentrationStep concentration_mixture_weight(double xi1, double xi2, std::size_t G,
                                               std::size_t n, double x);

// Auxiliary-variable update of psi given G.
void update_concentration(MixtureState& st, std::size_t n, const PriorConfig& cfg, Rng& rng);

double diag_normal_logpdf(const arma::rowvec& z, const arma::vec& mu, const arma::vec& sigma2);
double student_t_logpdf(double x, double dof, double loc, double scale2);
// Prior predictive log density of one coordinate vector under the base measure.
double base_predictive_logpdf(const arma::rowvec& z, const MixtureState& st,
                              const PriorConfig& cfg);

double log_sum_exp(std::span<const double> x);

// log sum_g (n_g / n) N(z | mu_g, Sigma_g).
double mixture_logdensity(const arma::rowvec& z, const MixtureState& st);

}  // namespace ilpcm
