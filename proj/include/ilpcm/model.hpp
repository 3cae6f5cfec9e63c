#pragma once

#include "ilpcm/kernels.hpp"
#include "ilpcm/multiplex.hpp"

#include <armadillo>
#include <json.hpp>

#include <cstddef>
#include <vector>

namespace ilpcm {

// Every fixed hyperparameter of the hierarchical prior.
struct PriorConfig {
  std::size_t p = 2;  // latent dimension

  // alpha_k ~ N_[LB,inf)(mu_alpha, sigma2_alpha),
  // mu_alpha | sigma2_alpha ~ N_[LB,inf)(m_alpha, tau_alpha * sigma2_alpha),
  // sigma2_alpha ~ Inv-chi^2(nu_alpha). Same pattern for beta with bound 0.
  double m_alpha = 0.0;
  double tau_alpha = 1.0;
  double nu_alpha = 3.0;
  double m_beta = 0.0;
  double tau_beta = 1.0;
  double nu_beta = 3.0;

  // Normal-Inverse-Gamma base measure: sigma2_rg ~ InvGamma(nu1, nu2),
  // mu_rg | sigma2_rg ~ N(m_r, tau_z * sigma2_rg). m is the starting base
  // mean; with update_base_mean it gets a N(0, 1) hyperprior.
  arma::vec m = arma::zeros<arma::vec>(2);
  double tau_z = 1.0;
  double nu1 = 0.0;  // 0 means "use n" (resolved by for_network)
  double nu2 = 1.0;
  bool update_base_mean = true;

  // psi ~ Gamma(xi1, rate xi2).
  double xi1 = 1.0;
  double xi2 = 2.0;

  // Defaults, with nu1 tied to the node count.
  static PriorConfig defaults(std::size_t n, std::size_t p = 2);
  // Copy with nu1 = n where unset and m resized to p.
  PriorConfig for_network(std::size_t n) const;
  void validate() const;
};

nlohmann::json to_json(const PriorConfig& cfg);
// Missing keys keep their defaults.
PriorConfig prior_config_from_json(const nlohmann::json& j);

struct LogitParams {
  std::vector<double> alpha;  // one intercept per view
  std::vector<double> beta;   // one scale coefficient per view
  std::size_t ref_view = 0;
  double mu_alpha = 0.0;
  double sigma2_alpha = 1.0;
  double mu_beta = 0.0;
  double sigma2_beta = 1.0;

  std::size_t K() const { return alpha.size(); }
  // Checks the support constraints for a network of n nodes; throws
  // std::logic_error on violation.
  void validate(std::size_t n) const;
};

double logistic(double x);
// log(1 + exp(x)) without overflow.
double softplus(double x);

// exp(a - b d) / (1 + exp(a - b d)).
double edge_prob(double alpha_k, double beta_k, double squared_distance);

// Lower bound on intercepts: log(log(n) / (n - log(n))).
double alpha_lower_bound(double n);
// log(p / (1 - p)) + 2. Throws std::domain_error unless 0 < p < 1.
double alpha_ref_min(double p_bar);

// Bernoulli-logit log-likelihood, ordered pairs for directed views and
// unordered pairs for undirected ones. Z is n x p.
double log_likelihood(const Multiplex& m, const LogitParams& lp, const arma::mat& Z,
                      const kernels::KernelTable& kt = kernels::best());
double view_log_likelihood(const Multiplex& m, std::size_t k, double alpha, double beta,
                           const arma::mat& Z, const kernels::KernelTable& kt = kernels::best());

// n x n matrix of squared latent distances.
arma::mat pairwise_squared_distances(const arma::mat& Z,
                                     const kernels::KernelTable& kt = kernels::best());
// View log-likelihood from a precomputed pairwise_squared_distances matrix.
double view_log_likelihood_from_distances(const Multiplex& m, std::size_t k, double alpha,
                                          double beta, const arma::mat& D,
                                          const kernels::KernelTable& kt = kernels::best());

// --- density helpers ---------------------------------------------------------

// log Phi(x), accurate in the lower tail.
double log_normal_cdf(double x);
double normal_logpdf(double x, double mean, double var);
// Normal(mean, var) truncated to [lower, inf); -inf outside the support.
double truncated_normal_logpdf(double x, double mean, double var, double lower);
double inv_gamma_logpdf(double x, double shape, double scale);
// Unscaled inverse chi-square: InvGamma(nu / 2, 1 / 2).
double inv_chi2_logpdf(double x, double nu);

// Joint log prior of the free logit parameters and their hyperparameters.
// The reference view contributes nothing. Returns -inf outside the support.
double logit_prior_logdensity(const LogitParams& lp, const PriorConfig& cfg, std::size_t n);

}  // namespace ilpcm
