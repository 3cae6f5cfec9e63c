#include "ilpcm/model.hpp"

#include "ilpcm/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ilpcm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

PriorConfig PriorConfig::defaults(std::size_t n, std::size_t p) {
  PriorConfig cfg;
  cfg.p = p;
  cfg.m = arma::zeros<arma::vec>(p);
  cfg.nu1 = static_cast<double>(n);
  return cfg;
}

PriorConfig PriorConfig::for_network(std::size_t n) const {
  PriorConfig cfg = *this;
  if (cfg.nu1 <= 0.0) cfg.nu1 = static_cast<double>(n);
  if (cfg.m.n_elem != cfg.p) {
    arma::vec resized = arma::zeros<arma::vec>(cfg.p);
    for (std::size_t r = 0; r < std::min<std::size_t>(cfg.p, cfg.m.n_elem); ++r) {
      resized(r) = cfg.m(r);
    }
    cfg.m = resized;
  }
  return cfg;
}

void PriorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw UsageError(std::string("prior hyperparameter ") + name + " must be positive");
    }
  };
  if (p < 1) throw UsageError("latent dimension p must be >= 1");
  positive(tau_alpha, "tau_alpha");
  positive(nu_alpha, "nu_alpha");
  positive(tau_beta, "tau_beta");
  positive(nu_beta, "nu_beta");
  positive(tau_z, "tau_z");
  positive(nu1, "nu1");
  positive(nu2, "nu2");
  positive(xi1, "xi1");
  positive(xi2, "xi2");
  if (m.n_elem != p) throw UsageError("base mean m must have p entries");
}

nlohmann::json to_json(const PriorConfig& cfg) {
  return {{"p", cfg.p},
          {"m_alpha", cfg.m_alpha},
          {"tau_alpha", cfg.tau_alpha},
          {"nu_alpha", cfg.nu_alpha},
          {"m_beta", cfg.m_beta},
          {"tau_beta", cfg.tau_beta},
          {"nu_beta", cfg.nu_beta},
          {"m", arma::conv_to<std::vector<double>>::from(cfg.m)},
          {"tau_z", cfg.tau_z},
          {"nu1", cfg.nu1},
          {"nu2", cfg.nu2},
          {"update_base_mean", cfg.update_base_mean},
          {"xi1", cfg.xi1},
          {"xi2", cfg.xi2}};
}

PriorConfig prior_config_from_json(const nlohmann::json& j) {
  try {
    PriorConfig cfg;
    cfg.p = j.value("p", cfg.p);
    cfg.m_alpha = j.value("m_alpha", cfg.m_alpha);
    cfg.tau_alpha = j.value("tau_alpha", cfg.tau_alpha);
    cfg.nu_alpha = j.value("nu_alpha", cfg.nu_alpha);
    cfg.m_beta = j.value("m_beta", cfg.m_beta);
    cfg.tau_beta = j.value("tau_beta", cfg.tau_beta);
    cfg.nu_beta = j.value("nu_beta", cfg.nu_beta);
    cfg.tau_z = j.value("tau_z", cfg.tau_z);
    if (j.contains("nu1") && j.at("nu1").is_string()) {
      if (j.at("nu1").get<std::string>() != "n") throw UsageError("nu1 must be a number or \"n\"");
      cfg.nu1 = 0.0;
    } else {
      cfg.nu1 = j.value("nu1", cfg.nu1);
    }
    cfg.nu2 = j.value("nu2", cfg.nu2);
    cfg.update_base_mean = j.value("update_base_mean", cfg.update_base_mean);
    cfg.xi1 = j.value("xi1", cfg.xi1);
    cfg.xi2 = j.value("xi2", cfg.xi2);
    if (j.contains("m")) {
      cfg.m = arma::conv_to<arma::vec>::from(j.at("m").get<std::vector<double>>());
    } else {
      cfg.m = arma::zeros<arma::vec>(cfg.p);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed prior config: ") + e.what());
  }
}

void LogitParams::validate(std::size_t n) const {
  if (beta.size() != alpha.size() || ref_view >= alpha.size()) {
    throw std::logic_error("logit parameter dimensions disagree");
  }
  const double lb = alpha_lower_bound(static_cast<double>(n));
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(beta[k] >= 0.0)) throw std::logic_error("beta below 0");
    if (!(alpha[k] >= lb)) throw std::logic_error("alpha below its lower bound");
  }
  if (beta[ref_view] != 1.0) throw std::logic_error("reference beta must equal 1");
  if (!(sigma2_alpha > 0.0) || !(sigma2_beta > 0.0)) {
    throw std::logic_error("logit hyper-variances must be positive");
  }
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double edge_prob(double alpha_k, double beta_k, double squared_distance) {
  return logistic(alpha_k - beta_k * squared_distance);
}

double alpha_lower_bound(double n) {
  const double ln = std::log(n);
  return std::log(ln / (n - ln));
}

double alpha_ref_min(double p_bar) {
  if (!(p_bar > 0.0 && p_bar < 1.0)) {
    throw std::domain_error("reference density must lie strictly between 0 and 1");
  }
  return std::log(p_bar / (1.0 - p_bar)) + 2.0;
}

double view_log_likelihood(const Multiplex& m, std::size_t k, double alpha, double beta,
                           const arma::mat& Z, const kernels::KernelTable& kt) {
  const std::size_t n = m.n();
  if (Z.n_rows != n) throw UsageError("coordinate matrix has wrong number of rows");
  const arma::mat& s = m.dyad_sums(k);
  const double mult = m.multiplicity(k);
  std::vector<double> d(n);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    kt.squared_distances(Z.memptr(), n, Z.n_cols, i, d.data());
    // Upper triangle j > i; s is symmetric so its column i is row i.
    total += kt.dyad_loglik(s.colptr(i) + i + 1, d.data() + i + 1, n - i - 1, alpha, beta, mult);
  }
  return total;
}

double log_likelihood(const Multiplex& m, const LogitParams& lp, const arma::mat& Z,
                      const kernels::KernelTable& kt) {
  if (lp.K() != m.K()) throw UsageError("logit parameters do not match view count");
  double total = 0.0;
  for (std::size_t k = 0; k < m.K(); ++k) {
    total += view_log_likelihood(m, k, lp.alpha[k], lp.beta[k], Z, kt);
  }
  return total;
}

arma::mat pairwise_squared_distances(const arma::mat& Z, const kernels::KernelTable& kt) {
  const std::size_t n = Z.n_rows;
  arma::mat D(n, n);
  for (std::size_t i = 0; i < n; ++i) kt.squared_distances(Z.memptr(), n, Z.n_cols, i, D.colptr(i));
  return D;
}

double view_log_likelihood_from_distances(const Multiplex& m, std::size_t k, double alpha,
                                          double beta, const arma::mat& D,
                                          const kernels::KernelTable& kt) {
  const std::size_t n = m.n();
  if (D.n_rows != n || D.n_cols != n) throw UsageError("distance matrix has wrong shape");
  const arma::mat& s = m.dyad_sums(k);
  const double mult = m.multiplicity(k);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    total += kt.dyad_loglik(s.colptr(i) + i + 1, D.colptr(i) + i + 1, n - i - 1, alpha, beta,
                            mult);
  }
  return total;
}

double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * boost::math::erfc(-x / std::numbers::sqrt2));
  // Far tail: Mills-ratio series, relative error below 1e-12 here.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                        105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_logpdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + z * z / var);
}

double truncated_normal_logpdf(double x, double mean, double var, double lower) {
  if (!(x >= lower)) return kNegInf;
  const double sd = std::sqrt(var);
  return normal_logpdf(x, mean, var) - log_normal_cdf((mean - lower) / sd);
}

double inv_gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double inv_chi2_logpdf(double x, double nu) { return inv_gamma_logpdf(x, 0.5 * nu, 0.5); }

double logit_prior_logdensity(const LogitParams& lp, const PriorConfig& cfg, std::size_t n) {
  const double lb = alpha_lower_bound(static_cast<double>(n));
  double total = 0.0;
  bool any_free = false;
  for (std::size_t k = 0; k < lp.K(); ++k) {
    if (k == lp.ref_view) continue;
    any_free = true;
    total += truncated_normal_logpdf(lp.alpha[k], lp.mu_alpha, lp.sigma2_alpha, lb);
    total += truncated_normal_logpdf(lp.beta[k], lp.mu_beta, lp.sigma2_beta, 0.0);
  }
  if (!any_free) return 0.0;
  total += truncated_normal_logpdf(lp.mu_alpha, cfg.m_alpha, cfg.tau_alpha * lp.sigma2_alpha, lb);
  total += inv_chi2_logpdf(lp.sigma2_alpha, cfg.nu_alpha);
  total += truncated_normal_logpdf(lp.mu_beta, cfg.m_beta, cfg.tau_beta * lp.sigma2_beta, 0.0);
  total += inv_chi2_logpdf(lp.sigma2_beta, cfg.nu_beta);
  return std::isnan(total) ? kNegInf : total;
}

}  // namespace ilpcm
