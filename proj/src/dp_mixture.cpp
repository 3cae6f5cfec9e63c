#include "ilpcm/dp_mixture.hpp"

#include "ilpcm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ilpcm {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Log weights of the label full conditional for coordinates z, where
// `counts` already excludes the node being moved.
void label_log_weights(const arma::rowvec& z, const MixtureState& st,
                       std::span<const std::size_t> counts, const PriorConfig& cfg,
                       bool ignore_coordinates, std::vector<double>& out,
                       std::vector<std::size_t>& component) {
  out.clear();
  component.clear();
  for (std::size_t g = 0; g < st.G(); ++g) {
    if (counts[g] == 0) continue;
    double w = std::log(static_cast<double>(counts[g]));
    if (!ignore_coordinates) w += diag_normal_logpdf(z, st.mu[g], st.sigma2[g]);
    out.push_back(w);
    component.push_back(g);
  }
  double w_new = -std::numeric_limits<double>::infinity();
  if (st.psi > 0.0) {
    w_new = std::log(st.psi);
    if (!ignore_coordinates) w_new += base_predictive_logpdf(z, st, cfg);
  }
  out.push_back(w_new);
  component.push_back(kNewComponent);
}

void normalize_log_weights(std::vector<double>& w) {
  const double top = *std::max_element(w.begin(), w.end());
  if (!std::isfinite(top)) throw NumericalError("label weights are not finite");
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : w) v /= total;
}

}  // namespace

void MixtureState::validate() const {
  const std::size_t G = this->G();
  if (sigma2.size() != G || counts.size() != G) {
    throw std::logic_error("mixture component arrays disagree in length");
  }
  std::vector<std::size_t> tally(G, 0);
  for (std::size_t l : labels) {
    if (l >= G) throw std::logic_error("label outside [0, G)");
    ++tally[l];
  }
  for (std::size_t g = 0; g < G; ++g) {
    if (tally[g] != counts[g]) throw std::logic_error("component counts are inconsistent");
    if (counts[g] == 0) throw std::logic_error("empty component");
    if (arma::any(sigma2[g] <= 0.0)) throw std::logic_error("non-positive component variance");
  }
  if (!(psi >= 0.0)) throw std::logic_error("negative concentration");
}

void MixtureState::canonicalize() {
  std::vector<std::size_t> order(G(), kNewComponent);
  std::size_t next = 0;
  for (std::size_t l : labels) {
    if (order[l] == kNewComponent) order[l] = next++;
  }
  std::vector<arma::vec> mu2(G()), s2(G());
  std::vector<std::size_t> c2(G());
  for (std::size_t g = 0; g < G(); ++g) {
    mu2[order[g]] = std::move(mu[g]);
    s2[order[g]] = std::move(sigma2[g]);
    c2[order[g]] = counts[g];
  }
  for (std::size_t& l : labels) l = order[l];
  mu = std::move(mu2);
  sigma2 = std::move(s2);
  counts = std::move(c2);
}

void MixtureState::remove_component(std::size_t g) {
  if (counts.at(g) != 0) throw std::logic_error("removing a non-empty component");
  mu.erase(mu.begin() + static_cast<std::ptrdiff_t>(g));
  sigma2.erase(sigma2.begin() + static_cast<std::ptrdiff_t>(g));
  counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(g));
  for (std::size_t& l : labels) {
    if (l > g) --l;
  }
}

MixtureState mixture_from_partition(const arma::mat& Z, std::span<const std::size_t> labels,
                                    const arma::vec& base_mean, double psi, double var_floor) {
  MixtureState st;
  st.labels.assign(labels.begin(), labels.end());
  st.base_mean = base_mean;
  st.psi = psi;
  const std::size_t G = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  const std::size_t p = Z.n_cols;
  arma::mat sum(p, G, arma::fill::zeros), sumsq(p, G, arma::fill::zeros);
  st.counts.assign(G, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const arma::vec z = Z.row(i).t();
    sum.col(labels[i]) += z;
    sumsq.col(labels[i]) += z % z;
    ++st.counts[labels[i]];
  }
  for (std::size_t g = 0; g < G; ++g) {
    const double ng = static_cast<double>(st.counts[g]);
    if (ng == 0) throw std::logic_error("partition labels are not dense");
    arma::vec mean = sum.col(g) / ng;
    arma::vec var = sumsq.col(g) / ng - mean % mean;
    var.transform([var_floor](double v) { return std::max(v, var_floor); });
    st.mu.push_back(mean);
    st.sigma2.push_back(var);
  }
  return st;
}

double diag_normal_logpdf(const arma::rowvec& z, const arma::vec& mu, const arma::vec& sigma2) {
  double acc = 0.0;
  for (std::size_t r = 0; r < mu.n_elem; ++r) {
    const double d = z(r) - mu(r);
    acc += -0.5 * (kLogTwoPi + std::log(sigma2(r)) + d * d / sigma2(r));
  }
  return acc;
}

double student_t_logpdf(double x, double dof, double loc, double scale2) {
  const double z2 = (x - loc) * (x - loc) / scale2;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi * scale2) -
         0.5 * (dof + 1.0) * std::log1p(z2 / dof);
}

double base_predictive_logpdf(const arma::rowvec& z, const MixtureState& st,
                              const PriorConfig& cfg) {
  const double dof = 2.0 * cfg.nu1;
  const double scale2 = cfg.nu2 / cfg.nu1 * (1.0 + cfg.tau_z);
  double acc = 0.0;
  for (std::size_t r = 0; r < z.n_elem; ++r) {
    acc += student_t_logpdf(z(r), dof, st.base_mean(r), scale2);
  }
  return acc;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

double mixture_logdensity(const arma::rowvec& z, const MixtureState& st) {
  std::vector<double> terms(st.G());
  const double n = static_cast<double>(st.n());
  for (std::size_t g = 0; g < st.G(); ++g) {
    terms[g] = std::log(static_cast<double>(st.counts[g]) / n) +
               diag_normal_logpdf(z, st.mu[g], st.sigma2[g]);
  }
  return log_sum_exp(terms);
}

LabelConditional label_full_conditional(std::size_t i, const arma::mat& Z,
                                        const MixtureState& st, const PriorConfig& cfg) {
  std::vector<std::size_t> counts = st.counts;
  --counts.at(st.labels.at(i));
  LabelConditional out;
  label_log_weights(Z.row(i), st, counts, cfg, false, out.prob, out.component);
  normalize_log_weights(out.prob);
  return out;
}

void resample_labels(const arma::mat& Z, MixtureState& st, const PriorConfig& cfg, Rng& rng,
                     const LabelSweepOptions& opts) {
  const std::size_t p = Z.n_cols;
  const double tau = cfg.tau_z;
  std::vector<double> weights;
  std::vector<std::size_t> component;
  for (std::size_t i = 0; i < st.n(); ++i) {
    const std::size_t old = st.labels[i];
    --st.counts[old];
    if (st.counts[old] == 0) st.remove_component(old);

    const arma::rowvec z = Z.row(i);
    label_log_weights(z, st, st.counts, cfg, opts.ignore_coordinates, weights, component);
    normalize_log_weights(weights);
    const std::size_t pick = component[rng.categorical(weights)];

    if (pick != kNewComponent) {
      st.labels[i] = pick;
      ++st.counts[pick];
      continue;
    }
    arma::vec mu(p), s2(p);
    for (std::size_t r = 0; r < p; ++r) {
      const double m = st.base_mean(r);
      if (opts.ignore_coordinates) {
        s2(r) = rng.inv_gamma(cfg.nu1, cfg.nu2);
        mu(r) = rng.normal(m, std::sqrt(tau * s2(r)));
      } else if (opts.birth == BirthRule::exact_posterior) {
        const double dev = z(r) - m;
        s2(r) = rng.inv_gamma(cfg.nu1 + 0.5, cfg.nu2 + dev * dev / (2.0 * (1.0 + tau)));
        mu(r) = rng.normal((tau * z(r) + m) / (1.0 + tau), std::sqrt(tau * s2(r) / (1.0 + tau)));
      } else {
        const double dev = z(r) - m;  // mu starts at z_i
        s2(r) = rng.inv_gamma(0.5 * (2.0 + 2.0 * cfg.nu1), (dev * dev + 2.0 * tau * cfg.nu2) /
                                                               (2.0 * tau));
        mu(r) = rng.normal((tau * z(r) + m) / (1.0 + tau), std::sqrt(tau * s2(r) / (1.0 + tau)));
      }
    }
    st.mu.push_back(mu);
    st.sigma2.push_back(s2);
    st.counts.push_back(1);
    st.labels[i] = st.G() - 1;
  }
}

NormalMoments component_mean_conditional(const arma::mat& Z, const MixtureState& st,
                                         std::size_t g, std::size_t r, const PriorConfig& cfg) {
  double sum = 0.0;
  for (std::size_t i = 0; i < st.n(); ++i) {
    if (st.labels[i] == g) sum += Z(i, r);
  }
  const double ng = static_cast<double>(st.counts[g]);
  const double denom = 1.0 + ng * cfg.tau_z;
  return {(cfg.tau_z * sum + st.base_mean(r)) / denom, cfg.tau_z * st.sigma2[g](r) / denom};
}

InvGammaParams component_variance_conditional(const arma::mat& Z, const MixtureState& st,
                                              std::size_t g, std::size_t r,
                                              const PriorConfig& cfg) {
  const double mu = st.mu[g](r);
  double ss = 0.0;
  for (std::size_t i = 0; i < st.n(); ++i) {
    if (st.labels[i] != g) continue;
    const double d = Z(i, r) - mu;
    ss += d * d;
  }
  const double ng = static_cast<double>(st.counts[g]);
  const double dm = mu - st.base_mean(r);
  const double tau = cfg.tau_z;
  return {0.5 * (ng + 1.0 + 2.0 * cfg.nu1), (tau * ss + dm * dm + 2.0 * tau * cfg.nu2) / (2.0 * tau)};
}

void draw_component_variance(const arma::mat& Z, MixtureState& st, std::size_t g,
                             const PriorConfig& cfg, Rng& rng) {
  for (std::size_t r = 0; r < Z.n_cols; ++r) {
    const InvGammaParams ig = component_variance_conditional(Z, st, g, r, cfg);
    st.sigma2[g](r) = rng.inv_gamma(ig.shape, ig.scale);
  }
}

void draw_component_mean(const arma::mat& Z, MixtureState& st, std::size_t g,
                         const PriorConfig& cfg, Rng& rng) {
  for (std::size_t r = 0; r < Z.n_cols; ++r) {
    const NormalMoments nm = component_mean_conditional(Z, st, g, r, cfg);
    st.mu[g](r) = rng.normal(nm.mean, std::sqrt(nm.var));
  }
}

void update_component_params(const arma::mat& Z, MixtureState& st, const PriorConfig& cfg,
                             Rng& rng) {
  for (std::size_t g = 0; g < st.G(); ++g) {
    draw_component_variance(Z, st, g, cfg, rng);
    draw_component_mean(Z, st, g, cfg, rng);
  }
}

void update_base_mean(MixtureState& st, const PriorConfig& cfg, Rng& rng) {
  if (!cfg.update_base_mean) return;
  for (std::size_t r = 0; r < st.base_mean.n_elem; ++r) {
    double precision_sum = 0.0, weighted = 0.0;
    for (std::size_t g = 0; g < st.G(); ++g) {
      precision_sum += 1.0 / st.sigma2[g](r);
      weighted += st.mu[g](r) / st.sigma2[g](r);
    }
    const double denom = cfg.tau_z + precision_sum;
    st.base_mean(r) = rng.normal(weighted / denom, std::sqrt(cfg.tau_z / denom));
  }
}

ConcentrationStep concentration_mixture_weight(double xi1, double xi2, std::size_t G,
                                               std::size_t n, double x) {
  const double s = (xi1 + static_cast<double>(G) - 1.0) /
                   (static_cast<double>(n) * (xi2 - std::log(x)));
  return {s, s / (1.0 + s)};
}

void update_concentration(MixtureState& st, std::size_t n, const PriorConfig& cfg, Rng& rng) {
  const std::size_t G = st.G();
  const double x = rng.beta(st.psi + 1.0, static_cast<double>(n));
  const ConcentrationStep step = concentration_mixture_weight(cfg.xi1, cfg.xi2, G, n, x);
  const double rate = cfg.xi2 - std::log(x);
  const double shape = cfg.xi1 + static_cast<double>(G) - (rng.uniform() < step.eta ? 0.0 : 1.0);
  st.psi = rng.gamma(shape, rate);
}

}  // namespace ilpcm
