#include "ilpcm/sampler.hpp"

#include "ilpcm/errors.hpp"
#include "ilpcm/procrustes.hpp"

#include <cmath>
#include <exception>
#include <thread>

namespace ilpcm {

void MCMCConfig::validate() const {
  if (!(burn_in < iterations)) throw UsageError("burn_in must be smaller than iterations");
  if (thin < 1) throw UsageError("thin must be >= 1");
  if (!(procrustes_threshold > 0.0 && procrustes_threshold <= 1.0)) {
    throw UsageError("procrustes_threshold must lie in (0, 1]");
  }
  if (p < 1) throw UsageError("latent dimension p must be >= 1");
  if (!(rw_step_alpha > 0.0) || !(rw_step_beta > 0.0)) {
    throw UsageError("random-walk scales must be positive");
  }
}

namespace {

constexpr double kTargetAcceptance = 0.44;

// Squared distances from a candidate position of node i to every node.
void distances_from(std::size_t i, const arma::rowvec& z, const arma::mat& Z,
                    const kernels::KernelTable& kt, arma::mat& work, std::vector<double>& d) {
  work = Z;
  work.row(i) = z;
  d.resize(Z.n_rows);
  kt.squared_distances(work.memptr(), Z.n_rows, Z.n_cols, i, d.data());
}

double node_loglik(std::size_t i, const std::vector<double>& d, const LogitParams& lp,
                   const Multiplex& m, const kernels::KernelTable& kt) {
  const std::size_t n = m.n();
  double total = 0.0;
  for (std::size_t k = 0; k < m.K(); ++k) {
    const double* s = m.dyad_sums(k).colptr(i);
    const double mult = m.multiplicity(k);
    total += kt.dyad_loglik(s, d.data(), i, lp.alpha[k], lp.beta[k], mult);
    total += kt.dyad_loglik(s + i + 1, d.data() + i + 1, n - i - 1, lp.alpha[k], lp.beta[k],
                            mult);
  }
  return total;
}

double proposal_logpdf(const arma::rowvec& x, const ProposalMoments& q) {
  double s = 0.0;
  for (std::size_t r = 0; r < x.n_elem; ++r) s += normal_logpdf(x(r), q.mean(r), q.var(r));
  return s;
}

void adapt_step(double& step, bool accepted, std::size_t t) {
  const double gain = std::pow(double(t) + 1.0, -0.6);
  step *= std::exp(gain * ((accepted ? 1.0 : 0.0) - kTargetAcceptance));
}

std::size_t free_view_count(const LogitParams& lp) { return lp.K() - 1; }

}  // namespace

ProposalMoments coordinate_proposal_moments(std::size_t i, const arma::rowvec& z,
                                            const arma::mat& Z, const MixtureState& st,
                                            const LogitParams& lp, const Multiplex& m,
                                            const kernels::KernelTable& kt,
                                            bool likelihood_enabled, ProposalRule rule) {
  const std::size_t n = Z.n_rows, p = Z.n_cols;
  const std::size_t g = st.labels[i];
  arma::rowvec prec(p), lin(p);
  for (std::size_t r = 0; r < p; ++r) {
    prec(r) = 1.0 / st.sigma2[g](r);
    const double centre = rule == ProposalRule::recentred ? z(r) : 0.0;
    lin(r) = (st.mu[g](r) - centre) / st.sigma2[g](r);
  }
  if (likelihood_enabled) {
    arma::mat work;
    std::vector<double> d, c(n);
    distances_from(i, z, Z, kt, work, d);
    for (std::size_t k = 0; k < m.K(); ++k) {
      const double beta = lp.beta[k];
      if (beta == 0.0) continue;
      double abs_sum = kt.linearized_residuals(m.dyad_sums(k).colptr(i), d.data(), n,
                                               lp.alpha[k], beta, m.multiplicity(k), c.data());
      abs_sum -= std::abs(c[i]);
      c[i] = 0.0;
      prec += 2.0 * beta * abs_sum;
      double signed_sum = 0.0;
      if (rule == ProposalRule::recentred) {
        for (std::size_t j = 0; j < n; ++j) signed_sum += c[j];
      }
      for (std::size_t r = 0; r < p; ++r) {
        lin(r) += 2.0 * beta * (kt.dot(c.data(), Z.colptr(r), n) - signed_sum * z(r));
      }
    }
  }
  ProposalMoments q;
  q.var = 1.0 / prec;
  q.mean = lin % q.var;
  if (rule == ProposalRule::recentred) q.mean += z;
  return q;
}

double coordinate_log_target(std::size_t i, const arma::rowvec& z, const arma::mat& Z,
                             const MixtureState& st, const LogitParams& lp, const Multiplex& m,
                             const kernels::KernelTable& kt, bool likelihood_enabled) {
  const std::size_t g = st.labels[i];
  double t = diag_normal_logpdf(z, st.mu[g], st.sigma2[g]);
  if (likelihood_enabled) {
    arma::mat work;
    std::vector<double> d;
    distances_from(i, z, Z, kt, work, d);
    t += node_loglik(i, d, lp, m, kt);
  }
  return t;
}

CoordinateProposal propose_latent_coordinate(std::size_t i, const arma::mat& Z,
                                             const MixtureState& st, const LogitParams& lp,
                                             const Multiplex& m, Rng& rng,
                                             const kernels::KernelTable& kt,
                                             bool likelihood_enabled, ProposalRule rule) {
  const arma::rowvec z = Z.row(i);
  const ProposalMoments fwd =
      coordinate_proposal_moments(i, z, Z, st, lp, m, kt, likelihood_enabled, rule);
  CoordinateProposal out;
  out.z.set_size(Z.n_cols);
  for (std::size_t r = 0; r < Z.n_cols; ++r) {
    out.z(r) = fwd.mean(r) + std::sqrt(fwd.var(r)) * rng.normal();
  }
  const ProposalMoments rev =
      coordinate_proposal_moments(i, out.z, Z, st, lp, m, kt, likelihood_enabled, rule);
  out.log_ratio = coordinate_log_target(i, out.z, Z, st, lp, m, kt, likelihood_enabled) -
                  coordinate_log_target(i, z, Z, st, lp, m, kt, likelihood_enabled) +
                  proposal_logpdf(z, rev) - proposal_logpdf(out.z, fwd);
  return out;
}

bool procrustes_guard(const arma::mat& Z_prev, const arma::mat& Z_new, double threshold,
                      GuardRule rule) {
  const double corr = procrustes_correlation(Z_prev, Z_new);
  return rule == GuardRule::reject_below ? corr >= threshold : corr <= threshold;
}

bool update_view_intercept(std::size_t k, const Multiplex& m, LogitParams& lp, const arma::mat& D,
                           double step, Rng& rng, const kernels::KernelTable& kt,
                           bool likelihood_enabled) {
  const double lb = alpha_lower_bound(double(m.n()));
  const double cur = lp.alpha[k];
  double prop = cur + step * rng.normal();
  if (prop < lb) prop = 2.0 * lb - prop;
  auto log_post = [&](double a) {
    double v = normal_logpdf(a, lp.mu_alpha, lp.sigma2_alpha);
    if (likelihood_enabled) v += view_log_likelihood_from_distances(m, k, a, lp.beta[k], D, kt);
    return v;
  };
  if (std::log(rng.uniform()) < log_post(prop) - log_post(cur)) {
    lp.alpha[k] = prop;
    return true;
  }
  return false;
}

bool update_view_scale(std::size_t k, const Multiplex& m, LogitParams& lp, const arma::mat& D,
                       double step, Rng& rng, const kernels::KernelTable& kt,
                       bool likelihood_enabled) {
  const double cur = lp.beta[k];
  double prop = std::abs(cur + step * rng.normal());
  auto log_post = [&](double b) {
    double v = normal_logpdf(b, lp.mu_beta, lp.sigma2_beta);
    if (likelihood_enabled) v += view_log_likelihood_from_distances(m, k, lp.alpha[k], b, D, kt);
    return v;
  };
  if (std::log(rng.uniform()) < log_post(prop) - log_post(cur)) {
    lp.beta[k] = prop;
    return true;
  }
  return false;
}

namespace {

// Conjugate-proposal Metropolis steps for (mu, sigma2) of a truncated-normal
// prior shared by the free views' values.
HyperAcceptance update_truncated_hyper(const std::vector<double>& values, double& mu,
                                       double& sigma2, double lb, double m0, double tau,
                                       double nu, Rng& rng) {
  HyperAcceptance acc;
  const double J = static_cast<double>(values.size());
  if (values.empty()) return acc;
  double sum = 0.0;
  for (double v : values) sum += v;

  {
    const double mean = (tau * sum + m0) / (1.0 + J * tau);
    const double var = tau * sigma2 / (1.0 + J * tau);
    const double prop = rng.truncated_normal(mean, std::sqrt(var), lb);
    const double sd = std::sqrt(sigma2);
    const double log_r = J * (log_normal_cdf((mu - lb) / sd) - log_normal_cdf((prop - lb) / sd));
    if (std::log(rng.uniform()) < log_r) {
      mu = prop;
      acc.mean = true;
    }
  }
  {
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    const double shape = 0.5 * (nu + J + 1.0);
    const double scale = 0.5 * (1.0 + ss + (mu - m0) * (mu - m0) / tau);
    const double prop = rng.inv_gamma(shape, scale);
    auto log_w = [&](double s2) {
      return -J * log_normal_cdf((mu - lb) / std::sqrt(s2)) -
             log_normal_cdf((m0 - lb) / std::sqrt(tau * s2));
    };
    if (std::log(rng.uniform()) < log_w(prop) - log_w(sigma2)) {
      sigma2 = prop;
      acc.variance = true;
    }
  }
  return acc;
}

std::vector<double> free_values(const std::vector<double>& v, std::size_t ref) {
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k != ref) out.push_back(v[k]);
  }
  return out;
}

}  // namespace

HyperAcceptance update_intercept_hyper(LogitParams& lp, const PriorConfig& cfg, std::size_t n,
                                       Rng& rng) {
  return update_truncated_hyper(free_values(lp.alpha, lp.ref_view), lp.mu_alpha, lp.sigma2_alpha,
                                alpha_lower_bound(double(n)), cfg.m_alpha, cfg.tau_alpha,
                                cfg.nu_alpha, rng);
}

HyperAcceptance update_scale_hyper(LogitParams& lp, const PriorConfig& cfg, Rng& rng) {
  return update_truncated_hyper(free_values(lp.beta, lp.ref_view), lp.mu_beta, lp.sigma2_beta,
                                0.0, cfg.m_beta, cfg.tau_beta, cfg.nu_beta, rng);
}

void update_logit_params(const Multiplex& m, LogitParams& lp, const arma::mat& Z,
                         const PriorConfig& cfg, Rng& rng, LogitSamplerState& state,
                         const kernels::KernelTable& kt, bool likelihood_enabled, bool adapt) {
  if (free_view_count(lp) == 0) return;
  const std::size_t K = lp.K();
  if (state.step_alpha.size() != K) state.step_alpha.assign(K, 0.3);
  if (state.step_beta.size() != K) state.step_beta.assign(K, 0.1);
  arma::mat D;
  if (likelihood_enabled) D = pairwise_squared_distances(Z, kt);
  ChainDiagnostics* diag = state.diagnostics;
  if (diag) {
    diag->alpha.resize(K);
    diag->beta.resize(K);
  }

  for (std::size_t k = 0; k < K; ++k) {
    if (k == lp.ref_view) continue;
    const bool a_ok =
        update_view_intercept(k, m, lp, D, state.step_alpha[k], rng, kt, likelihood_enabled);
    const bool b_ok =
        update_view_scale(k, m, lp, D, state.step_beta[k], rng, kt, likelihood_enabled);
    if (diag) {
      diag->alpha[k].record(a_ok);
      diag->beta[k].record(b_ok);
    }
    if (adapt) {
      adapt_step(state.step_alpha[k], a_ok, state.adapt_count);
      adapt_step(state.step_beta[k], b_ok, state.adapt_count);
    }
  }
  if (adapt) ++state.adapt_count;

  const HyperAcceptance ha = update_intercept_hyper(lp, cfg, m.n(), rng);
  const HyperAcceptance hb = update_scale_hyper(lp, cfg, rng);
  if (diag) {
    diag->mu_alpha.record(ha.mean);
    diag->sigma2_alpha.record(ha.variance);
    diag->mu_beta.record(hb.mean);
    diag->sigma2_beta.record(hb.variance);
  }
}

namespace {

Draw make_draw(std::size_t iteration, const ChainState& s, double loglik) {
  Draw d;
  d.iteration = iteration;
  d.Z = s.Z;
  MixtureState mix = s.mixture;
  mix.canonicalize();
  d.labels = mix.labels;
  d.mu = mix.mu;
  d.sigma2 = mix.sigma2;
  d.counts = mix.counts;
  d.base_mean = mix.base_mean;
  d.psi = mix.psi;
  d.alpha = s.logit.alpha;
  d.beta = s.logit.beta;
  d.mu_alpha = s.logit.mu_alpha;
  d.sigma2_alpha = s.logit.sigma2_alpha;
  d.mu_beta = s.logit.mu_beta;
  d.sigma2_beta = s.logit.sigma2_beta;
  d.loglik = loglik;
  return d;
}

ChainTrace run_loop(const Multiplex& m, const PriorConfig& cfg, const MCMCConfig& mc,
                    ChainState state, Rng& rng, const DrawObserver& observer) {
  const kernels::KernelTable& kt = kernels::select(mc.kernel);
  const std::size_t n = m.n();
  if (state.Z.n_rows != n || state.Z.n_cols != mc.p) {
    throw UsageError("initial coordinates do not match the network and latent dimension");
  }
  if (state.logit.K() != m.K()) throw UsageError("initial logit parameters do not match views");

  ChainTrace trace;
  ChainDiagnostics& diag = trace.diagnostics;
  diag.kernel = kt.name;
  diag.alpha.resize(m.K());
  diag.beta.resize(m.K());
  LogitSamplerState logit_state;
  logit_state.step_alpha.assign(m.K(), mc.rw_step_alpha);
  logit_state.step_beta.assign(m.K(), mc.rw_step_beta);
  logit_state.diagnostics = &diag;
  const LabelSweepOptions label_opts{false, mc.birth};
  trace.draws.reserve((mc.iterations - mc.burn_in + mc.thin - 1) / mc.thin);

  arma::mat Z_prev;
  for (std::size_t t = 0; t < mc.iterations; ++t) {
    // (a) latent coordinates, then the configuration-level guard
    Z_prev = state.Z;
    for (std::size_t i = 0; i < n; ++i) {
      CoordinateProposal prop = propose_latent_coordinate(i, state.Z, state.mixture, state.logit,
                                                          m, rng, kt, mc.likelihood_enabled,
                                                          mc.proposal);
      const bool ok = std::log(rng.uniform()) < prop.log_ratio;
      diag.coordinates.record(ok);
      if (ok) state.Z.row(i) = prop.z;
    }
    if (mc.procrustes_guard &&
        !procrustes_guard(Z_prev, state.Z, mc.procrustes_threshold, mc.guard_rule)) {
      state.Z = Z_prev;
      ++diag.procrustes_rejections;
    }
    // (b) allocations
    resample_labels(state.Z, state.mixture, cfg, rng, label_opts);
    // (c) component parameters and base mean
    update_component_params(state.Z, state.mixture, cfg, rng);
    update_base_mean(state.mixture, cfg, rng);
    // (d) concentration
    update_concentration(state.mixture, n, cfg, rng);
    // (e) logit parameters
    const bool adapt = mc.adapt_steps && t < mc.burn_in;
    update_logit_params(m, state.logit, state.Z, cfg, rng, logit_state, kt,
                        mc.likelihood_enabled, adapt);
    ++diag.sweeps;

    if (t >= mc.burn_in && (t - mc.burn_in) % mc.thin == 0) {
      state.logit.validate(n);
      const double ll = log_likelihood(m, state.logit, state.Z, kt);
      if (!std::isfinite(ll)) throw NumericalError("non-finite log-likelihood in the trace");
      trace.draws.push_back(make_draw(t, state, ll));
      if (observer) observer(trace.draws.back());
    }
  }
  diag.step_alpha = logit_state.step_alpha;
  diag.step_beta = logit_state.step_beta;
  return trace;
}

PriorConfig resolved_prior(const PriorConfig& cfg, const MCMCConfig& mc, std::size_t n) {
  PriorConfig c = cfg;
  c.p = mc.p;
  c = c.for_network(n);
  c.validate();
  return c;
}

}  // namespace

ChainTrace run_chain(const Multiplex& m, const PriorConfig& cfg, const MCMCConfig& mc,
                     const DrawObserver& observer) {
  mc.validate();
  const PriorConfig c = resolved_prior(cfg, mc, m.n());
  Rng rng(mc.seed, mc.stream);
  ChainState init = initialize(m, c, mc, rng);
  return run_loop(m, c, mc, std::move(init), rng, observer);
}

ChainTrace run_chain_from(const Multiplex& m, const PriorConfig& cfg, const MCMCConfig& mc,
                          ChainState state, const DrawObserver& observer) {
  mc.validate();
  const PriorConfig c = resolved_prior(cfg, mc, m.n());
  Rng rng(mc.seed, mc.stream);
  return run_loop(m, c, mc, std::move(state), rng, observer);
}

std::vector<ChainTrace> run_chains(const Multiplex& m, const PriorConfig& cfg,
                                   const MCMCConfig& mc, std::size_t chains) {
  if (chains < 1) throw UsageError("at least one chain is required");
  std::vector<ChainTrace> out(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        MCMCConfig local = mc;
        local.stream = mc.stream + c;
        out[c] = run_chain(m, cfg, local);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace ilpcm
