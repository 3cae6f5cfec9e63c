#pragma once

#include "ilpcm/dp_mixture.hpp"
#include "ilpcm/kernels.hpp"
#include "ilpcm/model.hpp"
#include "ilpcm/multiplex.hpp"
#include "ilpcm/random.hpp"

#include <armadillo>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ilpcm {

enum class GuardRule {
  reject_below,  // discard the sweep when correlation < threshold (default)
  reject_above,  // literal reading: discard when correlation > threshold
};

// Mean of the linearized-likelihood coordinate proposal. `literal` uses the
// printed closed form; `recentred` takes the same precision and moves from
// the current position along the gradient of the linearized target, which
// equals the literal form whenever every residual y - w is non-negative.
enum class ProposalRule { recentred, literal };

struct MCMCConfig {
  std::size_t iterations = 60000;
  std::size_t burn_in = 10000;
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // chain index; selects an independent RNG stream
  std::size_t p = 2;

  bool procrustes_guard = true;
  double procrustes_threshold = 0.90;
  GuardRule guard_rule = GuardRule::reject_below;

  // Initial random-walk scales for the free intercepts / scale coefficients,
  // tuned towards 0.44 acceptance during burn-in and frozen afterwards.
  double rw_step_alpha = 0.3;
  double rw_step_beta = 0.1;
  bool adapt_steps = true;

  std::optional<double> alpha_ref_override;
  std::string kernel = "auto";
  BirthRule birth = BirthRule::exact_posterior;
  ProposalRule proposal = ProposalRule::recentred;

  // Test hook: drop the network likelihood so the chain targets the prior.
  bool likelihood_enabled = true;

  void validate() const;
};

struct ChainState {
  arma::mat Z;  // n x p
  MixtureState mixture;
  LogitParams logit;
};

// One retained posterior draw; labels are in first-appearance order and the
// component arrays follow that order.
struct Draw {
  std::size_t iteration = 0;
  arma::mat Z;
  std::vector<std::size_t> labels;
  std::vector<arma::vec> mu;
  std::vector<arma::vec> sigma2;
  std::vector<std::size_t> counts;
  arma::vec base_mean;
  double psi = 0.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  double mu_alpha = 0.0, sigma2_alpha = 0.0, mu_beta = 0.0, sigma2_beta = 0.0;
  double loglik = 0.0;

  std::size_t G() const { return mu.size(); }
};

struct AcceptanceCounter {
  std::size_t accepted = 0;
  std::size_t proposed = 0;
  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  double rate() const { return proposed == 0 ? 0.0 : double(accepted) / double(proposed); }
};

struct ChainDiagnostics {
  std::string kernel;
  std::size_t sweeps = 0;
  std::size_t procrustes_rejections = 0;
  AcceptanceCounter coordinates;
  std::vector<AcceptanceCounter> alpha, beta;
  AcceptanceCounter mu_alpha, sigma2_alpha, mu_beta, sigma2_beta;
  std::vector<double> step_alpha, step_beta;  // final random-walk scales
};

struct ChainTrace {
  std::vector<Draw> draws;
  ChainDiagnostics diagnostics;
};

using DrawObserver = std::function<void(const Draw&)>;

// --- initialization -----------------------------------------------------------

// Classical (Torgerson) scaling of a distance matrix into p dimensions.
// Falls back to small Gaussian jitter when the configuration has no spread.
arma::mat classical_mds(const arma::mat& D, std::size_t p, Rng& rng);

struct GaussianMixtureFit {
  std::size_t G = 1;
  std::vector<std::size_t> labels;
  arma::mat means;      // p x G
  arma::mat variances;  // p x G
  arma::vec weights;
  double loglik = 0.0;
  double bic = 0.0;
  bool converged = false;
};

// EM for a G-component Gaussian mixture with diagonal, component-specific
// covariances, started from k-means++ seeds.
GaussianMixtureFit fit_diagonal_gmm(const arma::mat& X, std::size_t G, Rng& rng,
                                    std::size_t restarts = 5);
// Best BIC over G = 1..max_G; single component when nothing else converges.
GaussianMixtureFit select_diagonal_gmm(const arma::mat& X, std::size_t max_G, Rng& rng);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool converged = false;
};
// Logistic regression of y on x (one predictor) by iteratively reweighted
// least squares with a tiny ridge so separated data stay finite.
LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<double>& y);

ChainState initialize(const Multiplex& m, const PriorConfig& cfg, const MCMCConfig& mc, Rng& rng);

// --- sweep steps ----------------------------------------------------------------

struct CoordinateProposal {
  arma::rowvec z;
  double log_ratio = 0.0;  // log MH acceptance ratio
};

// Gaussian proposal from the linearized likelihood around the current z_i
// plus an exact-target MH ratio. Z is not modified.
CoordinateProposal propose_latent_coordinate(std::size_t i, const arma::mat& Z,
                                             const MixtureState& st, const LogitParams& lp,
                                             const Multiplex& m, Rng& rng,
                                             const kernels::KernelTable& kt = kernels::best(),
                                             bool likelihood_enabled = true,
    ProposalRule rule = ProposalRule::recentred);

// Mean and variance (per dimension) of the proposal for node i located at z.
struct ProposalMoments {
  arma::rowvec mean;
  arma::rowvec var;
};
ProposalMoments coordinate_proposal_moments(std::size_t i, const arma::rowvec& z,
                                            const arma::mat& Z, const MixtureState& st,
                                            const LogitParams& lp, const Multiplex& m,
                                            const kernels::KernelTable& kt = kernels::best(),
                                            bool likelihood_enabled = true,
    ProposalRule rule = ProposalRule::recentred);

// Log of the exact conditional target of z_i (up to a constant).
double coordinate_log_target(std::size_t i, const arma::rowvec& z, const arma::mat& Z,
                             const MixtureState& st, const LogitParams& lp, const Multiplex& m,
                             const kernels::KernelTable& kt = kernels::best(),
                             bool likelihood_enabled = true);

// True when Z_new is kept.
bool procrustes_guard(const arma::mat& Z_prev, const arma::mat& Z_new, double threshold,
                      GuardRule rule = GuardRule::reject_below);

struct LogitSamplerState {
  std::vector<double> step_alpha, step_beta;
  std::size_t adapt_count = 0;
  ChainDiagnostics* diagnostics = nullptr;  // optional acceptance bookkeeping
};

// Reflected random-walk Metropolis on alpha_k / beta_k (k not the reference).
// D holds pairwise squared distances. Returns whether the move was accepted.
bool update_view_intercept(std::size_t k, const Multiplex& m, LogitParams& lp, const arma::mat& D,
                           double step, Rng& rng,
                           const kernels::KernelTable& kt = kernels::best(),
                           bool likelihood_enabled = true);
bool update_view_scale(std::size_t k, const Multiplex& m, LogitParams& lp, const arma::mat& D,
                       double step, Rng& rng, const kernels::KernelTable& kt = kernels::best(),
                       bool likelihood_enabled = true);

struct HyperAcceptance {
  bool mean = false;
  bool variance = false;
};
// (mu, sigma2) of the intercept / scale priors given the free views' values.
HyperAcceptance update_intercept_hyper(LogitParams& lp, const PriorConfig& cfg, std::size_t n,
                                       Rng& rng);
HyperAcceptance update_scale_hyper(LogitParams& lp, const PriorConfig& cfg, Rng& rng);

// Full logit block: every free alpha_k, beta_k, then both hyperparameter
// pairs. A no-op when the reference view is the only view.
void update_logit_params(const Multiplex& m, LogitParams& lp, const arma::mat& Z,
                         const PriorConfig& cfg, Rng& rng, LogitSamplerState& state,
                         const kernels::KernelTable& kt = kernels::best(),
                         bool likelihood_enabled = true, bool adapt = false);

// --- chain -------------------------------------------------------------------------

ChainTrace run_chain(const Multiplex& m, const PriorConfig& cfg, const MCMCConfig& mc,
                     const DrawObserver& observer = {});
ChainTrace run_chain_from(const Multiplex& m, const PriorConfig& cfg, const MCMCConfig& mc,
                          ChainState state, const DrawObserver& observer = {});

// Independent chains on separate threads; chain c uses stream c.
std::vector<ChainTrace> run_chains(const Multiplex& m, const PriorConfig& cfg,
                                   const MCMCConfig& mc, std::size_t chains);

}  // namespace ilpcm
