#include "ilpcm/sampler.hpp"

#include "ilpcm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace ilpcm {

arma::mat classical_mds(const arma::mat& D, std::size_t p, Rng& rng) {
  const std::size_t n = D.n_rows;
  if (D.n_cols != n) throw UsageError("distance matrix must be square");
  arma::mat B = -0.5 * arma::square(D);
  const arma::rowvec col_means = arma::mean(B, 0);
  const arma::vec row_means = arma::mean(B, 1);
  const double grand = arma::mean(row_means);
  B.each_row() -= col_means;
  B.each_col() -= row_means;
  B += grand;
  B = 0.5 * (B + B.t());

  arma::vec eigval;
  arma::mat eigvec;
  arma::eig_sym(eigval, eigvec, B);  // ascending

  arma::mat Z(n, p, arma::fill::zeros);
  const double top = eigval.n_elem ? eigval(eigval.n_elem - 1) : 0.0;
  if (!(top > 1e-10)) {
    for (auto& v : Z) v = rng.normal(0.0, 0.1);
    return Z;
  }
  const double jitter_sd = 1e-2 * std::sqrt(top / double(n));
  for (std::size_t r = 0; r < p; ++r) {
    if (r >= eigval.n_elem) break;
    const double lam = eigval(eigval.n_elem - 1 - r);
    if (lam > 1e-10 * top) {
      Z.col(r) = eigvec.col(eigval.n_elem - 1 - r) * std::sqrt(lam);
    } else {
      for (std::size_t i = 0; i < n; ++i) Z(i, r) = rng.normal(0.0, jitter_sd);
    }
  }
  return Z;
}

namespace {

// k-means++ seeding: indices of G distinct rows.
std::vector<std::size_t> kmeanspp_seeds(const arma::mat& X, std::size_t G, Rng& rng) {
  const std::size_t n = X.n_rows;
  std::vector<std::size_t> seeds{rng.uniform_index(n)};
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < G) {
    const arma::rowvec c = X.row(seeds.back());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], arma::accu(arma::square(X.row(i) - c)));
    }
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    seeds.push_back(total > 0.0 ? rng.categorical(d2) : rng.uniform_index(n));
  }
  return seeds;
}

struct EmResult {
  arma::mat means, vars;
  arma::vec weights;
  arma::mat resp;  // n x G
  double loglik = -std::numeric_limits<double>::infinity();
  bool ok = false;
};

EmResult run_em(const arma::mat& X, std::size_t G, const std::vector<std::size_t>& seeds,
                double var_floor) {
  const std::size_t n = X.n_rows, p = X.n_cols;
  EmResult res;
  res.means.set_size(p, G);
  res.vars.set_size(p, G);
  const arma::rowvec total_var = arma::var(X, 1, 0);
  for (std::size_t g = 0; g < G; ++g) {
    res.means.col(g) = X.row(seeds[g]).t();
    res.vars.col(g) = arma::clamp(total_var.t(), var_floor, arma::datum::inf);
  }
  res.weights = arma::vec(G, arma::fill::value(1.0 / double(G)));
  res.resp.set_size(n, G);

  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 500; ++iter) {
    // E step
    double ll = 0.0;
    std::vector<double> lp(G);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t g = 0; g < G; ++g) {
        double s = std::log(res.weights(g));
        for (std::size_t r = 0; r < p; ++r) {
          s += normal_logpdf(X(i, r), res.means(r, g), res.vars(r, g));
        }
        lp[g] = s;
      }
      const double lse = log_sum_exp(lp);
      ll += lse;
      for (std::size_t g = 0; g < G; ++g) res.resp(i, g) = std::exp(lp[g] - lse);
    }
    if (!std::isfinite(ll)) return res;
    // M step
    const arma::rowvec nk = arma::sum(res.resp, 0);
    for (std::size_t g = 0; g < G; ++g) {
      if (nk(g) < 1.0) return res;  // collapsing component
      res.weights(g) = nk(g) / double(n);
      for (std::size_t r = 0; r < p; ++r) {
        const double mu = arma::dot(res.resp.col(g), X.col(r)) / nk(g);
        const arma::vec dev = X.col(r) - mu;
        const double v = arma::dot(res.resp.col(g), arma::square(dev)) / nk(g);
        res.means(r, g) = mu;
        res.vars(r, g) = std::max(v, var_floor);
      }
    }
    res.loglik = ll;
    if (std::abs(ll - prev) <= 1e-8 * (1.0 + std::abs(ll))) {
      res.ok = true;
      return res;
    }
    prev = ll;
  }
  res.ok = true;
  return res;
}

std::vector<std::size_t> dense_map_labels(const arma::mat& resp) {
  const std::size_t n = resp.n_rows;
  std::vector<std::size_t> raw(n), labels(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = resp.row(i).index_max();
  std::vector<std::size_t> remap(resp.n_cols, kNewComponent);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (remap[raw[i]] == kNewComponent) remap[raw[i]] = next++;
    labels[i] = remap[raw[i]];
  }
  return labels;
}

}  // namespace

GaussianMixtureFit fit_diagonal_gmm(const arma::mat& X, std::size_t G, Rng& rng,
                                    std::size_t restarts) {
  const std::size_t n = X.n_rows, p = X.n_cols;
  GaussianMixtureFit fit;
  fit.G = G;
  if (G == 0 || G > n) return fit;
  const double scale = std::max(arma::mean(arma::var(X, 1, 0)), 1e-12);
  const double var_floor = 1e-6 * scale;

  EmResult best;
  for (std::size_t rep = 0; rep < std::max<std::size_t>(restarts, 1); ++rep) {
    EmResult r = run_em(X, G, kmeanspp_seeds(X, G, rng), var_floor);
    // A component shrunk onto tied points has an unbounded likelihood.
    if (r.ok && r.vars.min() < 1e-3 * scale) r.ok = false;
    if (r.ok && r.loglik > best.loglik) best = std::move(r);
    if (G == 1) break;
  }
  if (!best.ok) return fit;
  fit.converged = true;
  fit.means = best.means;
  fit.variances = best.vars;
  fit.weights = best.weights;
  fit.loglik = best.loglik;
  const double npar = double(G - 1) + 2.0 * double(G) * double(p);
  fit.bic = 2.0 * best.loglik - npar * std::log(double(n));
  fit.labels = dense_map_labels(best.resp);
  return fit;
}

GaussianMixtureFit select_diagonal_gmm(const arma::mat& X, std::size_t max_G, Rng& rng) {
  GaussianMixtureFit best;
  bool have = false;
  for (std::size_t G = 1; G <= std::max<std::size_t>(max_G, 1); ++G) {
    GaussianMixtureFit f = fit_diagonal_gmm(X, G, rng);
    if (!f.converged) continue;
    if (!have || f.bic > best.bic) {
      best = std::move(f);
      have = true;
    }
  }
  if (!have) {
    best = GaussianMixtureFit{};
    best.G = 1;
    best.labels.assign(X.n_rows, 0);
    best.means = arma::mean(X, 0).t();
    best.variances = arma::var(X, 1, 0).t();
    best.weights = arma::ones<arma::vec>(1);
  }
  // MAP assignment can leave components empty.
  std::size_t used = 0;
  for (std::size_t l : best.labels) used = std::max(used, l + 1);
  best.G = used;
  return best;
}

LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t N = x.size();
  const double ridge = 1e-6;
  LogisticFit fit;
  if (N == 0) return fit;
  double a = 0.0, b = 0.0;
  auto penalized_ll = [&](double a_, double b_) {
    double ll = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      const double eta = a_ + b_ * x[t];
      ll += y[t] * eta - softplus(eta);
    }
    return ll - 0.5 * ridge * (a_ * a_ + b_ * b_);
  };
  double ll = penalized_ll(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double g0 = -ridge * a, g1 = -ridge * b;
    double h00 = ridge, h01 = 0.0, h11 = ridge;
    for (std::size_t t = 0; t < N; ++t) {
      const double pr = logistic(a + b * x[t]);
      const double w = pr * (1.0 - pr);
      const double r = y[t] - pr;
      g0 += r;
      g1 += r * x[t];
      h00 += w;
      h01 += w * x[t];
      h11 += w * x[t] * x[t];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0)) break;
    const double da = (h11 * g0 - h01 * g1) / det;
    const double db = (h00 * g1 - h01 * g0) / det;
    double step = 1.0, next_ll = ll;
    for (int half = 0; half < 30; ++half, step *= 0.5) {
      next_ll = penalized_ll(a + step * da, b + step * db);
      if (next_ll >= ll) break;
    }
    if (!(next_ll >= ll)) break;
    a += step * da;
    b += step * db;
    const double change = next_ll - ll;
    ll = next_ll;
    if (change < 1e-10 * (1.0 + std::abs(ll))) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = a;
  fit.slope = b;
  return fit;
}

ChainState initialize(const Multiplex& m, const PriorConfig& cfg_in, const MCMCConfig& mc,
                      Rng& rng) {
  const std::size_t n = m.n(), K = m.K(), p = mc.p;
  PriorConfig cfg = cfg_in;
  cfg.p = p;
  cfg = cfg.for_network(n);
  const double lb = alpha_lower_bound(double(n));

  ChainState st;
  st.Z = classical_mds(average_geodesic(m).values, p, rng);

  // Logistic fits of each view on the squared MDS distances.
  std::vector<LogisticFit> fits(K);
  const arma::mat D = pairwise_squared_distances(st.Z, kernels::scalar());
  for (std::size_t k = 0; k < K; ++k) {
    const arma::mat& A = m.view(k).adjacency;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || (!m.view(k).directed && j < i)) continue;
        x.push_back(D(i, j));
        y.push_back(A(i, j));
      }
    }
    fits[k] = fit_logistic(x, y);
  }
  // Rescale the configuration so the reference view's distance coefficient is
  // one; the remaining views' coefficients scale accordingly.
  const std::size_t ref = m.ref_view();
  const double b_ref = -fits[ref].slope;
  double coef_scale = 1.0;
  if (b_ref > 1e-8 && std::isfinite(b_ref)) {
    st.Z *= std::sqrt(b_ref);
    coef_scale = 1.0 / b_ref;
  }

  LogitParams& lp = st.logit;
  lp.ref_view = ref;
  lp.alpha.resize(K);
  lp.beta.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double a = fits[k].intercept;
    lp.alpha[k] = std::isfinite(a) ? std::max(a, lb) : lb;
    const double b = -fits[k].slope * coef_scale;
    lp.beta[k] = std::isfinite(b) ? std::max(b, 0.0) : 0.0;
  }
  auto mean_var = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = v.size() > 1 ? ss / double(v.size() - 1) : 1.0;
    return std::pair{mean, std::max(var, 0.1)};
  };
  std::tie(lp.mu_alpha, lp.sigma2_alpha) = mean_var(lp.alpha);
  std::tie(lp.mu_beta, lp.sigma2_beta) = mean_var(lp.beta);
  lp.mu_alpha = std::max(lp.mu_alpha, lb);
  lp.mu_beta = std::max(lp.mu_beta, 0.0);

  // Reference constraints.
  lp.beta[ref] = 1.0;
  if (mc.alpha_ref_override) {
    lp.alpha[ref] = std::max(*mc.alpha_ref_override, lb);
  } else {
    const double dyads = m.dyad_count(ref);
    const double p_bar = std::clamp(density(m, ref), 1.0 / dyads, 1.0 - 1.0 / dyads);
    lp.alpha[ref] = std::max(alpha_ref_min(p_bar), lb);
  }

  // Initial partition.
  const std::size_t max_G = std::min<std::size_t>(9, std::max<std::size_t>(n / 3, 1));
  const GaussianMixtureFit gmm = select_diagonal_gmm(st.Z, max_G, rng);
  const double var_floor = 1e-3 * std::max(arma::mean(arma::var(st.Z, 1, 0)), 1e-8);
  st.mixture = mixture_from_partition(st.Z, gmm.labels, cfg.m, cfg.xi1 / cfg.xi2, var_floor);
  st.mixture.canonicalize();
  return st;
}

}  // namespace ilpcm
