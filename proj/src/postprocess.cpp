#include "ilpcm/postprocess.hpp"

#include "ilpcm/errors.hpp"
#include "ilpcm/procrustes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>

namespace ilpcm {

PosteriorSimilarity posterior_similarity(const std::vector<Partition>& labels) {
  if (labels.empty()) throw UsageError("posterior similarity needs at least one draw");
  const std::size_t n = labels.front().size();
  arma::mat counts(n, n, arma::fill::zeros);
  for (const Partition& c : labels) {
    if (c.size() != n) throw UsageError("label draws have inconsistent lengths");
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = j; i < n; ++i) {
        if (c[i] == c[j]) counts(i, j) += 1.0;
      }
    }
  }
  counts = arma::symmatl(counts);
  PosteriorSimilarity out;
  out.matrix = counts / double(labels.size());
  out.draws_used = labels.size();
  return out;
}

PosteriorSimilarity posterior_similarity(const std::vector<Draw>& draws) {
  std::vector<Partition> labels;
  labels.reserve(draws.size());
  for (const Draw& d : draws) labels.push_back(d.labels);
  return posterior_similarity(labels);
}

double vi_lower_bound(const Partition& c, const arma::mat& psm) {
  const std::size_t n = c.size();
  if (psm.n_rows != n || psm.n_cols != n) throw UsageError("partition and psm sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double same = 0.0, same_psm = 0.0, row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = psm(j, i);
      row += pij;
      if (c[j] == c[i]) {
        same += 1.0;
        same_psm += pij;
      }
    }
    total += std::log2(same) - 2.0 * std::log2(same_psm) + std::log2(row);
  }
  return total / double(n);
}

std::size_t block_count(const Partition& c) {
  std::vector<std::size_t> sorted(c);
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

Partition canonical_labels(const Partition& c) {
  std::map<std::size_t, std::size_t> remap;
  Partition out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(c[i], remap.size());
    out[i] = it->second;
  }
  return out;
}

std::vector<Partition> average_linkage_cuts(const arma::mat& psm) {
  const std::size_t n = psm.n_rows;
  arma::mat dist = 1.0 - psm;
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  Partition labels(n);
  std::iota(labels.begin(), labels.end(), 0);

  std::vector<Partition> cuts;
  cuts.push_back(canonical_labels(labels));
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    // merge bj into bi (Lance-Williams update for average linkage)
    const double si = double(size[bi]), sj = double(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double d = (si * dist(k, bi) + sj * dist(k, bj)) / (si + sj);
      dist(k, bi) = dist(bi, k) = d;
    }
    active[bj] = false;
    size[bi] += size[bj];
    for (auto& l : labels) {
      if (l == bj) l = bi;
    }
    cuts.push_back(canonical_labels(labels));
  }
  return cuts;
}

PartitionEstimate estimate_partition_vi(const PosteriorSimilarity& psm,
                                        const std::vector<Partition>& candidates) {
  if (candidates.empty()) throw UsageError("no candidate partitions");
  PartitionEstimate best;
  bool have = false;
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    const double loss = vi_lower_bound(candidates[t], psm.matrix);
    const std::size_t G = block_count(candidates[t]);
    const double tol = 1e-12 * std::max(1.0, std::abs(loss));
    const bool better = !have || loss < best.loss - tol ||
                        (std::abs(loss - best.loss) <= tol && G < best.G_hat);
    if (better) {
      best.partition = canonical_labels(candidates[t]);
      best.G_hat = G;
      best.loss = loss;
      best.index = t;
      have = true;
    }
  }
  return best;
}

PartitionEstimate estimate_partition_vi(const PosteriorSimilarity& psm,
                                        const std::vector<Draw>& draws) {
  std::vector<Partition> candidates;
  candidates.reserve(draws.size() + psm.matrix.n_rows);
  for (const Draw& d : draws) candidates.push_back(d.labels);
  for (Partition& c : average_linkage_cuts(psm.matrix)) candidates.push_back(std::move(c));
  PartitionEstimate best = estimate_partition_vi(psm, candidates);

  // Local descent from the lowest-loss distinct candidates.
  constexpr std::size_t kRefineStarts = 32;
  std::map<Partition, double> distinct;
  for (const Partition& c : candidates) {
    Partition key = canonical_labels(c);
    if (!distinct.contains(key)) distinct.emplace(std::move(key), vi_lower_bound(c, psm.matrix));
  }
  std::vector<std::pair<double, const Partition*>> order;
  for (const auto& [c, l] : distinct) order.emplace_back(l, &c);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  order.resize(std::min(order.size(), kRefineStarts));
  for (const auto& [l0, start] : order) {
    Partition refined = refine_partition_vi(*start, psm.matrix);
    const double loss = vi_lower_bound(refined, psm.matrix);
    const std::size_t G = block_count(refined);
    const double tol = 1e-12 * std::max(1.0, std::abs(best.loss));
    if (loss < best.loss - tol || (std::abs(loss - best.loss) <= tol && G < best.G_hat)) {
      best.partition = std::move(refined);
      best.G_hat = G;
      best.loss = loss;
      best.refined = true;
    }
  }
  return best;
}

Partition refine_partition_vi(Partition c, const arma::mat& psm) {
  c = canonical_labels(c);
  const std::size_t n = c.size();
  double loss = vi_lower_bound(c, psm);
  auto improves = [&](double l) { return l < loss - 1e-12 * std::max(1.0, std::abs(loss)); };
  for (bool moved = true; moved;) {
    moved = false;
    // Single-node moves, including into a new block.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t G = block_count(c), own = c[i];
      for (std::size_t b = 0; b <= G; ++b) {
        if (b == own) continue;
        c[i] = b;
        const double l = vi_lower_bound(c, psm);
        if (improves(l)) {
          loss = l;
          moved = true;
          break;
        }
        c[i] = own;
      }
      c = canonical_labels(c);
    }
    // Pairwise block merges.
    const std::size_t G = block_count(c);
    for (std::size_t a = 0; a < G && !moved; ++a) {
      for (std::size_t b = a + 1; b < G && !moved; ++b) {
        Partition m = c;
        for (auto& v : m) {
          if (v == b) v = a;
        }
        const double l = vi_lower_bound(m, psm);
        if (improves(l)) {
          c = canonical_labels(m);
          loss = l;
          moved = true;
        }
      }
    }
  }
  return c;
}

KMeansResult kmeans(const arma::mat& X, std::size_t k, Rng& rng, std::size_t restarts) {
  const std::size_t N = X.n_rows, p = X.n_cols;
  if (k == 0 || k > N) throw UsageError("k-means needs 1 <= k <= number of points");
  KMeansResult best;
  best.within_ss = std::numeric_limits<double>::infinity();
  std::vector<double> d2(N);
  for (std::size_t rep = 0; rep < std::max<std::size_t>(restarts, 1); ++rep) {
    arma::mat C(p, k);
    C.col(0) = X.row(rng.uniform_index(N)).t();
    for (std::size_t c = 1; c < k; ++c) {
      for (std::size_t i = 0; i < N; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < c; ++q) {
          m = std::min(m, arma::accu(arma::square(X.row(i).t() - C.col(q))));
        }
        d2[i] = m;
      }
      const double tot = std::accumulate(d2.begin(), d2.end(), 0.0);
      C.col(c) = X.row(tot > 0.0 ? rng.categorical(d2) : rng.uniform_index(N)).t();
    }
    std::vector<std::size_t> assign(N, 0);
    double wss = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = iter == 0;
      wss = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        std::size_t arg = 0;
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < k; ++q) {
          const double v = arma::accu(arma::square(X.row(i).t() - C.col(q)));
          if (v < m) {
            m = v;
            arg = q;
          }
        }
        if (assign[i] != arg) changed = true;
        assign[i] = arg;
        wss += m;
      }
      if (!changed) break;
      arma::mat sum(p, k, arma::fill::zeros);
      std::vector<std::size_t> cnt(k, 0);
      for (std::size_t i = 0; i < N; ++i) {
        sum.col(assign[i]) += X.row(i).t();
        ++cnt[assign[i]];
      }
      for (std::size_t q = 0; q < k; ++q) {
        if (cnt[q] > 0) C.col(q) = sum.col(q) / double(cnt[q]);
      }
    }
    if (wss < best.within_ss) {
      best.within_ss = wss;
      best.centers = C;
      best.assignment = assign;
    }
  }
  return best;
}

ClusterSummary relabel_and_estimate(const std::vector<Draw>& draws, std::size_t G_hat,
                                    std::uint64_t seed, std::size_t restarts) {
  if (draws.empty()) throw UsageError("empty trace");
  if (G_hat < 1) throw UsageError("G_hat must be at least 1");
  const std::size_t p = draws.front().Z.n_cols;

  // Pooled component means, sorted so the clustering ignores draw order.
  struct Point {
    arma::vec x;
    std::size_t draw, comp;
  };
  std::vector<Point> pts;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    for (std::size_t g = 0; g < draws[t].G(); ++g) pts.push_back({draws[t].mu[g], t, g});
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(), b.x.end());
  });
  std::size_t max_G = 0;
  for (const Draw& d : draws) max_G = std::max(max_G, d.G());
  if (G_hat > max_G || pts.size() < G_hat) throw DataError("no identifiable draws");

  arma::mat X(pts.size(), p);
  for (std::size_t q = 0; q < pts.size(); ++q) X.row(q) = pts[q].x.t();
  Rng rng(seed);
  KMeansResult km = kmeans(X, G_hat, rng, restarts);

  // Order cells by their centers so the output labelling is reproducible.
  std::vector<std::size_t> order(G_hat);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const arma::vec ca = km.centers.col(a), cb = km.centers.col(b);
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  });
  std::vector<std::size_t> rank(G_hat);
  for (std::size_t r = 0; r < G_hat; ++r) rank[order[r]] = r;

  std::vector<std::vector<std::size_t>> cell(draws.size());
  for (std::size_t t = 0; t < draws.size(); ++t) cell[t].assign(draws[t].G(), 0);
  for (std::size_t q = 0; q < pts.size(); ++q) cell[pts[q].draw][pts[q].comp] = rank[km.assignment[q]];

  ClusterSummary out;
  out.G_hat = G_hat;
  out.total_draws = draws.size();
  out.mu_hat.assign(G_hat, arma::zeros<arma::vec>(p));
  out.sigma2_hat.assign(G_hat, arma::zeros<arma::vec>(p));
  out.pi_hat.assign(G_hat, 0.0);
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const Draw& d = draws[t];
    if (d.G() != G_hat) continue;
    std::vector<bool> hit(G_hat, false);
    bool perm = true;
    for (std::size_t g = 0; g < G_hat; ++g) {
      if (hit[cell[t][g]]) perm = false;
      hit[cell[t][g]] = true;
    }
    if (!perm) continue;
    const double n = static_cast<double>(d.labels.size());
    for (std::size_t g = 0; g < G_hat; ++g) {
      const std::size_t c = cell[t][g];
      out.mu_hat[c] += d.mu[g];
      out.sigma2_hat[c] += d.sigma2[g];
      out.pi_hat[c] += double(d.counts[g]) / n;
    }
    ++out.retained_draws;
  }
  if (out.retained_draws == 0) throw DataError("no identifiable draws");
  const double R = static_cast<double>(out.retained_draws);
  double pi_total = 0.0;
  for (std::size_t c = 0; c < G_hat; ++c) {
    out.mu_hat[c] /= R;
    out.sigma2_hat[c] /= R;
    pi_total += out.pi_hat[c];
  }
  for (double& w : out.pi_hat) w /= pi_total;
  return out;
}

AlignedCoordinates procrustes_align_trace(const std::vector<arma::mat>& coords,
                                          const arma::mat& reference) {
  if (coords.empty()) throw UsageError("empty coordinate trace");
  AlignedCoordinates out;
  out.mean.zeros(reference.n_rows, reference.n_cols);
  out.correlations.reserve(coords.size());
  for (const arma::mat& Z : coords) {
    if (Z.n_rows != reference.n_rows || Z.n_cols != reference.n_cols) {
      throw UsageError("coordinate draw does not match the reference shape");
    }
    out.mean += procrustes_align(Z, reference, Scaling::similarity);
    out.correlations.push_back(procrustes_correlation(reference, Z));
  }
  out.mean /= double(coords.size());
  return out;
}

AlignedCoordinates procrustes_align_trace(const std::vector<Draw>& draws,
                                          const arma::mat& reference) {
  std::vector<arma::mat> coords;
  coords.reserve(draws.size());
  for (const Draw& d : draws) coords.push_back(d.Z);
  return procrustes_align_trace(coords, reference);
}

std::size_t max_loglik_draw(const std::vector<Draw>& draws) {
  if (draws.empty()) throw UsageError("empty trace");
  std::size_t best = 0;
  for (std::size_t t = 1; t < draws.size(); ++t) {
    if (draws[t].loglik > draws[best].loglik) best = t;
  }
  return best;
}

Draw align_draw(const Draw& d, const arma::mat& reference) {
  const SimilarityTransform t = procrustes_fit(d.Z, reference, Scaling::similarity);
  Draw out = d;
  out.Z = t.apply(d.Z);
  for (std::size_t g = 0; g < d.G(); ++g) {
    out.mu[g] = t.apply(d.mu[g].t()).t();
    const arma::mat cov = t.scale * t.scale * t.R.t() * arma::diagmat(d.sigma2[g]) * t.R;
    out.sigma2[g] = cov.diag();
  }
  return out;
}

PosteriorSummary summarize_posterior(const std::vector<Draw>& draws,
                                     const std::optional<TruthInfo>& truth,
                                     const std::optional<arma::mat>& reference,
                                     std::uint64_t seed) {
  if (draws.empty()) throw DataError("no posterior draws to summarize");
  PosteriorSummary out;
  out.reference = truth       ? truth->Z
                  : reference ? *reference
                              : draws[max_loglik_draw(draws)].Z;
  std::vector<Draw> aligned;
  aligned.reserve(draws.size());
  for (const Draw& d : draws) aligned.push_back(align_draw(d, out.reference));

  out.psm = posterior_similarity(aligned);
  out.estimate = estimate_partition_vi(out.psm, aligned);
  for (const Draw& d : aligned) ++out.G_frequency[d.G()];
  std::size_t best = 0;
  for (auto [G, c] : out.G_frequency) {
    if (c > best) {
      best = c;
      out.G_mode = G;
    }
  }
  try {
    out.clusters = relabel_and_estimate(aligned, out.estimate.G_hat, seed);
    out.clusters_identified = true;
  } catch (const DataError&) {
    out.clusters = ClusterSummary{};
    out.clusters.G_hat = out.estimate.G_hat;
    out.clusters.total_draws = aligned.size();
  }
  out.clusters.partition = out.estimate.partition;
  out.coordinates = procrustes_align_trace(aligned, out.reference);
  if (truth) {
    out.ari = adjusted_rand_index(out.estimate.partition, truth->labels);
    out.procrustes_vs_truth = procrustes_correlation(out.coordinates.mean, truth->Z);
  }
  return out;
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw UsageError("partitions have different lengths");
  const Partition ca = canonical_labels(a), cb = canonical_labels(b);
  const std::size_t ra = block_count(ca), rb = block_count(cb);
  std::vector<std::int64_t> table(ra * rb, 0), rows(ra, 0), cols(rb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table[ca[i] * rb + cb[i]];
    ++rows[ca[i]];
    ++cols[cb[i]];
  }
  // Pair counts are integers, so the ratio is formed with one rounding.
  using wide = __int128;
  auto choose2 = [](std::int64_t x) { return wide(x) * (x - 1) / 2; };
  wide index = 0, sum_a = 0, sum_b = 0;
  for (auto v : table) index += choose2(v);
  for (auto v : rows) sum_a += choose2(v);
  for (auto v : cols) sum_b += choose2(v);
  const wide total = choose2(std::int64_t(a.size()));
  const wide num = 2 * index * total - 2 * sum_a * sum_b;
  const wide den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
  if (den == 0) return 1.0;  // both trivial and identical in structure
  return double(num) / double(den);
}

}  // namespace ilpcm
