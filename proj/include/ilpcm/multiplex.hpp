#pragma once

#include <armadillo>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ilpcm {

struct View {
  std::string name;
  bool directed = true;
  arma::mat adjacency;  // n x n, entries 0/1, zero diagonal
};

// A fixed node set observed under K binary edge sets. Immutable after
// construction; safe to share between chains.
class Multiplex {
 public:
  // Throws DataError if any invariant fails. ref_view is 0-based.
  Multiplex(std::vector<View> views, std::size_t ref_view,
            std::vector<std::string> node_names = {});

  std::size_t n() const { return n_; }
  std::size_t K() const { return views_.size(); }
  std::size_t ref_view() const { return ref_view_; }
  const View& view(std::size_t k) const { return views_.at(k); }
  const std::vector<View>& views() const { return views_; }
  const std::vector<std::string>& node_names() const { return node_names_; }

  // Per-node dyad totals used by the likelihood kernels: Y + Y^T for directed
  // views, Y for undirected ones. Symmetric, so column i is also row i.
  const arma::mat& dyad_sums(std::size_t k) const { return dyad_sums_.at(k); }
  // Bernoulli terms per unordered pair: 2 (directed) or 1 (undirected).
  double multiplicity(std::size_t k) const { return views_.at(k).directed ? 2.0 : 1.0; }
  // Number of Bernoulli terms in view k: n(n-1) or n(n-1)/2.
  double dyad_count(std::size_t k) const;
  double edge_count(std::size_t k) const;

  bool operator==(const Multiplex& other) const;

 private:
  std::size_t n_ = 0;
  std::size_t ref_view_ = 0;
  std::vector<View> views_;
  std::vector<std::string> node_names_;
  std::vector<arma::mat> dyad_sums_;
};

// Square matrix of nonnegative distances with zero diagonal.
struct DistanceMatrix {
  arma::mat values;
};

enum class InputFormat { adjacency_json, edge_list_csv };

struct EdgeListSource {
  std::filesystem::path edges;                    // CSV: view,source,target[,weight]
  std::filesystem::path roster;                   // one node name per line
  std::optional<std::filesystem::path> manifest;  // views (name, directed) and ref_view
};

Multiplex load_multiplex(const std::filesystem::path& source, InputFormat format);
Multiplex load_adjacency_json(const std::filesystem::path& path);
Multiplex load_edge_list(const EdgeListSource& source);

// Edge-list manifest JSON: { "edges": "...", "roster": "...",
// "views": [{"name":..., "directed":...}], "ref_view": 1 }. Relative paths
// resolve against the manifest's directory.
EdgeListSource edge_list_source_from_manifest(const std::filesystem::path& manifest);

nlohmann::json to_json(const Multiplex& m);
Multiplex multiplex_from_json(const nlohmann::json& j);
void save_adjacency_json(const Multiplex& m, const std::filesystem::path& path);

// Fraction of ordered off-diagonal pairs that are edges.
double density(const Multiplex& m, std::size_t k);

// Hop counts on the symmetrized view. Unreachable pairs get (max finite
// distance) + 1; an empty view yields 1 everywhere off the diagonal.
DistanceMatrix geodesic_distances(const Multiplex& m, std::size_t k);
DistanceMatrix average_geodesic(const Multiplex& m);

}  // namespace ilpcm
