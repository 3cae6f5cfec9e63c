#pragma once

#include <armadillo>

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ilpcm::svg {

// Per-node category used for point shapes (pass-through metadata).
struct NodeCategories {
  std::vector<std::string> category;  // one per node, empty when unknown
};

// CSV with header "node,category"; nodes matched by name. Nodes absent from
// the file get an empty category.
NodeCategories read_categories_csv(const std::filesystem::path& path,
                                   const std::vector<std::string>& node_names);

// Points at Z coloured by cluster, one segment per connected pair.
std::string latent_space(const arma::mat& Z, const std::vector<std::size_t>& clusters,
                         const arma::mat& adjacency, const std::string& title,
                         const NodeCategories* shapes = nullptr);

std::string g_frequency(const std::map<std::size_t, std::size_t>& freq, const std::string& title);

// One box (quartiles, whiskers to min/max) per labelled sample.
std::string box_summary(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                        const std::string& title, const std::string& y_label);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ilpcm::svg
