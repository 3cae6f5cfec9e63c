#include "ilpcm/multiplex.hpp"

#include "ilpcm/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace ilpcm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<long> parse_integer(const std::string& s) {
  long value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path.string());
  return in;
}

}  // namespace

Multiplex::Multiplex(std::vector<View> views, std::size_t ref_view,
                     std::vector<std::string> node_names)
    : ref_view_(ref_view), views_(std::move(views)), node_names_(std::move(node_names)) {
  if (views_.empty()) throw DataError("multiplex must contain at least one view");
  n_ = views_.front().adjacency.n_rows;
  if (n_ < 3) throw DataError("multiplex needs at least 3 nodes");
  if (ref_view_ >= views_.size()) throw DataError("reference view index out of range");
  if (!node_names_.empty() && node_names_.size() != n_) {
    throw DataError("node name count does not match adjacency size");
  }
  for (std::size_t k = 0; k < views_.size(); ++k) {
    View& v = views_[k];
    if (v.name.empty()) v.name = std::to_string(k + 1);
    const arma::mat& a = v.adjacency;
    if (a.n_rows != n_ || a.n_cols != n_) {
      throw DataError("view '" + v.name + "' has a different size than view 1");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (a(i, i) != 0.0) throw DataError("self-loop at node " + std::to_string(i + 1) +
                                          " in view '" + v.name + "'");
      for (std::size_t j = 0; j < n_; ++j) {
        const double y = a(i, j);
        if (y != 0.0 && y != 1.0) {
          throw DataError("non-binary entry in view '" + v.name + "'");
        }
        if (!v.directed && y != a(j, i)) {
          throw DataError("undirected view '" + v.name + "' is not symmetric");
        }
      }
    }
    dyad_sums_.push_back(v.directed ? arma::mat(a + a.t()) : a);
  }
}

double Multiplex::dyad_count(std::size_t k) const {
  const double pairs = static_cast<double>(n_) * static_cast<double>(n_ - 1);
  return view(k).directed ? pairs : 0.5 * pairs;
}

double Multiplex::edge_count(std::size_t k) const {
  const double total = arma::accu(view(k).adjacency);
  return view(k).directed ? total : 0.5 * total;
}

bool Multiplex::operator==(const Multiplex& other) const {
  if (n_ != other.n_ || ref_view_ != other.ref_view_ || K() != other.K()) return false;
  if (node_names_ != other.node_names_) return false;
  for (std::size_t k = 0; k < K(); ++k) {
    const View& a = views_[k];
    const View& b = other.views_[k];
    if (a.name != b.name || a.directed != b.directed) return false;
    if (!arma::approx_equal(a.adjacency, b.adjacency, "absdiff", 0.0)) return false;
  }
  return true;
}

// --- JSON -------------------------------------------------------------------

nlohmann::json to_json(const Multiplex& m) {
  nlohmann::json j;
  j["n"] = m.n();
  j["ref_view"] = m.ref_view() + 1;
  if (!m.node_names().empty()) j["nodes"] = m.node_names();
  j["views"] = nlohmann::json::array();
  for (const View& v : m.views()) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.n(); ++i) {
      std::vector<int> row(m.n());
      for (std::size_t c = 0; c < m.n(); ++c) row[c] = static_cast<int>(v.adjacency(i, c));
      rows.push_back(row);
    }
    j["views"].push_back({{"name", v.name}, {"directed", v.directed}, {"matrix", rows}});
  }
  return j;
}

Multiplex multiplex_from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("views") || !j.at("views").is_array()) {
      throw DataError("adjacency JSON lacks a 'views' array");
    }
    const auto& jviews = j.at("views");
    if (jviews.empty()) throw DataError("view count 0");
    const std::size_t n = j.contains("n") ? j.at("n").get<std::size_t>()
                                          : jviews.front().at("matrix").size();
    std::vector<View> views;
    for (const auto& jv : jviews) {
      View v;
      v.name = jv.value("name", std::to_string(views.size() + 1));
      v.directed = jv.value("directed", true);
      const auto& rows = jv.at("matrix");
      if (rows.size() != n) throw DataError("view '" + v.name + "' matrix has wrong row count");
      v.adjacency.zeros(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
          throw DataError("view '" + v.name + "' row " + std::to_string(i + 1) +
                          " has wrong length");
        }
        for (std::size_t c = 0; c < n; ++c) {
          const auto& cell = rows[i][c];
          if (!cell.is_number()) throw DataError("non-binary entry in view '" + v.name + "'");
          v.adjacency(i, c) = cell.get<double>();
        }
      }
      views.push_back(std::move(v));
    }
    const std::size_t ref = j.value("ref_view", std::size_t{1});
    if (ref < 1 || ref > views.size()) throw DataError("ref_view out of range");
    std::vector<std::string> names;
    if (j.contains("nodes")) names = j.at("nodes").get<std::vector<std::string>>();
    return Multiplex(std::move(views), ref - 1, std::move(names));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed adjacency JSON: ") + e.what());
  }
}

Multiplex load_adjacency_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
  return multiplex_from_json(j);
}

void save_adjacency_json(const Multiplex& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(m).dump() << '\n';
}

// --- edge list --------------------------------------------------------------

EdgeListSource edge_list_source_from_manifest(const std::filesystem::path& manifest) {
  auto in = open_input(manifest);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse manifest " + manifest.string() + ": " + e.what());
  }
  const auto base = manifest.parent_path();
  EdgeListSource src;
  if (!j.contains("edges") || !j.contains("roster")) {
    throw DataError("edge-list manifest must name 'edges' and 'roster' files");
  }
  src.edges = base / j.at("edges").get<std::string>();
  src.roster = base / j.at("roster").get<std::string>();
  src.manifest = manifest;
  return src;
}

Multiplex load_edge_list(const EdgeListSource& source) {
  // Roster.
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> index;
  {
    auto in = open_input(source.roster);
    std::string line;
    while (std::getline(in, line)) {
      const std::string name = trim(line);
      if (name.empty()) continue;
      if (index.count(name) != 0) throw DataError("duplicate node '" + name + "' in roster");
      index.emplace(name, names.size());
      names.push_back(name);
    }
  }
  const std::size_t n = names.size();

  // View declarations from the manifest, if any.
  struct ViewDecl {
    std::string name;
    bool directed = true;
  };
  std::vector<ViewDecl> decls;
  std::size_t ref_view = 1;
  bool declared = false;
  if (source.manifest) {
    auto in = open_input(*source.manifest);
    nlohmann::json j;
    try {
      in >> j;
      if (j.contains("views")) {
        for (const auto& jv : j.at("views")) {
          decls.push_back({jv.value("name", std::to_string(decls.size() + 1)),
                           jv.value("directed", true)});
        }
        declared = true;
      }
      ref_view = j.value("ref_view", std::size_t{1});
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed manifest: " + std::string(e.what()));
    }
  }

  struct Entry {
    std::string view;
    std::size_t from, to;
    int value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::vector<std::string> seen_views;
  {
    auto in = open_input(source.edges);
    std::string line;
    std::size_t lineno = 0;
    bool header_read = false;
    std::size_t ncols = 3;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto fields = split_csv_line(line);
      if (!header_read) {
        if (fields.size() < 3 || fields[0] != "view" || fields[1] != "source" ||
            fields[2] != "target") {
          throw DataError("edge list header must be 'view,source,target[,weight]'");
        }
        ncols = fields.size();
        header_read = true;
        continue;
      }
      if (fields.size() != ncols) {
        throw DataError("malformed row at line " + std::to_string(lineno));
      }
      int value = 1;
      if (ncols >= 4) {
        const auto w = parse_integer(fields[3]);
        if (!w || (*w != 0 && *w != 1)) {
          throw DataError("non-binary weight at line " + std::to_string(lineno));
        }
        value = static_cast<int>(*w);
      }
      const auto a = index.find(fields[1]);
      const auto b = index.find(fields[2]);
      if (a == index.end() || b == index.end()) {
        throw DataError("unknown node at line " + std::to_string(lineno) +
                        " (not in roster)");
      }
      if (a->second == b->second) {
        throw DataError("self-loop at line " + std::to_string(lineno));
      }
      if (std::find(seen_views.begin(), seen_views.end(), fields[0]) == seen_views.end()) {
        seen_views.push_back(fields[0]);
      }
      entries.push_back({fields[0], a->second, b->second, value, lineno});
    }
    if (!header_read) throw DataError("edge list is empty: " + source.edges.string());
  }

  if (!declared) {
    // Views are 1-indexed integers or names, in order of first appearance.
    bool all_int = !seen_views.empty();
    long max_id = 0;
    for (const auto& v : seen_views) {
      const auto id = parse_integer(v);
      if (!id || *id < 1) {
        all_int = false;
        break;
      }
      max_id = std::max(max_id, *id);
    }
    if (all_int) {
      for (long k = 1; k <= max_id; ++k) decls.push_back({std::to_string(k), true});
    } else {
      for (const auto& v : seen_views) decls.push_back({v, true});
    }
  }
  if (decls.empty()) throw DataError("view count 0");

  auto view_index = [&](const std::string& label, std::size_t lineno) -> std::size_t {
    for (std::size_t k = 0; k < decls.size(); ++k) {
      if (decls[k].name == label) return k;
    }
    if (const auto id = parse_integer(label); id && *id >= 1 &&
                                              static_cast<std::size_t>(*id) <= decls.size()) {
      return static_cast<std::size_t>(*id - 1);
    }
    throw DataError("unknown view '" + label + "' at line " + std::to_string(lineno));
  };

  std::vector<View> views(decls.size());
  for (std::size_t k = 0; k < decls.size(); ++k) {
    views[k].name = decls[k].name;
    views[k].directed = decls[k].directed;
    views[k].adjacency.zeros(n, n);
  }
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, int> assigned;
  for (const Entry& e : entries) {
    const std::size_t k = view_index(e.view, e.line);
    std::size_t i = e.from, j = e.to;
    if (!views[k].directed && i > j) std::swap(i, j);
    const auto key = std::make_tuple(k, i, j);
    const auto [it, inserted] = assigned.emplace(key, e.value);
    if (!inserted && it->second != e.value) {
      throw DataError("duplicate edge with conflicting value at line " + std::to_string(e.line));
    }
    views[k].adjacency(i, j) = e.value;
    if (!views[k].directed) views[k].adjacency(j, i) = e.value;
  }
  if (ref_view < 1 || ref_view > views.size()) throw DataError("ref_view out of range");
  return Multiplex(std::move(views), ref_view - 1, std::move(names));
}

Multiplex load_multiplex(const std::filesystem::path& source, InputFormat format) {
  if (!std::filesystem::exists(source)) {
    throw DataError("input file does not exist: " + source.string());
  }
  switch (format) {
    case InputFormat::adjacency_json:
      return load_adjacency_json(source);
    case InputFormat::edge_list_csv:
      return load_edge_list(edge_list_source_from_manifest(source));
  }
  throw UsageError("unsupported input format");
}

// --- summaries ----------------------------------------------------------------

double density(const Multiplex& m, std::size_t k) {
  if (k >= m.K()) throw UsageError("view index out of range");
  const double n = static_cast<double>(m.n());
  return arma::accu(m.view(k).adjacency) / (n * (n - 1.0));
}

DistanceMatrix geodesic_distances(const Multiplex& m, std::size_t k) {
  if (k >= m.K()) throw UsageError("view index out of range");
  const std::size_t n = m.n();
  const arma::mat& a = m.view(k).adjacency;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (a(i, j) > 0.0 || a(j, i) > 0.0)) adj[i].push_back(j);
    }
  }
  constexpr double unreachable = -1.0;
  arma::mat d(n, n, arma::fill::value(unreachable));
  double max_finite = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<std::size_t> frontier;
    d(s, s) = 0.0;
    frontier.push(s);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : adj[u]) {
        if (d(s, v) == unreachable) {
          d(s, v) = d(s, u) + 1.0;
          max_finite = std::max(max_finite, d(s, v));
          frontier.push(v);
        }
      }
    }
  }
  d.replace(unreachable, max_finite + 1.0);
  return {d};
}

DistanceMatrix average_geodesic(const Multiplex& m) {
  arma::mat total(m.n(), m.n(), arma::fill::zeros);
  for (std::size_t k = 0; k < m.K(); ++k) total += geodesic_distances(m, k).values;
  return {total / static_cast<double>(m.K())};
}

}  // namespace ilpcm
