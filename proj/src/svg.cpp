#include "ilpcm/svg.hpp"

#include "ilpcm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ilpcm::svg {

namespace {

constexpr double kWidth = 480.0, kHeight = 480.0, kMargin = 36.0;

const char* const kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                "#66a61e", "#e6ab02", "#a6761d", "#666666"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double w, double h, const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
    << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">"
    << escape(title) << "</text>\n";
  return s.str();
}

std::string marker(const std::string& shape, double x, double y, const char* fill) {
  const double r = 5.0;
  std::ostringstream s;
  if (shape == "square") {
    s << "<rect class=\"node\" x=\"" << num(x - r) << "\" y=\"" << num(y - r) << "\" width=\""
      << num(2 * r) << "\" height=\"" << num(2 * r) << "\" fill=\"" << fill << "\"/>";
  } else if (shape == "triangle") {
    s << "<polygon class=\"node\" points=\"" << num(x) << ',' << num(y - r) << ' ' << num(x - r)
      << ',' << num(y + r) << ' ' << num(x + r) << ',' << num(y + r) << "\" fill=\"" << fill
      << "\"/>";
  } else if (shape == "diamond") {
    s << "<polygon class=\"node\" points=\"" << num(x) << ',' << num(y - r) << ' ' << num(x + r)
      << ',' << num(y) << ' ' << num(x) << ',' << num(y + r) << ' ' << num(x - r) << ','
      << num(y) << "\" fill=\"" << fill << "\"/>";
  } else if (shape == "cross") {
    s << "<path class=\"node\" d=\"M" << num(x - r) << ' ' << num(y - r) << " L" << num(x + r)
      << ' ' << num(y + r) << " M" << num(x - r) << ' ' << num(y + r) << " L" << num(x + r) << ' '
      << num(y - r) << "\" stroke=\"" << fill << "\" stroke-width=\"2\"/>";
  } else {
    s << "<circle class=\"node\" cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
      << "\" fill=\"" << fill << "\"/>";
  }
  return s.str();
}

const char* const kShapes[] = {"circle", "square", "triangle", "diamond", "cross"};

}  // namespace

NodeCategories read_categories_csv(const std::filesystem::path& path,
                                   const std::vector<std::string>& node_names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("node,category", 0) != 0) {
    throw DataError(path.string() + ": header must be node,category");
  }
  NodeCategories out;
  out.category.assign(node_names.size(), "");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(path.string() + ": malformed row '" + line + "'");
    const std::string node = line.substr(0, comma), cat = line.substr(comma + 1);
    const auto it = std::find(node_names.begin(), node_names.end(), node);
    if (it == node_names.end()) throw DataError(path.string() + ": unknown node '" + node + "'");
    out.category[std::size_t(it - node_names.begin())] = cat;
  }
  return out;
}

std::string latent_space(const arma::mat& Z, const std::vector<std::size_t>& clusters,
                         const arma::mat& adjacency, const std::string& title,
                         const NodeCategories* shapes) {
  const std::size_t n = Z.n_rows;
  if (clusters.size() != n || adjacency.n_rows != n) throw UsageError("plot inputs disagree");
  const bool has_legend = shapes != nullptr;
  const double plot_w = kWidth - (has_legend ? 120.0 : 0.0);

  // Uniform scale in both axes so distances are not distorted.
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (n > 0 && Z.n_cols >= 1) {
    xmin = Z.col(0).min();
    xmax = Z.col(0).max();
    ymin = Z.n_cols > 1 ? Z.col(1).min() : 0.0;
    ymax = Z.n_cols > 1 ? Z.col(1).max() : 0.0;
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double scale = (std::min(plot_w, kHeight) - 2 * kMargin) / span;
  auto px = [&](std::size_t i) { return kMargin + (Z(i, 0) - xmin) * scale; };
  auto py = [&](std::size_t i) {
    const double y = Z.n_cols > 1 ? Z(i, 1) : 0.0;
    return kHeight - kMargin - (y - ymin) * scale;
  };

  std::ostringstream s;
  s << header(kWidth, kHeight, title);
  s << "<g stroke=\"#999999\" stroke-opacity=\"0.5\" stroke-width=\"0.8\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adjacency(i, j) != 0.0 || adjacency(j, i) != 0.0) {
        s << "<line class=\"edge\" x1=\"" << num(px(i)) << "\" y1=\"" << num(py(i)) << "\" x2=\""
          << num(px(j)) << "\" y2=\"" << num(py(j)) << "\"/>\n";
      }
    }
  }
  s << "</g>\n";

  std::vector<std::string> cats;  // first-appearance order
  if (shapes) {
    for (const auto& c : shapes->category) {
      if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
    }
  }
  auto shape_of = [&](std::size_t i) -> std::string {
    if (!shapes) return "circle";
    const auto pos = std::find(cats.begin(), cats.end(), shapes->category[i]) - cats.begin();
    return kShapes[std::size_t(pos) % std::size(kShapes)];
  };
  s << "<g>\n";
  for (std::size_t i = 0; i < n; ++i) {
    s << marker(shape_of(i), px(i), py(i), kPalette[clusters[i] % std::size(kPalette)]) << '\n';
  }
  s << "</g>\n";

  if (shapes) {
    s << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
    double y = 50.0;
    for (std::size_t c = 0; c < cats.size(); ++c) {
      s << marker(kShapes[c % std::size(kShapes)], plot_w + 14, y, "#333333") << '\n';
      s << "<text x=\"" << num(plot_w + 26) << "\" y=\"" << num(y + 4) << "\">"
        << escape(cats[c].empty() ? "unknown" : cats[c]) << "</text>\n";
      y += 18.0;
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string g_frequency(const std::map<std::size_t, std::size_t>& freq, const std::string& title) {
  std::ostringstream s;
  s << header(kWidth, 320.0, title);
  std::size_t total = 0, top = 1;
  for (auto [G, c] : freq) {
    total += c;
    top = std::max(top, c);
  }
  const double bar_w = freq.empty() ? 0.0 : (kWidth - 2 * kMargin) / double(freq.size());
  const double base = 320.0 - kMargin, height = 320.0 - 2 * kMargin - 20.0;
  std::size_t b = 0;
  s << "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (auto [G, c] : freq) {
    const double h = height * double(c) / double(top);
    const double x = kMargin + bar_w * double(b);
    s << "<rect class=\"bar\" x=\"" << num(x + 0.1 * bar_w) << "\" y=\"" << num(base - h)
      << "\" width=\"" << num(0.8 * bar_w) << "\" height=\"" << num(h)
      << "\" fill=\"#7570b3\"/>\n";
    s << "<text x=\"" << num(x + 0.5 * bar_w) << "\" y=\"" << num(base + 14) << "\">" << G
      << "</text>\n";
    s << "<text x=\"" << num(x + 0.5 * bar_w) << "\" y=\"" << num(base - h - 4) << "\">"
      << num(total ? double(c) / double(total) : 0.0) << "</text>\n";
    ++b;
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

std::string box_summary(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                        const std::string& title, const std::string& y_label) {
  std::ostringstream s;
  const double H = 320.0;
  s << header(kWidth, H, title);
  double lo = 0.0, hi = 1.0;
  for (const auto& [name, v] : groups) {
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const double top = 30.0, bottom = H - kMargin, span = std::max(hi - lo, 1e-9);
  auto py = [&](double v) { return bottom - (v - lo) / span * (bottom - top); };
  s << "<text x=\"12\" y=\"" << num(0.5 * H) << "\" font-family=\"sans-serif\" font-size=\"11\" "
    << "transform=\"rotate(-90 12 " << num(0.5 * H) << ")\" text-anchor=\"middle\">"
    << escape(y_label) << "</text>\n";
  const double w = groups.empty() ? 0.0 : (kWidth - 2 * kMargin) / double(groups.size());
  s << "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (std::size_t b = 0; b < groups.size(); ++b) {
    std::vector<double> v = groups[b].second;
    const double cx = kMargin + w * (double(b) + 0.5);
    s << "<text x=\"" << num(cx) << "\" y=\"" << num(H - 14) << "\">" << escape(groups[b].first)
      << "</text>\n";
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    auto q = [&](double prob) {
      const double pos = prob * double(v.size() - 1);
      const std::size_t k = std::size_t(pos);
      const double frac = pos - double(k);
      return k + 1 < v.size() ? v[k] * (1.0 - frac) + v[k + 1] * frac : v[k];
    };
    const double q1 = q(0.25), med = q(0.5), q3 = q(0.75);
    s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(v.front())) << "\" x2=\"" << num(cx)
      << "\" y2=\"" << num(py(v.back())) << "\" stroke=\"#333333\"/>\n";
    s << "<rect class=\"box\" x=\"" << num(cx - 0.3 * w) << "\" y=\"" << num(py(q3))
      << "\" width=\"" << num(0.6 * w) << "\" height=\"" << num(py(q1) - py(q3))
      << "\" fill=\"#1b9e77\" stroke=\"#333333\"/>\n";
    s << "<line x1=\"" << num(cx - 0.3 * w) << "\" y1=\"" << num(py(med)) << "\" x2=\""
      << num(cx + 0.3 * w) << "\" y2=\"" << num(py(med)) << "\" stroke=\"#000000\" "
      << "stroke-width=\"2\"/>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

}  // namespace ilpcm::svg
