#include "ilpcm/trace_io.hpp"

#include "ilpcm/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <iomanip>
#include <map>
#include <sstream>

namespace ilpcm {

namespace fs = std::filesystem;

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& file) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("malformed number '" + s + "' in " + file.string());
  }
  return v;
}

std::size_t parse_size(const std::string& s, const fs::path& file) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("malformed integer '" + s + "' in " + file.string());
  }
  return v;
}

// Rows of a CSV file with a header, keyed by the leading iteration column.
std::vector<std::vector<std::string>> read_rows(const fs::path& p, std::vector<std::string>* header) {
  std::ifstream in(p);
  if (!in) throw DataError("missing trace file " + p.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty trace file " + p.string());
  if (header) *header = split_csv(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(split_csv(line));
  }
  return rows;
}

}  // namespace

const std::vector<std::string>& trace_file_names() {
  static const std::vector<std::string> names{"alpha.csv",  "beta.csv",   "psi.csv",
                                              "G.csv",      "loglik.csv", "hypers.csv",
                                              "labels.csv", "coords.csv", "components.jsonl"};
  return names;
}

TraceWriter::TraceWriter(const fs::path& dir, std::size_t n, std::size_t K, std::size_t p)
    : n_(n), K_(K), p_(p) {
  fs::create_directories(dir);
  alpha_ = open_out(dir / "alpha.csv");
  beta_ = open_out(dir / "beta.csv");
  psi_ = open_out(dir / "psi.csv");
  G_ = open_out(dir / "G.csv");
  loglik_ = open_out(dir / "loglik.csv");
  hypers_ = open_out(dir / "hypers.csv");
  labels_ = open_out(dir / "labels.csv");
  coords_ = open_out(dir / "coords.csv");
  components_ = open_out(dir / "components.jsonl");

  alpha_ << "iteration";
  beta_ << "iteration";
  for (std::size_t k = 0; k < K_; ++k) {
    alpha_ << ",view" << k + 1;
    beta_ << ",view" << k + 1;
  }
  alpha_ << '\n';
  beta_ << '\n';
  psi_ << "iteration,psi\n";
  G_ << "iteration,G\n";
  loglik_ << "iteration,loglik\n";
  hypers_ << "iteration,mu_alpha,sigma2_alpha,mu_beta,sigma2_beta";
  for (std::size_t r = 0; r < p_; ++r) hypers_ << ",base_mean" << r + 1;
  hypers_ << '\n';
  labels_ << "iteration";
  for (std::size_t i = 0; i < n_; ++i) labels_ << ",node" << i + 1;
  labels_ << '\n';
  coords_ << "iteration,node,dim,value\n";
}

void TraceWriter::write(const Draw& d) {
  const std::size_t it = d.iteration;
  if (d.alpha.size() != K_ || d.labels.size() != n_ || d.Z.n_cols != p_) {
    throw UsageError("draw does not match the trace layout");
  }
  alpha_ << it;
  beta_ << it;
  for (std::size_t k = 0; k < K_; ++k) {
    alpha_ << ',' << format_double(d.alpha[k]);
    beta_ << ',' << format_double(d.beta[k]);
  }
  alpha_ << '\n';
  beta_ << '\n';
  psi_ << it << ',' << format_double(d.psi) << '\n';
  G_ << it << ',' << d.G() << '\n';
  loglik_ << it << ',' << format_double(d.loglik) << '\n';
  hypers_ << it << ',' << format_double(d.mu_alpha) << ',' << format_double(d.sigma2_alpha) << ','
          << format_double(d.mu_beta) << ',' << format_double(d.sigma2_beta);
  for (std::size_t r = 0; r < p_; ++r) hypers_ << ',' << format_double(d.base_mean(r));
  hypers_ << '\n';
  labels_ << it;
  for (std::size_t l : d.labels) labels_ << ',' << l + 1;
  labels_ << '\n';
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t r = 0; r < p_; ++r) {
      coords_ << it << ',' << i + 1 << ',' << r + 1 << ',' << format_double(d.Z(i, r)) << '\n';
    }
  }
  components_ << "{\"iteration\":" << it << ",\"mu\":[";
  for (std::size_t g = 0; g < d.G(); ++g) {
    components_ << (g ? ",[" : "[");
    for (std::size_t r = 0; r < p_; ++r) components_ << (r ? "," : "") << format_double(d.mu[g](r));
    components_ << ']';
  }
  components_ << "],\"sigma2\":[";
  for (std::size_t g = 0; g < d.G(); ++g) {
    components_ << (g ? ",[" : "[");
    for (std::size_t r = 0; r < p_; ++r) {
      components_ << (r ? "," : "") << format_double(d.sigma2[g](r));
    }
    components_ << ']';
  }
  components_ << "],\"counts\":[";
  for (std::size_t g = 0; g < d.G(); ++g) components_ << (g ? "," : "") << d.counts[g];
  components_ << "]}\n";
}

void TraceWriter::flush() {
  for (std::ofstream* f : {&alpha_, &beta_, &psi_, &G_, &loglik_, &hypers_, &labels_, &coords_,
                           &components_}) {
    f->flush();
    if (!*f) throw DataError("failed writing trace files");
  }
}

void write_trace(const fs::path& dir, const std::vector<Draw>& draws, std::size_t K) {
  if (draws.empty()) throw UsageError("refusing to write an empty trace");
  TraceWriter w(dir, draws.front().labels.size(), K, draws.front().Z.n_cols);
  for (const Draw& d : draws) w.write(d);
  w.flush();
}

bool has_trace(const fs::path& dir) {
  for (const auto& name : trace_file_names()) {
    if (!fs::exists(dir / name)) return false;
  }
  return true;
}

std::vector<Draw> read_trace(const fs::path& dir) {
  if (!has_trace(dir)) throw DataError("no trace files in " + dir.string());
  std::vector<std::string> header;

  const auto labels_rows = read_rows(dir / "labels.csv", &header);
  const std::size_t n = header.size() - 1;
  std::vector<Draw> draws(labels_rows.size());
  std::map<std::size_t, std::size_t> index;  // iteration -> draw position
  for (std::size_t t = 0; t < labels_rows.size(); ++t) {
    const auto& row = labels_rows[t];
    if (row.size() != n + 1) throw DataError("ragged row in labels.csv");
    draws[t].iteration = parse_size(row[0], dir / "labels.csv");
    index[draws[t].iteration] = t;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t l = parse_size(row[i + 1], dir / "labels.csv");
      if (l < 1) throw DataError("labels.csv labels are 1-based");
      draws[t].labels.push_back(l - 1);
    }
  }
  auto locate = [&](const std::string& s, const fs::path& f) -> Draw& {
    const auto it = index.find(parse_size(s, f));
    if (it == index.end()) throw DataError("iteration mismatch in " + f.string());
    return draws[it->second];
  };

  auto per_view = [&](const char* name, bool is_alpha) {
    const auto rows = read_rows(dir / name, nullptr);
    for (const auto& row : rows) {
      Draw& d = locate(row.at(0), dir / name);
      auto& dst = is_alpha ? d.alpha : d.beta;
      for (std::size_t k = 1; k < row.size(); ++k) dst.push_back(parse_double(row[k], dir / name));
    }
  };
  per_view("alpha.csv", true);
  per_view("beta.csv", false);
  for (const auto& row : read_rows(dir / "psi.csv", nullptr)) {
    locate(row.at(0), dir / "psi.csv").psi = parse_double(row.at(1), dir / "psi.csv");
  }
  for (const auto& row : read_rows(dir / "loglik.csv", nullptr)) {
    locate(row.at(0), dir / "loglik.csv").loglik = parse_double(row.at(1), dir / "loglik.csv");
  }
  std::size_t p = 0;
  for (const auto& row : read_rows(dir / "hypers.csv", &header)) {
    const fs::path f = dir / "hypers.csv";
    if (row.size() < 5) throw DataError("short row in hypers.csv");
    Draw& d = locate(row[0], f);
    d.mu_alpha = parse_double(row[1], f);
    d.sigma2_alpha = parse_double(row[2], f);
    d.mu_beta = parse_double(row[3], f);
    d.sigma2_beta = parse_double(row[4], f);
    p = row.size() - 5;
    d.base_mean.set_size(p);
    for (std::size_t r = 0; r < p; ++r) d.base_mean(r) = parse_double(row[5 + r], f);
  }
  if (p == 0) throw DataError("hypers.csv carries no base mean columns");
  for (Draw& d : draws) d.Z.zeros(n, p);
  for (const auto& row : read_rows(dir / "coords.csv", nullptr)) {
    const fs::path f = dir / "coords.csv";
    if (row.size() != 4) throw DataError("coords.csv rows need 4 fields");
    Draw& d = locate(row[0], f);
    const std::size_t i = parse_size(row[1], f), r = parse_size(row[2], f);
    if (i < 1 || i > n || r < 1 || r > p) throw DataError("coords.csv index out of range");
    d.Z(i - 1, r - 1) = parse_double(row[3], f);
  }
  {
    std::ifstream in(dir / "components.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed components.jsonl: ") + e.what());
      }
      const auto it = index.find(j.at("iteration").get<std::size_t>());
      if (it == index.end()) throw DataError("iteration mismatch in components.jsonl");
      Draw& d = draws[it->second];
      for (const auto& v : j.at("mu")) d.mu.push_back(arma::conv_to<arma::vec>::from(v.get<std::vector<double>>()));
      for (const auto& v : j.at("sigma2")) {
        d.sigma2.push_back(arma::conv_to<arma::vec>::from(v.get<std::vector<double>>()));
      }
      d.counts = j.at("counts").get<std::vector<std::size_t>>();
    }
  }
  for (const Draw& d : draws) {
    if (d.mu.empty() || d.mu.size() != d.sigma2.size() || d.alpha.empty() ||
        d.alpha.size() != d.beta.size()) {
      throw DataError("trace files disagree on iteration " + std::to_string(d.iteration));
    }
  }
  return draws;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return out.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

namespace {
nlohmann::json rates(const AcceptanceCounter& c) {
  return {{"accepted", c.accepted}, {"proposed", c.proposed}, {"rate", c.rate()}};
}
}  // namespace

nlohmann::json to_json(const ChainDiagnostics& d) {
  nlohmann::json alpha = nlohmann::json::array(), beta = nlohmann::json::array();
  for (const auto& c : d.alpha) alpha.push_back(rates(c));
  for (const auto& c : d.beta) beta.push_back(rates(c));
  return {{"kernel", d.kernel},
          {"sweeps", d.sweeps},
          {"procrustes_rejections", d.procrustes_rejections},
          {"coordinates", rates(d.coordinates)},
          {"alpha", alpha},
          {"beta", beta},
          {"mu_alpha", rates(d.mu_alpha)},
          {"sigma2_alpha", rates(d.sigma2_alpha)},
          {"mu_beta", rates(d.mu_beta)},
          {"sigma2_beta", rates(d.sigma2_beta)},
          {"step_alpha", d.step_alpha},
          {"step_beta", d.step_beta}};
}

nlohmann::json to_json(const MCMCConfig& mc) {
  nlohmann::json j{{"iterations", mc.iterations},
                   {"burn_in", mc.burn_in},
                   {"thin", mc.thin},
                   {"seed", mc.seed},
                   {"stream", mc.stream},
                   {"p", mc.p},
                   {"procrustes_guard", mc.procrustes_guard},
                   {"procrustes_threshold", mc.procrustes_threshold},
                   {"guard_rule", mc.guard_rule == GuardRule::reject_below ? "reject_below"
                                                                           : "reject_above"},
                   {"rw_step_alpha", mc.rw_step_alpha},
                   {"rw_step_beta", mc.rw_step_beta},
                   {"adapt_steps", mc.adapt_steps},
                   {"kernel", mc.kernel},
                   {"birth", mc.birth == BirthRule::exact_posterior ? "exact" : "two_step"},
                   {"proposal", mc.proposal == ProposalRule::recentred ? "recentred" : "literal"},
                   {"likelihood_enabled", mc.likelihood_enabled}};
  j["alpha_ref_override"] = mc.alpha_ref_override ? nlohmann::json(*mc.alpha_ref_override) : nullptr;
  return j;
}

MCMCConfig mcmc_config_from_json(const nlohmann::json& j) {
  try {
    MCMCConfig mc;
    mc.iterations = j.value("iterations", mc.iterations);
    mc.burn_in = j.value("burn_in", mc.burn_in);
    mc.thin = j.value("thin", mc.thin);
    mc.seed = j.value("seed", mc.seed);
    mc.stream = j.value("stream", mc.stream);
    mc.p = j.value("p", mc.p);
    mc.procrustes_guard = j.value("procrustes_guard", mc.procrustes_guard);
    mc.procrustes_threshold = j.value("procrustes_threshold", mc.procrustes_threshold);
    const std::string rule = j.value("guard_rule", std::string("reject_below"));
    if (rule == "reject_below") {
      mc.guard_rule = GuardRule::reject_below;
    } else if (rule == "reject_above") {
      mc.guard_rule = GuardRule::reject_above;
    } else {
      throw UsageError("guard_rule must be reject_below or reject_above");
    }
    mc.rw_step_alpha = j.value("rw_step_alpha", mc.rw_step_alpha);
    mc.rw_step_beta = j.value("rw_step_beta", mc.rw_step_beta);
    mc.adapt_steps = j.value("adapt_steps", mc.adapt_steps);
    mc.kernel = j.value("kernel", mc.kernel);
    const std::string birth = j.value("birth", std::string("exact"));
    if (birth == "exact") {
      mc.birth = BirthRule::exact_posterior;
    } else if (birth == "two_step") {
      mc.birth = BirthRule::two_step;
    } else {
      throw UsageError("birth must be exact or two_step");
    }
    const std::string proposal = j.value("proposal", std::string("recentred"));
    if (proposal == "recentred") {
      mc.proposal = ProposalRule::recentred;
    } else if (proposal == "literal") {
      mc.proposal = ProposalRule::literal;
    } else {
      throw UsageError("proposal must be recentred or literal");
    }
    mc.likelihood_enabled = j.value("likelihood_enabled", mc.likelihood_enabled);
    if (j.contains("alpha_ref_override") && !j.at("alpha_ref_override").is_null()) {
      mc.alpha_ref_override = j.at("alpha_ref_override").get<double>();
    }
    return mc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed MCMC config: ") + e.what());
  }
}

nlohmann::json summary_to_json(const PosteriorSummary& s) {
  nlohmann::json j;
  std::vector<std::size_t> part;
  for (std::size_t l : s.estimate.partition) part.push_back(l + 1);
  j["G_hat"] = s.estimate.G_hat;
  j["partition"] = part;
  j["vi_loss"] = s.estimate.loss;
  j["draws"] = s.psm.draws_used;
  j["G_mode"] = s.G_mode;
  nlohmann::json freq = nlohmann::json::object();
  for (auto [G, c] : s.G_frequency) freq[std::to_string(G)] = c;
  j["G_frequency"] = freq;
  nlohmann::json clusters = nlohmann::json::array();
  for (std::size_t g = 0; g < s.clusters.mu_hat.size(); ++g) {
    clusters.push_back({{"mu", arma::conv_to<std::vector<double>>::from(s.clusters.mu_hat[g])},
                        {"sigma2", arma::conv_to<std::vector<double>>::from(s.clusters.sigma2_hat[g])},
                        {"pi", s.clusters.pi_hat[g]}});
  }
  j["clusters"] = clusters;
  j["clusters_identified"] = s.clusters_identified;
  j["retained_draws"] = s.clusters.retained_draws;
  std::vector<std::vector<double>> Z(s.coordinates.mean.n_rows);
  for (std::size_t i = 0; i < Z.size(); ++i) {
    Z[i] = arma::conv_to<std::vector<double>>::from(arma::rowvec(s.coordinates.mean.row(i)));
  }
  j["mean_coordinates"] = Z;
  double mean_corr = 0.0;
  for (double c : s.coordinates.correlations) mean_corr += c;
  if (!s.coordinates.correlations.empty()) mean_corr /= double(s.coordinates.correlations.size());
  j["mean_draw_procrustes"] = mean_corr;
  j["ari"] = s.ari ? nlohmann::json(*s.ari) : nullptr;
  j["procrustes_vs_truth"] = s.procrustes_vs_truth ? nlohmann::json(*s.procrustes_vs_truth) : nullptr;
  return j;
}

void write_psm_csv(const fs::path& path, const arma::mat& psm) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < psm.n_rows; ++i) {
    for (std::size_t j = 0; j < psm.n_cols; ++j) out << (j ? "," : "") << format_double(psm(i, j));
    out << '\n';
  }
}

}  // namespace ilpcm
