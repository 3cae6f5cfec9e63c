#pragma once

#include "ilpcm/postprocess.hpp"
#include "ilpcm/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace ilpcm {

// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

// Streams draws into a trace directory as they are produced:
// alpha.csv, beta.csv, psi.csv, G.csv, loglik.csv, hypers.csv, labels.csv,
// coords.csv (iteration,node,dim,value) and components.jsonl.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& dir, std::size_t n, std::size_t K, std::size_t p);
  void write(const Draw& d);
  void flush();

 private:
  std::size_t n_, K_, p_;
  std::ofstream alpha_, beta_, psi_, G_, loglik_, hypers_, labels_, coords_, components_;
};

void write_trace(const std::filesystem::path& dir, const std::vector<Draw>& draws, std::size_t K);
// Throws DataError when files are missing or inconsistent.
std::vector<Draw> read_trace(const std::filesystem::path& dir);
bool has_trace(const std::filesystem::path& dir);

// Names of the files making up a trace, in a fixed order.
const std::vector<std::string>& trace_file_names();

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json to_json(const ChainDiagnostics& d);
nlohmann::json to_json(const MCMCConfig& mc);
MCMCConfig mcmc_config_from_json(const nlohmann::json& j);

// summary.json content. Labels are reported 1-based.
nlohmann::json summary_to_json(const PosteriorSummary& s);
void write_psm_csv(const std::filesystem::path& path, const arma::mat& psm);

}  // namespace ilpcm
