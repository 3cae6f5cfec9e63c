#include "ilpcm/cli.hpp"

#include "ilpcm/errors.hpp"
#include "ilpcm/postprocess.hpp"
#include "ilpcm/svg.hpp"
#include "ilpcm/trace_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace ilpcm::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path output_root() {
  if (const char* env = std::getenv("ILPCM_OUTPUT_ROOT"); env && *env) return fs::path(env);
  return fs::path("ilpcm-runs");
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string chain_dir_name(std::size_t c) {
  std::ostringstream s;
  s << "chain" << c + 1;
  return s.str();
}

std::string rep_dir_name(std::size_t r) {
  std::ostringstream s;
  s << "rep" << std::setw(2) << std::setfill('0') << r + 1;
  return s.str();
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

Multiplex load_input(const fs::path& path, const std::string& format) {
  require_file(path, "data file");
  if (format == "edge-list") return load_multiplex(path, InputFormat::edge_list_csv);
  if (format == "adjacency-json") return load_multiplex(path, InputFormat::adjacency_json);
  if (format != "auto") throw UsageError("unknown --format '" + format + "'");
  const json j = read_json(path);
  if (j.is_object() && j.contains("edges")) return load_multiplex(path, InputFormat::edge_list_csv);
  return multiplex_from_json(j);
}

// Relative path -> digest for every regular file below dir except run.json.
json artifact_digests(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "run.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  json out = json::object();
  for (const auto& f : files) out[fs::relative(f, dir).generic_string()] = sha256_file(f);
  return out;
}

json argv_json(int argc, const char* const* argv) {
  json a = json::array();
  for (int i = 0; i < argc; ++i) a.push_back(argv[i]);
  return a;
}

std::optional<TruthInfo> truth_info(const fs::path& path) {
  const GroundTruth gt = load_truth_json(path);
  return TruthInfo{gt.labels, gt.Z};
}

// Pools the chains of a run directory, writes summary.json and psm.csv.
PosteriorSummary summarize_chains(const fs::path& run_dir, const std::vector<std::vector<Draw>>& chains,
                                  const std::optional<TruthInfo>& truth) {
  std::vector<Draw> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  if (pooled.empty()) throw DataError("run has no posterior draws: " + run_dir.string());
  const arma::mat reference = chains.front()[max_loglik_draw(chains.front())].Z;
  PosteriorSummary s = summarize_posterior(pooled, truth, reference);
  json j = summary_to_json(s);
  j["chains"] = chains.size();
  j["alignment_reference"] = truth ? "truth" : "chain1_max_loglik";
  write_json(run_dir / "summary.json", j);
  write_psm_csv(run_dir / "psm.csv", s.psm.matrix);
  return s;
}

void print_summary(std::ostream& out, const PosteriorSummary& s) {
  out << "draws: " << s.psm.draws_used << "\n";
  out << "G_hat: " << s.estimate.G_hat << " (VI loss " << s.estimate.loss << ")\n";
  out << "G mode in trace: " << s.G_mode << "\n";
  if (s.ari) out << "ARI vs truth: " << *s.ari << "\n";
  if (s.procrustes_vs_truth) out << "Procrustes vs truth: " << *s.procrustes_vs_truth << "\n";
}

// --- fit ----------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string format = "auto";
  std::string config;
  std::optional<std::size_t> iters, burnin, thin, p;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t chains = 1;
  std::string kernel;
  std::optional<double> threshold;
  bool no_guard = false;
  std::string guard_rule;
  std::string birth;
  std::string truth;
  std::optional<double> alpha_ref;
  bool quiet = false;
};

int cmd_fit(const FitArgs& a, int argc, const char* const* argv, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Multiplex m = load_input(a.data, a.format);

  json config = json::object();
  if (!a.config.empty()) {
    require_file(a.config, "config file");
    config = read_json(a.config);
  }
  MCMCConfig mc = mcmc_config_from_json(config.value("mcmc", json::object()));
  if (a.iters) mc.iterations = *a.iters;
  if (a.burnin) mc.burn_in = *a.burnin;
  if (a.thin) mc.thin = *a.thin;
  if (a.seed) mc.seed = *a.seed;
  if (a.p) mc.p = *a.p;
  if (!a.kernel.empty()) mc.kernel = a.kernel;
  if (a.threshold) mc.procrustes_threshold = *a.threshold;
  if (a.no_guard) mc.procrustes_guard = false;
  if (!a.guard_rule.empty()) {
    if (a.guard_rule == "below") {
      mc.guard_rule = GuardRule::reject_below;
    } else if (a.guard_rule == "above") {
      mc.guard_rule = GuardRule::reject_above;
    } else {
      throw UsageError("--guard-rule must be 'below' or 'above'");
    }
  }
  if (!a.birth.empty()) {
    if (a.birth == "exact") {
      mc.birth = BirthRule::exact_posterior;
    } else if (a.birth == "two-step") {
      mc.birth = BirthRule::two_step;
    } else {
      throw UsageError("--birth must be 'exact' or 'two-step'");
    }
  }
  if (a.alpha_ref) mc.alpha_ref_override = *a.alpha_ref;
  mc.validate();
  kernels::select(mc.kernel);  // fail early on an unusable kernel name

  PriorConfig prior = config.contains("prior") ? prior_config_from_json(config.at("prior"))
                                               : PriorConfig::defaults(m.n(), mc.p);
  prior.p = mc.p;
  prior = prior.for_network(m.n());
  prior.validate();

  std::optional<TruthInfo> truth;
  if (!a.truth.empty()) {
    require_file(a.truth, "truth file");
    truth = truth_info(a.truth);
    if (truth->labels.size() != m.n()) throw DataError("truth file does not match the network");
  }

  const fs::path dir = a.out.empty() ? output_root() / ("fit-seed" + std::to_string(mc.seed))
                                     : fs::path(a.out);
  fs::create_directories(dir);
  save_adjacency_json(m, dir / "data.json");
  if (!a.truth.empty()) fs::copy_file(a.truth, dir / "truth.json", fs::copy_options::overwrite_existing);

  std::vector<ChainTrace> traces(a.chains);
  std::vector<std::exception_ptr> errors(a.chains);
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < a.chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        MCMCConfig local = mc;
        local.stream = mc.stream + c;
        TraceWriter writer(dir / chain_dir_name(c), m.n(), m.K(), mc.p);
        traces[c] = run_chain(m, prior, local, [&](const Draw& d) { writer.write(d); });
        writer.flush();
        write_json(dir / chain_dir_name(c) / "diagnostics.json", to_json(traces[c].diagnostics));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const double sampling_seconds = seconds_since(t0);

  std::vector<std::vector<Draw>> draws;
  for (auto& t : traces) draws.push_back(std::move(t.draws));
  const PosteriorSummary s = summarize_chains(dir, draws, truth);

  json manifest;
  manifest["command"] = "fit";
  manifest["argv"] = argv_json(argc, argv);
  manifest["version"] = kVersion;
  manifest["seed"] = mc.seed;
  manifest["chains"] = a.chains;
  manifest["config"] = {{"prior", to_json(prior)}, {"mcmc", to_json(mc)}};
  manifest["kernel"] = traces.front().diagnostics.kernel;
  json inputs = {{"data", {{"path", a.data}, {"sha256", sha256_file(a.data)}}}};
  if (!a.config.empty()) inputs["config"] = {{"path", a.config}, {"sha256", sha256_file(a.config)}};
  if (!a.truth.empty()) inputs["truth"] = {{"path", a.truth}, {"sha256", sha256_file(a.truth)}};
  manifest["inputs"] = inputs;
  manifest["artifacts"] = artifact_digests(dir);
  manifest["timing"] = {{"sampling_seconds", sampling_seconds}, {"total_seconds", seconds_since(t0)}};
  write_json(dir / "run.json", manifest);

  if (!a.quiet) {
    out << "run directory: " << dir.string() << "\n";
    print_summary(out, s);
  }
  return 0;
}

// --- summarize --------------------------------------------------------------------

int cmd_summarize(const std::string& run, const std::string& truth_path, std::ostream& out) {
  const fs::path dir(run);
  require_file(dir, "run directory");
  if (!fs::exists(dir / "run.json")) throw DataError("not a run directory (no run.json): " + run);
  const json manifest = read_json(dir / "run.json");
  const std::size_t chains = manifest.value("chains", std::size_t{1});
  std::vector<std::vector<Draw>> draws;
  for (std::size_t c = 0; c < chains; ++c) {
    const fs::path cd = dir / chain_dir_name(c);
    if (!has_trace(cd)) throw DataError("run directory lacks traces: " + cd.string());
    draws.push_back(read_trace(cd));
  }
  std::optional<TruthInfo> truth;
  if (!truth_path.empty()) {
    require_file(truth_path, "truth file");
    truth = truth_info(truth_path);
  } else if (fs::exists(dir / "truth.json")) {
    truth = truth_info(dir / "truth.json");
  }
  print_summary(out, summarize_chains(dir, draws, truth));
  return 0;
}

// --- plot ---------------------------------------------------------------------------

int cmd_plot(const std::string& run, const std::string& categories, const std::string& out_dir,
             std::ostream& out) {
  const fs::path dir(run);
  require_file(dir, "run directory");
  const fs::path figs = out_dir.empty() ? dir / "figures" : fs::path(out_dir);

  if (fs::exists(dir / "study.json")) {
    const json study = read_json(dir / "study.json");
    std::vector<std::pair<std::string, std::vector<double>>> ari, proc;
    for (const auto& cell : study.at("cells")) {
      std::ostringstream label;
      label << cell.at("scenario").get<std::string>() << " n" << cell.at("n").get<std::size_t>()
            << " G" << cell.at("G").get<std::size_t>();
      std::vector<double> a, p;
      for (const auto& r : cell.at("replicates")) {
        a.push_back(r.at("ari").get<double>());
        p.push_back(r.at("procrustes").get<double>());
      }
      ari.emplace_back(label.str(), a);
      proc.emplace_back(label.str(), p);
    }
    fs::create_directories(figs);
    svg::write_file(figs / "ari.svg", svg::box_summary(ari, "Adjusted Rand index", "ARI"));
    svg::write_file(figs / "procrustes.svg",
                    svg::box_summary(proc, "Procrustes correlation", "correlation"));
    out << "wrote 2 figures to " << figs.string() << "\n";
    return 0;
  }

  if (!fs::exists(dir / "summary.json")) throw DataError("missing summary.json in " + run);
  if (!fs::exists(dir / "data.json")) throw DataError("missing data.json in " + run);
  const json summary = read_json(dir / "summary.json");
  const Multiplex m = load_adjacency_json(dir / "data.json");
  const auto rows = summary.at("mean_coordinates").get<std::vector<std::vector<double>>>();
  if (rows.size() != m.n()) throw DataError("summary does not match data.json");
  const std::size_t p = rows.empty() ? 0 : rows.front().size();
  arma::mat Z(m.n(), p);
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t r = 0; r < p; ++r) Z(i, r) = rows[i].at(r);
  }
  std::vector<std::size_t> clusters;
  for (std::size_t l : summary.at("partition").get<std::vector<std::size_t>>()) clusters.push_back(l - 1);

  std::optional<svg::NodeCategories> shapes;
  if (!categories.empty()) {
    require_file(categories, "categories file");
    std::vector<std::string> names = m.node_names();
    if (names.empty()) {
      for (std::size_t i = 0; i < m.n(); ++i) names.push_back(std::to_string(i + 1));
    }
    shapes = svg::read_categories_csv(categories, names);
  }
  fs::create_directories(figs);
  for (std::size_t k = 0; k < m.K(); ++k) {
    const std::string title = "Latent space: " + m.view(k).name;
    svg::write_file(figs / ("view" + std::to_string(k + 1) + ".svg"),
                    svg::latent_space(Z, clusters, m.view(k).adjacency, title,
                                      shapes ? &*shapes : nullptr));
  }
  std::map<std::size_t, std::size_t> freq;
  for (const auto& [G, c] : summary.at("G_frequency").items()) {
    freq[std::stoul(G)] = c.get<std::size_t>();
  }
  svg::write_file(figs / "G_frequency.svg", svg::g_frequency(freq, "Sampled number of clusters"));
  out << "wrote " << m.K() + 1 << " figures to " << figs.string() << "\n";
  return 0;
}

// --- simulate -------------------------------------------------------------------------

int cmd_simulate(const std::string& scenario, ScenarioSpec spec, std::size_t reps,
                 const std::string& out_dir, int argc, const char* const* argv, std::ostream& out) {
  spec.scenario = parse_scenario(scenario);
  spec.validate();
  if (reps < 1) throw UsageError("--reps must be >= 1");
  const fs::path dir = out_dir.empty() ? output_root() / ("sim-" + scenario + "-seed" +
                                                          std::to_string(spec.seed))
                                       : fs::path(out_dir);
  fs::create_directories(dir);
  for (std::size_t r = 0; r < reps; ++r) {
    ScenarioSpec s = spec;
    s.seed = spec.seed + r;
    const SimulatedData sim = generate(s);
    const fs::path rd = dir / rep_dir_name(r);
    fs::create_directories(rd);
    save_adjacency_json(sim.multiplex, rd / "data.json");
    save_truth_json(sim.truth, rd / "truth.json");
  }
  json manifest;
  manifest["command"] = "simulate";
  manifest["argv"] = argv_json(argc, argv);
  manifest["version"] = kVersion;
  manifest["seed"] = spec.seed;
  manifest["config"] = {{"scenario", to_string(spec.scenario)}, {"n", spec.n}, {"K", spec.K},
                        {"G", spec.G}, {"p", spec.p}, {"reps", reps}};
  manifest["inputs"] = json::object();
  manifest["artifacts"] = artifact_digests(dir);
  write_json(dir / "run.json", manifest);
  out << "wrote " << reps << " datasets to " << dir.string() << "\n";
  return 0;
}

// --- replicate-study ----------------------------------------------------------------------

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct StudyArgs {
  std::string scenario = "I";
  std::size_t n = 25, K = 3, G = 2, reps = 10;
  std::size_t iters = 20000, burnin = 5000, thin = 10;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool full = false;
  std::string out;
  std::string kernel = "auto";
};

int cmd_study(const StudyArgs& a, int argc, const char* const* argv, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Cell {
    Scenario scenario;
    std::size_t n, K, G;
  };
  std::vector<Cell> cells;
  MCMCConfig mc;
  mc.kernel = a.kernel;
  if (a.full) {
    for (Scenario s : {Scenario::I, Scenario::II, Scenario::III, Scenario::IV}) {
      for (auto [n, K] : {std::pair<std::size_t, std::size_t>{25, 3}, {50, 5}}) {
        for (std::size_t G : {2, 3, 4}) cells.push_back({s, n, K, G});
      }
    }
    mc.iterations = 60000;
    mc.burn_in = 10000;
    mc.thin = a.thin;
  } else {
    std::vector<Scenario> scen;
    if (a.scenario == "all") {
      scen = {Scenario::I, Scenario::II, Scenario::III, Scenario::IV};
    } else {
      scen = {parse_scenario(a.scenario)};
    }
    for (Scenario s : scen) cells.push_back({s, a.n, a.K, a.G});
    mc.iterations = a.iters;
    mc.burn_in = a.burnin;
    mc.thin = a.thin;
  }
  mc.seed = a.seed;
  mc.validate();
  if (a.reps < 1 || a.jobs < 1) throw UsageError("--reps and --jobs must be >= 1");

  const fs::path dir = a.out.empty() ? output_root() / ("study-seed" + std::to_string(a.seed))
                                     : fs::path(a.out);
  fs::create_directories(dir);
  json jcells = json::array();
  for (const Cell& cell : cells) {
    ScenarioSpec spec;
    spec.scenario = cell.scenario;
    spec.n = cell.n;
    spec.K = cell.K;
    spec.G = cell.G;
    spec.seed = a.seed;
    std::vector<ReplicateOutcome> outcomes(a.reps);
    std::vector<std::exception_ptr> errors(a.reps);
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
      for (;;) {
        std::size_t r;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= a.reps) return;
          r = next++;
        }
        try {
          outcomes[r] = run_replicate(spec, r, mc);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::min(a.jobs, a.reps); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    std::vector<double> aris, procs;
    std::map<std::size_t, std::size_t> ghat;
    json reps = json::array();
    for (const auto& o : outcomes) {
      aris.push_back(o.ari);
      procs.push_back(o.procrustes);
      ++ghat[o.G_hat];
      reps.push_back({{"replicate", o.replicate + 1}, {"data_seed", o.data_seed},
                      {"chain_seed", o.chain_seed}, {"ari", o.ari}, {"procrustes", o.procrustes},
                      {"G_hat", o.G_hat}, {"G_mode", o.G_mode},
                      {"data_attempts", o.data_attempts}, {"seconds", o.seconds}});
    }
    json jg = json::object();
    for (auto [G, c] : ghat) jg[std::to_string(G)] = c;
    const double mari = median(aris), mproc = median(procs);
    jcells.push_back({{"scenario", to_string(cell.scenario)}, {"n", cell.n}, {"K", cell.K},
                      {"G", cell.G}, {"median_ari", mari}, {"median_procrustes", mproc},
                      {"G_hat_frequency", jg}, {"replicates", reps}});
    out << "scenario " << to_string(cell.scenario) << " n=" << cell.n << " K=" << cell.K
        << " G=" << cell.G << ": median ARI " << mari << ", median Procrustes " << mproc
        << ", G_hat==G in " << ghat[cell.G] << "/" << a.reps << "\n";
  }
  json study;
  study["cells"] = jcells;
  study["config"] = {{"mcmc", to_json(mc)}, {"reps", a.reps}, {"full", a.full}};
  write_json(dir / "study.json", study);

  json manifest;
  manifest["command"] = "replicate-study";
  manifest["argv"] = argv_json(argc, argv);
  manifest["version"] = kVersion;
  manifest["seed"] = a.seed;
  manifest["config"] = study["config"];
  manifest["inputs"] = json::object();
  manifest["artifacts"] = artifact_digests(dir);
  manifest["timing"] = {{"total_seconds", seconds_since(t0)}};
  write_json(dir / "run.json", manifest);
  return 0;
}

}  // namespace

ReplicateOutcome run_replicate(ScenarioSpec spec, std::size_t replicate, const MCMCConfig& mc_in,
                               std::optional<PriorConfig> prior) {
  const auto t0 = std::chrono::steady_clock::now();
  ReplicateOutcome o;
  o.replicate = replicate;
  spec.seed = spec.seed + replicate;
  o.data_seed = spec.seed;
  const SimulatedData sim = generate(spec);
  o.data_attempts = sim.truth.attempts;

  MCMCConfig mc = mc_in;
  mc.seed = mc_in.seed + 1000 + replicate;
  mc.p = spec.p;
  o.chain_seed = mc.seed;
  const PriorConfig cfg = prior ? *prior : PriorConfig::defaults(spec.n, spec.p);
  const ChainTrace trace = run_chain(sim.multiplex, cfg, mc);
  const PosteriorSummary s =
      summarize_posterior(trace.draws, TruthInfo{sim.truth.labels, sim.truth.Z});
  o.ari = *s.ari;
  o.procrustes = *s.procrustes_vs_truth;
  o.G_hat = s.estimate.G_hat;
  o.G_mode = s.G_mode;
  o.seconds = seconds_since(t0);
  return o;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infinite latent position cluster model for multiplex networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run MCMC on a multiplex and summarize the posterior");
  fit_cmd->add_option("--data", fit.data, "Adjacency JSON or edge-list manifest JSON")->required();
  fit_cmd->add_option("--format", fit.format, "auto, adjacency-json or edge-list");
  fit_cmd->add_option("--config", fit.config, "JSON with optional 'prior' and 'mcmc' objects");
  fit_cmd->add_option("--iters", fit.iters, "Total sweeps");
  fit_cmd->add_option("--burnin", fit.burnin, "Discarded sweeps");
  fit_cmd->add_option("--thin", fit.thin, "Keep every n-th sweep");
  fit_cmd->add_option("--seed", fit.seed, "RNG seed");
  fit_cmd->add_option("--p", fit.p, "Latent dimension");
  fit_cmd->add_option("--out", fit.out, "Run directory");
  fit_cmd->add_option("--chains", fit.chains, "Independent chains run concurrently")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--kernel", fit.kernel, "auto, scalar or avx2");
  fit_cmd->add_option("--threshold", fit.threshold, "Procrustes guard threshold");
  fit_cmd->add_flag("--no-guard", fit.no_guard, "Disable the Procrustes guard");
  fit_cmd->add_option("--guard-rule", fit.guard_rule, "below (default) or above");
  fit_cmd->add_option("--birth", fit.birth, "exact (default) or two-step");
  fit_cmd->add_option("--truth", fit.truth, "truth.json for ARI / Procrustes metrics");
  fit_cmd->add_option("--alpha-ref", fit.alpha_ref, "Fixed intercept of the reference view");
  fit_cmd->add_flag("--quiet", fit.quiet, "No report on stdout");

  auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic multiplexes");
  std::string sim_scenario;
  ScenarioSpec sim_spec;
  std::size_t sim_reps = 1;
  std::string sim_out;
  sim_cmd->add_option("--scenario", sim_scenario, "I, II, III or IV")->required();
  sim_cmd->add_option("--n", sim_spec.n, "Nodes");
  sim_cmd->add_option("--K", sim_spec.K, "Views");
  sim_cmd->add_option("--G", sim_spec.G, "Clusters");
  sim_cmd->add_option("--p", sim_spec.p, "Latent dimension");
  sim_cmd->add_option("--seed", sim_spec.seed, "Seed of the first replicate");
  sim_cmd->add_option("--reps", sim_reps, "Number of datasets");
  sim_cmd->add_option("--out", sim_out, "Output directory");

  auto* sum_cmd = app.add_subcommand("summarize", "Recompute summary.json from stored traces");
  std::string sum_run, sum_truth;
  sum_cmd->add_option("run", sum_run, "Run directory")->required();
  sum_cmd->add_option("--truth", sum_truth, "truth.json for ARI / Procrustes metrics");

  auto* plot_cmd = app.add_subcommand("plot", "Write SVG figures for a run or study directory");
  std::string plot_run, plot_cat, plot_out;
  plot_cmd->add_option("run", plot_run, "Run or study directory")->required();
  plot_cmd->add_option("--categories", plot_cat, "CSV node,category for point shapes");
  plot_cmd->add_option("--out", plot_out, "Figure directory (default <run>/figures)");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("replicate-study", "Simulate, fit and score replicates");
  study_cmd->add_option("--scenario", study.scenario, "I, II, III, IV or all");
  study_cmd->add_option("--n", study.n, "Nodes");
  study_cmd->add_option("--K", study.K, "Views");
  study_cmd->add_option("--G", study.G, "Clusters");
  study_cmd->add_option("--reps", study.reps, "Replicates per cell");
  study_cmd->add_option("--iters", study.iters, "Total sweeps");
  study_cmd->add_option("--burnin", study.burnin, "Discarded sweeps");
  study_cmd->add_option("--thin", study.thin, "Keep every n-th sweep");
  study_cmd->add_option("--seed", study.seed, "Base seed");
  study_cmd->add_option("--jobs", study.jobs, "Replicates fitted concurrently");
  study_cmd->add_option("--kernel", study.kernel, "auto, scalar or avx2");
  study_cmd->add_flag("--full", study.full,
                      "Every scenario, (n,K) in {(25,3),(50,5)}, G in {2,3,4}, 60000/10000 sweeps");
  study_cmd->add_option("--out", study.out, "Study directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, argc, argv, out);
    if (*sim_cmd) return cmd_simulate(sim_scenario, sim_spec, sim_reps, sim_out, argc, argv, out);
    if (*sum_cmd) return cmd_summarize(sum_run, sum_truth, out);
    if (*plot_cmd) return cmd_plot(plot_run, plot_cat, plot_out, out);
    if (*study_cmd) return cmd_study(study, argc, argv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 2;
}

}  // namespace ilpcm::cli
