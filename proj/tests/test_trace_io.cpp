#include "ilpcm/errors.hpp"
#include "ilpcm/trace_io.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <charconv>
#include <cmath>

using namespace ilpcm;

TEST_CASE("doubles round-trip through their text form") {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform() * 40 - 20);
    const std::string s = format_double(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    CHECK(y == x);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("SHA-256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testutil::TempDir tmp("sha");
  testutil::write_text(tmp / "f.txt", "abc");
  CHECK(sha256_file(tmp / "f.txt") == sha256_hex("abc"));
}

TEST_CASE("traces round-trip exactly") {
  const Multiplex m = testutil::random_multiplex(8, 2, 0.3, 3);
  MCMCConfig mc;
  mc.iterations = 120;
  mc.burn_in = 60;
  mc.thin = 6;
  const ChainTrace tr = run_chain(m, PriorConfig::defaults(8), mc);
  testutil::TempDir tmp("trace");
  CHECK_FALSE(has_trace(tmp.path()));
  write_trace(tmp.path(), tr.draws, 2);
  CHECK(has_trace(tmp.path()));
  const std::vector<Draw> back = read_trace(tmp.path());
  REQUIRE(back.size() == tr.draws.size());
  for (std::size_t t = 0; t < back.size(); ++t) {
    const Draw& a = tr.draws[t];
    const Draw& b = back[t];
    CHECK(a.iteration == b.iteration);
    CHECK(arma::approx_equal(a.Z, b.Z, "absdiff", 0.0));
    CHECK(a.labels == b.labels);
    CHECK(a.counts == b.counts);
    CHECK(a.alpha == b.alpha);
    CHECK(a.beta == b.beta);
    CHECK(a.psi == b.psi);
    CHECK(a.loglik == b.loglik);
    CHECK(a.sigma2_beta == b.sigma2_beta);
    REQUIRE(a.G() == b.G());
    for (std::size_t g = 0; g < a.G(); ++g) {
      CHECK(arma::approx_equal(a.mu[g], b.mu[g], "absdiff", 0.0));
      CHECK(arma::approx_equal(a.sigma2[g], b.sigma2[g], "absdiff", 0.0));
    }
    CHECK(arma::approx_equal(a.base_mean, b.base_mean, "absdiff", 0.0));
  }
  for (const auto& name : trace_file_names()) CHECK(std::filesystem::exists(tmp / name));
  std::filesystem::remove(tmp / "psi.csv");
  CHECK_THROWS_AS(read_trace(tmp.path()), DataError);
}

TEST_CASE("configuration JSON round trip") {
  MCMCConfig mc;
  mc.iterations = 321;
  mc.burn_in = 21;
  mc.thin = 3;
  mc.seed = 99;
  mc.guard_rule = GuardRule::reject_above;
  mc.birth = BirthRule::two_step;
  mc.proposal = ProposalRule::literal;
  mc.alpha_ref_override = 1.25;
  mc.procrustes_guard = false;
  const MCMCConfig back = mcmc_config_from_json(to_json(mc));
  CHECK(back.iterations == 321);
  CHECK(back.burn_in == 21);
  CHECK(back.thin == 3);
  CHECK(back.seed == 99);
  CHECK(back.guard_rule == GuardRule::reject_above);
  CHECK(back.birth == BirthRule::two_step);
  CHECK(back.proposal == ProposalRule::literal);
  CHECK(back.alpha_ref_override == 1.25);
  CHECK_FALSE(back.procrustes_guard);
  CHECK(mcmc_config_from_json(nlohmann::json::object()).iterations == MCMCConfig{}.iterations);
}

TEST_CASE("summary JSON reports labels one-based") {
  PosteriorSummary s;
  s.estimate.partition = {0, 0, 1};
  s.estimate.G_hat = 2;
  s.G_mode = 2;
  s.G_frequency[2] = 5;
  s.coordinates.mean = arma::zeros(3, 2);
  s.ari = 0.75;
  const nlohmann::json j = summary_to_json(s);
  CHECK(j.at("partition") == nlohmann::json::array({1, 1, 2}));
  CHECK(j.at("G_hat") == 2);
  CHECK(j.at("ari") == 0.75);
}
