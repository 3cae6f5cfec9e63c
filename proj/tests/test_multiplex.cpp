#include "ilpcm/errors.hpp"
#include "ilpcm/multiplex.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace ilpcm;

namespace {

View make_view(const std::string& name, bool directed, arma::mat a) {
  return View{name, directed, std::move(a)};
}

}  // namespace

TEST_CASE("constructor validates the invariants") {
  arma::mat a(3, 3, arma::fill::zeros);
  a(0, 1) = 1;
  CHECK_NOTHROW(Multiplex({make_view("a", true, a)}, 0));

  arma::mat loop = a;
  loop(2, 2) = 1;
  try {
    Multiplex({make_view("a", true, loop)}, 0);
    FAIL("self-loop accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("self-loop") != std::string::npos);
  }
  arma::mat weighted = a;
  weighted(1, 2) = 2;
  CHECK_THROWS_AS(Multiplex({make_view("a", true, weighted)}, 0), DataError);
  CHECK_THROWS_AS(Multiplex({make_view("a", false, a)}, 0), DataError);  // asymmetric
  CHECK_THROWS_AS(Multiplex({make_view("a", true, arma::zeros(2, 2))}, 0), DataError);
  CHECK_THROWS_AS(Multiplex({make_view("a", true, a), make_view("b", true, arma::zeros(4, 4))}, 0),
                  DataError);
  CHECK_THROWS_AS(Multiplex({make_view("a", true, a)}, 1), DataError);
}

TEST_CASE("dyad sums, counts and density") {
  arma::mat a(4, 4, arma::fill::zeros);
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(2, 3) = 1;
  arma::mat u(4, 4, arma::fill::zeros);
  u(0, 2) = u(2, 0) = 1;
  const Multiplex m({make_view("d", true, a), make_view("u", false, u)}, 0);
  CHECK(m.dyad_sums(0)(0, 1) == 2.0);
  CHECK(m.dyad_sums(0)(3, 2) == 1.0);
  CHECK(m.dyad_sums(1)(2, 0) == 1.0);
  CHECK(m.multiplicity(0) == 2.0);
  CHECK(m.multiplicity(1) == 1.0);
  CHECK(m.dyad_count(0) == 12.0);
  CHECK(m.dyad_count(1) == 6.0);
  CHECK(m.edge_count(0) == 3.0);
  CHECK(m.edge_count(1) == 1.0);
  CHECK(density(m, 0) == doctest::Approx(3.0 / 12.0));
  CHECK(density(m, 1) == doctest::Approx(1.0 / 6.0));

  // Relabelling nodes leaves the density unchanged.
  const arma::uvec perm{3, 1, 0, 2};
  const Multiplex mp({make_view("d", true, a(perm, perm)), make_view("u", false, u(perm, perm))}, 0);
  CHECK(density(mp, 0) == density(m, 0));
}

TEST_CASE("geodesics: symmetrized BFS, unreachable pairs at max + 1, empty view all ones") {
  arma::mat a(4, 4, arma::fill::zeros);
  a(0, 1) = 1;  // directed edge only in one direction
  a(1, 2) = 1;
  const Multiplex m({make_view("a", true, a), make_view("e", true, arma::zeros(4, 4))}, 0);
  const arma::mat D = geodesic_distances(m, 0).values;
  CHECK(D(0, 1) == 1.0);
  CHECK(D(1, 0) == 1.0);
  CHECK(D(0, 2) == 2.0);
  CHECK(D(0, 3) == 3.0);  // unreachable: max finite (2) + 1
  CHECK(D(3, 3) == 0.0);
  const arma::mat E = geodesic_distances(m, 1).values;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(E(i, j) == (i == j ? 0.0 : 1.0));
  }
  const arma::mat avg = average_geodesic(m).values;
  CHECK(avg(0, 2) == doctest::Approx(1.5));
}

TEST_CASE("adjacency JSON round trip") {
  testutil::TempDir tmp("mpx");
  const Multiplex m = testutil::random_multiplex(6, 2, 0.3, 5);
  save_adjacency_json(m, tmp / "m.json");
  const Multiplex back = load_adjacency_json(tmp / "m.json");
  CHECK(back == m);
  CHECK_THROWS_AS(load_multiplex(tmp / "missing.json", InputFormat::adjacency_json), DataError);
  testutil::write_text(tmp / "bad.json", "{\"views\": []}");
  CHECK_THROWS_AS(load_adjacency_json(tmp / "bad.json"), DataError);
}

TEST_CASE("edge list with roster and manifest") {
  testutil::TempDir tmp("edges");
  testutil::write_text(tmp / "roster.txt", "ann\nbob\ncid\ndee\n");
  testutil::write_text(tmp / "edges.csv",
                       "view,source,target\nadvice,ann,bob\nadvice,bob,cid\nfriend,cid,ann\n");
  testutil::write_text(tmp / "manifest.json",
                       R"({"edges":"edges.csv","roster":"roster.txt",
                           "views":[{"name":"advice","directed":true},
                                    {"name":"friend","directed":false}],"ref_view":2})");
  const Multiplex m = load_multiplex(tmp / "manifest.json", InputFormat::edge_list_csv);
  CHECK(m.n() == 4);
  CHECK(m.K() == 2);
  CHECK(m.ref_view() == 1);
  CHECK(m.view(0).adjacency(0, 1) == 1.0);
  CHECK(m.view(0).adjacency(1, 0) == 0.0);
  CHECK(m.view(1).adjacency(0, 2) == 1.0);
  CHECK(m.view(1).adjacency(2, 0) == 1.0);
  CHECK(m.edge_count(0) == 2.0);
  CHECK(m.node_names()[3] == "dee");  // isolated node kept

  testutil::write_text(tmp / "edges.csv", "view,source,target\n1,ann,bob\n2,bob,zed\n");
  testutil::write_text(tmp / "m2.json", R"({"edges":"edges.csv","roster":"roster.txt"})");
  try {
    load_multiplex(tmp / "m2.json", InputFormat::edge_list_csv);
    FAIL("unknown node accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("roster") != std::string::npos);
  }
  testutil::write_text(tmp / "edges.csv", "view,source,target\n1,ann,bob\n2,bob,cid\n");
  const Multiplex idx = load_multiplex(tmp / "m2.json", InputFormat::edge_list_csv);
  CHECK(idx.K() == 2);
  CHECK(idx.view(1).adjacency(1, 2) == 1.0);

  testutil::write_text(tmp / "edges.csv", "view,source,target\n1,ann,ann\n");
  CHECK_THROWS_AS(load_multiplex(tmp / "m2.json", InputFormat::edge_list_csv), DataError);
  testutil::write_text(tmp / "edges.csv", "view,source,target,weight\n1,ann,bob,3\n");
  CHECK_THROWS_AS(load_multiplex(tmp / "m2.json", InputFormat::edge_list_csv), DataError);
  testutil::write_text(tmp / "edges.csv", "view,source,target,weight\n1,ann,bob,1\n1,ann,bob,0\n");
  CHECK_THROWS_AS(load_multiplex(tmp / "m2.json", InputFormat::edge_list_csv), DataError);
}
