#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csm/cli.hpp"

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = csm::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("spectrum CSV") {
  const Run r = run({"spectrum", "--s", "1", "--N", "2", "--A", "0.5", "--B", "0.5"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 1 + 9 + 3);  // j = 1 sectors, then j = 0
  CHECK(l[0] == "j,m,E,multiplicity");
  CHECK(l[1] == "1,2,1.5,1");
  CHECK(l[4].rfind("1,0,-2.1485352", 0) == 0);

  const Run sector = run({"spectrum", "--s", "1", "--N", "2", "--A", "0.5", "--B", "0.5", "--sector", "1,0"});
  REQUIRE(sector.code == 0);
  CHECK(lines(sector.out).size() == 4);
}

TEST_CASE("spectrum JSON parses") {
  const Run r = run({"spectrum", "--s", "3/2", "--N", "3", "--format", "json"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out).is_object());
}

TEST_CASE("bethe JSON") {
  const Run r = run({"bethe", "--s", "1", "--N", "2", "--A", "0.5", "--B", "0.5", "--M", "1", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["found"] == 2);
  CHECK(j["expected"] == 2);
  CHECK(j["expected_generic"] == 3);
  CHECK(j["states"][0]["energy"].get<double>() == doctest::Approx(-0.780776).epsilon(1e-6));
  CHECK(j["states"][0]["roots"][0][0].get<double>() == doctest::Approx(-0.438447).epsilon(1e-6));
  CHECK(r.err.find("found 2 expected 2") != std::string::npos);
}

TEST_CASE("bethe CSV and inhomogeneous input") {
  const Run r = run({"bethe", "--s", "1", "--N", "2", "--A", "0.5", "--B", "0.5", "--M", "2"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out)[0] == "state,energy,residual_inf,root_re,root_im");
  CHECK(lines(r.out).size() == 1 + 3 * 2);

  const Run inh = run({"bethe", "--s", "1/2", "--N", "2", "--B", "0", "--M", "1", "--epsilons", "0,1,2", "--format", "json"});
  REQUIRE(inh.code == 0);
  CHECK(nlohmann::json::parse(inh.out)["states"].size() == 2);

  const std::string path = "test_cli_eps.txt";
  {
    std::ofstream f(path);
    f << "0\n1\n2\n";
  }
  const Run from_file = run({"bethe", "--s", "1/2", "--N", "2", "--B", "0", "--M", "1", "--epsilons", path, "--format", "json"});
  std::remove(path.c_str());
  CHECK(from_file.code == 0);
  CHECK(from_file.out == inh.out);
}

TEST_CASE("count") {
  const Run r = run({"count", "--s", "1", "--N", "2"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  CHECK(l[0] == "M,count");
  CHECK(l[3] == "2,4");
  CHECK(l.back() == "status,PASS");
}

TEST_CASE("evolve") {
  const Run r = run({"evolve", "--s", "1", "--N", "3", "--t_max", "0"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  CHECK(l[0] == "t,entropy,purity,sz,sminus2,loschmidt,norm");
  CHECK(l[1].rfind("0,", 0) == 0);

  const Run sel = run({"evolve", "--N", "4", "--t_max", "1", "--t_steps", "11", "--observables", "sz,norm",
                       "--method", "recipe", "--verify"});
  REQUIRE(sel.code == 0);
  CHECK(lines(sel.out).size() == 12);
  CHECK(lines(sel.out)[0] == "t,sz,norm");
  CHECK(sel.err.find("FAIL") == std::string::npos);
}

TEST_CASE("verify") {
  const Run r = run({"verify", "--s", "3/2", "--N", "4", "--A", "0.7", "--B", "0.3"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "PASS");
  CHECK(j["checks"].size() > 5);
}

TEST_CASE("exit codes") {
  CHECK(run({"spectrum", "--s", "0"}).code == 2);
  CHECK(run({"spectrum", "--s", "abc"}).code == 2);
  CHECK(run({"spectrum", "--N", "0"}).code == 2);
  CHECK(run({"bethe", "--N", "2", "--M", "9"}).code == 2);
  CHECK(run({"bethe", "--N", "2"}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({"evolve", "--observables", "energy"}).code == 2);
  CHECK(run({"bethe", "--N", "2", "--M", "1", "--epsilons", "0,1,2", "--starts", "0"}).code == 4);
  CHECK(run({"bethe", "--N", "2", "--M", "1", "--epsilons", "0,1"}).code == 2);
}

TEST_CASE("output is deterministic") {
  const std::vector<std::string> args{"bethe", "--s", "1", "--N", "6", "--A", "0.3", "--B", "0.8", "--M", "4",
                                      "--format", "json", "--seed", "7"};
  CHECK(run(args).out == run(args).out);
  const std::vector<std::string> ev{"evolve", "--N", "8", "--t_max", "3", "--t_steps", "50"};
  CHECK(run(ev).out == run(ev).out);
}
