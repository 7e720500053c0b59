#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mtube/runner.hpp"

using namespace mtube;
using nlohmann::json;

TEST_CASE("run config serializes and round-trips") {
  RunConfig c;
  c.model = FlatModel(3, 2, 2);
  c.experiment = "lelong";
  c.threads = 4;
  c.seed = 99;
  c.format = "json";
  c.params = json{{"gammas", {0.5, 1.0}}};

  const RunConfig back = RunConfig::from_json(c.to_json());
  CHECK(back.experiment == c.experiment);
  CHECK(back.model.n == 3);
  CHECK(back.model.k == 2);
  CHECK(back.model.m == 2);
  CHECK(back.seed == 99);
  CHECK(back.params == c.params);
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("the config hash ignores presentation-only fields") {
  RunConfig a;
  RunConfig b = a;
  b.threads = 8;
  b.out_dir = "/tmp/elsewhere";
  b.format = "csv";
  CHECK(a.hash() == b.hash());

  RunConfig c = a;
  c.seed = 12345;
  CHECK(a.hash() != c.hash());
  RunConfig d = a;
  d.experiment = "minimal";
  CHECK(a.hash() != d.hash());
}

TEST_CASE("config validation rejects malformed inputs") {
  RunConfig c;
  c.format = "xml";
  CHECK_THROWS_AS(c.validate(), ConstraintError);
  c.format = "both";
  c.experiment = "no-such-experiment";
  CHECK_THROWS_AS(c.validate(), ConstraintError);
  c.experiment = "minimal";
  c.threads = 0;
  CHECK_THROWS_AS(c.validate(), ConstraintError);
}

TEST_CASE("reports are bit-identical across thread counts") {
  std::string dumps[3];
  int i = 0;
  for (int threads : {1, 2, 4}) {
    RunConfig c;
    c.experiment = "full-suite";
    c.threads = threads;
    dumps[i++] = run(c).to_json().dump();
  }
  CHECK(dumps[0] == dumps[1]);
  CHECK(dumps[0] == dumps[2]);
}

TEST_CASE("experiment outputs land in the hash-named directory") {
  RunConfig c;
  c.experiment = "minimal";
  c.out_dir =
      (std::filesystem::temp_directory_path() / "mtube-test-out").string();
  c.format = "both";
  std::filesystem::remove_all(c.out_dir);

  const RunReport rep = run(c);
  CHECK(rep.all_pass);
  const std::string dir = write_outputs(c, rep);
  CHECK(std::filesystem::exists(dir + "/report.json"));
  CHECK(std::filesystem::exists(dir + "/report.csv"));
  CHECK(std::filesystem::exists(dir + "/config.json"));

  // The JSON report parses and mirrors the in-memory records.
  std::ifstream in(dir + "/report.json");
  const json parsed = json::parse(in);
  CHECK(parsed["records"].size() == rep.records.size());
  CHECK(parsed["all_pass"] == true);

  // CSV has a header plus one line per record.
  std::ifstream csv(dir + "/report.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == rep.records.size() + 1);

  std::filesystem::remove_all(c.out_dir);
}

TEST_CASE("every experiment name dispatches") {
  for (const char* name : {"minimal", "reltype", "siu", "compare"}) {
    RunConfig c;
    c.experiment = name;
    const RunReport rep = run(c);
    CHECK(rep.all_pass);
    CHECK(!rep.records.empty());
  }
}
