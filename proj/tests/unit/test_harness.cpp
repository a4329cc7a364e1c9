#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "egvi/config.hpp"
#include "egvi/harness.hpp"
#include "egvi/verify.hpp"

#include <algorithm>
#include <sstream>
#include <string>

using namespace egvi;

namespace {

constexpr const char* kTwoExperiments = R"([speg_small]
problem = "quadratic_game"
n = 20
d = 4
problem_seed = 3
algorithm = "speg"
policy = "constant"
gamma = 0.05
scheme = "uniform"
iterations = 40
record_stride = 10
seeds = [0, 1, 2]

[eg_small]
problem = "bilinear_game"
d = 3
algorithm = "eg"
policy = "constant"
gamma = 0.1
iterations = 25
seeds = [4]
metrics = ["relative_error"]
)";

std::string csv_of(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::string config_error(const std::string& text) {
  try {
    experiments_from_document(parse_config(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("Config text survives a serialize and parse round trip") {
  const ConfigDocument doc = parse_config(kTwoExperiments);
  REQUIRE(doc.sections.size() == 2);
  CHECK(parse_config(serialize_config(doc)) == doc);
  const auto configs = experiments_from_document(doc);
  CHECK(configs[0].name == "speg_small");
  CHECK(configs[0].seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(configs[0].gamma.value() == doctest::Approx(0.05));
  CHECK(configs[1].metrics == std::vector<std::string>{"relative_error"});
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("Config errors name the section and key") {
  CHECK(config_error("[bad]\nproblem = \"quadratic_game\"\nstepsize = 1.0\n").find("bad.stepsize") != std::string::npos);
  CHECK(config_error("[bad]\nproblem = \"no_such_problem\"\n").find("bad.problem") != std::string::npos);
  CHECK(config_error("[bad]\nalgorithm = \"no_such_algorithm\"\n").find("bad.algorithm") != std::string::npos);
  CHECK(config_error("[bad]\nseeds = []\n").find("bad.seeds") != std::string::npos);
  CHECK(config_error("[bad]\nrecord_stride = 0\n").find("bad.record_stride") != std::string::npos);
  CHECK(config_error("[bad]\nc0 = 1.0\n").find("bad.c0") != std::string::npos);
  CHECK(config_error("[bad]\nn = \"ten\"\n").find("bad.n") != std::string::npos);
}

TEST_CASE("CSV output starts with the fixed header") {
  const auto configs = experiments_from_document(parse_config(kTwoExperiments));
  const std::string csv = csv_of(run_experiments(configs, 1));
  CHECK(csv.substr(0, csv.find('\n')) == kCsvHeader);
}

TEST_CASE("Same config gives identical bytes") {
  const auto configs = experiments_from_document(parse_config(kTwoExperiments));
  CHECK(csv_of(run_experiments(configs, 1)) == csv_of(run_experiments(configs, 1)));
}

TEST_CASE("Parallel runs match the serial run") {
  const auto configs = experiments_from_document(parse_config(kTwoExperiments));
  CHECK(csv_of(run_experiments(configs, 4)) == csv_of(run_experiments(configs, 1)));
}

TEST_CASE("Rows come back in config order, then by seed") {
  const auto rows = run_experiments(experiments_from_document(parse_config(kTwoExperiments)), 3);
  REQUIRE(!rows.empty());
  CHECK(rows.front().experiment == "speg_small");
  CHECK(rows.back().experiment == "eg_small");
  CHECK(std::is_sorted(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
    return a.experiment == b.experiment && a.seed < b.seed;
  }));
}

TEST_CASE("Metric filter keeps only the requested metrics and the status row") {
  const auto configs = experiments_from_document(parse_config(kTwoExperiments));
  for (const auto& r : run_experiment(configs[1]))
    CHECK((r.metric == "relative_error" || r.metric == "status"));
}

TEST_CASE("Zero iterations records only the starting point") {
  auto configs = experiments_from_document(parse_config(kTwoExperiments));
  configs[0].iterations = 0;
  configs[1].iterations = 0;
  const auto rows = run_experiment(configs[0]);
  REQUIRE(!rows.empty());
  for (const auto& r : rows) CHECK(r.iteration == 0);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const MetricRow& r) { return r.metric == "status"; }) == 3);
  for (const auto& r : run_experiment(configs[1])) {
    CHECK(r.iteration == 0);
    CHECK(r.oracle_calls == 0);
  }
}

TEST_CASE("A diverging run ends with status row 2") {
  const auto configs = experiments_from_document(parse_config(R"([blowup]
problem = "bilinear_game"
d = 3
algorithm = "gda"
policy = "constant"
gamma = 10.0
iterations = 100000
)"));
  const auto rows = run_experiment(configs[0]);
  REQUIRE(!rows.empty());
  const auto status = std::find_if(rows.begin(), rows.end(), [](const MetricRow& r) { return r.metric == "status"; });
  REQUIRE(status != rows.end());
  CHECK(status->value == 2.0);
  CHECK(status->iteration < 100000);
}

TEST_CASE("Registries list every id once") {
  for (const auto* reg : {&problem_registry(), &algorithm_registry(), &policy_registry()}) {
    CHECK(!reg->empty());
    for (std::size_t i = 0; i < reg->size(); ++i)
      for (std::size_t j = i + 1; j < reg->size(); ++j) CHECK((*reg)[i].id != (*reg)[j].id);
  }
  CHECK(policy_registry().size() == 6);
}

TEST_CASE("Verification suites are selectable by name") {
  const auto results = verify_theory("nu-roots");
  CHECK(results.size() == 4);
  for (const auto& r : results) {
    CHECK(r.suite == "nu-roots");
    CHECK(r.passed);
    CHECK(format_check(r).rfind("PASS nu-roots ", 0) == 0);
  }
  CHECK(theory_suites().size() == 16);
  CHECK_THROWS_AS(verify_theory("no-such-suite"), ConfigError);
}
