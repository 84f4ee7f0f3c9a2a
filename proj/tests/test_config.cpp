#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <drkf/config.hpp>
#include <drkf/svg.hpp>

using namespace drkf;

namespace {

const char* kMinimalDoc = R"json({
  "name": "two-node",
  "horizon": 12,
  "runs": 3,
  "seed": 9,
  "filter": "drkf-swf",
  "swf": {"window": 2, "interval": 4},
  "system": {
    "n": 2,
    "A": [[0.9, 0.05], [0.1, 0.85]],
    "Q": [[0.1, 0.0], [0.0, 0.1]],
    "mu": 0.02,
    "P0": [[1.0, 0.0], [0.0, 1.0]]
  },
  "sensors": [
    {"C": [[1, 0]], "R": 0.1, "tau": 0.8, "phi": 0.001},
    {"C": [[0, 1]], "R": 0.2, "tau": 0.9, "phi": 0.001}
  ],
  "graph": {"weights": [[0.6, 0.4], [0.3, 0.7]]},
  "channel": {"upsilon": [[0.2, 0], [0, 0.2]], "d": [[0.2, 0], [0, 0.2]],
              "mode": "bound-respecting"},
  "init": {"xhat0": [0, 0], "P0i": [[10, 0], [0, 10]]},
  "distributions": {"w": "uniform"}
})json";

}  // namespace

TEST_CASE("a full document parses into a validated scenario") {
  const Scenario sc = load_scenario_json_text(kMinimalDoc);
  CHECK(sc.name == "two-node");
  CHECK(sc.horizon == 12);
  CHECK(sc.runs == 3);
  CHECK(sc.seed == 9);
  CHECK(sc.filter == FilterKind::kDrkfSwf);
  CHECK(sc.swf.window == 2);
  CHECK(sc.swf.interval == std::vector<int>{4});
  CHECK(sc.model.n() == 2);
  CHECK(sc.model.sensor_count() == 2);
  CHECK(sc.model.A(5)(0, 0) == doctest::Approx(0.9));
  CHECK(sc.model.sensor(0).R(0)(0, 0) == doctest::Approx(0.1));
  CHECK(sc.graph.weight(0, 1) == doctest::Approx(0.4));
  CHECK(sc.channel.mode == ChannelMode::kBoundRespecting);
  CHECK(sc.bounds.P0i(1)(0, 0) == doctest::Approx(10.0));
  CHECK(sc.w_dist.kind == DistributionSpec::Kind::kUniform);
  CHECK(sc.v_dist.kind == DistributionSpec::Kind::kNormal);
  // Runs end to end.
  CHECK_NOTHROW(run_monte_carlo(sc));
}

TEST_CASE("unknown keys are rejected with their path") {
  std::string doc = kMinimalDoc;
  doc.insert(doc.rfind('}'), R"(, "extra_key": 1)");
  CHECK_THROWS_WITH_AS(load_scenario_json_text(doc),
                       doctest::Contains("extra_key"), std::invalid_argument);

  std::string nested = kMinimalDoc;
  nested.replace(nested.find("\"n\": 2"), 6, "\"n\": 2, \"bogus\": 3");
  CHECK_THROWS_WITH_AS(load_scenario_json_text(nested),
                       doctest::Contains("system.bogus"),
                       std::invalid_argument);
}

TEST_CASE("malformed structures are rejected") {
  std::string ragged = kMinimalDoc;
  ragged.replace(ragged.find("[[0.9, 0.05], [0.1, 0.85]]"), 26,
                 "[[0.9, 0.05], [0.1]]");
  CHECK_THROWS_AS(load_scenario_json_text(ragged), std::invalid_argument);

  CHECK_THROWS_AS(load_scenario_json_text("not json at all"),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_scenario_json_text("{\"system\": {\"n\": 2}}"),
                  std::invalid_argument);
}

TEST_CASE("named generators reproduce the preset dynamics") {
  const char* doc = R"json({
    "horizon": 10,
    "system": {"n": 2, "A": "example1", "Q": [[0.1, 0], [0, 0.1]],
               "mu": "example1"},
    "sensors": [{"C": [[0, 1]], "R": 0.07, "tau": 0.85, "phi": 0.0008}],
    "graph": {"weights": [[1.0]]}
  })json";
  const Scenario sc = load_scenario_json_text(doc);
  const Scenario preset = example1_scenario(1);
  for (int k : {0, 5, 10}) {
    CHECK((sc.model.A(k) - preset.model.A(k)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(sc.bounds.mu(k) == doctest::Approx(preset.bounds.mu(k)));
  }
}

TEST_CASE("metropolis graphs can be configured directly") {
  const char* doc = R"json({
    "horizon": 5,
    "system": {"n": 1},
    "sensors": [{"C": [[1]], "R": 1.0}, {"C": [[1]], "R": 1.0},
                {"C": [[1]], "R": 1.0}],
    "graph": {"metropolis": {"nodes": 3, "edges": [[0, 1], [1, 2]]}}
  })json";
  const Scenario sc = load_scenario_json_text(doc);
  CHECK(sc.graph.weight(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(sc.graph.weight(0, 0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("overrides apply and re-validate") {
  Scenario sc = example1_scenario(1);
  ScenarioOverrides ov;
  ov.filter = "drkf-swf";
  ov.window = 3;
  ov.interval = 7;
  ov.runs = 12;
  ov.seed = 123;
  ov.horizon = 50;
  ov.channel_mode = ChannelMode::kBoundRespecting;
  sc = apply_overrides(std::move(sc), ov);
  CHECK(sc.filter == FilterKind::kDrkfSwf);
  CHECK(sc.swf.window == 3);
  CHECK(sc.swf.interval == std::vector<int>{7});
  CHECK(sc.runs == 12);
  CHECK(sc.seed == 123);
  CHECK(sc.horizon == 50);
  CHECK(sc.channel.mode == ChannelMode::kBoundRespecting);

  ScenarioOverrides bad;
  bad.horizon = 99999;  // beyond the model range
  CHECK_THROWS_AS(apply_overrides(example1_scenario(1), bad),
                  std::invalid_argument);
}

TEST_CASE("chart emission produces plausible SVG from statistics") {
  Scenario sc = example1_scenario(1);
  sc.horizon = 10;
  sc.runs = 2;
  const RunStatistics stats = run_monte_carlo(sc);
  std::vector<ChartSeries> series;
  for (std::size_t e = 0; e < stats.estimator_labels.size(); ++e) {
    ChartSeries s;
    s.label = "sensor " + std::to_string(stats.estimator_labels[e]);
    for (int k = 0; k <= stats.horizon; ++k) {
      s.x.push_back(k);
      s.y.push_back(stats.trp[k][e]);
    }
    series.push_back(std::move(s));
  }
  const std::string svg = line_chart_svg("bound traces", "k", "Tr(P)", series);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
