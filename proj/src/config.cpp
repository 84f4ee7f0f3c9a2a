#include "drkf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace drkf {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("scenario config: " + path + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
  }
}

Matrix parse_matrix(const json& node, const std::string& path) {
  if (node.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = node.get<double>();
    return m;
  }
  if (!node.is_array() || node.empty()) fail(path, "expected a matrix");
  const auto rows = node.size();
  if (!node[0].is_array()) {
    // A flat array is a single row.
    Matrix m(1, static_cast<Eigen::Index>(rows));
    for (std::size_t c = 0; c < rows; ++c) {
      if (!node[c].is_number()) fail(path, "expected numbers");
      m(0, static_cast<Eigen::Index>(c)) = node[c].get<double>();
    }
    return m;
  }
  const auto cols = node[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!node[r].is_array() || node[r].size() != cols) {
      fail(path, "ragged matrix");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!node[r][c].is_number()) fail(path, "expected numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          node[r][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& node, const std::string& path) {
  if (!node.is_array()) fail(path, "expected an array");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) fail(path, "expected numbers");
    v(static_cast<Eigen::Index>(i)) = node[i].get<double>();
  }
  return v;
}

MatrixFn parse_matrix_fn(const json& node, const std::string& path, int n) {
  if (node.is_string()) {
    const std::string gen = node.get<std::string>();
    if (gen == "example1") {
      if (n != 2) fail(path, "the example1 generator is 2 x 2");
      return [](int k) {
        Matrix a(2, 2);
        a << 0.8 * (1.0 + 0.001 * k), 0.01, 0.1, 0.98;
        return a;
      };
    }
    fail(path, "unknown generator \"" + gen + "\"");
  }
  return constant_matrix(parse_matrix(node, path));
}

ScalarFn parse_scalar_fn(const json& node, const std::string& path) {
  if (node.is_string()) {
    const std::string gen = node.get<std::string>();
    if (gen == "example1") {
      return [](int k) { return 0.1 / (0.1 * k + 2.0); };
    }
    fail(path, "unknown generator \"" + gen + "\"");
  }
  if (!node.is_number()) fail(path, "expected a number or generator name");
  return constant_scalar(node.get<double>());
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path, "missing key \"" + key + "\"");
  if (!obj[key].is_number_integer()) fail(path + "." + key, "expected integer");
  return obj[key].get<int>();
}

}  // namespace

Scenario load_scenario_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("scenario config: document must be an object");
  }
  reject_unknown_keys(doc,
                      {"name", "horizon", "runs", "seed", "filter", "swf",
                       "system", "sensors", "graph", "channel", "init",
                       "distributions", "tail_window_start"},
                      "");

  const json& system = doc.contains("system") ? doc["system"] : json::object();
  reject_unknown_keys(system, {"n", "A", "F", "Q", "mu", "P0"}, "system");
  const int n = get_int(system, "n", "system");
  const int horizon = doc.contains("horizon") ? doc["horizon"].get<int>() : 100;

  MatrixFn A = system.contains("A")
                   ? parse_matrix_fn(system["A"], "system.A", n)
                   : constant_matrix(Matrix::Identity(n, n));
  MatrixFn F = system.contains("F")
                   ? parse_matrix_fn(system["F"], "system.F", n)
                   : constant_matrix(Matrix::Identity(n, n));
  MatrixFn Q = system.contains("Q")
                   ? parse_matrix_fn(system["Q"], "system.Q", n)
                   : constant_matrix(Matrix::Identity(n, n));
  ScalarFn mu = system.contains("mu") ? parse_scalar_fn(system["mu"],
                                                        "system.mu")
                                      : constant_scalar(0.0);
  Matrix P0 = system.contains("P0") ? parse_matrix(system["P0"], "system.P0")
                                    : Matrix::Identity(n, n);

  if (!doc.contains("sensors") || !doc["sensors"].is_array() ||
      doc["sensors"].empty()) {
    throw std::invalid_argument("scenario config: sensors: need at least one");
  }
  std::vector<SensorSpec> sensors;
  for (std::size_t i = 0; i < doc["sensors"].size(); ++i) {
    const json& sj = doc["sensors"][i];
    const std::string path = "sensors[" + std::to_string(i) + "]";
    reject_unknown_keys(sj, {"C", "R", "tau", "phi"}, path);
    SensorSpec spec;
    spec.id = static_cast<int>(i) + 1;
    if (!sj.contains("C")) fail(path, "missing C");
    spec.C = constant_matrix(parse_matrix(sj["C"], path + ".C"));
    if (!sj.contains("R")) fail(path, "missing R");
    spec.R = constant_matrix(parse_matrix(sj["R"], path + ".R"));
    spec.tau = constant_scalar(sj.contains("tau") ? sj["tau"].get<double>()
                                                  : 1.0);
    spec.phi = constant_scalar(sj.contains("phi") ? sj["phi"].get<double>()
                                                  : 0.0);
    sensors.push_back(std::move(spec));
  }
  const int N = static_cast<int>(sensors.size());

  SystemModel model(n, horizon, std::move(A), std::move(F),
                    std::move(sensors));

  if (!doc.contains("graph")) {
    throw std::invalid_argument("scenario config: missing graph");
  }
  const json& gj = doc["graph"];
  reject_unknown_keys(gj, {"weights", "metropolis"}, "graph");
  SensorGraph graph = [&]() -> SensorGraph {
    if (gj.contains("weights")) {
      return SensorGraph(parse_matrix(gj["weights"], "graph.weights"));
    }
    if (gj.contains("metropolis")) {
      const json& mj = gj["metropolis"];
      reject_unknown_keys(mj, {"nodes", "edges"}, "graph.metropolis");
      const int nodes = get_int(mj, "nodes", "graph.metropolis");
      std::vector<std::pair<int, int>> edges;
      for (const json& e : mj["edges"]) {
        if (!e.is_array() || e.size() != 2) {
          fail("graph.metropolis.edges", "each edge is [a, b]");
        }
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
      return metropolis_weights(edges, nodes);
    }
    throw std::invalid_argument(
        "scenario config: graph needs weights or metropolis");
  }();

  const json& init = doc.contains("init") ? doc["init"] : json::object();
  reject_unknown_keys(init, {"xhat0", "P0i", "Pi0"}, "init");
  Vector xhat0 = init.contains("xhat0")
                     ? parse_vector(init["xhat0"], "init.xhat0")
                     : Vector(Vector::Ones(n));
  Matrix p0i = init.contains("P0i") ? parse_matrix(init["P0i"], "init.P0i")
                                    : Matrix(100.0 * Matrix::Identity(n, n));
  Matrix pi0 = init.contains("Pi0") ? parse_matrix(init["Pi0"], "init.Pi0")
                                    : P0;

  NoiseBounds bounds(std::move(Q), std::move(mu), std::move(P0),
                     std::vector<Matrix>(N, p0i), horizon);

  const json& cj = doc.contains("channel") ? doc["channel"] : json::object();
  reject_unknown_keys(
      cj, {"upsilon", "d", "mode", "vector_halfwidth", "matrix_halfwidth"},
      "channel");
  Matrix upsilon = cj.contains("upsilon")
                       ? parse_matrix(cj["upsilon"], "channel.upsilon")
                       : Matrix(Matrix::Zero(n, n));
  Matrix d = cj.contains("d") ? parse_matrix(cj["d"], "channel.d")
                              : Matrix(Matrix::Zero(n, n));
  ChannelMode mode = ChannelMode::kPaperLiteral;
  if (cj.contains("mode")) {
    const std::string m = cj["mode"].get<std::string>();
    if (m == "paper-literal") {
      mode = ChannelMode::kPaperLiteral;
    } else if (m == "bound-respecting") {
      mode = ChannelMode::kBoundRespecting;
    } else {
      fail("channel.mode", "expected paper-literal or bound-respecting");
    }
  }
  LinkNoiseSpec noise;
  if (cj.contains("vector_halfwidth")) {
    noise.vector_halfwidth = cj["vector_halfwidth"].get<double>();
  }
  if (cj.contains("matrix_halfwidth")) {
    noise.matrix_halfwidth = cj["matrix_halfwidth"].get<double>();
  }

  const json& dj =
      doc.contains("distributions") ? doc["distributions"] : json::object();
  reject_unknown_keys(dj, {"w", "v", "x0", "eps"}, "distributions");
  auto dist_of = [&](const char* key) {
    return dj.contains(key) ? parse_distribution(dj[key].get<std::string>())
                            : DistributionSpec{};
  };

  const json& swfj = doc.contains("swf") ? doc["swf"] : json::object();
  reject_unknown_keys(swfj, {"window", "interval", "max_iterations",
                             "rel_tol"},
                      "swf");
  SwfOptions swf;
  swf.window = swfj.contains("window") ? swfj["window"].get<int>() : 1;
  if (swfj.contains("interval")) {
    if (swfj["interval"].is_array()) {
      for (const json& v : swfj["interval"]) {
        swf.interval.push_back(v.get<int>());
      }
    } else {
      swf.interval = {swfj["interval"].get<int>()};
    }
  } else {
    swf.interval = {1};
  }
  if (swfj.contains("max_iterations")) {
    swf.weights.max_iterations = swfj["max_iterations"].get<int>();
  }
  if (swfj.contains("rel_tol")) {
    swf.weights.rel_tol = swfj["rel_tol"].get<double>();
  }

  Scenario sc{
      .name = doc.contains("name") ? doc["name"].get<std::string>() : "custom",
      .model = std::move(model),
      .bounds = std::move(bounds),
      .graph = std::move(graph),
      .channel = ChannelConfig{ChannelBounds::uniform(n, std::move(upsilon),
                                                      std::move(d)),
                               mode, noise},
      .filter = doc.contains("filter")
                    ? parse_filter_kind(doc["filter"].get<std::string>())
                    : FilterKind::kDrkf,
      .swf = std::move(swf),
      .horizon = horizon,
      .runs = doc.contains("runs") ? doc["runs"].get<int>() : 100,
      .seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 1,
      .xhat0 = std::move(xhat0),
      .pi0 = std::move(pi0),
      .w_dist = dist_of("w"),
      .v_dist = dist_of("v"),
      .x0_dist = dist_of("x0"),
      .eps_dist = dist_of("eps"),
      .tail_window_start = doc.contains("tail_window_start")
                               ? doc["tail_window_start"].get<int>()
                               : -1,
  };
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("scenario config: cannot read " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_scenario_json_text(buffer.str());
}

Scenario apply_overrides(Scenario sc, const ScenarioOverrides& ov) {
  if (ov.filter) sc.filter = parse_filter_kind(*ov.filter);
  if (ov.window) sc.swf.window = *ov.window;
  if (ov.interval) sc.swf.interval = {*ov.interval};
  if (ov.runs) sc.runs = *ov.runs;
  if (ov.horizon) sc.horizon = *ov.horizon;
  if (ov.seed) sc.seed = *ov.seed;
  if (ov.channel_mode) sc.channel.mode = *ov.channel_mode;
  validate_scenario(sc);
  return sc;
}

}  // namespace drkf
