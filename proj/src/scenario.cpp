#include "varigeo/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "varigeo/conditions.hpp"
#include "varigeo/errors.hpp"

namespace varigeo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw ScenarioError(where + ": " + why);
}

enum class Block { T, X, TX, Jet };

std::string block_text(Block b, int m, int n) {
  switch (b) {
    case Block::T: return "t1..t" + std::to_string(m);
    case Block::X: return "x1..x" + std::to_string(n);
    case Block::TX: return "t1..t" + std::to_string(m) + ", x1..x" + std::to_string(n);
    case Block::Jet: return "the jet variables x<i>_<alpha>";
  }
  return {};
}

class Reader {
 public:
  Reader(int m, int n, VariableSetPtr base, VariableSetPtr jet)
      : m_(m), n_(n), base_(std::move(base)), jet_(std::move(jet)) {}

  ScalarExpr expr(const json& node, const std::string& where, Block block) const {
    if (!node.is_string()) fail(where, "expected an expression string");
    const auto& vars = block == Block::Jet ? jet_ : base_;
    ScalarExpr e;
    try {
      e = parse_expr(node.get<std::string>(), vars);
    } catch (const UnknownIdentifierError& err) {
      fail(where, "undeclared variable '" + err.name() + "' (declared: " + vars_text(block) + ")");
    } catch (const ParseError& err) {
      fail(where, err.what());
    }
    for (int v : e.variables_used()) {
      const bool t = v < m_;
      const bool x = v >= m_ && v < m_ + n_;
      const bool ok = (block == Block::T && t) || (block == Block::X && x) || (block == Block::TX && (t || x)) ||
                      (block == Block::Jet && !t);
      if (!ok) fail(where, "'" + vars->name(v) + "' is outside the allowed block " + block_text(block, m_, n_));
    }
    return e;
  }

  std::vector<std::vector<ScalarExpr>> matrix(const json& node, const std::string& where, int rows, int cols,
                                              Block block) const {
    if (!node.is_array() || static_cast<int>(node.size()) != rows)
      fail(where, "expected " + std::to_string(rows) + " rows");
    std::vector<std::vector<ScalarExpr>> out;
    for (int i = 0; i < rows; ++i) {
      const auto& row = node[static_cast<std::size_t>(i)];
      const std::string rw = where + "[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != cols)
        fail(rw, "expected " + std::to_string(cols) + " entries");
      out.emplace_back();
      for (int j = 0; j < cols; ++j)
        out.back().push_back(expr(row[static_cast<std::size_t>(j)], rw + "[" + std::to_string(j) + "]", block));
    }
    return out;
  }

  // Upper triangle only: full rows with empty/null lower entries, or rows
  // starting at the diagonal.
  MetricField metric(const json& node, const std::string& where, int dim, int offset, Block block,
                     MetricKind kind) const {
    if (!node.is_array() || static_cast<int>(node.size()) != dim)
      fail(where, "expected " + std::to_string(dim) + " rows");
    std::vector<std::vector<ScalarExpr>> entries(static_cast<std::size_t>(dim),
                                                 std::vector<ScalarExpr>(static_cast<std::size_t>(dim)));
    for (int i = 0; i < dim; ++i) {
      const auto& row = node[static_cast<std::size_t>(i)];
      const std::string rw = where + "[" + std::to_string(i) + "]";
      if (!row.is_array()) fail(rw, "expected an array");
      const int len = static_cast<int>(row.size());
      int start;
      if (len == dim) {
        start = 0;
      } else if (len == dim - i) {
        start = i;
      } else {
        fail(rw, "expected " + std::to_string(dim) + " entries, or " + std::to_string(dim - i) +
                     " starting at the diagonal");
      }
      for (int j = start; j < dim; ++j) {
        const auto& cell = row[static_cast<std::size_t>(j - start)];
        const std::string cw = rw + "[" + std::to_string(j - start) + "]";
        if (j < i) {
          const bool empty = cell.is_null() || (cell.is_string() && cell.get<std::string>().empty());
          if (!empty) fail(cw, "only the upper triangle is read; leave entries below the diagonal empty");
          continue;
        }
        entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = expr(cell, cw, block);
      }
    }
    return MetricField(entries, offset, kind);
  }

  std::vector<double> numbers(const json& node, const std::string& where, std::size_t count) const {
    if (!node.is_array() || node.size() != count) fail(where, "expected " + std::to_string(count) + " numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) {
      if (!node[k].is_number()) fail(where + "[" + std::to_string(k) + "]", "expected a number");
      out.push_back(node[k].get<double>());
    }
    return out;
  }

  std::vector<std::pair<double, double>> box(const json& node, const std::string& where, int count) const {
    if (!node.is_array() || static_cast<int>(node.size()) != count)
      fail(where, "expected " + std::to_string(count) + " [low, high] pairs");
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < count; ++k) {
      const auto v = numbers(node[static_cast<std::size_t>(k)], where + "[" + std::to_string(k) + "]", 2);
      if (!(v[0] < v[1])) fail(where + "[" + std::to_string(k) + "]", "low must be below high");
      out.emplace_back(v[0], v[1]);
    }
    return out;
  }

 private:
  std::string vars_text(Block block) const { return block_text(block, m_, n_); }

  int m_;
  int n_;
  VariableSetPtr base_;
  VariableSetPtr jet_;
};

int positive_int(const json& doc, const char* key) {
  if (!doc.contains(key)) fail(key, "missing");
  const auto& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > 64) fail(key, "expected a positive integer");
  return static_cast<int>(v.get<long long>());
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const MetricField& Scenario::metric(const std::string& name) const {
  const auto it = metrics.find(name);
  if (it == metrics.end()) throw ScenarioError("scenario has no metric '" + name + "'");
  return it->second;
}

const DistTensor& Scenario::tensor(const std::string& name) const {
  const std::optional<DistTensor>* t = name == "X" ? &X : name == "T" ? &T : name == "Y" ? &Y : nullptr;
  if (!t || !t->has_value()) throw ScenarioError("scenario has no tensor '" + name + "'");
  return **t;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ScenarioError(origin + ": top level must be an object");
  static const std::set<std::string> known = {"m",    "n",     "metrics", "tensors",   "map",   "mapData", "x0",
                                              "grid", "seed",  "lambda0", "sampleBox", "frame", "tolerances",
                                              "name", "notes"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) fail(key, "unknown field");

  Scenario s;
  s.hash = fnv1a_hex(text);
  s.m = positive_int(doc, "m");
  s.n = positive_int(doc, "n");
  s.base_vars = std::make_shared<const VariableSet>(VariableSet::coordinates(s.m, s.n));
  s.jet_vars = std::make_shared<const VariableSet>(VariableSet::jet(s.m, s.n));
  const Reader rd(s.m, s.n, s.base_vars, s.jet_vars);
  const int m = s.m;
  const int n = s.n;

  if (!doc.contains("grid")) fail("grid", "missing");
  {
    const auto& g = doc["grid"];
    if (!g.is_object() || !g.contains("bounds") || !g.contains("points")) fail("grid", "expected {bounds, points}");
    const auto bounds = rd.box(g["bounds"], "grid.bounds", m);
    const auto& pts = g["points"];
    if (!pts.is_array() || static_cast<int>(pts.size()) != m) fail("grid.points", "expected " + std::to_string(m) + " counts");
    std::vector<int> points;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!pts[k].is_number_integer() || pts[k].get<long long>() < 5 || pts[k].get<long long>() > 100000)
        fail("grid.points[" + std::to_string(k) + "]", "expected an integer >= 5");
      points.push_back(static_cast<int>(pts[k].get<long long>()));
    }
    s.grid = GridSpec(bounds, points);
  }

  if (doc.contains("metrics")) {
    const auto& ms = doc["metrics"];
    if (!ms.is_object()) fail("metrics", "expected an object");
    for (const auto& [name, node] : ms.items()) {
      const std::string where = "metrics." + name;
      if (name == "h" || name == "h0")
        s.metrics.emplace(name, rd.metric(node, where, m, 0, Block::T, MetricKind::Riemannian));
      else if (name == "g")
        s.metrics.emplace(name, rd.metric(node, where, n, m, Block::X, MetricKind::Riemannian));
      else if (name == "f")
        s.metrics.emplace(name, rd.metric(node, where, n, m, Block::X, MetricKind::Symmetric));
      else if (name == "gamma")
        s.metrics.emplace(name, rd.metric(node, where, n * (m + 1), m, Block::Jet, MetricKind::Riemannian));
      else
        fail(where, "unknown metric (expected h, g, f, h0 or gamma)");
    }
  }

  if (doc.contains("tensors")) {
    const auto& ts = doc["tensors"];
    if (!ts.is_object()) fail("tensors", "expected an object");
    for (const auto& [name, node] : ts.items()) {
      const std::string where = "tensors." + name;
      if (name == "X")
        s.X = DistTensor(TensorShape::Mixed, m, n, rd.matrix(node, where, n, m, Block::TX));
      else if (name == "T")
        s.T = DistTensor(TensorShape::Sheet, m, n, rd.matrix(node, where, n, m, Block::T));
      else if (name == "Y")
        s.Y = DistTensor(TensorShape::Endomorphism, m, n, rd.matrix(node, where, n, n, Block::X));
      else if (name == "c")
        s.c = rd.expr(node, where, Block::TX);
      else
        fail(where, "unknown tensor (expected X, T, Y or c)");
    }
  }

  if (doc.contains("map")) {
    const auto& mp = doc["map"];
    if (!mp.is_array() || static_cast<int>(mp.size()) != n) fail("map", "expected " + std::to_string(n) + " expressions");
    for (int i = 0; i < n; ++i)
      s.map.push_back(rd.expr(mp[static_cast<std::size_t>(i)], "map[" + std::to_string(i) + "]", Block::T));
  }
  if (doc.contains("mapData")) {
    if (!s.map.empty()) fail("mapData", "give either map or mapData, not both");
    s.map_data = rd.numbers(doc["mapData"], "mapData", s.grid.node_count() * static_cast<std::size_t>(n));
    MapGrid probe(s.grid, n, Provenance::UserSupplied);
    probe.values = *s.map_data;
    try {
      probe.validate();
    } catch (const GridError& e) {
      fail("mapData", e.what());
    }
  }
  if (doc.contains("x0")) s.x0 = rd.numbers(doc["x0"], "x0", static_cast<std::size_t>(n));

  if (doc.contains("lambda0")) {
    const auto& l = doc["lambda0"];
    const std::string where = "lambda0";
    if (!l.is_array() || static_cast<int>(l.size()) != m) fail(where, "expected an m x m x m nested array");
    for (int a = 0; a < m; ++a) {
      const auto rows = rd.matrix(l[static_cast<std::size_t>(a)], where + "[" + std::to_string(a) + "]", m, m, Block::T);
      for (const auto& row : rows)
        for (const auto& e : row) s.lambda0.push_back(e);
    }
  }

  if (doc.contains("seed")) {
    const auto& v = doc["seed"];
    if (!v.is_number_unsigned()) fail("seed", "expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }
  s.sample_box = doc.contains("sampleBox") ? rd.box(doc["sampleBox"], "sampleBox", n)
                                           : std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {0.25, 1.25});
  if (doc.contains("frame")) {
    const auto& f = doc["frame"];
    if (f == "first-positive")
      s.orientation = FrameOrientation::FirstComponentPositive;
    else if (f == "position")
      s.orientation = FrameOrientation::AlongPosition;
    else
      fail("frame", "expected \"first-positive\" or \"position\"");
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) fail("tolerances", "expected an object of numbers");
    for (const auto& [key, value] : t.items()) {
      if (!value.is_number()) fail("tolerances." + key, "expected a number");
      s.tolerances[key] = value.get<double>();
    }
  }

  // Riemannian metrics must be positive definite where they are used:
  // h and h0 on the grid nodes, g on the sample box.
  for (const char* name : {"h", "h0"}) {
    if (!s.has_metric(name)) continue;
    std::vector<std::vector<double>> nodes;
    for (std::size_t k = 0; k < s.grid.node_count(); ++k) nodes.push_back(s.grid.coordinates(k));
    const auto r = check_positive_definite(s.metric(name), nodes);
    if (!r.passed) fail(std::string("metrics.") + name, "not positive definite on the grid");
  }
  if (s.has_metric("g")) {
    auto box = s.grid.bounds();
    box.insert(box.end(), s.sample_box.begin(), s.sample_box.end());
    const auto r = check_positive_definite(s.metric("g"), sample_box(box, 64, s.seed));
    if (!r.passed) fail("metrics.g", "not positive definite on the sample box");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace varigeo
