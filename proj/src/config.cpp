#include "dirbv/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace dirbv {

namespace pt = boost::property_tree;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drop `#` comments outside quotes.
std::string strip_comments(std::string_view text) {
  std::string out;
  bool quoted = false;
  bool comment = false;
  for (char c : text) {
    if (c == '\n') {
      quoted = comment = false;
      out += c;
      continue;
    }
    if (comment) continue;
    if (c == '"') quoted = !quoted;
    if (c == '#' && !quoted) {
      comment = true;
      continue;
    }
    out += c;
  }
  return out;
}

// Line of `key` inside `section` ("" for the top level); 0 when not found.
std::size_t line_of(std::string_view text, const std::string& section, const std::string& key) {
  std::istringstream in{std::string(text)};
  std::string line, current;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (!t.empty() && t.front() == '[') {
      current = trim(std::string_view(t).substr(1, t.find(']') - 1));
      if (key.empty() && current == section) return no;
      continue;
    }
    if (current == section && !key.empty() && trim(t.substr(0, t.find('='))) == key) return no;
  }
  return 0;
}

class Reader {
 public:
  Reader(std::string_view text, const pt::ptree& tree) : text_(text), tree_(tree) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    const std::size_t line = line_of(text_, section, key);
    const std::string path = section.empty() ? key : section + "." + key;
    throw ConfigError("config line " + std::to_string(line) + ", key '" + path + "': " + what);
  }

  const std::string* raw(const std::string& section, const std::string& key) const {
    const pt::ptree* node = &tree_;
    if (!section.empty()) {
      auto it = tree_.find(section);
      if (it == tree_.not_found()) return nullptr;
      node = &it->second;
    }
    auto it = node->find(key);
    if (it == node->not_found()) return nullptr;
    return &it->second.data();
  }

  std::string text(const std::string& section, const std::string& key) const {
    std::string v = trim(*raw(section, key));
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
  }

  void get(const std::string& section, const std::string& key, std::string& out) const {
    if (raw(section, key)) out = text(section, key);
  }

  void get(const std::string& section, const std::string& key, double& out) const {
    if (raw(section, key)) out = number(section, key, text(section, key));
  }

  template <class Int>
  void get_int(const std::string& section, const std::string& key, Int& out) const {
    if (!raw(section, key)) return;
    const std::string v = text(section, key);
    Int x{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size()) fail(section, key, "expected an integer, got '" + v + "'");
    out = x;
  }

  std::vector<std::string> list(const std::string& section, const std::string& key) const {
    std::string v = text(section, key);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<std::string> items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
      if (!item.empty()) items.push_back(item);
    }
    return items;
  }

  void get(const std::string& section, const std::string& key, Vec& out) const {
    if (!raw(section, key)) return;
    out.clear();
    for (const std::string& item : list(section, key)) out.push_back(number(section, key, item));
    if (out.empty()) fail(section, key, "empty list");
  }

  void get(const std::string& section, const std::string& key, std::vector<std::string>& out) const {
    if (!raw(section, key)) return;
    out = list(section, key);
    if (out.empty()) fail(section, key, "empty list");
  }

 private:
  double number(const std::string& section, const std::string& key, const std::string& v) const {
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size()) fail(section, key, "expected a number, got '" + v + "'");
    return x;
  }

  std::string_view text_;
  const pt::ptree& tree_;
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"seed", "out", "cap", "suites"}},
      {"space", {"builder", "dim", "side", "h", "level", "legs", "subdivision", "path"}},
      {"grids", {"t_min", "t_max", "t_per_decade", "r_min", "r_max", "r_per_decade"}},
      {"battery", {"name", "size"}},
      {"thresholds", {"pass", "flag"}},
      {"besov", {"p", "alpha"}},
      {"be", {"powers", "riesz_powers"}},
      {"bv", {"alphas"}},
      {"ineq", {"p", "delta"}},
  };
  return s;
}

void reject_unknown(const Reader& r, const pt::ptree& tree) {
  const auto& s = schema();
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (!s.at("").contains(name)) r.fail("", name, "unknown key");
      continue;
    }
    auto it = s.find(name);
    if (it == s.end() || name.empty()) r.fail(name, "", "unknown section");
    for (const auto& [key, leaf] : node) {
      if (!it->second.contains(key)) r.fail(name, key, "unknown key");
    }
  }
}

void check_grid(const Reader& r, const char* a, const char* b, const GridSpec& g) {
  if (g.min < 0.0 || g.max < 0.0 || (g.set() && !(g.min > 0.0 && g.min <= g.max)))
    r.fail("grids", a, std::string("need 0 < ") + a + " <= " + b);
  if (!(g.perDecade > 0.0)) r.fail("grids", b, "points per decade must be positive");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  const std::string cleaned = strip_comments(text);
  pt::ptree tree;
  try {
    std::istringstream in(cleaned);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(text, tree);
  reject_unknown(r, tree);

  ExperimentConfig c;
  if (!r.raw("", "seed")) throw ConfigError("config: 'seed' is required");
  r.get_int("", "seed", c.seed);
  r.get("", "out", c.out);
  r.get_int("", "cap", c.cap);
  r.get("", "suites", c.suites);
  static const std::set<std::string> known{"heat", "besov", "bv", "be", "ineq"};
  for (const std::string& s : c.suites)
    if (!known.contains(s)) r.fail("", "suites", "unknown suite '" + s + "'");

  r.get("space", "builder", c.space.builder);
  r.get_int("space", "dim", c.space.dim);
  r.get_int("space", "side", c.space.side);
  r.get("space", "h", c.space.h);
  r.get_int("space", "level", c.space.level);
  r.get("space", "legs", c.space.legs);
  r.get_int("space", "subdivision", c.space.subdivision);
  r.get("space", "path", c.space.path);
  static const std::set<std::string> builders{"torus", "lattice", "gasket", "spider", "file"};
  if (!builders.contains(c.space.builder)) r.fail("space", "builder", "unknown builder '" + c.space.builder + "'");
  if (c.space.builder == "file" && c.space.path.empty()) r.fail("space", "path", "required for builder 'file'");

  r.get("grids", "t_min", c.tGrid.min);
  r.get("grids", "t_max", c.tGrid.max);
  r.get("grids", "t_per_decade", c.tGrid.perDecade);
  r.get("grids", "r_min", c.rGrid.min);
  r.get("grids", "r_max", c.rGrid.max);
  r.get("grids", "r_per_decade", c.rGrid.perDecade);
  check_grid(r, "t_min", "t_per_decade", c.tGrid);
  check_grid(r, "r_min", "r_per_decade", c.rGrid);

  r.get("battery", "name", c.battery);
  r.get_int("battery", "size", c.batterySize);
  r.get("thresholds", "pass", c.thresholds.pass);
  r.get("thresholds", "flag", c.thresholds.flag);
  if (!(c.thresholds.pass >= 1.0 && c.thresholds.flag >= c.thresholds.pass))
    r.fail("thresholds", "flag", "need 1 <= pass <= flag");
  r.get("besov", "p", c.besovP);
  r.get("besov", "alpha", c.besovAlpha);
  r.get("be", "powers", c.bePowers);
  r.get("be", "riesz_powers", c.rieszPowers);
  r.get("bv", "alphas", c.hausdorffAlphas);
  r.get("ineq", "p", c.ineqP);
  r.get("ineq", "delta", c.ineqDelta);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::canonical() const {
  ojson j;
  j["seed"] = seed;
  j["cap"] = cap;
  j["suites"] = suites;
  j["space"] = {{"builder", space.builder}, {"dim", space.dim},     {"side", space.side},
                {"h", space.h},             {"level", space.level}, {"legs", space.legs},
                {"subdivision", space.subdivision}, {"path", space.path}};
  j["grids"] = {{"t", {tGrid.min, tGrid.max, tGrid.perDecade}}, {"r", {rGrid.min, rGrid.max, rGrid.perDecade}}};
  j["battery"] = {{"name", battery}, {"size", batterySize}};
  j["thresholds"] = {{"pass", thresholds.pass}, {"flag", thresholds.flag}};
  j["besov"] = {{"p", besovP}, {"alpha", besovAlpha}};
  j["be"] = {{"powers", bePowers}, {"riesz_powers", rieszPowers}};
  j["bv"] = {{"alphas", hausdorffAlphas}};
  j["ineq"] = {{"p", ineqP}, {"delta", ineqDelta}};
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  std::ostringstream os;
  os << std::hex << fnv1a(canonical());
  return os.str();
}

MetricMeasureSpace build_space(const SpaceSpec& spec, std::size_t cap) {
  if (spec.builder == "torus") return build_torus(spec.dim, spec.side, spec.h > 0.0 ? spec.h : 1.0 / spec.side, cap);
  if (spec.builder == "lattice") {
    if (spec.side < 2) throw ConfigError("space.side must be >= 2");
    return build_lattice(spec.dim, spec.side, spec.h > 0.0 ? spec.h : 1.0 / (spec.side - 1), cap);
  }
  if (spec.builder == "gasket") return build_sierpinski_gasket(spec.level, cap);
  if (spec.builder == "spider") return build_metric_graph(spec.legs, spec.subdivision, cap);
  if (spec.builder == "file") return load_space(spec.path, cap);
  throw ConfigError("unknown space builder '" + spec.builder + "'");
}

namespace {

Vec grid_from(const GridSpec& spec, const ScaleRange& resolved, const char* what) {
  if (!spec.set()) return geometric_grid(resolved.lo, resolved.hi, spec.perDecade);
  const Vec g = geometric_grid(spec.min, spec.max, spec.perDecade);
  if (!resolved.contains(spec.min) || !resolved.contains(spec.max)) {
    std::ostringstream os;
    os << what << " [" << spec.min << ", " << spec.max << "] leaves the resolved window [" << resolved.lo << ", "
       << resolved.hi << "]";
    throw ConfigError(os.str());
  }
  return g;
}

}  // namespace

Vec time_grid(const GridSpec& spec, const MetricMeasureSpace& space) {
  return grid_from(spec, resolved_time_range(space), "time grid");
}

Vec radius_grid(const GridSpec& spec, const MetricMeasureSpace& space) {
  return grid_from(spec, resolved_radius_range(space), "radius grid");
}

}  // namespace dirbv
