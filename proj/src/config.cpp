#include "krflow/config.hpp"
#include "krflow/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace krf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// split on commas outside parentheses
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Ctx {
  int line;
  std::string key;
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("key '" + key + "': " + what, line);
  }
};

double to_double(const std::string& v, const Ctx& c) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0') c.fail("expected a number, got '" + t + "'");
  return x;
}

long long to_int(const std::string& v, const Ctx& c) {
  const double x = to_double(v, c);
  if (x != std::floor(x) || std::abs(x) > 9e15) c.fail("expected an integer, got '" + trim(v) + "'");
  return static_cast<long long>(x);
}

bool to_bool(const std::string& v, const Ctx& c) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  c.fail("expected a boolean, got '" + t + "'");
}

// "logspace(a, b, n)" or a plain comma list
std::vector<double> to_list(const std::string& v, const Ctx& c) {
  const std::string t = trim(v);
  std::vector<double> out;
  if (t.rfind("logspace(", 0) == 0 && t.back() == ')') {
    const auto args = split_top(t.substr(9, t.size() - 10));
    if (args.size() != 3) c.fail("logspace takes (first, last, count)");
    const double a = to_double(args[0], c), b = to_double(args[1], c);
    const long long n = to_int(args[2], c);
    if (!(a > 0) || !(b > 0) || n < 1) c.fail("logspace needs positive endpoints and count");
    for (long long i = 0; i < n; ++i)
      out.push_back(n == 1 ? a : a * std::pow(b / a, double(i) / double(n - 1)));
    return out;
  }
  if (t.empty()) return out;
  for (const auto& p : split_top(t)) out.push_back(to_double(p, c));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

void set_scenario(Scenario& s, const std::string& v, const Ctx& c) {
  const std::string t = trim(v);
  const auto open = t.find('(');
  const std::string name = trim(t.substr(0, open));
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (t.back() != ')') c.fail("unbalanced parentheses");
    args = split_top(t.substr(open + 1, t.size() - open - 2));
    if (args.size() == 1 && args[0].empty()) args.clear();
  }
  if (name == "round") {
    s.kind = ScenarioKind::round;
    if (!args.empty()) c.fail("round takes no arguments");
  } else if (name == "legendre_bump") {
    s.kind = ScenarioKind::legendre_bump;
    if (args.size() == 2) {
      s.l = int(to_int(args[0], c));
      s.epsilon = to_double(args[1], c);
    } else if (!args.empty()) {
      c.fail("legendre_bump takes (l, epsilon)");
    }
  } else if (name == "multi_mode") {
    s.kind = ScenarioKind::multi_mode;
    if (args.size() == 3) {
      s.seed = static_cast<unsigned long long>(to_int(args[0], c));
      s.decay_rate = to_double(args[1], c);
      s.amplitude = to_double(args[2], c);
    } else if (!args.empty()) {
      c.fail("multi_mode takes (seed, decay_rate, amplitude)");
    }
  } else if (name == "custom_w") {
    s.kind = ScenarioKind::custom_w;
    if (args.size() == 1) s.file = args[0];
    else if (!args.empty()) c.fail("custom_w takes (file)");
  } else {
    c.fail("unknown scenario '" + name + "'");
  }
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(ExperimentSpec&, const std::string&, const Ctx&)> set;
  std::function<std::string(const ExperimentSpec&)> get;
};

#define KRF_NUM(sec, nm, field)                                                                  \
  Key {                                                                                          \
    sec, nm, [](ExperimentSpec& s, const std::string& v, const Ctx& c) { s.field = to_double(v, c); }, \
        [](const ExperimentSpec& s) { return fmt(s.field); }                                     \
  }
#define KRF_INT(sec, nm, field)                                                                  \
  Key {                                                                                          \
    sec, nm, [](ExperimentSpec& s, const std::string& v, const Ctx& c) { s.field = int(to_int(v, c)); }, \
        [](const ExperimentSpec& s) { return std::to_string(s.field); }                          \
  }
#define KRF_BOOL(sec, nm, field)                                                                 \
  Key {                                                                                          \
    sec, nm, [](ExperimentSpec& s, const std::string& v, const Ctx& c) { s.field = to_bool(v, c); }, \
        [](const ExperimentSpec& s) { return std::string(s.field ? "true" : "false"); }          \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"", "scenario", [](ExperimentSpec& s, const std::string& v, const Ctx& c) { set_scenario(s.scenario, v, c); },
       [](const ExperimentSpec& s) { return scenario_name(s.scenario); }},
      KRF_INT("", "grid_n", grid_n),
      KRF_INT("", "l", scenario.l),
      KRF_NUM("", "epsilon", scenario.epsilon),
      {"", "rescale_volume",
       [](ExperimentSpec& s, const std::string& v, const Ctx& c) {
         const std::string t = trim(v);
         s.scenario.rescale_volume = t == "default" ? -1 : int(to_bool(t, c));
       },
       [](const ExperimentSpec& s) {
         return std::string(s.scenario.rescale_volume < 0 ? "default" : s.scenario.rescale_volume ? "true" : "false");
       }},
      {"", "seed",
       [](ExperimentSpec& s, const std::string& v, const Ctx& c) {
         s.scenario.seed = static_cast<unsigned long long>(to_int(v, c));
       },
       [](const ExperimentSpec& s) { return std::to_string(s.scenario.seed); }},
      KRF_NUM("", "decay_rate", scenario.decay_rate),
      KRF_NUM("", "amplitude", scenario.amplitude),
      {"", "file", [](ExperimentSpec& s, const std::string& v, const Ctx&) { s.scenario.file = trim(v); },
       [](const ExperimentSpec& s) { return s.scenario.file; }},
      {"", "output_dir", [](ExperimentSpec& s, const std::string& v, const Ctx&) { s.output_dir = trim(v); },
       [](const ExperimentSpec& s) { return s.output_dir; }},
      KRF_NUM("", "D", D),

      KRF_NUM("flow", "dt_init", flow.dt_init),
      KRF_NUM("flow", "t_end", flow.t_end),
      {"flow", "scheme",
       [](ExperimentSpec& s, const std::string& v, const Ctx& c) {
         const std::string t = trim(v);
         if (t == "rk4") s.flow.scheme = Scheme::rk4;
         else if (t == "semi_implicit") s.flow.scheme = Scheme::semi_implicit;
         else c.fail("scheme must be rk4 or semi_implicit");
       },
       [](const ExperimentSpec& s) { return std::string(s.flow.scheme == Scheme::rk4 ? "rk4" : "semi_implicit"); }},
      KRF_NUM("flow", "vol_tol", flow.vol_tol),
      KRF_NUM("flow", "class_tol", flow.class_tol),
      KRF_NUM("flow", "potential_tol", flow.potential_tol),
      KRF_NUM("flow", "record_every", flow.record_every),
      KRF_INT("flow", "m_max", flow.m_max),
      KRF_INT("flow", "k_per_mode", flow.k_per_mode),
      KRF_NUM("flow", "band_tol", flow.band_tol),
      KRF_NUM("flow", "converge_tol", flow.converge_tol),
      KRF_BOOL("flow", "project_volume", flow.project_volume),

      {"monitors", "checks",
       [](ExperimentSpec& s, const std::string& v, const Ctx& c) {
         s.monitors.checks.clear();
         const std::string t = trim(v);
         if (t == "all" || t.empty()) return;
         for (const auto& id : split_top(t)) {
           const auto& known = known_checks();
           if (std::find(known.begin(), known.end(), id) == known.end()) c.fail("unknown check id '" + id + "'");
           s.monitors.checks.push_back(id);
         }
       },
       [](const ExperimentSpec& s) {
         if (s.monitors.checks.empty()) return std::string("all");
         std::string out;
         for (size_t i = 0; i < s.monitors.checks.size(); ++i) out += (i ? ", " : "") + s.monitors.checks[i];
         return out;
       }},
      KRF_NUM("monitors", "delta", monitors.delta),
      KRF_NUM("monitors", "Lambda", monitors.Lambda),
      KRF_NUM("monitors", "rho", monitors.rho),
      KRF_NUM("monitors", "L", monitors.L),
      KRF_NUM("monitors", "Phi0", monitors.phi0),
      KRF_NUM("monitors", "t0", monitors.t0),
      KRF_INT("monitors", "branch_mode", monitors.branch.mode),
      KRF_INT("monitors", "branch_index", monitors.branch.index),

      {"sweep", "epsilon",
       [](ExperimentSpec& s, const std::string& v, const Ctx& c) { s.sweep = to_list(v, c); },
       [](const ExperimentSpec& s) { return list_text(s.sweep); }},
      {"sweep", "target",
       [](ExperimentSpec& s, const std::string& v, const Ctx& c) {
         const std::string t = trim(v);
         if (t == "amplitude") s.sweep_target = SweepTarget::amplitude;
         else if (t == "calabi") s.sweep_target = SweepTarget::calabi;
         else c.fail("target must be amplitude or calabi");
       },
       [](const ExperimentSpec& s) { return std::string(s.sweep_target == SweepTarget::calabi ? "calabi" : "amplitude"); }},
      KRF_INT("sweep", "workers", workers),
  };
  return table;
}

void validate(const ExperimentSpec& s) {
  auto bad = [](const std::string& key, const std::string& what) { throw ConfigError("key '" + key + "': " + what); };
  if (s.grid_n < 16) bad("grid_n", "must be at least 16");
  if (s.scenario.kind == ScenarioKind::legendre_bump && s.scenario.l < 2)
    bad("l", "legendre_bump needs l >= 2 (l = 1 bumps are gauge-trivial to first order)");
  if (s.scenario.kind == ScenarioKind::custom_w && s.scenario.file.empty()) bad("file", "custom_w needs a file");
  if (!(s.flow.t_end >= 0)) bad("t_end", "must be nonnegative");
  if (!(s.flow.record_every > 0)) bad("record_every", "must be positive");
  if (s.flow.dt_init < 0) bad("dt_init", "must be nonnegative");
  if (s.flow.m_max < 2) bad("m_max", "must be at least 2");
  if (s.flow.k_per_mode < 3) bad("k_per_mode", "must be at least 3");
  if (!(s.monitors.rho > 0)) bad("rho", "must be positive");
  if (!(s.monitors.phi0 > 0)) bad("Phi0", "must be positive");
  if (s.workers < 1) bad("workers", "must be at least 1");
}

}  // namespace

ExperimentSpec default_spec() {
  ExperimentSpec s;
  s.flow.t_end = 5.0;
  s.flow.record_every = 0.05;
  return s;
}

std::string scenario_name(const Scenario& s) {
  switch (s.kind) {
    case ScenarioKind::round: return "round";
    case ScenarioKind::legendre_bump: return "legendre_bump";
    case ScenarioKind::multi_mode: return "multi_mode";
    case ScenarioKind::custom_w: return "custom_w";
  }
  return "?";
}

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec = default_spec();
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "flow" && section != "monitors" && section != "sweep")
        throw ConfigError("unknown section '" + section + "'", line_no);
      continue;
    }
    // several "k = v" pieces on one line, or one assignment whose value is a list
    std::vector<std::string> pieces = split_top(line);
    const bool multi = pieces.size() > 1 && std::all_of(pieces.begin(), pieces.end(), [](const std::string& p) {
                         return p.find('=') != std::string::npos;
                       });
    if (!multi) pieces = {line};
    for (const auto& piece : pieces) {
      const auto eq = piece.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
      std::string key = trim(piece.substr(0, eq));
      const std::string value = piece.substr(eq + 1);
      std::string sec = section;
      if (const auto dot = key.find('.'); dot != std::string::npos) {
        sec = key.substr(0, dot);
        key = key.substr(dot + 1);
      }
      const auto& table = keys();
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Key& k) { return k.section == sec && k.name == key; });
      if (it == table.end())
        throw ConfigError("unknown key '" + (sec.empty() ? key : sec + "." + key) + "'", line_no);
      it->set(spec, value, Ctx{line_no, key});
    }
  }
  validate(spec);
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read spec file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_spec(ss.str());
}

std::string to_text(const ExperimentSpec& spec) {
  std::string out, section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      section = k.section;
      out += "\n[" + section + "]\n";
    }
    out += k.name + " = " + k.get(spec) + "\n";
  }
  return out;
}

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) { return to_text(a) == to_text(b); }

std::string fnv1a_hex(const std::string& text) {
  unsigned long long h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", h);
  return buf;
}

}  // namespace krf
