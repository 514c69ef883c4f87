#include "ht/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <json.hpp>

#include "ht/torsion.hpp"

namespace ht {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

const std::map<std::string, std::set<std::string>>& command_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"sieve", {"lo", "hi", "csv"}},
      {"classgroup", {"d"}},
      {"census-vertical", {"D", "Y", "k", "method", "shards", "tolerance", "csv"}},
      {"census-horizontal", {"D", "Y", "f", "shards", "tolerance"}},
      {"census-smoothed",
       {"D", "Y", "k", "phi_lo", "phi_hi", "psi", "main_term_only", "eps", "shards", "tolerance"}},
      {"dh", {"D", "phi_lo", "phi_hi", "shards", "cache", "csv", "with_invariants", "tolerance"}},
      {"equidist", {"D", "Ymax", "nx", "y_edges", "shards", "tolerance", "min_model", "csv"}},
      {"constants", {"precision"}},
      {"verify", {"suite", "Dmax"}},
      {"cache-build", {"lo", "hi", "cache", "shards", "with_invariants", "csv"}},
      {"cache-merge", {"inputs", "cache"}},
  };
  return keys;
}

const char* kBoundaryConvention =
    "Im(z) >= 1/Y, i.e. N <= Y sqrt(d); equality needs d to be a square, so no ties occur";

json conventions() {
  return {{"boundary", kBoundaryConvention},
          {"dh_leading_constant", "2/pi^2"},
          {"hyperbolic_measure", "dx dy / y^2"},
          {"discriminant_range", "squarefree d = 2 mod 4, d <= D"}};
}

std::string fmt_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void emit(const RunConfig& cfg, const json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (cfg.has("output")) write_atomic(cfg.get("output", ""), text);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

SmoothTestFunction phi_from(const RunConfig& cfg, double lo, double hi) {
  return SmoothTestFunction::bump(cfg.get_double("phi_lo", lo), cfg.get_double("phi_hi", hi));
}

SmoothTestFunction psi_from(const std::string& name) {
  if (name == "Psi") return SmoothTestFunction::Psi();
  if (name == "sharp") return SmoothTestFunction::sharp();
  if (name == "gaussian") return SmoothTestFunction::gaussian();
  if (name == "lognormal") return SmoothTestFunction::lognormal();
  throw ConfigError("unknown psi '" + name + "' (Psi, sharp, gaussian, lognormal)");
}

// 1 when a tolerance is configured and violated
int tolerance_status(const RunConfig& cfg, double ratio, json& j) {
  if (!cfg.has("tolerance")) return 0;
  const double tol = cfg.get_double("tolerance", 0);
  const bool pass = std::abs(ratio - 1) <= tol;
  j["tolerance"] = tol;
  j["pass"] = pass;
  return pass ? 0 : 1;
}

int cmd_sieve(const RunConfig& cfg, std::ostream& out) {
  const i64 lo = cfg.get_int("lo", 1, 1, i64(1) << 40);
  const i64 hi = cfg.get_int("hi", 1000, lo, i64(1) << 40);
  const auto ds = sieve_discriminants(lo, hi);
  json j{{"command", "sieve"}, {"lo", lo}, {"hi", hi}, {"count", ds.size()}};
  j["first"] = std::vector<i64>(ds.begin(), ds.begin() + std::ptrdiff_t(std::min<std::size_t>(ds.size(), 10)));
  if (cfg.has("csv")) {
    std::string s = "d\n";
    for (i64 d : ds) s += std::to_string(d) + "\n";
    write_atomic(cfg.get("csv", ""), s);
  }
  emit(cfg, j, out);
  return 0;
}

int cmd_classgroup(const RunConfig& cfg, std::ostream& out) {
  const i64 d = cfg.get_int("d", 0, 1, i64(1) << 34);
  check_discriminant(d);
  const ClassGroup G = class_group_of(d);
  json forms = json::array();
  for (std::size_t i = 0; i < G.reduced_forms.size(); ++i) {
    const auto& f = G.reduced_forms[i];
    forms.push_back({{"a", f.a}, {"b", f.b}, {"c", f.c}, {"order", G.orders[i]}});
  }
  json counts;
  for (int k : {3, 5, 7, 9}) counts["k" + std::to_string(k)] = torsion_classes(G, k, true).size();
  emit(cfg, {{"command", "classgroup"}, {"d", d}, {"h", G.h}, {"invariants", G.structure},
             {"torsion_counts", counts}, {"forms", forms}},
       out);
  return 0;
}

int cmd_vertical(const RunConfig& cfg, std::ostream& out) {
  const i64 D = cfg.get_int("D", 0, 1, 100000000);
  const Rational Y = cfg.get_rational("Y", Rational(1));
  const int k = int(cfg.get_int("k", 3, 3, kMaxTorsionOrder));
  check_torsion_order(k);
  const std::string method = cfg.get("method", "direct");
  if (method != "direct" && method != "tuples" && method != "both")
    throw ConfigError("method must be direct, tuples or both");
  CensusOptions opt;
  opt.shards = int(cfg.get_int("shards", 1, 1, 256));
  json j{{"command", "census-vertical"}, {"D", D}, {"Y", Y.str()}, {"k", k}, {"method", method},
         {"conventions", conventions()}};
  int status = 0;
  i64 total = 0;
  if (method != "tuples") {
    const VerticalCensus v = vertical_census(D, Y, k, CensusMethod::direct, opt, cfg.has("csv"));
    j["direct"] = v.total;
    total = v.total;
    if (cfg.has("csv")) {
      std::string s = "d,N,b\n";
      for (const auto& r : v.records)
        for (const auto& h : r.hits)
          s += std::to_string(r.d) + "," + std::to_string(h.N) + "," + std::to_string(h.b) + "\n";
      write_atomic(cfg.get("csv", ""), s);
    }
  }
  if (method != "direct") {
    const i64 t = vertical_census_tuples(D, Y, k, opt.shards);
    j["tuples"] = t;
    total = t;
  }
  if (method == "both") {
    const bool match = j["direct"].get<i64>() == j["tuples"].get<i64>();
    j["match"] = match;
    if (!match) status = 1;
  }
  const AsymptoticModel m = vertical_model(Y.value(), k);
  j["model_main"] = m.main(double(D));
  j["model_secondary"] = m.secondary(double(D));
  j["model"] = m.predict(double(D));
  j["residual"] = double(total) - m.predict(double(D));
  j["ratio_main"] = double(total) / m.main(double(D));
  status = std::max(status, tolerance_status(cfg, double(total) / m.main(double(D)), j));
  emit(cfg, j, out);
  return status;
}

int cmd_horizontal(const RunConfig& cfg, std::ostream& out) {
  const i64 D = cfg.get_int("D", 0, 1, 100000000);
  const Rational Y = cfg.get_rational("Y", Rational(1));
  const i64 f = cfg.get_int("f", 1, -1000000, 1000000);
  if (f == 0) throw ConfigError("f must be nonzero");
  CensusOptions opt;
  opt.shards = int(cfg.get_int("shards", 1, 1, 256));
  const TorsionDatabase db = build_torsion_database(1, std::max<i64>(D, 2), {3}, opt);
  const auto s = horizontal_census(db, D, Y, f);
  const i64 v = vertical_census(db, D, Y, 3).total;
  json j{{"command", "census-horizontal"}, {"D", D}, {"Y", Y.str()}, {"f", f},
         {"re", s.real()}, {"im", s.imag()}, {"vertical", v},
         {"ratio", v ? std::abs(s) / double(v) : 0.0}, {"conventions", conventions()}};
  int status = 0;
  if (cfg.has("tolerance")) {
    const double tol = cfg.get_double("tolerance", 0);
    const bool pass = v == 0 || std::abs(s) / double(v) <= tol;
    j["tolerance"] = tol;
    j["pass"] = pass;
    status = pass ? 0 : 1;
  }
  emit(cfg, j, out);
  return status;
}

int cmd_smoothed(const RunConfig& cfg, std::ostream& out) {
  const i64 D = cfg.get_int("D", 0, 1, 100000000);
  const double Y = cfg.get_double("Y", 1);
  const int k = int(cfg.get_int("k", 3, 3, kMaxTorsionOrder));
  check_torsion_order(k);
  const SmoothTestFunction phi = phi_from(cfg, 1, 2);
  const SmoothTestFunction psi = psi_from(cfg.get("psi", "Psi"));
  SmoothedOptions so;
  so.main_term_only = parse_bool("main_term_only", cfg.get("main_term_only", "false"));
  so.eps = cfg.get_double("eps", 1e-12);
  CensusOptions opt;
  opt.shards = int(cfg.get_int("shards", 1, 1, 256));
  const i64 hi = i64(std::ceil(phi.support_hi * double(D)));
  const TorsionDatabase db = build_torsion_database(1, std::max<i64>(hi, 2), {k}, opt);
  const double v = smoothed_census(db, D, Y, k, phi, psi, so);
  const AsymptoticModel m = smoothed_model(Y, k, phi, psi);
  json j{{"command", "census-smoothed"}, {"D", D}, {"Y", Y}, {"k", k}, {"psi", psi.name},
         {"phi", {phi.params[0], phi.params[1]}}, {"value", v}, {"model_main", m.main(double(D))},
         {"model", m.predict(double(D))}, {"residual", v - m.predict(double(D))},
         {"main_term_only", so.main_term_only}, {"conventions", conventions()}};
  if (!psi.pole_free_except_zero) j["warning"] = "psi is admissible for the main term only";
  const int status = tolerance_status(cfg, v / m.main(double(D)), j);
  emit(cfg, j, out);
  return status;
}

int cmd_dh(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const i64 D = cfg.get_int("D", 0, 1, 100000000);
  const SmoothTestFunction phi = phi_from(cfg, 0.5, 1);
  const i64 hi = std::max<i64>(2, i64(std::ceil(phi.support_hi * double(D))));
  const int shards = int(cfg.get_int("shards", 1, 1, 256));
  const bool inv = parse_bool("with_invariants", cfg.get("with_invariants", "false"));
  std::string cache = cfg.get("cache", default_cache_path());
  std::vector<CacheEntry> entries;
  json j{{"command", "dh"}, {"D", D}, {"phi", {phi.params[0], phi.params[1]}}};
  if (!cache.empty()) {
    CacheFillResult r = cache_fill(cache, 1, hi, inv, shards);
    entries = std::move(r.entries);
    j["cache"] = {{"path", cache}, {"computed", r.computed}, {"reused", r.reused}};
  } else {
    CensusOptions opt;
    opt.shards = shards;
    opt.with_invariants = inv;
    const TorsionDatabase db = build_torsion_database(1, hi, {3, 5, 7, 9}, opt);
    for (const auto& p : db.profiles) entries.push_back(cache_entry_from(p));
  }
  (void)err;
  std::vector<double> parts;
  for (const auto& e : entries)
    if (e.counts[0]) parts.push_back(phi(double(e.d) / double(D)) * double(e.counts[0]));
  const double v = pairwise_sum(parts);
  const AsymptoticModel m = dh_model(3, phi);
  j["value"] = v;
  j["model_main"] = m.main(double(D));
  j["model"] = m.predict(double(D));
  j["ratio_main"] = v / m.main(double(D));
  j["residual"] = v - m.predict(double(D));
  j["conventions"] = conventions();
  if (cfg.has("csv")) write_atomic(cfg.get("csv", ""), census_csv(entries));
  const int status = tolerance_status(cfg, v / m.main(double(D)), j);
  emit(cfg, j, out);
  return status;
}

int cmd_equidist(const RunConfig& cfg, std::ostream& out) {
  const i64 D = cfg.get_int("D", 0, 1, 100000000);
  const Rational Ymax = cfg.get_rational("Ymax", Rational(2));
  HistogramGrid grid;
  grid.nx = int(cfg.get_int("nx", 10, 1, 1000));
  for (const auto& s : split(cfg.get("y_edges", "0.5,0.75,1,1.25,1.5,2,3,4"), ',')) {
    if (s == "inf")
      grid.y_edges.push_back(std::numeric_limits<double>::infinity());
    else
      grid.y_edges.push_back(Rational::parse(s).value());
  }
  CensusOptions opt;
  opt.shards = int(cfg.get_int("shards", 1, 1, 256));
  const TorsionDatabase db = build_torsion_database(1, std::max<i64>(D, 2), {3}, opt);
  const Histogram H = equidist_histogram(db, D, Ymax, grid);
  const double min_model = cfg.get_double("min_model", 500);
  const double tol = cfg.get_double("tolerance", 0.15);
  json cells = json::array();
  bool pass = true;
  std::string csv = "x_lo,x_hi,y_lo,y_hi,count,model\n";
  for (int i = 0; i < grid.nx; ++i)
    for (std::size_t jy = 0; jy + 1 < grid.y_edges.size(); ++jy) {
      const double x0 = -0.5 + double(i) / grid.nx, x1 = -0.5 + double(i + 1) / grid.nx;
      const i64 c = H.counts[std::size_t(i)][jy];
      const double mdl = H.model[std::size_t(i)][jy];
      const bool checked = mdl >= min_model;
      const bool ok = !checked || std::abs(double(c) / mdl - 1) <= tol;
      pass = pass && ok;
      cells.push_back({{"x", {x0, x1}}, {"y", {grid.y_edges[jy], grid.y_edges[jy + 1]}},
                       {"count", c}, {"model", mdl}, {"checked", checked}, {"ok", ok}});
      csv += fmt_double(x0) + "," + fmt_double(x1) + "," + fmt_double(grid.y_edges[jy]) + "," +
             fmt_double(grid.y_edges[jy + 1]) + "," + std::to_string(c) + "," + fmt_double(mdl) + "\n";
    }
  bool symmetric = true;
  for (int i = 0; i < grid.nx; ++i)
    if (H.counts[std::size_t(i)] != H.counts[std::size_t(grid.nx - 1 - i)]) symmetric = false;
  if (cfg.has("csv")) write_atomic(cfg.get("csv", ""), csv);
  json j{{"command", "equidist"}, {"D", D}, {"Ymax", Ymax.str()}, {"total", H.total},
         {"cells", cells}, {"symmetric", symmetric}, {"pass", pass && symmetric},
         {"conventions", conventions()}};
  emit(cfg, j, out);
  return pass && symmetric ? 0 : 1;
}

int cmd_constants(const RunConfig& cfg, std::ostream& out) {
  const int precision = int(cfg.get_int("precision", 30, 5, 40));
  json arr = json::array();
  for (const auto& c : constants_report())
    arr.push_back({{"name", c.name},
                   {"value", c.value.str(precision)},
                   {"error", static_cast<double>(c.error)},
                   {"formula", c.formula}});
  arr.push_back({{"name", "I(1)"}, {"value", I_real(Real(1)).str(precision)}, {"error", 1e-45},
                 {"formula", "(sqrt(pi)/2) Gamma(s-1/2) / ((3/2-s) Gamma(s))"}});
  emit(cfg, {{"command", "constants"}, {"precision", precision}, {"constants", arr}}, out);
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const std::string suite = cfg.get("suite", "all");
  static const std::set<std::string> known = {"all", "bijection", "dual", "rho", "cusp", "eisenstein"};
  if (!known.count(suite)) throw ConfigError("unknown suite '" + suite + "'");
  const i64 Dmax = cfg.get_int("Dmax", 2000, 10, 1000000);
  auto want = [&](const char* s) { return suite == "all" || suite == s; };
  json checks = json::array();
  bool all_ok = true;
  auto record = [&](const std::string& name, bool ok, json detail) {
    all_ok = all_ok && ok;
    checks.push_back({{"name", name}, {"ok", ok}, {"detail", std::move(detail)}});
  };
  if (want("bijection"))
    for (int k : {3, 5}) {
      const BijectionReport r = bijection_check(Dmax, k, Rational(10));
      record("bijection k=" + std::to_string(k), r.ok(),
             {{"tuples", r.tuples}, {"pairs", r.pairs}, {"mismatches", r.mismatches}});
    }
  if (want("dual"))
    for (int k : {3, 5})
      for (const Rational& Y : {Rational(1, 2), Rational(1), Rational(2), Rational(5)}) {
        const i64 a = vertical_census(Dmax, Y, k, CensusMethod::direct).total;
        const i64 b = vertical_census_tuples(Dmax, Y, k);
        record("dual k=" + std::to_string(k) + " Y=" + Y.str(), a == b, {{"direct", a}, {"tuples", b}});
      }
  if (want("rho")) {
    i64 bad = 0, n = 0;
    for (i64 l = 1; l <= 12; ++l)
      for (i64 m = 1; m <= 30; ++m)
        for (i64 d : {1, 3, 7})
          for (i64 r = 1; r <= 200; ++r) {
            if (!rho_preconditions(m, l, d, r)) continue;
            ++n;
            if (rho_density(m, l, d, r) != rho_density_brute(m, l, d, r)) ++bad;
          }
    record("rho", bad == 0, {{"cases", n}, {"mismatches", bad}});
  }
  if (want("cusp")) {
    const TorsionDatabase db = build_torsion_database(1, Dmax, {3, 5, 7});
    for (int k : {3, 5, 7}) {
      const auto v = cusp_cutoff_audit(db, Dmax, k);
      record("cusp k=" + std::to_string(k), v.empty(), {{"violations", v.size()}});
    }
  }
  if (want("eisenstein")) {
    double worst = 0;
    for (int i = 0; i < 25; ++i) {
      const double y = std::pow(10.0, -3 + 6.0 * i / 24);
      const double x = -0.5 + (i * 0.618034 - std::floor(i * 0.618034));
      const KernelSum s = eisenstein_kernel_sum(x == -0.5 ? 0.5 : x, y, 1e-12);
      worst = std::max(worst, std::abs(s.value - 0.5));
    }
    record("eisenstein", worst <= 1e-8, {{"max_error", worst}});
  }
  emit(cfg, {{"command", "verify"}, {"suite", suite}, {"Dmax", Dmax}, {"checks", checks}, {"ok", all_ok}},
       out);
  return all_ok ? 0 : 1;
}

int cmd_cache_build(const RunConfig& cfg, std::ostream& out) {
  const i64 lo = cfg.get_int("lo", 1, 1, 100000000);
  const i64 hi = cfg.get_int("hi", 10000, lo, 100000000);
  const std::string cache = cfg.get("cache", default_cache_path());
  if (cache.empty()) throw ConfigError("cache-build needs cache=<path> or " + std::string(kCacheRootEnv));
  const bool inv = parse_bool("with_invariants", cfg.get("with_invariants", "false"));
  const CacheFillResult r = cache_fill(cache, lo, hi, inv, int(cfg.get_int("shards", 1, 1, 256)));
  if (cfg.has("csv")) write_atomic(cfg.get("csv", ""), census_csv(r.entries));
  emit(cfg, {{"command", "cache-build"}, {"cache", cache}, {"lo", lo}, {"hi", hi},
             {"entries", r.entries.size()}, {"computed", r.computed}, {"reused", r.reused}},
       out);
  return 0;
}

int cmd_cache_merge(const RunConfig& cfg, std::ostream& out) {
  const std::vector<std::string> inputs = split(cfg.get("inputs", ""), ',');
  if (inputs.empty() || inputs[0].empty()) throw ConfigError("cache-merge needs inputs=<a,b,...>");
  const std::string target = cfg.get("cache", "");
  if (target.empty()) throw ConfigError("cache-merge needs cache=<output path>");
  const auto merged = cache_merge(inputs);
  std::string text = "# ht-cache version=" + std::to_string(kCacheVersion) + "\n" + kCsvHeader + "\n";
  for (const auto& e : merged) text += format_cache_line(e) + "\n";
  write_atomic(target, text);
  emit(cfg, {{"command", "cache-merge"}, {"inputs", inputs}, {"cache", target}, {"entries", merged.size()}},
       out);
  return 0;
}

} // namespace

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

i64 RunConfig::get_int(const std::string& key, i64 fallback, i64 lo, i64 hi) const {
  auto it = values.find(key);
  i64 v = fallback;
  if (it != values.end()) {
    std::size_t pos = 0;
    try {
      v = std::stoll(it->second, &pos);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects an integer, got '" + it->second + "'");
    }
    if (pos != it->second.size())
      throw ConfigError("key '" + key + "' expects an integer, got '" + it->second + "'");
  } else if (fallback < lo) {
    throw ConfigError("missing required key '" + key + "'");
  }
  if (v < lo || v > hi)
    throw ConfigError("key '" + key + "' out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + it->second + "'");
  }
  if (pos != it->second.size() || !std::isfinite(v))
    throw ConfigError("key '" + key + "' expects a number, got '" + it->second + "'");
  return v;
}

Rational RunConfig::get_rational(const std::string& key, const Rational& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const Rational r = Rational::parse(it->second);
  if (r.p <= 0) throw ConfigError("key '" + key + "' must be positive");
  if (r.p > 1000000 || r.q > 1000000 || r.value() > 1000)
    throw ConfigError("key '" + key + "' outside the supported range");
  return r;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (key == "command")
      cfg.command = value;
    else
      cfg.values[key] = value;
  }
  return cfg;
}

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig cfg;
  std::size_t i = 0;
  if (!args.empty() && args[0].find('=') == std::string::npos) cfg.command = args[i++];
  std::map<std::string, std::string> overrides;
  std::string file;
  for (; i < args.size(); ++i) {
    const auto eq = args[i].find('=');
    if (eq == std::string::npos) throw ConfigError("argument '" + args[i] + "' is not key=value");
    const std::string key = trim(args[i].substr(0, eq)), value = trim(args[i].substr(eq + 1));
    if (key == "config")
      file = value;
    else if (key == "command")
      cfg.command = value;
    else
      overrides[key] = value;
  }
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file '" + file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig base = parse_config_text(ss.str());
    if (cfg.command.empty()) cfg.command = base.command;
    cfg.values = base.values;
  }
  for (auto& [k, v] : overrides) cfg.values[k] = v;
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string s = "command=" + cfg.command + "\n";
  for (const auto& [k, v] : cfg.values) s += k + "=" + v + "\n";
  return s;
}

void validate_config(const RunConfig& cfg) {
  const auto& keys = command_keys();
  auto it = keys.find(cfg.command);
  if (it == keys.end()) {
    std::string names;
    for (const auto& [name, ks] : keys) names += (names.empty() ? "" : ", ") + name;
    throw ConfigError("unknown command '" + cfg.command + "' (expected one of: " + names + ")");
  }
  for (const auto& [k, v] : cfg.values) {
    (void)v;
    if (k == "output") continue;
    if (!it->second.count(k)) throw ConfigError("unknown key '" + k + "' for command " + cfg.command);
  }
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto diagnostic = [&](const char* kind, const std::string& msg) {
    err << json{{"status", "error"}, {"kind", kind}, {"message", msg}}.dump() << "\n";
  };
  try {
    validate_config(cfg);
    const std::string& c = cfg.command;
    if (c == "sieve") return cmd_sieve(cfg, out);
    if (c == "classgroup") return cmd_classgroup(cfg, out);
    if (c == "census-vertical") return cmd_vertical(cfg, out);
    if (c == "census-horizontal") return cmd_horizontal(cfg, out);
    if (c == "census-smoothed") return cmd_smoothed(cfg, out);
    if (c == "dh") return cmd_dh(cfg, out, err);
    if (c == "equidist") return cmd_equidist(cfg, out);
    if (c == "constants") return cmd_constants(cfg, out);
    if (c == "verify") return cmd_verify(cfg, out);
    if (c == "cache-build") return cmd_cache_build(cfg, out);
    if (c == "cache-merge") return cmd_cache_merge(cfg, out);
    throw ConfigError("unhandled command '" + c + "'");
  } catch (const ConfigError& e) {
    diagnostic("config", e.what());
    return 2;
  } catch (const DomainError& e) {
    diagnostic("domain", e.what());
    return 2;
  } catch (const RangeError& e) {
    diagnostic("range", e.what());
    return 2;
  } catch (const IntegrityError& e) {
    diagnostic("integrity", e.what());
    return 1;
  } catch (const ResourceError& e) {
    diagnostic("resource", e.what());
    return 1;
  } catch (const std::exception& e) {
    diagnostic("internal", e.what());
    return 1;
  }
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const ConfigError& e) {
    err << json{{"status", "error"}, {"kind", "config"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return run(cfg, out, err);
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    if (!o) throw ResourceError("cannot write '" + tmp + "'");
    o << content;
    o.flush();
    if (!o) throw ResourceError("write to '" + tmp + "' failed");
  }
  fs::rename(tmp, target);
}

// ---- cache ----

CacheEntry cache_entry_from(const TorsionProfile& p) {
  CacheEntry e;
  e.d = p.d;
  e.h = p.h;
  e.has_invariants = p.has_invariants;
  e.invariants = p.invariants;
  const int ks[4] = {3, 5, 7, 9};
  for (int i = 0; i < 4; ++i) e.counts[std::size_t(i)] = p.count(ks[i]);
  return e;
}

std::string format_cache_line(const CacheEntry& e) {
  std::string inv;
  if (!e.has_invariants) {
    inv = "NA";
  } else {
    for (std::size_t i = 0; i < e.invariants.size(); ++i)
      inv += (i ? ";" : "") + std::to_string(e.invariants[i]);
  }
  std::string s = std::to_string(e.d) + "," + std::to_string(e.h) + "," + inv;
  for (i64 c : e.counts) s += "," + std::to_string(c);
  return s;
}

CacheEntry parse_cache_line(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 7) throw ConfigError("cache record has " + std::to_string(f.size()) + " fields");
  auto num = [&](const std::string& s) {
    std::size_t pos = 0;
    i64 v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + s + "' in cache record");
    }
    if (pos != s.size() || v < 0) throw ConfigError("bad number '" + s + "' in cache record");
    return v;
  };
  CacheEntry e;
  e.d = num(f[0]);
  e.h = num(f[1]);
  if (e.d < 1 || e.h < 1) throw ConfigError("cache record with nonpositive d or h");
  if (f[2] != "NA") {
    e.has_invariants = true;
    if (!f[2].empty())
      for (const auto& x : split(f[2], ';')) e.invariants.push_back(num(x));
  }
  for (std::size_t i = 0; i < 4; ++i) e.counts[i] = num(f[3 + i]);
  return e;
}

void cache_write(const std::string& path, const std::vector<CacheEntry>& entries) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream o(path, std::ios::binary | std::ios::app);
  if (!o) throw ResourceError("cannot open cache '" + path + "'");
  if (fresh) o << "# ht-cache version=" << kCacheVersion << "\n" << kCsvHeader << "\n";
  for (const auto& e : entries) o << format_cache_line(e) << "\n";
  o.flush();
  if (!o) throw ResourceError("write to cache '" + path + "' failed");
}

CacheReadResult cache_read(const std::string& path) {
  CacheReadResult res;
  std::ifstream in(path, std::ios::binary);
  if (!in) return res;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  in.close();
  if (data.empty()) return res;
  std::size_t pos = 0;
  auto next_line = [&](std::string& line, bool& terminated) {
    if (pos >= data.size()) return false;
    const auto nl = data.find('\n', pos);
    terminated = nl != std::string::npos;
    line = data.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : data.size();
    return true;
  };
  std::string line;
  bool term = false;
  const std::string expect = "# ht-cache version=" + std::to_string(kCacheVersion);
  if (!next_line(line, term) || line.rfind("# ht-cache version=", 0) != 0)
    throw ConfigError("'" + path + "' is not a cache file");
  if (line != expect)
    throw ConfigError("cache '" + path + "' has " + line.substr(2) + ", expected version=" +
                      std::to_string(kCacheVersion) + "; rebuild it with cache-build or move it aside");
  if (!next_line(line, term) || line != kCsvHeader) throw ConfigError("cache '" + path + "' has a bad header");
  std::size_t good_end = pos;
  i64 last_d = 0;
  while (true) {
    const std::size_t start = pos;
    if (!next_line(line, term)) break;
    bool ok = term;
    CacheEntry e;
    if (ok) {
      try {
        e = parse_cache_line(line);
      } catch (const ConfigError&) {
        ok = false;
      }
    }
    if (!ok) {
      if (pos < data.size())
        throw ConfigError("cache '" + path + "' is corrupt at byte " + std::to_string(start));
      res.truncated = true;
      res.warnings.push_back("cache '" + path + "': dropped a partial trailing record at byte " +
                             std::to_string(start));
      break;
    }
    if (e.d <= last_d) {
      // shard files are sorted; appended resumes keep ascending order as well
      res.warnings.push_back("cache '" + path + "': records out of order at d=" + std::to_string(e.d));
    }
    last_d = std::max(last_d, e.d);
    res.entries.push_back(std::move(e));
    good_end = pos;
  }
  if (res.truncated) fs::resize_file(path, good_end);
  std::stable_sort(res.entries.begin(), res.entries.end(),
                   [](const CacheEntry& a, const CacheEntry& b) { return a.d < b.d; });
  return res;
}

std::vector<CacheEntry> cache_merge(const std::vector<std::string>& paths) {
  std::vector<CacheEntry> all;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw ConfigError("cache shard '" + p + "' does not exist");
    auto r = cache_read(p);
    for (const auto& w : r.warnings) std::cerr << json{{"status", "warning"}, {"message", w}}.dump() << "\n";
    all.insert(all.end(), r.entries.begin(), r.entries.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.d < b.d; });
  std::vector<CacheEntry> out;
  for (auto& e : all) {
    if (!out.empty() && out.back().d == e.d) {
      CacheEntry& prev = out.back();
      const bool same_core = prev.h == e.h && prev.counts == e.counts;
      if (!same_core || (prev.has_invariants && e.has_invariants && prev.invariants != e.invariants))
        throw IntegrityError("cache entries disagree at d=" + std::to_string(e.d));
      if (!prev.has_invariants && e.has_invariants) prev = e;
      continue;
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string default_cache_path() {
  const char* root = std::getenv(kCacheRootEnv);
  if (!root || !*root) return "";
  return (fs::path(root) / ("torsion_v" + std::to_string(kCacheVersion) + ".cache")).string();
}

CacheFillResult cache_fill(const std::string& path, i64 lo, i64 hi, bool with_invariants, int shards) {
  if (lo < 1 || hi < lo) throw DomainError("cache_fill: need 1 <= lo <= hi");
  CacheFillResult res;
  std::map<i64, CacheEntry> have;
  if (fs::exists(path)) {
    auto r = cache_read(path);
    for (const auto& w : r.warnings) std::cerr << json{{"status", "warning"}, {"message", w}}.dump() << "\n";
    for (auto& e : r.entries)
      if (!with_invariants || e.has_invariants) have[e.d] = std::move(e);
  }
  std::vector<i64> missing;
  for_each_discriminant(lo, hi, [&](i64 d) {
    if (!have.count(d)) missing.push_back(d);
  });
  res.reused = 0;
  for (const auto& [d, e] : have)
    if (d >= lo && d <= hi) ++res.reused;
  shards = std::max(1, shards);
  const SmallestFactorTable spf(hi + hi / 3 + 16);
  const std::vector<int> ks = {3, 5, 7, 9};
  auto compute_range = [&](std::size_t a, std::size_t b, const std::string& target) {
    std::vector<CacheEntry> buf;
    for (std::size_t i = a; i < b; ++i) {
      buf.push_back(cache_entry_from(torsion_profile(missing[i], ks, with_invariants, &spf)));
      if (buf.size() >= 1000) {
        cache_write(target, buf);
        buf.clear();
      }
    }
    if (!buf.empty()) cache_write(target, buf);
  };
  if (!missing.empty()) {
    if (shards == 1) {
      compute_range(0, missing.size(), path);
    } else {
      std::vector<std::string> shard_paths;
      std::vector<std::thread> th;
      for (int s = 0; s < shards; ++s) {
        shard_paths.push_back(path + ".shard" + std::to_string(s));
        fs::remove(shard_paths.back());
      }
      for (int s = 0; s < shards; ++s) {
        const std::size_t a = missing.size() * std::size_t(s) / std::size_t(shards);
        const std::size_t b = missing.size() * std::size_t(s + 1) / std::size_t(shards);
        th.emplace_back(compute_range, a, b, shard_paths[std::size_t(s)]);
      }
      for (auto& t : th) t.join();
      std::vector<std::string> inputs;
      if (fs::exists(path)) inputs.push_back(path);
      for (const auto& p : shard_paths)
        if (fs::exists(p)) inputs.push_back(p);
      const auto merged = cache_merge(inputs);
      std::string text = "# ht-cache version=" + std::to_string(kCacheVersion) + "\n" + kCsvHeader + "\n";
      for (const auto& e : merged) text += format_cache_line(e) + "\n";
      write_atomic(path, text);
      for (const auto& p : shard_paths) fs::remove(p);
    }
    res.computed = i64(missing.size());
    for (auto& e : cache_read(path).entries)
      if (!with_invariants || e.has_invariants) have[e.d] = std::move(e);
  }
  for (auto& [d, e] : have)
    if (d >= lo && d <= hi) res.entries.push_back(e);
  return res;
}

std::string census_csv(const std::vector<CacheEntry>& entries) {
  std::string s = "# ht-census version=" + std::to_string(kCacheVersion) + "\n" + kCsvHeader + "\n";
  for (const auto& e : entries) s += format_cache_line(e) + "\n";
  return s;
}

} // namespace ht
