#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "lorhol/cli.hpp"
#include "lorhol/holonomy.hpp"
#include "lorhol/structures.hpp"
#include "lorhol/transport.hpp"

namespace lorhol::cli {

namespace {

ParseError config_error(const std::string& what) { return ParseError(ParseError::Kind::Config, 0, what); }

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json mat_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<std::string> split_words(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

Definitions read_definitions(const Config& cfg, int n) {
  Definitions defs;
  for (const auto& [name, text] : cfg.section("define")) defs[name] = parse_expression(text, n, defs);
  return defs;
}

ScalarField read_expr(const Config& cfg, const std::string& key, int n, const Definitions& defs, const ScalarField& fallback) {
  const auto v = cfg.get("metric", key);
  if (!v) return fallback;
  return parse_expression(*v, n, defs);
}

void check_metric_keys(const Config& cfg, const std::set<std::string>& allowed,
                       const std::function<bool(const std::string&)>& pattern) {
  for (const auto& [k, v] : cfg.section("metric")) {
    (void)v;
    if (allowed.count(k) || pattern(k)) continue;
    throw config_error("unknown key [metric] " + k);
  }
}

bool indexed_key(const std::string& key, const std::string& prefix, int count, int lo, int hi) {
  if (key.rfind(prefix, 0) != 0) return false;
  std::string rest = key.substr(prefix.size());
  std::replace(rest.begin(), rest.end(), '_', ' ');
  std::istringstream in(rest);
  for (int c = 0; c < count; ++c) {
    int v = 0;
    if (!(in >> v) || v < lo || v > hi) return false;
  }
  std::string tail;
  return !(in >> tail);
}

std::optional<Box> read_domain(const Config& cfg, int m) {
  const bool has_lo = cfg.has("metric", "domain_lo");
  const bool has_hi = cfg.has("metric", "domain_hi");
  if (!has_lo && !has_hi) return std::nullopt;
  if (has_lo != has_hi) throw config_error("[metric] needs both domain_lo and domain_hi");
  Box b{to_vector(cfg.get_list("metric", "domain_lo", {})), to_vector(cfg.get_list("metric", "domain_hi", {}))};
  if (b.lo.size() != m || b.hi.size() != m) throw config_error("[metric] domain bounds need " + std::to_string(m) + " numbers");
  if ((b.hi.array() <= b.lo.array()).any()) throw config_error("[metric] domain_hi must exceed domain_lo");
  return b;
}

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<Point> probe_grid(const Config& cfg, const MetricChart& M, std::uint64_t seed) {
  const int count = cfg.get_int("probe", "count", 64);
  if (count < 1) throw config_error("[probe] count must be positive");
  return probe_points(M.domain(), count, static_cast<std::uint64_t>(cfg.get_int("probe", "seed", static_cast<int>(seed))));
}

Json metric_json(const Construction& c) {
  const MetricChart& M = c.chart;
  Json j;
  j["name"] = c.name;
  j["screen_dim"] = M.screen_dim();
  j["walker"] = M.is_walker();
  Json entries = Json::object();
  for (int a = 0; a < M.dim(); ++a)
    for (int b = a; b < M.dim(); ++b)
      if (!M.entry(a, b).constant_value() || *M.entry(a, b).constant_value() != 0.0)
        entries[std::to_string(a) + "," + std::to_string(b)] = M.entry(a, b).to_string();
  j["entries"] = entries;
  j["domain"] = {{"lo", vec_json(M.domain().lo)}, {"hi", vec_json(M.domain().hi)}};
  j["base_point"] = vec_json(c.base_point);
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

Json report_header(const std::string& command, std::uint64_t seed) {
  Json j;
  j["tool"] = "lorhol";
  j["version"] = LORHOL_VERSION;
  j["command"] = command;
  j["seed"] = seed;
  j["timestamp"] = timestamp_now();
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const DomainError*>(&e)) return 4;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 1;
}

Construction build_metric(const Config& cfg) {
  if (!cfg.has_section("metric")) throw config_error("missing [metric] section");
  const std::string kind = cfg.get_string("metric", "kind", "");
  if (kind.empty()) throw config_error("[metric] kind is required");
  const auto names = demo_names();
  Construction c;

  if (kind == "walker" || kind == "general") {
    if (!cfg.has("metric", "n")) throw config_error("[metric] n is required for kind = " + kind);
    const int n = cfg.get_int("metric", "n", 0);
    if (n < 1) throw config_error("[metric] n must be at least 1");
    const int m = n + 2;
    const Definitions defs = read_definitions(cfg, n);
    const std::set<std::string> common{"kind", "n", "domain_lo", "domain_hi", "base"};
    const auto domain = read_domain(cfg, m);
    if (kind == "walker") {
      check_metric_keys(cfg, {"kind", "n", "domain_lo", "domain_hi", "base", "f"}, [&](const std::string& k) {
        return indexed_key(k, "u", 1, 1, n) || indexed_key(k, "gbase_", 2, 1, n);
      });
      std::vector<ScalarField> u;
      for (int i = 1; i <= n; ++i) u.push_back(read_expr(cfg, "u" + std::to_string(i), n, defs, ScalarField(n)));
      std::vector<std::vector<ScalarField>> gb(n, std::vector<ScalarField>(n, ScalarField(n)));
      for (int a = 1; a <= n; ++a) {
        for (int b = a; b <= n; ++b) {
          const std::string key = "gbase_" + std::to_string(a) + "_" + std::to_string(b);
          const ScalarField fallback = a == b ? ScalarField::constant(n, 1.0) : ScalarField(n);
          gb[a - 1][b - 1] = read_expr(cfg, key, n, defs, fallback);
          gb[b - 1][a - 1] = gb[a - 1][b - 1];
          if (a != b && cfg.has("metric", "gbase_" + std::to_string(b) + "_" + std::to_string(a)))
            throw config_error("[metric] give gbase_a_b with a <= b only");
        }
      }
      c.f = read_expr(cfg, "f", n, defs, ScalarField(n));
      c.chart = assemble_walker(n, c.f, u, gb, domain);
    } else {
      check_metric_keys(cfg, common, [&](const std::string& k) { return indexed_key(k, "g_", 2, 0, m - 1); });
      std::vector<std::vector<ScalarField>> e(m, std::vector<ScalarField>(m, ScalarField(n)));
      for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
          e[a][b] = read_expr(cfg, "g_" + std::to_string(a) + "_" + std::to_string(b), n, defs, ScalarField(n));
          e[b][a] = e[a][b];
          if (a != b && cfg.has("metric", "g_" + std::to_string(b) + "_" + std::to_string(a)))
            throw config_error("[metric] give g_i_j with i <= j only");
        }
      }
      c.chart = assemble_general(n, e);
      if (domain) c.chart.set_domain(*domain);
    }
    c.name = kind;
    c.base_point = c.chart.domain().center();
  } else if (std::find(names.begin(), names.end(), kind) != names.end()) {
    const bool takes_f = kind == "toric-ppwave" || kind == "toric-prwave" || kind == "corollary" || kind == "example52";
    check_metric_keys(cfg, {"kind", "domain_lo", "domain_hi", "base", "f", "c", "n"}, [](const std::string&) { return false; });
    if (!takes_f && (cfg.has("metric", "f") || cfg.has("metric", "n")))
      throw config_error("demo '" + kind + "' takes no coefficient overrides");
    if (cfg.has("metric", "c") && kind != "toric-ppwave" && kind != "toric-prwave")
      throw config_error("[metric] c applies to the toric demos only");
    if (kind == "corollary" || kind == "example52" || kind == "toric-ppwave" || kind == "toric-prwave") {
      const int n = kind == "example52" ? 1 : cfg.get_int("metric", "n", 2);
      if (kind == "example52" && n != 1) throw config_error("example52 has n = 1");
      const Definitions defs = read_definitions(cfg, n);
      const auto [f0, f1] = sufficiently_generic_default(n);
      if (kind == "corollary" || kind == "example52") {
        const ScalarField fallback = kind == "corollary" ? f0 : parse_expression("sin(2*pi*y1)*cos(2*pi*z)", 1);
        c = kind == "corollary" ? corollary_ppwave(n, read_expr(cfg, "f", n, defs, fallback))
                                : example52(read_expr(cfg, "f", n, defs, fallback));
      } else {
        const ScalarField fallback = kind == "toric-ppwave" ? f0 : f1;
        c = example51(n, cfg.get_double("metric", "c", 1.0), read_expr(cfg, "f", n, defs, fallback));
      }
    } else {
      c = demo(kind);
    }
    c.name = kind;
    if (const auto domain = read_domain(cfg, c.chart.dim())) {
      c.chart.set_domain(*domain);
      c.base_point = domain->center();
    }
  } else {
    throw config_error("unknown metric kind '" + kind + "'");
  }

  if (cfg.has("metric", "base")) {
    const auto b = cfg.get_list("metric", "base", {});
    if (static_cast<int>(b.size()) != c.chart.dim())
      throw config_error("[metric] base needs " + std::to_string(c.chart.dim()) + " numbers");
    c.base_point = to_vector(b);
  }
  return c;
}

CommandResult cmd_check(const Config& cfg, std::uint64_t seed) {
  CommandResult res;
  Json& r = res.report;
  r = report_header("check", seed);
  r["input"] = cfg.echo();
  const Construction c = build_metric(cfg);
  const MetricChart& M = c.chart;
  const int n = M.screen_dim();
  r["metric"] = metric_json(c);

  const auto grid = probe_grid(cfg, M, seed);
  int failures = 0;
  Json bad = Json::array();
  for (const auto& p : grid) {
    const auto [neg, pos] = M.signature_at(p);
    if (neg == 1 && pos == n + 1) continue;
    ++failures;
    if (bad.size() < 8) bad.push_back({{"point", vec_json(p)}, {"signature", {neg, pos}}});
  }
  r["signature"] = {{"points", grid.size()},
                    {"expected", {1, n + 1}},
                    {"failures", failures},
                    {"failing_points", bad},
                    {"verdict", failures == 0 ? "lorentzian" : "not lorentzian"}};

  Json samples;
  const Point& p = c.base_point;
  if (failures == 0 || M.signature_at(p).first == 1) {
    const Christoffel G = M.christoffel(p);
    Json gam = Json::array();
    for (const auto& Gk : G) gam.push_back(mat_json(Gk));
    samples["point"] = vec_json(p);
    samples["christoffel"] = gam;
    samples["riemann_max_abs"] = M.riemann(p).max_abs();
    if (M.is_walker()) {
      const int z = n + 1;
      const double dfdx = M.walker_meta()->f.jet(p, 1).gradient[0];
      double worst = 0.0;
      for (int i = 0; i < M.dim(); ++i)
        for (int k = 0; k < M.dim(); ++k) {
          const double expect = (i == z && k == 0) ? 0.5 * dfdx : 0.0;
          worst = std::max(worst, std::abs(G[k](0, i) - expect));
        }
      samples["christoffel_x_column_residual"] = worst;
      Matrix xi(M.dim(), M.dim());
      for (int i = 0; i < M.dim(); ++i)
        for (int j = 0; j < M.dim(); ++j) xi(i, j) = M.xi_curvature(p, i, j);
      samples["xi_curvature"] = mat_json(xi);
    }
  }
  r["samples"] = samples;

  res.text.push_back("metric " + c.name + ": n = " + std::to_string(n) + ", " + (M.is_walker() ? "walker" : "general"));
  res.text.push_back("signature: " + std::to_string(grid.size() - failures) + "/" + std::to_string(grid.size()) +
                     " probe points are (1, " + std::to_string(n + 1) + ")");
  res.text.push_back(failures == 0 ? "check: pass" : "check: FAIL (signature)");
  res.exit_code = failures == 0 ? 0 : 3;
  return res;
}

CommandResult cmd_holonomy(const Config& cfg, std::uint64_t seed) {
  CommandResult res;
  Json& r = res.report;
  r = report_header("holonomy", seed);
  r["input"] = cfg.echo();
  const Construction c = build_metric(cfg);
  const MetricChart& M = c.chart;
  r["metric"] = metric_json(c);

  SamplingStrategy st;
  st.seed = seed;
  st.rect_sizes = cfg.get_list("holonomy", "rect_sizes", st.rect_sizes);
  st.lasso_targets = cfg.get_int("holonomy", "lasso_targets", st.lasso_targets);
  st.margin = cfg.get_double("holonomy", "margin", st.margin);
  st.transport_tol = cfg.get_double("holonomy", "transport_tol", st.transport_tol);
  st.curvature_floor = cfg.get_double("holonomy", "curvature_floor", st.curvature_floor);
  st.loop_floor = cfg.get_double("holonomy", "loop_floor", st.loop_floor);
  const double tol_rank = cfg.get_double("holonomy", "tol_rank", 1e-7);
  if (st.lasso_targets < 0) throw config_error("[holonomy] lasso_targets must be non-negative");

  const HolonomyReport h = holonomy_report(M, c.base_point, st, tol_rank);
  Json hj;
  hj["dim"] = h.dim;
  hj["label"] = to_string(h.label, h.ell);
  hj["g_dim"] = h.screen_algebra_dim;
  hj["in_stabilizer"] = h.in_stabilizer;
  hj["cap_hit"] = h.cap_hit;
  hj["samples"] = {{"total", h.samples_total}, {"kept", h.samples_kept}};
  hj["strategy"] = {{"rect_sizes", st.rect_sizes},           {"lasso_targets", st.lasso_targets},
                    {"margin", st.margin},                   {"transport_tol", st.transport_tol},
                    {"curvature_floor", st.curvature_floor}, {"loop_floor", st.loop_floor},
                    {"tol_rank", tol_rank}};
  hj["singular_values"] = vec_json(h.singular_values);
  hj["frame"] = mat_json(h.frame);
  Json basis = Json::array();
  for (const auto& X : h.basis) basis.push_back(mat_json(X));
  hj["basis"] = basis;
  Json stab = Json::array();
  for (const auto& e : h.stab_basis) stab.push_back({{"a", e.a}, {"A", mat_json(e.A)}, {"w", vec_json(e.w)}});
  hj["stabilizer_components"] = stab;
  hj["notes"] = h.notes;
  r["holonomy"] = hj;

  res.text.push_back("holonomy at " + c.name + ": " + to_string(h.label, h.ell) + ", dim " + std::to_string(h.dim) +
                     ", g-dim " + std::to_string(h.screen_algebra_dim));
  if (M.is_walker()) {
    const ScreenHolonomy s = screen_holonomy(M, c.base_point, st, tol_rank);
    r["screen_holonomy"] = {{"dim", s.dim}, {"max_screen_curvature", s.max_screen_curvature},
                            {"singular_values", vec_json(s.singular_values)}};
    res.text.push_back("screen holonomy: dim " + std::to_string(s.dim) + ", max |R^S| " + fmt(s.max_screen_curvature));
  }
  for (const auto& note : h.notes) res.text.push_back("note: " + note);
  return res;
}

CommandResult cmd_geodesic(const Config& cfg, std::uint64_t seed) {
  CommandResult res;
  Json& r = res.report;
  r = report_header("geodesic", seed);
  r["input"] = cfg.echo();
  const Construction c = build_metric(cfg);
  const MetricChart& M = c.chart;
  const int n = M.screen_dim();
  const int m = n + 2;
  r["metric"] = metric_json(c);

  GeodesicOptions go;
  go.t_end = cfg.get_double("geodesic", "t_end", 10.0);
  go.tol = cfg.get_double("geodesic", "tol", 1e-10);
  go.output_dt = cfg.get_double("geodesic", "output_dt", go.t_end / 100.0);
  go.restrict_to_domain = cfg.get_bool("geodesic", "restrict_to_domain", false);
  if (go.t_end <= 0 || go.tol <= 0 || go.output_dt < 0) throw config_error("[geodesic] t_end and tol must be positive");
  const std::string mode = cfg.get_string("geodesic", "mode", "full");
  if (mode != "full" && mode != "reduced" && mode != "auto") throw config_error("[geodesic] mode is full, reduced or auto");
  const bool reduced_ok = is_reduced_ppwave(M);
  if (mode == "reduced" && !reduced_ok) throw ValidationError("reduced system needs a pp-wave chart with u = 0 and flat screen");
  const bool use_reduced = mode == "reduced" || (mode == "auto" && reduced_ok);
  const bool compare = cfg.get_bool("geodesic", "compare", false);
  if (compare && !reduced_ok) throw ValidationError("compare needs a chart where the reduced system applies");

  std::vector<GeodesicState> states;
  for (int k = 1;; ++k) {
    const auto v = cfg.get("geodesic", "state" + std::to_string(k));
    if (!v) break;
    const auto nums = cfg.get_list("geodesic", "state" + std::to_string(k), {});
    if (static_cast<int>(nums.size()) != 2 * m)
      throw config_error("[geodesic] state" + std::to_string(k) + " needs " + std::to_string(2 * m) + " numbers");
    GeodesicState s;
    s.position = to_vector(std::vector<double>(nums.begin(), nums.begin() + m));
    s.velocity = to_vector(std::vector<double>(nums.begin() + m, nums.end()));
    states.push_back(s);
  }
  if (states.empty()) {
    const int count = cfg.get_int("geodesic", "count", 4);
    if (count < 1) throw config_error("[geodesic] count must be positive");
    states = random_ensemble(M, count, seed, cfg.get_double("geodesic", "speed", 0.1));
  }

  std::string header = "t,x";
  for (int i = 1; i <= n; ++i) header += ",y" + std::to_string(i);
  header += ",z,vx";
  for (int i = 1; i <= n; ++i) header += ",vy" + std::to_string(i);
  header += ",vz,energy\n";

  Json traj = Json::array();
  double worst_e = 0.0, worst_z = 0.0, worst_dev = 0.0;
  bool all_done = true;
  std::ostringstream csv;
  csv << header;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Trajectory tr = use_reduced ? ppwave_reduced(M, states[k], go) : geodesic(M, states[k], go);
    const auto& d = tr.diagnostics;
    Json e;
    e["index"] = k;
    e["position"] = vec_json(states[k].position);
    e["velocity"] = vec_json(states[k].velocity);
    e["termination"] = to_string(d.termination);
    e["t_final"] = tr.t.back();
    e["energy"] = tr.energy;
    e["max_energy_drift"] = d.max_energy_drift;
    e["z_dot_drift"] = d.z_dot_drift;
    e["steps"] = d.steps;
    e["rejected"] = d.rejected;
    if (compare) {
      const Trajectory other = use_reduced ? geodesic(M, states[k], go) : ppwave_reduced(M, states[k], go);
      double dev = 0.0;
      for (std::size_t s = 0; s < std::min(tr.t.size(), other.t.size()); ++s)
        dev = std::max(dev, (tr.position[s] - other.position[s]).cwiseAbs().maxCoeff());
      e["reduced_full_deviation"] = dev;
      worst_dev = std::max(worst_dev, dev);
    }
    traj.push_back(e);
    worst_e = std::max(worst_e, d.max_energy_drift);
    worst_z = std::max(worst_z, d.z_dot_drift);
    all_done = all_done && d.termination == Termination::Completed;
    for (std::size_t s = 0; s < tr.t.size(); ++s) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", tr.t[s]);
      csv << buf;
      for (int i = 0; i < m; ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", tr.position[s][i]);
        csv << buf;
      }
      for (int i = 0; i < m; ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", tr.velocity[s][i]);
        csv << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.17g\n", tr.energy_series[s]);
      csv << buf;
    }
  }
  res.csv = csv.str();
  r["options"] = {{"t_end", go.t_end}, {"tol", go.tol}, {"output_dt", go.output_dt}, {"system", use_reduced ? "reduced" : "full"}};
  r["trajectories"] = traj;
  Json summary = {{"count", states.size()}, {"all_completed", all_done}, {"max_energy_drift", worst_e}, {"max_z_dot_drift", worst_z}};
  if (compare) summary["max_reduced_full_deviation"] = worst_dev;
  r["summary"] = summary;

  res.text.push_back(std::to_string(states.size()) + " geodesics on " + c.name + " to t = " + fmt(go.t_end) + " (" +
                     (use_reduced ? "reduced" : "full") + " system)");
  res.text.push_back("max energy drift " + fmt(worst_e) + ", max z-dot drift " + fmt(worst_z) +
                     (all_done ? ", all completed" : ", some trajectories stopped early"));
  if (compare) res.text.push_back("max reduced/full deviation " + fmt(worst_dev));
  return res;
}

CommandResult cmd_structure(const Config& cfg, std::uint64_t seed) {
  CommandResult res;
  Json& r = res.report;
  r = report_header("structure", seed);
  r["input"] = cfg.echo();
  const Construction c = build_metric(cfg);
  const MetricChart& M = c.chart;
  r["metric"] = metric_json(c);

  auto checks = split_words(cfg.get_string("structure", "checks", "one_one primitive"));
  const std::set<std::string> known{"one_one", "primitive", "hyperkahler", "g2", "spin7", "su_phase"};
  for (const auto& name : checks)
    if (!known.count(name)) throw config_error("unknown structure check '" + name + "'");
  const double tol = cfg.get_double("structure", "tol", 1e-8);
  const auto J = cfg.get_matrix("structure", "J");
  const auto J2 = cfg.get_matrix("structure", "J2");
  const std::string psi_src = cfg.get_string("structure", "psi", "twist");
  const std::optional<Matrix> psi_const = psi_src == "twist" ? std::nullopt : cfg.get_matrix("structure", "psi");
  if (psi_src == "twist" && !M.is_walker()) throw ValidationError("psi = twist needs a Walker chart");
  const auto grid = probe_grid(cfg, M, seed);
  auto psi_at = [&](const Point& p) { return psi_const ? *psi_const : screen_twist(M, p); };
  const int k = psi_const ? static_cast<int>(psi_const->rows()) : M.screen_dim();
  if (psi_const && psi_const->cols() != k) throw ValidationError("psi must be square");
  if (psi_const && (*psi_const + psi_const->transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("psi must be antisymmetric");
  const Matrix G = cfg.get_matrix("structure", "G").value_or(Matrix::Identity(k, k));
  auto need_J = [&](const std::optional<Matrix>& m, const char* name) -> const Matrix& {
    if (!m) throw config_error(std::string("[structure] ") + name + " is required for the selected checks");
    return *m;
  };

  Json out = Json::object();
  res.text.push_back("structure checks on " + c.name + " (psi = " + (psi_const ? "constant" : "screen twist") + ")");
  auto record = [&](const std::string& name, double residual, Json extra) {
    extra["residual"] = residual;
    extra["pass"] = residual <= tol;
    out[name] = extra;
    res.text.push_back(name + ": residual " + fmt(residual) + (residual <= tol ? " (pass)" : " (nonzero)"));
  };
  for (const auto& name : checks) {
    if (name == "one_one") {
      double worst = 0.0;
      for (const auto& p : grid) worst = std::max(worst, one_one_residual(psi_at(p), need_J(J, "J")));
      record(name, worst, Json::object());
    } else if (name == "primitive") {
      const Matrix& Jm = need_J(J, "J");
      double worst = 0.0;
      for (const auto& p : grid) worst = std::max(worst, std::abs(dual_lefschetz(psi_at(p), Jm, G)));
      record(name, worst, {{"lambda_at_base", dual_lefschetz(psi_at(c.base_point), Jm, G)}});
    } else if (name == "hyperkahler") {
      double worst = 0.0;
      for (const auto& p : grid) worst = std::max(worst, check_hyperkahler(psi_at(p), need_J(J, "J"), need_J(J2, "J2")));
      record(name, worst, Json::object());
    } else if (name == "g2") {
      if (k != 7) throw ValidationError("g2 check needs a 7 x 7 psi");
      double worst = 0.0;
      for (const auto& p : grid) worst = std::max(worst, g2_condition(psi_at(p), standard_g2_form(), G));
      record(name, worst, Json::object());
    } else if (name == "spin7") {
      if (k != 8) throw ValidationError("spin7 check needs an 8 x 8 psi");
      double worst = 0.0;
      for (const auto& p : grid) worst = std::max(worst, spin7_condition(psi_at(p), standard_spin7_form(), G));
      record(name, worst, Json::object());
    } else if (name == "su_phase") {
      if (psi_const) throw ValidationError("su_phase uses the screen twist of the chart; drop the constant psi");
      const Matrix& Jm = need_J(J, "J");
      const auto lam_cfg = cfg.get("structure", "lambda");
      const double lam = (lam_cfg && *lam_cfg != "auto") ? cfg.get_double("structure", "lambda", 0.0)
                                                         : dual_lefschetz(screen_twist(M, c.base_point), Jm, G);
      const auto dz = cfg.get_list("structure", "dz", {0.0, 0.5, M_PI / 2, M_PI});
      const int pts = cfg.get_int("structure", "phase_points", 4);
      const std::vector<Point> sub(grid.begin(), grid.begin() + std::min<std::size_t>(grid.size(), pts));
      const SuPhaseResult s = su_phase_check(M, Jm, lam, sub, dz, cfg.get_double("structure", "transport_tol", 1e-11));
      Json ph = Json::array();
      for (std::size_t i = 0; i < s.phases.size(); ++i)
        ph.push_back({{"dz", dz[i % dz.size()]},
                      {"measured", {s.phases[i].real(), s.phases[i].imag()}},
                      {"expected", {s.expected[i].real(), s.expected[i].imag()}}});
      record(name, s.residual, {{"lambda", lam}, {"phases", ph}});
    }
  }
  r["structure"] = out;
  return res;
}

CommandResult cmd_complete(const Config& cfg, std::uint64_t seed) {
  CommandResult res;
  Json& r = res.report;
  r = report_header("complete", seed);
  r["input"] = cfg.echo();
  const Construction c = build_metric(cfg);
  const MetricChart& M = c.chart;
  r["metric"] = metric_json(c);

  ProbeOptions po;
  po.horizon = cfg.get_double("complete", "horizon", po.horizon);
  po.tol = cfg.get_double("complete", "tol", po.tol);
  po.grid_per_dim = cfg.get_int("complete", "grid_per_dim", po.grid_per_dim);
  po.periodic_part = c.periodic_part;
  const int count = cfg.get_int("complete", "count", 64);
  const double speed = cfg.get_double("complete", "speed", 0.5);
  if (count < 1 || po.horizon <= 0 || po.tol <= 0 || po.grid_per_dim < 2) throw config_error("[complete] invalid options");
  const auto ens = random_ensemble(M, count, seed, speed);
  const ProbeReport p = completeness_probe(M, ens, po);

  double max_norm = 0.0, worst_margin = std::numeric_limits<double>::infinity();
  std::map<std::string, int> terms;
  Json entries = Json::array();
  for (const auto& e : p.entries) {
    max_norm = std::max(max_norm, e.max_norm);
    worst_margin = std::min(worst_margin, e.worst_log_margin);
    ++terms[to_string(e.termination)];
    entries.push_back({{"A", e.A}, {"termination", to_string(e.termination)}, {"t_reached", e.t_reached},
                       {"max_norm", e.max_norm}, {"worst_log_margin", e.worst_log_margin},
                       {"within_envelope", e.within_envelope}});
  }
  std::string verdict = "evidence only";
  if (p.verdict_applicable) verdict = p.all_completed && p.all_within_envelope ? "complete within envelope" : "envelope violated";
  Json pj;
  pj["options"] = {{"count", count}, {"speed", speed}, {"horizon", po.horizon}, {"tol", po.tol}, {"grid_per_dim", po.grid_per_dim}};
  pj["verdict_applicable"] = p.verdict_applicable;
  if (p.verdict_applicable) {
    pj["C"] = p.C;
    pj["worst_log_margin"] = worst_margin;
    pj["all_within_envelope"] = p.all_within_envelope;
  }
  pj["all_completed"] = p.all_completed;
  pj["terminations"] = terms;
  pj["max_norm"] = max_norm;
  pj["verdict"] = verdict;
  pj["entries"] = entries;
  r["complete"] = pj;

  res.text.push_back("completeness probe on " + c.name + ": " + std::to_string(count) + " states to t = " + fmt(po.horizon));
  if (p.verdict_applicable) res.text.push_back("C = " + fmt(p.C) + ", worst log margin " + fmt(worst_margin));
  res.text.push_back("max |(y, y')| " + fmt(max_norm) + ", verdict: " + verdict);
  res.exit_code = p.verdict_applicable && verdict != "complete within envelope" ? 3 : 0;
  return res;
}

std::string demo_config(const std::string& name) {
  const auto names = demo_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw config_error("unknown demo '" + name + "'");
  std::string s = "[metric]\nkind = " + name + "\n";
  if (name == "footnote") s += "\n[complete]\ncount = 16\nhorizon = 20\n";
  if (name == "toric-ppwave" || name == "toric-prwave" || name == "flat")
    s += "\n[structure]\nchecks = one_one primitive su_phase\nJ = 0 -1; 1 0\n";
  return s;
}

}  // namespace lorhol::cli
