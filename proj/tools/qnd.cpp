// qnd: command-line front end.
//
// Exit codes: 0 success (feasibility: every check passed), 2 feasibility
// check failed, 1 input or runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qnd/cavity_response.hpp"
#include "qnd/config.hpp"
#include "qnd/coupling.hpp"
#include "qnd/io.hpp"
#include "qnd/lindblad.hpp"
#include "qnd/rates.hpp"
#include "qnd/system.hpp"
#include "qnd/trajectories.hpp"
#include "qnd/twomode.hpp"

#ifndef QND_VERSION
#define QND_VERSION "dev"
#endif

using json = nlohmann::ordered_json;
using namespace qnd;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double hz(double rad) { return rad_to_hz(rad); }

json params_json(const SystemParams& p) {
  json j;
  j["omega_m_hz"] = hz(p.omega_m);
  j["gamma_m_hz"] = hz(p.gamma_m);
  j["kappa_hz"] = hz(p.kappa);
  j["kappa_e_hz"] = hz(p.kappa_e);
  j["delta_hz"] = hz(p.delta);
  j["g1_hz"] = hz(p.g1);
  j["g2_hz"] = hz(p.g2);
  j["nbar_th"] = p.nbar_th();
  j["temperature_k"] = p.bath.temperature();
  j["nbar_photon"] = mean_photon_number(p);
  if (p.drive.given_as_power()) {
    j["power_w"] = p.drive.power_w;
    j["omega_d_hz"] = hz(p.drive.omega_d);
  }
  if (p.mass_kg) j["mass_kg"] = *p.mass_kg;
  return j;
}

/// Provenance record. The hash covers everything except the timestamp, so
/// identical runs produce identical outputs.
struct Manifest {
  json body;
  std::string hash() const { return io::hex64(io::fnv1a(body.dump())); }

  Manifest(const std::string& subcommand, json args) {
    body["artifact"] = "qnd";
    body["version"] = QND_VERSION;
    body["subcommand"] = subcommand;
    body["arguments"] = std::move(args);
  }

  std::string csv_header() const { return std::string("qnd ") + QND_VERSION + " manifest " + hash(); }

  void write_beside(const std::string& out) const {
    if (out.empty() || out == "-") return;
    json m = body;
    m["manifest_hash"] = hash();
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["created_utc"] = ts;
    io::write_atomic(out + ".manifest.json", m.dump(2) + "\n");
  }
};

SystemParams load_params(const std::string& path, ConfigMap* raw = nullptr) {
  if (path.empty()) throw InputError("--config is required");
  ConfigMap cfg = load_config(path);
  if (raw) *raw = cfg;
  return resolve_config(cfg);
}

void emit_json(const std::string& out, const Manifest& m, json payload) {
  json j;
  j["manifest_hash"] = m.hash();
  for (auto& [k, v] : payload.items()) j[k] = v;
  io::write_atomic(out, j.dump(2) + "\n");
  m.write_beside(out);
}

void emit_csv(const std::string& out, const Manifest& m, io::CsvWriter& w) {
  io::write_atomic(out, w.str());
  m.write_beside(out);
}

io::CsvWriter make_csv(const Manifest& m, std::vector<std::string> cols) {
  io::CsvWriter w(std::move(cols));
  w.comment(m.csv_header());
  return w;
}

// --- rates -----------------------------------------------------------------

int cmd_rates(const std::string& config, int n_max, const std::string& format, const std::string& out) {
  const SystemParams p = load_params(config);
  if (n_max < 0) throw InputError("--n-max must be >= 0");
  const double th0 = ground_state_rates(p).gamma_th0;
  if (!(th0 > 0.0)) throw InputError("rates are normalized by nbar_th * gamma_m, which is zero for nbar_th = 0");
  Manifest m("rates", {{"config", params_json(p)}, {"n_max", n_max}, {"format", format}});

  const std::vector<std::string> cols = {"n",           "gamma_meas", "gamma_th",    "gamma_up1",
                                         "gamma_down1", "gamma_up2",  "gamma_down2", "total_decoherence"};
  std::vector<std::vector<double>> rows;
  for (int n = 0; n <= n_max; ++n) {
    const RateSet r = transition_rates(p, n);
    rows.push_back({double(n), r.gamma_meas / th0, r.gamma_th / th0, r.gamma_up1 / th0, r.gamma_down1 / th0,
                    r.gamma_up2 / th0, r.gamma_down2 / th0, r.total_decoherence() / th0});
  }
  if (format == "json") {
    json table = json::array();
    for (const auto& row : rows) {
      json o;
      for (std::size_t i = 0; i < cols.size(); ++i) o[cols[i]] = i == 0 ? json(int(row[0])) : json(row[i]);
      table.push_back(o);
    }
    emit_json(out, m, {{"normalization_hz", hz(th0)}, {"rows", table}});
  } else {
    auto w = make_csv(m, cols);
    w.comment("rates normalized by nbar_th * gamma_m = " + io::fmt(hz(th0)) + " Hz");
    for (const auto& row : rows) w.row(row);
    emit_csv(out, m, w);
  }
  return 0;
}

// --- feasibility ------------------------------------------------------------

json check_json(const DominanceCheck& c) {
  json j;
  j["name"] = c.name;
  j["ratio"] = std::isinf(c.ratio) ? json("inf") : json(c.ratio);
  j["passed"] = c.passed;
  return j;
}

json feasibility_json(const FeasibilityReport& r) {
  json j;
  j["dominance"] = r.dominance;
  j["n"] = r.n;
  j["n_max"] = r.n_max.raw;
  j["n_max_floor"] = r.n_max.floor ? json(*r.n_max.floor) : json("none monitorable");
  j["detuned"] = r.detuned;
  json h = json::array(), g = json::array();
  for (const auto& c : r.hierarchy) h.push_back(check_json(c));
  for (const auto& c : r.ground_state) g.push_back(check_json(c));
  j["hierarchy"] = h;
  j["ground_state"] = g;
  j["linear_limit"] = check_json(r.linear_limit);
  j["sideband"] = check_json(r.sideband);
  j["all_passed"] = r.all_passed();
  return j;
}

int cmd_feasibility(const std::string& config, int n, double dominance, const std::string& out) {
  const SystemParams p = load_params(config);
  if (n < 0) throw InputError("--n must be >= 0");
  if (!(dominance > 1.0)) throw InputError("--dominance must be > 1");
  const FeasibilityReport r = feasibility(p, n, dominance);
  Manifest m("feasibility", {{"config", params_json(p)}, {"n", n}, {"dominance", dominance}});
  const auto coop = cooperativities(p);
  json payload;
  payload["cooperativity_1"] = coop.c1;
  payload["cooperativity_2"] = coop.c2;
  payload["quantum_cooperativity_1"] = coop.quantum1 ? json(*coop.quantum1) : json("inf");
  payload["quantum_cooperativity_2"] = coop.quantum2 ? json(*coop.quantum2) : json("inf");
  payload["report"] = feasibility_json(r);
  emit_json(out, m, payload);
  return r.all_passed() ? 0 : 2;
}

// --- evolve -----------------------------------------------------------------

DensityMatrix parse_initial(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InputError("--initial must be fock:k, thermal:nbar or diag:p0,p1,...");
  const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  try {
    if (kind == "fock") return DensityMatrix::fock(dim, std::stoi(arg));
    if (kind == "thermal") return DensityMatrix::thermal(dim, std::stod(arg));
    if (kind == "diag") {
      std::vector<double> p;
      std::stringstream ss(arg);
      for (std::string tok; std::getline(ss, tok, ',');) p.push_back(std::stod(tok));
      if (static_cast<int>(p.size()) > dim) throw InputError("diag: more populations than the truncation dimension");
      p.resize(dim, 0.0);
      return DensityMatrix::diagonal(p);
    }
  } catch (const std::invalid_argument&) {
    throw InputError("--initial: cannot parse '" + arg + "'");
  } catch (const DomainError& e) {
    throw InputError(std::string("--initial: ") + e.what());
  }
  throw InputError("--initial: unknown state kind '" + kind + "'");
}

int cmd_evolve(const std::string& config, const std::string& initial, double t_final, int grid, int dim,
               const std::string& format, const std::string& out) {
  const SystemParams p = load_params(config);
  if (dim <= 0) dim = std::max(8, suggest_dimension(p.nbar_th()));
  if (!(t_final > 0.0)) throw InputError("--t-final must be > 0");
  if (grid < 1) throw InputError("--grid must be >= 1");
  const DensityMatrix rho0 = parse_initial(initial, dim);
  const LindbladGenerator gen = reduced_generator(p, dim);
  const EvolutionResult res = evolve(gen, rho0, t_final, grid);
  Manifest m("evolve", {{"config", params_json(p)}, {"initial", initial}, {"t_final_s", t_final}, {"grid", grid},
                        {"dim", dim}, {"format", format}});
  json diag;
  diag["max_trace_error"] = res.max_trace_error;
  diag["max_hermiticity_error"] = res.max_hermiticity_error;
  diag["min_eigenvalue"] = res.min_eigenvalue;
  diag["steps"] = res.steps;
  diag["failed"] = res.failed();
  if (format == "json") {
    emit_json(out, m, {{"times_s", res.times}, {"populations", res.populations}, {"diagnostics", diag}});
  } else {
    std::vector<std::string> cols = {"t_s"};
    for (int n = 0; n < dim; ++n) cols.push_back("p" + std::to_string(n));
    cols.push_back("trace");
    auto w = make_csv(m, cols);
    w.comment("max_trace_error " + io::fmt(res.max_trace_error) + " max_hermiticity_error " +
              io::fmt(res.max_hermiticity_error) + " min_eigenvalue " + io::fmt(res.min_eigenvalue));
    for (std::size_t i = 0; i < res.times.size(); ++i) {
      std::vector<double> row = {res.times[i]};
      double tr = 0.0;
      for (double x : res.populations[i]) row.push_back(x), tr += x;
      row.push_back(tr);
      w.row(row);
    }
    emit_csv(out, m, w);
  }
  return res.failed() ? 1 : 0;
}

// --- traject ----------------------------------------------------------------

json stats_json(const EnsembleStats& s) {
  json j;
  j["seed_base"] = s.seed_base;
  j["count"] = s.count;
  j["n_cap"] = s.n_cap;
  j["total_events"] = s.total_events;
  j["dephasing_jumps"] = s.dephasing_jumps;
  j["mean_occupation"] = s.mean_occupation();
  int top = 0;
  for (int n = 0; n < static_cast<int>(s.visits.size()); ++n)
    if (s.visits[n] > 0) top = n;
  json per = json::array();
  for (int n = 0; n <= top; ++n) {
    json o;
    o["n"] = n;
    o["occupancy"] = s.occupancy[n];
    o["visits"] = s.visits[n];
    o["mean_dwell_s"] = s.mean_dwell(n);
    json rates;
    for (auto k : detail::kJumpChannels) rates[to_string(k)] = s.empirical_rate(n, k) / kTwoPi;
    o["empirical_rates_hz"] = rates;
    per.push_back(o);
  }
  j["states"] = per;
  return j;
}

int cmd_traject(const std::string& config, int n0, std::optional<double> t_final, int count, std::uint64_t seed,
                const std::string& method, int dim, int samples, int window, const std::string& out) {
  const SystemParams p = load_params(config);
  if (count < 1) throw InputError("--count must be >= 1");
  if (n0 < 0) throw InputError("--n0 must be >= 0");
  const double th0 = ground_state_rates(p).gamma_th0;
  if (!t_final) {
    if (!(th0 > 0.0)) throw InputError("--t-final is required when nbar_th = 0");
    t_final = 50.0 / th0;
  }
  if (!(*t_final > 0.0)) throw InputError("--t-final must be > 0");
  if (method != "gillespie" && method != "quantum-jump") throw InputError("--method must be gillespie or quantum-jump");
  if (dim <= 0) dim = default_n_cap(p.nbar_th());

  Manifest m("traject", {{"config", params_json(p)}, {"n0", n0}, {"t_final_s", *t_final}, {"count", count},
                         {"seed", seed}, {"method", method}, {"dim", dim}, {"staircase_samples", samples},
                         {"staircase_window", window}});

  std::vector<Trajectory> trajs(count);
  std::optional<LindbladGenerator> gen;
  if (method == "quantum-jump") gen.emplace(reduced_generator(p, dim));
  auto make = [&](int i) {
    if (gen) {
      if (n0 >= dim) throw DomainError("n0 outside truncation");
      Vector psi0 = Vector::Zero(dim);
      psi0(n0) = 1.0;
      return simulate_quantum_jump(*gen, psi0, *t_final, seed + i);
    }
    return simulate_jump_trajectory(p, n0, *t_final, seed + i, dim);
  };
  const EnsembleStats stats = run_ensemble(
      [&](int i) {
        trajs[i] = make(i);
        return trajs[i];
      },
      count, dim, seed);

  const std::string base = (out.empty() || out == "-") ? std::string() : out;
  auto events = make_csv(m, {"trajectory", "seed", "t_s", "n", "channel"});
  for (int i = 0; i < count; ++i) {
    const auto& tr = trajs[i];
    events.row_text({std::to_string(i), std::to_string(tr.seed), io::fmt(0.0), std::to_string(tr.initial_n), "start"});
    for (const auto& e : tr.events)
      events.row_text({std::to_string(i), std::to_string(tr.seed), io::fmt(e.time), std::to_string(e.new_n),
                       to_string(e.channel)});
  }
  if (base.empty()) {
    io::write_atomic("-", events.str());
    return 0;
  }
  emit_csv(base + ".csv", m, events);
  emit_json(base + ".stats.json", m, {{"method", method}, {"stats", stats_json(stats)}});
  auto stair = make_csv(m, {"trajectory", "t_s", "n_filtered"});
  for (int i = 0; i < count; ++i)
    for (const auto& [t, v] : staircase(trajs[i], samples, window)) stair.row({double(i), t, v});
  emit_csv(base + ".staircase.csv", m, stair);
  return 0;
}

// --- sweep ------------------------------------------------------------------

std::vector<double> parse_grid(const std::string& values, const std::string& grid) {
  std::vector<double> out;
  if (!values.empty() && !grid.empty()) throw InputError("give either --values or --grid");
  try {
    if (!values.empty()) {
      std::stringstream ss(values);
      for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(std::stod(tok));
      return out;
    }
    if (grid.empty()) return out;
    std::vector<std::string> parts;
    std::stringstream ss(grid);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 4 || (parts[0] != "lin" && parts[0] != "log"))
      throw InputError("--grid must be lin:start:stop:count or log:start:stop:count");
    const double a = std::stod(parts[1]), b = std::stod(parts[2]);
    const int k = std::stoi(parts[3]);
    if (k < 0) throw InputError("--grid count must be >= 0");
    if (parts[0] == "log" && !(a > 0.0 && b > 0.0)) throw InputError("log grid needs positive bounds");
    for (int i = 0; i < k; ++i) {
      const double f = k == 1 ? 0.0 : double(i) / (k - 1);
      out.push_back(parts[0] == "lin" ? a + f * (b - a) : std::pow(10.0, std::log10(a) + f * (std::log10(b) - std::log10(a))));
    }
  } catch (const std::invalid_argument&) {
    throw InputError("cannot parse sweep grid");
  }
  return out;
}

int cmd_sweep(const std::string& config, const std::string& axis, const std::string& values, const std::string& grid,
              int n, double dominance, const std::string& out) {
  ConfigMap raw;
  load_params(config, &raw);
  if (!is_config_key(axis)) throw InputError("unknown sweep key '" + axis + "' (valid keys: " + valid_config_keys() + ")");
  const auto points = parse_grid(values, grid);
  json args = {{"config", raw}, {"axis", axis}, {"points", points}, {"n", n}, {"dominance", dominance}};
  Manifest m("sweep", args);

  std::vector<std::string> cols = {axis,          "c1",           "c2",           "gamma_meas_hz", "gamma_th0_hz",
                                   "gamma1_hz",   "gamma2_hz",    "gamma1_approx_hz", "gamma2_approx_hz",
                                   "meas_over_th0", "n_max",      "linear_margin", "sideband_margin"};
  const SystemParams probe = resolve_config(raw);
  const FeasibilityReport shape = feasibility(probe, n, dominance);
  for (const auto& c : shape.hierarchy) cols.push_back("pass_" + c.name);
  for (const auto& c : shape.ground_state) cols.push_back("pass_" + c.name);
  cols.push_back("pass_linear_limit");
  cols.push_back("pass_sideband");
  cols.push_back("all_passed");
  auto w = make_csv(m, cols);

  for (double v : points) {
    ConfigMap cfg = raw;
    // Switching the drive or bath form along the axis replaces the other form.
    if (axis == "nbar_photon") cfg.erase("power_w"), cfg.erase("omega_d_hz");
    if (axis == "power_w" && !cfg.count("omega_d_hz")) throw InputError("sweeping power_w needs omega_d_hz in the config");
    if (axis == "power_w") cfg.erase("nbar_photon");
    if (axis == "nbar_th") cfg.erase("temperature_k");
    if (axis == "temperature_k") cfg.erase("nbar_th");
    cfg[axis] = v;
    const SystemParams p = resolve_config(cfg);
    const auto coop = cooperativities(p);
    const auto g = ground_state_rates(p);
    const auto r = feasibility(p, n, dominance);
    const double meas = measurement_rate(p);
    std::vector<double> row = {v,           coop.c1,           coop.c2,           hz(meas),
                               hz(g.gamma_th0), hz(g.gamma1_exact), hz(g.gamma2_exact), hz(g.gamma1_approx),
                               hz(g.gamma2_approx), g.gamma_th0 > 0.0 ? meas / g.gamma_th0 : INFINITY,
                               r.n_max.raw,  r.linear_limit.ratio, r.sideband.ratio};
    for (const auto& c : r.hierarchy) row.push_back(c.passed);
    for (const auto& c : r.ground_state) row.push_back(c.passed);
    row.push_back(r.linear_limit.passed);
    row.push_back(r.sideband.passed);
    row.push_back(r.all_passed());
    w.row(row);
  }
  emit_csv(out, m, w);
  return 0;
}

// --- twomode ----------------------------------------------------------------

int cmd_twomode(double omega0_hz, double nu_hz, double g1_hz_per_m, double x_max, int points, double kappa_hz,
                double delta_hz, double n1, std::optional<double> x_zpf, const std::string& format,
                const std::string& out) {
  if (!(nu_hz > 0.0)) throw InputError("--nu-hz must be > 0");
  if (points < 2) throw InputError("--points must be >= 2");
  if (!(x_max > 0.0)) throw InputError("--x-max must be > 0");
  const TwoModeParams p = TwoModeParams::mim(hz_to_rad(omega0_hz), hz_to_rad(nu_hz), hz_to_rad(g1_hz_per_m));
  json args = {{"omega0_hz", omega0_hz}, {"nu_hz", nu_hz}, {"g1_hz_per_m", g1_hz_per_m}, {"x_max_m", x_max},
               {"points", points},       {"kappa_hz", kappa_hz}, {"delta_hz", delta_hz}, {"n1", n1}};
  if (x_zpf) args["x_zpf_m"] = *x_zpf;
  Manifest m("twomode", args);
  const auto eff = mim_effective_g2(p, x_zpf);

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < points; ++i) {
    const double x = -x_max + 2.0 * x_max * i / (points - 1);
    const auto ex = mim_frequencies(p, x);
    const auto ap = mim_frequencies_quadratic(p, x);
    rows.push_back({x, hz(ex.omega_plus), hz(ex.omega_minus), hz(ap.omega_plus), hz(ap.omega_minus)});
  }
  if (format == "json") {
    json payload;
    payload["G2_prime_hz_per_m2"] = hz(eff.G2_prime);
    if (eff.g2) payload["g2_hz"] = hz(*eff.g2);
    if (kappa_hz > 0.0) {
      const auto map = single_mode_mapping(hz_to_rad(nu_hz), hz_to_rad(kappa_hz), hz_to_rad(delta_hz), n1);
      json mj;
      mj["regime"] = to_string(map.regime);
      mj["two_nu_over_kappa"] = map.ratio;
      mj["n2"] = map.n2;
      mj["weak"] = {{"nbar", map.weak_candidate.nbar}, {"measurement_factor", map.weak_candidate.measurement_factor}};
      mj["strong"] = {{"nbar", map.strong_candidate.nbar},
                      {"measurement_factor", map.strong_candidate.measurement_factor}};
      if (map.mapping) mj["selected"] = {{"nbar", map.mapping->nbar}, {"measurement_factor", map.mapping->measurement_factor}};
      payload["single_mode_mapping"] = mj;
    }
    json br = json::array();
    for (const auto& r : rows)
      br.push_back({{"x_m", r[0]}, {"plus_hz", r[1]}, {"minus_hz", r[2]}, {"plus_quadratic_hz", r[3]}, {"minus_quadratic_hz", r[4]}});
    payload["branches"] = br;
    emit_json(out, m, payload);
  } else {
    auto w = make_csv(m, {"x_m", "plus_hz", "minus_hz", "plus_quadratic_hz", "minus_quadratic_hz"});
    w.comment("G2_prime_hz_per_m2 " + io::fmt(hz(eff.G2_prime)));
    for (const auto& r : rows) w.row(r);
    emit_csv(out, m, w);
  }
  return 0;
}

// --- coupling ---------------------------------------------------------------

struct FieldFile {
  std::vector<double> x, eps, deps;
  std::vector<cplx> e;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(f, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

double cell(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \r\t", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(path + ": not a number: '" + s + "'");
  }
}

FieldFile read_field(const std::string& path) {
  const auto rows = read_csv(path);
  const std::vector<std::string> header = {"x_m", "Re_E", "Im_E", "epsilon", "depsilon_dx"};
  if (rows.empty() || rows[0] != header) throw InputError(path + ": header must be x_m,Re_E,Im_E,epsilon,depsilon_dx");
  FieldFile ff;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 5) throw InputError(path + ": expected 5 columns");
    ff.x.push_back(cell(rows[i][0], path));
    ff.e.emplace_back(cell(rows[i][1], path), cell(rows[i][2], path));
    ff.eps.push_back(cell(rows[i][3], path));
    ff.deps.push_back(cell(rows[i][4], path));
  }
  return ff;
}

std::vector<BoundarySpec> read_interfaces(const std::string& path) {
  const auto rows = read_csv(path);
  const std::vector<std::string> header = {"position_m", "normal_sign", "eps_d", "eps_s", "qu"};
  if (rows.empty() || rows[0] != header) throw InputError(path + ": header must be position_m,normal_sign,eps_d,eps_s,qu");
  std::vector<BoundarySpec> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 5) throw InputError(path + ": expected 5 columns");
    out.push_back({cell(rows[i][0], path), static_cast<int>(cell(rows[i][1], path)), cell(rows[i][2], path),
                   cell(rows[i][3], path), cell(rows[i][4], path)});
  }
  return out;
}

int cmd_coupling(const std::string& spec_path, const std::string& out) {
  std::ifstream f(spec_path);
  if (!f) throw InputError("cannot open " + spec_path);
  json spec;
  try {
    spec = json::parse(f);
  } catch (const json::exception& e) {
    throw InputError(spec_path + ": " + e.what());
  }
  const auto dir = std::filesystem::path(spec_path).parent_path();
  auto resolve = [&](const std::string& p) { return (dir / p).string(); };
  auto mode_from = [&](const json& j, PermittivityPerturbation* pert) {
    if (!j.contains("file") || !j.contains("frequency_hz")) throw InputError("each mode needs 'file' and 'frequency_hz'");
    const FieldFile ff = read_field(resolve(j["file"].get<std::string>()));
    if (pert) {
      pert->epsilon = ff.eps;
      pert->depsilon_dx = ff.deps;
    }
    return ModeField(ff.x, ff.e, hz_to_rad(j["frequency_hz"].get<double>()), j.value("label", j["file"].get<std::string>()));
  };
  if (!spec.contains("target")) throw InputError(spec_path + ": missing 'target'");
  PermittivityPerturbation pert;
  const ModeField target = mode_from(spec["target"], &pert);
  std::vector<ModeField> others;
  for (const auto& o : spec.value("others", json::array())) others.push_back(mode_from(o, nullptr));
  if (spec.contains("interfaces")) pert.boundaries = read_interfaces(resolve(spec["interfaces"].get<std::string>()));
  pert.validate(target.grid);

  Manifest m("coupling", {{"spec", spec}});
  const auto g2 = g2_coefficient(target, others, pert);
  json payload;
  payload["G1_hz_per_m"] = hz(g2.g1);
  payload["G2_hz_per_m2"] = hz(g2.total);
  payload["self_term_hz_per_m2"] = hz(g2.self_term);
  json cross = json::array();
  for (const auto& c : g2.cross) cross.push_back({{"label", c.label}, {"omega_j_hz", hz(c.omega_j)}, {"G_ij_hz_per_m2", hz(c.value)}});
  payload["cross_terms"] = cross;
  payload["truncation_estimate_hz_per_m2"] = hz(g2.truncation_estimate);
  payload["symmetry"] = to_string(classify_symmetry(target, pert, others));
  emit_json(out, m, payload);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonon-number QND measurement analysis for quadratically coupled optomechanics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QND_VERSION);

  std::string config, out = "-", format = "csv";
  auto add_common = [&](CLI::App* sub, bool with_format) {
    sub->add_option("--config", config, "Parameter file (key = value, frequencies in Hz)");
    sub->add_option("--out", out, "Output path ('-' for stdout)");
    if (with_format) sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  int n_max = 10;
  auto* rates = app.add_subcommand("rates", "Per-Fock-state rates normalized by the ground-state thermal rate");
  add_common(rates, true);
  rates->add_option("--n-max", n_max, "Largest Fock state");

  int n = 0;
  double dominance = 10.0;
  auto* feas = app.add_subcommand("feasibility", "QND feasibility checks (exit 0 pass, 2 fail)");
  add_common(feas, false);
  feas->add_option("--n", n, "Fock state for the hierarchy");
  feas->add_option("--dominance", dominance, "Factor that 'much greater than' must reach");

  std::string initial = "fock:0";
  double t_final = 0.0;
  int grid = 100, dim = 0;
  auto* ev = app.add_subcommand("evolve", "Integrate the reduced phonon master equation");
  add_common(ev, true);
  ev->add_option("--initial", initial, "fock:k | thermal:nbar | diag:p0,p1,...");
  ev->add_option("--t-final", t_final, "Final time, seconds")->required();
  ev->add_option("--grid", grid, "Output grid points");
  ev->add_option("--dim", dim, "Fock truncation (default from nbar_th)");

  int n0 = 0, count = 1, samples = 1000, window = 11;
  std::optional<double> t_traj;
  std::uint64_t seed = 1;
  std::string method = "gillespie";
  auto* tj = app.add_subcommand("traject", "Phonon-number jump trajectories and ensemble statistics");
  add_common(tj, false);
  tj->add_option("--n0", n0, "Initial Fock state");
  tj->add_option("--t-final", t_traj, "Duration, seconds (default 50 / (nbar_th gamma_m))");
  tj->add_option("--count", count, "Number of trajectories");
  tj->add_option("--seed", seed, "Seed of trajectory 0; trajectory i uses seed + i");
  tj->add_option("--method", method, "gillespie | quantum-jump");
  tj->add_option("--dim", dim, "Fock cap / truncation (default from nbar_th)");
  tj->add_option("--staircase-samples", samples, "Grid points per filtered trajectory");
  tj->add_option("--staircase-window", window, "Boxcar width in grid points");

  std::string axis, values, sweep_grid;
  auto* sw = app.add_subcommand("sweep", "Scalar outputs over a one-parameter grid");
  add_common(sw, false);
  sw->add_option("--axis", axis, "Config key to vary")->required();
  sw->add_option("--values", values, "Comma-separated values");
  sw->add_option("--grid", sweep_grid, "lin:start:stop:count or log:start:stop:count");
  sw->add_option("--n", n, "Fock state for the hierarchy checks");
  sw->add_option("--dominance", dominance, "Factor that 'much greater than' must reach");

  double omega0_hz = 2e14, nu_hz = 0.0, g1_hz_per_m = 0.0, x_max = 0.0, kappa_hz = 0.0, delta_hz = 0.0, n1 = 1.0;
  int points = 201;
  std::optional<double> x_zpf;
  auto* tm = app.add_subcommand("twomode", "Avoided-crossing branches and single-mode mapping");
  tm->add_option("--out", out, "Output path ('-' for stdout)");
  tm->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  tm->add_option("--omega0-hz", omega0_hz, "Degenerate optical frequency");
  tm->add_option("--nu-hz", nu_hz, "Inter-mode coupling")->required();
  tm->add_option("--g1-hz-per-m", g1_hz_per_m, "Linear coupling G1/2pi")->required();
  tm->add_option("--x-max", x_max, "Half-width of the displacement grid, m")->required();
  tm->add_option("--points", points, "Displacement grid points");
  tm->add_option("--kappa-hz", kappa_hz, "Cavity linewidth for the mapping (0 = skip)");
  tm->add_option("--delta-hz", delta_hz, "Drive detuning for the mapping");
  tm->add_option("--n1", n1, "Photon number in the driven mode");
  tm->add_option("--x-zpf", x_zpf, "Zero-point amplitude, m (reports single-photon g2)");

  std::string fields;
  auto* cp = app.add_subcommand("coupling", "G1 and G2 from sampled 1D mode fields");
  cp->add_option("--fields", fields, "JSON mode set: target, others, interfaces")->required();
  cp->add_option("--out", out, "Output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*rates) return cmd_rates(config, n_max, format, out);
    if (*feas) return cmd_feasibility(config, n, dominance, out);
    if (*ev) return cmd_evolve(config, initial, t_final, grid, dim, format, out);
    if (*tj) return cmd_traject(config, n0, t_traj, count, seed, method, dim, samples, window, out);
    if (*sw) return cmd_sweep(config, axis, values, sweep_grid, n, dominance, out);
    if (*tm) return cmd_twomode(omega0_hz, nu_hz, g1_hz_per_m, x_max, points, kappa_hz, delta_hz, n1, x_zpf, format, out);
    if (*cp) return cmd_coupling(fields, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
