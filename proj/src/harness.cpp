#include "lowmach/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lowmach/errors.hpp"
#include "lowmach/operators.hpp"

namespace lowmach {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reads the keys of one section, rejecting anything it does not know.
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw ConfigError("section '" + name + "' must be an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (node_ == nullptr || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

CellField difference(const CellField& a, const CellField& b) {
  CellField d(a.grid);
  for (std::size_t c = 0; c < d.values.size(); ++c) d.values[c] = a.values[c] - b.values[c];
  return d;
}

FaceField difference(const FaceField& a, const FaceField& b) {
  FaceField d(a.grid);
  for (int ax = 0; ax < a.grid.dim; ++ax)
    for (std::size_t f = 0; f < d.comp[ax].size(); ++f) d.comp[ax][f] = a.comp[ax][f] - b.comp[ax][f];
  return d;
}

CellField zero_holes(CellField f, const CellMask& mask) {
  for (std::size_t c = 0; c < f.values.size(); ++c)
    if (mask[c] == kHole) f.values[c] = 0.0;
  return f;
}

SweepRow failed_row(double eps, const std::string& status, const std::string& message) {
  SweepRow r;
  r.epsilon = eps;
  r.n_holes = 0;
  for (double* v : {&r.m_holes, &r.m_holes_rasterized, &r.m_res_max, &r.relative_energy_final,
                    &r.boussinesq_residual, &r.velocity_gap, &r.temperature_gap,
                    &r.hole_velocity_max, &r.min_entropy_production})
    *v = kNaN;
  r.steps = 0;
  r.status = status;
  r.message = message;
  return r;
}

SweepRow sweep_case(const LabConfig& lab, double eps, const ObTrajectory& ob) {
  const PerforatedGeometry geom = lab_geometry(lab, eps);
  const NsfConfig cfg = nsf_config(lab, eps);
  const NsfTrajectory nsf = run_nsf(cfg, geom);
  const NsfSetup setup = nsf_setup(cfg, geom);
  const Grid& g = setup.grid;

  if (nsf.samples.size() != ob.samples.size())
    throw AlignmentError("NSF and OB runs stored different numbers of samples");

  const thermo::LinearizationCoeffs lin = thermo::linearization(lab.thermo);
  const double mach = cfg.scaling.mach();
  const CellField G_fluid = zero_holes(setup.G, setup.mask);

  std::vector<double> times, vel, temp, bous;
  PerturbationFields last;
  for (std::size_t s = 0; s < nsf.samples.size(); ++s) {
    const NsfState& st = nsf.samples[s].state;
    const ObState& ref = ob.samples[s].state;
    if (std::abs(st.t - ob.samples[s].t) > 1e-12 * std::max(1.0, lab.final_time))
      throw AlignmentError("NSF and OB sample times differ");
    PerturbationFields pert = perturbation_fields(st.rho, st.theta, setup.mask, lab.thermo, mach);
    times.push_back(st.t);
    vel.push_back(w12_norm(difference(st.u, ref.U)));
    temp.push_back(w12_norm(difference(pert.theta1, ref.Theta)));
    bous.push_back(boussinesq_residual(pert.rho1, zero_holes(pert.theta1, setup.mask), G_fluid, lin,
                                       lab.thermo.rho_bar));
    if (s + 1 == nsf.samples.size()) last = std::move(pert);
  }

  SweepRow r;
  r.epsilon = eps;
  r.n_holes = geom.count();
  const HoleMeasure hm = hole_measure(geom, &g);
  r.m_holes = hm.analytic;
  r.m_holes_rasterized = hm.rasterized;
  r.m_res_max = nsf.max_residual_measure;
  r.relative_energy_final = relative_energy(nsf.samples.back().state.u, last.theta1,
                                            ob.samples.back().state.U, ob.samples.back().state.Theta,
                                            ob.coeffs);
  r.boussinesq_residual = l2_in_time(times, bous);
  r.velocity_gap = l2_in_time(times, vel);
  r.temperature_gap = l2_in_time(times, temp);
  r.hole_velocity_max = nsf.max_hole_velocity;
  r.min_entropy_production = nsf.min_entropy_production;
  r.steps = nsf.steps;
  return r;
}

const char* kVerdictColumns[] = {"velocity_gap", "temperature_gap", "boussinesq_residual"};

double column_value(const SweepRow& r, const std::string& name) {
  if (name == "velocity_gap") return r.velocity_gap;
  if (name == "temperature_gap") return r.temperature_gap;
  return r.boussinesq_residual;
}

json fit_json(const std::optional<ScalingFit>& f) {
  if (!f) return nullptr;
  return json{{"exponent", num(f->exponent)}, {"r2", num(f->r2)}, {"degenerate", f->degenerate}};
}

}  // namespace

// ---------------------------------------------------------------------------

LabConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> sections{"scaling", "thermo", "grid",  "time",     "data",
                                              "nsf",     "ob",     "geometry", "sweep", "estimates",
                                              "relenergy"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!sections.count(it.key())) throw ConfigError("unknown section '" + it.key() + "'");

  LabConfig c;
  {
    Section s(j, "scaling");
    s.get("epsilon", c.scaling.epsilon);
    s.get("alpha", c.scaling.alpha);
    s.get("m", c.scaling.m);
    s.get("dim", c.scaling.dim);
    s.finish();
  }
  {
    Section s(j, "thermo");
    s.get("rho_bar", c.thermo.rho_bar);
    s.get("theta_bar", c.thermo.theta_bar);
    s.get("a_rad", c.thermo.a_rad);
    s.get("mu0", c.thermo.mu0);
    s.get("eta0", c.thermo.eta0);
    s.get("kappa0", c.thermo.kappa0);
    s.get("p_inf", c.thermo.p_inf);
    s.finish();
  }
  {
    Section s(j, "grid");
    s.get("cells", c.cells);
    s.get("length", c.length);
    s.finish();
  }
  {
    Section s(j, "time");
    s.get("final_time", c.final_time);
    s.get("sample_interval", c.sample_interval);
    s.get("cfl", c.cfl);
    s.get("diffusion_safety", c.diffusion_safety);
    s.finish();
  }
  {
    Section s(j, "data");
    s.get("g0", c.g0);
    s.get("theta_amplitude", c.theta_amplitude);
    s.get("velocity_amplitude", c.velocity_amplitude);
    s.finish();
  }
  {
    Section s(j, "nsf");
    s.get("eta_pen", c.eta_pen);
    s.finish();
  }
  {
    Section s(j, "ob");
    s.get("rk2", c.ob_rk2);
    s.get("manufactured", c.ob_manufactured);
    s.get("poisson_tol", c.poisson_tol);
    s.finish();
  }
  {
    Section s(j, "geometry");
    std::string placement = to_string(c.placement);
    s.get("placement", placement);
    s.get("seed", c.seed);
    s.finish();
    try {
      c.placement = parse_placement(placement);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  {
    Section s(j, "sweep");
    s.get("epsilons", c.sweep_epsilons);
    s.get("workers", c.workers);
    s.finish();
  }
  {
    Section s(j, "estimates");
    s.get("m", c.estimates.m);
    s.get("alpha", c.estimates.alpha);
    s.get("epsilons", c.estimates.epsilons);
    s.get("cells_per_annulus", c.estimates.cells_per_annulus);
    s.finish();
  }
  {
    Section s(j, "relenergy");
    s.get("delta_cells", c.delta_cells);
    s.get("C0", c.gronwall_C0);
    s.finish();
  }

  try {
    c.scaling.validate();
    c.thermo.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (c.cells < 4) throw ConfigError("grid.cells must be at least 4");
  if (!(c.length > 0.0)) throw ConfigError("grid.length must be positive");
  if (!(c.final_time > 0.0)) throw ConfigError("time.final_time must be positive");
  if (c.sample_interval < 0.0) throw ConfigError("time.sample_interval must be non-negative");
  if (c.workers < 1) throw ConfigError("sweep.workers must be at least 1");
  if (c.delta_cells < 2.0) throw ConfigError("relenergy.delta_cells must be at least 2");
  for (double e : c.sweep_epsilons)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("sweep epsilons must lie in (0, 1)");
  nsf_config(c).validate();
  ob_config(c).validate();
  return c;
}

LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const LabConfig& c) {
  return json{
      {"scaling", {{"epsilon", c.scaling.epsilon}, {"alpha", c.scaling.alpha}, {"m", c.scaling.m},
                   {"dim", c.scaling.dim}}},
      {"thermo", {{"rho_bar", c.thermo.rho_bar}, {"theta_bar", c.thermo.theta_bar},
                  {"a_rad", c.thermo.a_rad}, {"mu0", c.thermo.mu0}, {"eta0", c.thermo.eta0},
                  {"kappa0", c.thermo.kappa0}, {"p_inf", c.thermo.p_inf}}},
      {"grid", {{"cells", c.cells}, {"length", c.length}}},
      {"time", {{"final_time", c.final_time}, {"sample_interval", c.sample_interval},
                {"cfl", c.cfl}, {"diffusion_safety", c.diffusion_safety}}},
      {"data", {{"g0", c.g0}, {"theta_amplitude", c.theta_amplitude},
                {"velocity_amplitude", c.velocity_amplitude}}},
      {"nsf", {{"eta_pen", c.eta_pen}}},
      {"ob", {{"rk2", c.ob_rk2}, {"manufactured", c.ob_manufactured}, {"poisson_tol", c.poisson_tol}}},
      {"geometry", {{"placement", to_string(c.placement)}, {"seed", c.seed}}},
      {"sweep", {{"epsilons", c.sweep_epsilons}, {"workers", c.workers}}},
      {"estimates", {{"m", c.estimates.m}, {"alpha", c.estimates.alpha},
                     {"epsilons", c.estimates.epsilons},
                     {"cells_per_annulus", c.estimates.cells_per_annulus}}},
      {"relenergy", {{"delta_cells", c.delta_cells}, {"C0", c.gronwall_C0}}},
  };
}

NsfConfig nsf_config(const LabConfig& c) { return nsf_config(c, c.scaling.epsilon); }

NsfConfig nsf_config(const LabConfig& c, double epsilon) {
  NsfConfig n;
  n.scaling = c.scaling;
  n.scaling.epsilon = epsilon;
  n.thermo = c.thermo;
  n.cells = c.cells;
  n.length = c.length;
  n.cfl = c.cfl;
  n.diffusion_safety = c.diffusion_safety;
  n.eta_pen = c.eta_pen;
  n.final_time = c.final_time;
  n.g0 = c.g0;
  n.theta_amplitude = c.theta_amplitude;
  n.velocity_amplitude = c.velocity_amplitude;
  n.sample_interval = c.sample_interval;
  return n;
}

ObConfig ob_config(const LabConfig& c) {
  ObConfig o;
  o.dim = c.scaling.dim;
  o.cells = c.cells;
  o.length = c.length;
  o.final_time = c.final_time;
  o.cfl = c.cfl;
  o.diffusion_safety = c.diffusion_safety;
  o.rk2 = c.ob_rk2;
  o.g0 = c.g0;
  o.manufactured = c.ob_manufactured;
  o.theta_amplitude = c.theta_amplitude;
  o.velocity_amplitude = c.velocity_amplitude;
  o.sample_interval = c.sample_interval;
  o.poisson_tol = c.poisson_tol;
  o.thermo = c.thermo;
  return o;
}

PerforatedGeometry lab_geometry(const LabConfig& c, double epsilon) {
  ScalingParams s = c.scaling;
  s.epsilon = epsilon;
  return build_perforation(s, c.length, c.placement, c.seed);
}

double l2_in_time(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) throw AlignmentError("time series of different lengths");
  if (t.size() == 1) return std::abs(v[0]);
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (v[i] * v[i] + v[i - 1] * v[i - 1]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

ConvergenceReport sweep(const LabConfig& config) {
  std::vector<double> eps = config.sweep_epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  if (eps.size() < 3)
    throw FitError("a sweep needs at least three distinct epsilon values, got " + std::to_string(eps.size()));

  ConvergenceReport rep;
  rep.config = config;
  ScalingParams flags = config.scaling;
  rep.theory_flags = flags.theory_regime();
  rep.regime = rep.theory_flags ? "theory" : "relaxed";

  ObConfig oc = ob_config(config);
  oc.manufactured = false;
  const ObTrajectory ob = run_ob(oc);
  rep.ob_steps = ob.steps;

  rep.rows.resize(eps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < eps.size(); i = next++) {
      try {
        rep.rows[i] = sweep_case(config, eps[i], ob);
      } catch (const NumericalError& e) {
        rep.rows[i] = failed_row(eps[i], "numerical_failure", e.what());
      } catch (const Error& e) {
        rep.rows[i] = failed_row(eps[i], "failed", e.what());
      }
    }
  };
  const int nworkers = std::max(1, std::min<int>(config.workers, static_cast<int>(eps.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nworkers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const char* col : kVerdictColumns) {
    MonotoneVerdict v;
    v.column = col;
    std::vector<double> vals;
    std::vector<std::pair<double, double>> samples;
    for (const SweepRow& r : rep.rows) {
      const double x = column_value(r, col);
      vals.push_back(x);
      if (std::isfinite(x)) samples.emplace_back(r.epsilon, x);
    }
    v.strictly_decreasing = strictly_decreasing(vals);
    try {
      v.fit = scaling_fit(samples);
    } catch (const FitError&) {
      v.fit.reset();
    }
    rep.verdicts.push_back(v);
  }
  return rep;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "epsilon",          "N_holes",          "M_holes",           "M_holes_rasterized",
      "M_res_max",        "relative_energy_final", "boussinesq_residual", "velocity_gap",
      "temperature_gap",  "hole_velocity_max", "min_entropy_production", "steps",
      "status"};
  return cols;
}

void write_sweep_csv(const std::string& path, const ConvergenceReport& r) {
  std::ofstream out = open_out(path);
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const SweepRow& row : r.rows) {
    out << fmt(row.epsilon) << ',' << row.n_holes << ',' << fmt(row.m_holes) << ','
        << fmt(row.m_holes_rasterized) << ',' << fmt(row.m_res_max) << ','
        << fmt(row.relative_energy_final) << ',' << fmt(row.boussinesq_residual) << ','
        << fmt(row.velocity_gap) << ',' << fmt(row.temperature_gap) << ','
        << fmt(row.hole_velocity_max) << ',' << fmt(row.min_entropy_production) << ',' << row.steps
        << ',' << row.status << '\n';
  }
}

json sweep_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (const SweepRow& row : r.rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"N_holes", row.n_holes},
                    {"M_holes", num(row.m_holes)},
                    {"M_holes_rasterized", num(row.m_holes_rasterized)},
                    {"M_res_max", num(row.m_res_max)},
                    {"relative_energy_final", num(row.relative_energy_final)},
                    {"boussinesq_residual", num(row.boussinesq_residual)},
                    {"velocity_gap", num(row.velocity_gap)},
                    {"temperature_gap", num(row.temperature_gap)},
                    {"hole_velocity_max", num(row.hole_velocity_max)},
                    {"min_entropy_production", num(row.min_entropy_production)},
                    {"steps", row.steps},
                    {"status", row.status},
                    {"message", row.message}});
  }
  json verdicts = json::object();
  json fits = json::object();
  for (const MonotoneVerdict& v : r.verdicts) {
    verdicts[v.column] = {{"strictly_decreasing", v.strictly_decreasing}};
    fits[v.column] = fit_json(v.fit);
  }
  return json{{"regime", r.regime},
              {"theory_flags", {{"alpha_gt_3", r.config.scaling.alpha > 3.0},
                                {"alpha_lt_m", r.config.scaling.alpha < r.config.scaling.m},
                                {"theory_regime", r.theory_flags}}},
              {"scaling", {{"alpha", r.config.scaling.alpha}, {"m", r.config.scaling.m},
                           {"dim", r.config.scaling.dim}}},
              {"ob_steps", r.ob_steps},
              {"rows", rows},
              {"monotone", verdicts},
              {"fits", fits},
              {"config", to_json(r.config)}};
}

// ---------------------------------------------------------------------------

std::vector<GammaMapCell> gamma_map(int n, double m_lo, double m_hi, double a_lo, double a_hi) {
  if (n < 2) throw ConfigError("gamma map needs at least two points per axis");
  std::vector<GammaMapCell> cells;
  for (int i = 0; i < n; ++i) {
    const double m = m_lo + (m_hi - m_lo) * i / (n - 1);
    for (int k = 0; k < n; ++k) {
      const double a = a_lo + (a_hi - a_lo) * k / (n - 1);
      cells.push_back({m, a, gamma_exponents(m, a), a > 3.0 && a < m});
    }
  }
  return cells;
}

void write_gamma_map_csv(const std::string& path, const std::vector<GammaMapCell>& cells) {
  std::ofstream out = open_out(path);
  out << "m,alpha,gamma1,gamma2,gamma3,all_positive,theory_region\n";
  for (const GammaMapCell& c : cells)
    out << fmt(c.m) << ',' << fmt(c.alpha) << ',' << fmt(c.gamma.gamma1) << ','
        << fmt(c.gamma.gamma2) << ',' << fmt(c.gamma.gamma3) << ','
        << (c.gamma.all_positive() ? 1 : 0) << ',' << (c.theory ? 1 : 0) << '\n';
}

void write_residual_sweep_csv(const std::string& path, const ResidualSweep& s) {
  std::ofstream out = open_out(path);
  out << "term,epsilon,value,fitted_exponent,r2,reference_3d_exponent\n";
  const auto& names = residual_term_names();
  for (int k = 0; k < 7; ++k)
    for (std::size_t e = 0; e < s.epsilons.size(); ++e)
      out << names[k] << ',' << fmt(s.epsilons[e]) << ',' << fmt(s.values[e][k]) << ','
          << fmt(s.fits[k].exponent) << ',' << fmt(s.fits[k].r2) << ',' << fmt(s.reference[k]) << '\n';
}

json residual_sweep_json(const ResidualSweep& s, double m, double alpha) {
  const auto& names = residual_term_names();
  const GammaExponents g = gamma_exponents(m, alpha);
  json terms = json::array();
  bool all_decay = true;
  for (int k = 0; k < 7; ++k) {
    json values = json::array();
    for (std::size_t e = 0; e < s.epsilons.size(); ++e) values.push_back(num(s.values[e][k]));
    const bool decay = s.fits[k].exponent > 0.05 && s.fits[k].r2 > 0.8;
    all_decay = all_decay && decay;
    terms.push_back({{"term", names[k]},
                     {"values", values},
                     {"fitted_exponent", num(s.fits[k].exponent)},
                     {"r2", num(s.fits[k].r2)},
                     {"reference_3d_exponent", num(s.reference[k])},
                     {"decays", decay}});
  }
  return json{{"m", m},
              {"alpha", alpha},
              {"theory_regime", alpha > 3.0 && alpha < m},
              {"gamma", {{"gamma1", g.gamma1}, {"gamma2", g.gamma2}, {"gamma3", g.gamma3},
                         {"all_positive", g.all_positive()}}},
              {"epsilons", s.epsilons},
              {"terms", terms},
              {"all_terms_decay", all_decay}};
}

// ---------------------------------------------------------------------------

namespace {

std::string sample_name(std::size_t s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%05zu", s);
  return buf;
}

json write_sample(const std::string& dir, std::size_t s, const FaceField& u, const CellField& theta) {
  const std::string base = sample_name(s);
  static const char* comps[] = {"u0", "u1", "u2"};
  json files = json::object();
  for (int ax = 0; ax < u.grid.dim; ++ax) {
    const std::string f = base + "_" + comps[ax] + ".raw";
    write_face_component((fs::path(dir) / f).string(), u, ax);
    files[comps[ax]] = f;
  }
  const std::string tf = base + "_theta1.raw";
  write_cell_field((fs::path(dir) / tf).string(), theta);
  files["theta1"] = tf;
  return files;
}

}  // namespace

void write_ob_trajectory(const std::string& dir, const ObTrajectory& tr, const LabConfig& c) {
  ensure_dir(dir);
  json samples = json::array();
  for (std::size_t s = 0; s < tr.samples.size(); ++s) {
    const ObSample& x = tr.samples[s];
    json files = write_sample(dir, s, x.state.U, x.state.Theta);
    write_cell_field((fs::path(dir) / (sample_name(s) + "_pi.raw")).string(), x.state.Pi);
    files["pi"] = sample_name(s) + "_pi.raw";
    samples.push_back({{"t", x.t},
                       {"files", files},
                       {"diagnostics", {{"energy", x.energy}, {"max_div", x.max_div}}}});
  }
  json m{{"kind", "ob"},
         {"dim", c.scaling.dim},
         {"cells", c.cells},
         {"length", c.length},
         {"steps", tr.steps},
         {"coefficients", {{"rho_bar", tr.coeffs.rho_bar}, {"theta_bar", tr.coeffs.theta_bar},
                           {"A", tr.coeffs.A}, {"c_p", tr.coeffs.c_p}, {"mu", tr.coeffs.mu},
                           {"kappa", tr.coeffs.kappa}}},
         {"samples", samples},
         {"config", to_json(c)}};
  if (tr.error_U) m["error_U"] = *tr.error_U;
  if (tr.error_Theta) m["error_Theta"] = *tr.error_Theta;
  write_json((fs::path(dir) / "manifest.json").string(), m);
}

void write_nsf_trajectory(const std::string& dir, const NsfTrajectory& tr, const LabConfig& c,
                          const PerforatedGeometry& geom) {
  ensure_dir(dir);
  const NsfConfig cfg = nsf_config(c, geom.scaling.epsilon);
  const Grid g = cfg.grid();
  const CellMask mask = classify_cells(geom, g);
  write_mask((fs::path(dir) / "mask.raw").string(), g, mask);
  json samples = json::array();
  for (std::size_t s = 0; s < tr.samples.size(); ++s) {
    const NsfSample& x = tr.samples[s];
    const PerturbationFields p =
        perturbation_fields(x.state.rho, x.state.theta, mask, c.thermo, cfg.scaling.mach());
    json files = write_sample(dir, s, x.state.u, p.theta1);
    const std::string rf = sample_name(s) + "_rho.raw", tf = sample_name(s) + "_theta.raw";
    write_cell_field((fs::path(dir) / rf).string(), x.state.rho);
    write_cell_field((fs::path(dir) / tf).string(), x.state.theta);
    files["rho"] = rf;
    files["theta"] = tf;
    samples.push_back({{"t", x.diag.t},
                       {"files", files},
                       {"diagnostics", {{"mass", x.diag.mass},
                                        {"energy", x.diag.energy},
                                        {"entropy_production", x.diag.entropy_production},
                                        {"residual_measure", x.diag.residual_measure},
                                        {"hole_velocity", x.diag.hole_velocity}}}});
  }
  json m{{"kind", "nsf"},
         {"dim", c.scaling.dim},
         {"cells", c.cells},
         {"length", c.length},
         {"epsilon", geom.scaling.epsilon},
         {"n_holes", geom.count()},
         {"steps", tr.steps},
         {"rejections", tr.rejections},
         {"min_entropy_production", tr.min_entropy_production},
         {"max_hole_velocity", tr.max_hole_velocity},
         {"max_residual_measure", tr.max_residual_measure},
         {"mask", "mask.raw"},
         {"samples", samples},
         {"config", to_json(c)}};
  write_json((fs::path(dir) / "manifest.json").string(), m);
}

FieldTrajectory read_trajectory(const std::string& dir) {
  const std::string mpath = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(mpath);
  if (!in) throw ConfigError("no manifest.json in '" + dir + "'");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest '" + mpath + "': " + e.what());
  }
  try {
    const int dim = m.at("dim").get<int>();
    const Grid g = Grid::uniform(dim, m.at("cells").get<int>(), m.at("length").get<double>());
    static const char* comps[] = {"u0", "u1", "u2"};
    FieldTrajectory tr;
    for (const json& s : m.at("samples")) {
      FieldSample x;
      x.t = s.at("t").get<double>();
      x.u = FaceField(g);
      const json& files = s.at("files");
      for (int ax = 0; ax < dim; ++ax)
        read_face_component((fs::path(dir) / files.at(comps[ax]).get<std::string>()).string(), x.u, ax);
      x.theta = read_cell_field((fs::path(dir) / files.at("theta1").get<std::string>()).string(), dim);
      if (!x.theta.grid.same_shape(g)) throw ShapeError("temperature dump does not match the manifest grid");
      tr.push_back(std::move(x));
    }
    return tr;
  } catch (const json::exception& e) {
    throw ConfigError("manifest '" + mpath + "' is missing fields: " + e.what());
  }
}

CompareReport compare(const FieldTrajectory& weak, const FieldTrajectory& strong, const LabConfig& c) {
  if (weak.empty() || strong.empty()) throw AlignmentError("empty trajectory");
  const ObCoefficients coeffs = ob_coefficients(c.thermo);
  const double h = strong.front().u.grid.h;
  CompareReport r;
  r.delta = c.delta_cells * h;
  r.rei = rei_residual(weak, strong, coeffs, r.delta);

  std::vector<double> times, E, rate;
  double sup_u = 0.0, sup_U = 0.0;
  for (std::size_t s = 0; s < strong.size(); ++s) {
    times.push_back(strong[s].t);
    E.push_back(r.rei[s].relative_energy);
    rate.push_back(gronwall_rate(strong[s].u, strong[s].theta, c.gronwall_C0));
    sup_u = std::max(sup_u, max_velocity_gradient(weak[s].u));
    sup_U = std::max(sup_U, max_velocity_gradient(strong[s].u));
  }
  const double T = times.back() - times.front();
  const double tolerances = c.poisson_tol + 1e-13;
  const double slack = slack_budget(tolerances, h, r.delta, coeffs.rho_bar, T, sup_u, sup_U);
  r.gronwall = gronwall_certificate(times, E, rate, slack);
  return r;
}

json compare_json(const CompareReport& r) {
  json samples = json::array();
  for (std::size_t s = 0; s < r.rei.size(); ++s)
    samples.push_back({{"t", r.rei[s].t},
                       {"E", num(r.gronwall.E[s])},
                       {"c", num(r.gronwall.c[s])},
                       {"bound", num(r.gronwall.bound[s])},
                       {"residual", num(r.rei[s].residual)},
                       {"defect_energy", num(r.rei[s].defect_energy)},
                       {"dissipation", num(r.rei[s].dissipation)},
                       {"rhs", num(r.rei[s].rhs)}});
  return json{{"samples", samples},
              {"certificate", r.gronwall.pass},
              {"margin", num(r.gronwall.margin)},
              {"slack", num(r.gronwall.slack)},
              {"delta", r.delta}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace lowmach
