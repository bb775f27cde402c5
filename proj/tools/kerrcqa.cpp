// kerrcqa command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <kerrcqa/analysis.hpp>
#include <kerrcqa/io.hpp>
#include <kerrcqa/oracle.hpp>
#include <kerrcqa/phase_space.hpp>

namespace fs = std::filesystem;
using namespace kerrcqa;
using io::json;

namespace {

struct Run {
  std::string command;
  json config;  // resolved
  PhysicalParams params;
  fs::path out;
  int cutoff = -1;
  double tol = default_class_tol;
  bool oracle = false;
};

const std::set<std::string> common_keys{"command", "params", "cutoff", "tol", "oracle"};

std::set<std::string> keys_for(const std::string& cmd) {
  std::set<std::string> k = common_keys;
  if (cmd == "wigner") k.insert({"grid", "method"});
  if (cmd == "scan") k.insert({"axis", "points", "oracle_stride", "fock_levels", "classical"});
  if (cmd == "spectrum") k.insert({"k"});
  if (cmd == "metastable") k.insert({"n", "kappa1_values"});
  if (cmd == "parity") k.insert({"delta_values"});
  if (cmd == "phase-diagram") k.insert({"r1_range", "r2_range", "resolution"});
  return k;
}

std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::InvalidConfig, what + " must be a nonempty array");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(io::number_from_json(x, what));
  return v;
}

const json& need(const json& c, const std::string& key) {
  if (!c.contains(key)) throw Error(ErrorKind::InvalidConfig, "missing key '" + key + "'");
  return c.at(key);
}

std::string path_str(const Run& r, const std::string& name) { return (r.out / name).string(); }

json summary(const Run& r, std::size_t rows, std::size_t failures) {
  return json{{"config", r.config}, {"rows", rows}, {"failures", failures}, {"succeeded", rows - failures}};
}

int finish_rows(std::size_t rows, std::size_t failures) { return rows > failures ? 0 : 3; }

int cmd_derive(const Run& r) {
  json out{{"config", r.config}};
  if (std::abs(r.params.tildeK()) == 0.0) {
    validate(r.params);
    out["class"] = "Blockade(" + std::to_string(*kerr_free_blockade_order(r.params)) + ")";
    out["note"] = "K~ = 0: Kerr-free blockade, no displaced-frame constants";
  } else {
    DerivedParams d = derive(r.params);
    out["derived"] = io::to_json(d);
    out["class"] = io::to_json(classify(d, r.tol));
  }
  io::write_json(path_str(r, "derived.json"), out);
  return 0;
}

int cmd_solve(const Run& r) {
  SolveResult s = solve(r.params, SolveOptions{r.cutoff, r.tol});
  json st{{"config", r.config}};
  if (std::abs(r.params.tildeK()) != 0.0) st["derived"] = io::to_json(s.d);
  st["class"] = io::to_json(s.cls);
  st["form"] = form_name(s.state.form);
  st["mean_n"] = s.mean_n;
  st["amplitude_cutoff"] = s.cache.cutoff();
  st["lab_cutoff"] = s.rho.cutoff();
  st["normalization"] = s.cache.norm;
  st["fock_probs"] = s.rho.populations();
  st["dark_state_residual"] = dark_state_residual(s.state);
  if (r.oracle) {
    auto o = oracle::steady_state_adaptive(r.params, s.rho.cutoff() + 10, 240, 1e-10);
    const int M = static_cast<int>(std::min(o.rho.rows(), s.rho.rho.rows()));
    st["oracle"] = json{{"mean_n", o.mean_n()},
                        {"cutoff", o.cutoff()},
                        {"hs_distance", (o.rho.topLeftCorner(M, M) - s.rho.rho.topLeftCorner(M, M)).norm()}};
  }
  io::write_json(path_str(r, "state.json"), st);
  std::vector<std::string> header{"m"};
  for (int n = 0; n < s.rho.rho.cols(); ++n) {
    header.push_back("c" + std::to_string(n) + "_re");
    header.push_back("c" + std::to_string(n) + "_im");
  }
  io::CsvWriter csv(path_str(r, "rho.csv"), r.config, header);
  for (int m = 0; m < s.rho.rho.rows(); ++m) {
    csv.add(m);
    for (int n = 0; n < s.rho.rho.cols(); ++n) csv.add(s.rho.rho(m, n));
    csv.end_row();
  }
  return 0;
}

GridSpec grid_from_json(const json& j) {
  io::reject_unknown(j, {"x_min", "x_max", "y_min", "y_max", "nx", "ny"}, "grid");
  GridSpec g;
  g.x_min = io::number_from_json(need(j, "x_min"), "x_min");
  g.x_max = io::number_from_json(need(j, "x_max"), "x_max");
  g.y_min = io::number_from_json(need(j, "y_min"), "y_min");
  g.y_max = io::number_from_json(need(j, "y_max"), "y_max");
  g.nx = io::int_from_json(need(j, "nx"), "nx");
  g.ny = io::int_from_json(need(j, "ny"), "ny");
  g.check();
  return g;
}

int cmd_wigner(const Run& r) {
  const GridSpec g = grid_from_json(need(r.config, "grid"));
  std::string method = r.config.value("method", std::string("closed-form"));
  if (method != "closed-form" && method != "numeric")
    throw Error(ErrorKind::InvalidConfig, "method must be closed-form or numeric");
  if (r.oracle) method = "numeric-oracle";
  std::vector<std::string> comments{"config: " + r.config.dump(), "path: " + method};
  PhaseGrid w(g);
  if (method == "numeric-oracle") {
    auto o = oracle::steady_state_adaptive(r.params, r.cutoff > 0 ? r.cutoff : 40, 240, 1e-10);
    w = wigner_numeric(o, g);
  } else {
    SolveResult s = solve(r.params, SolveOptions{r.cutoff, r.tol});
    comments.push_back("class: " + to_string(s.cls));
    w = method == "closed-form" ? wigner_pure(s.cache, g) : wigner_numeric(s.rho, g);
    const DerivedParams& d = s.d;
    if (r.params.Lambda3 == cplx(0.0) && r.params.Lambda2 != cplx(0.0) && d.r1_defined && std::abs(d.r1) < 0.1 &&
        std::abs(d.r2) < 0.1) {
      const cplx q = q_parameter(r.params);
      comments.push_back("Q: " + io::to_json(q).dump());
    }
  }
  comments.push_back("integral: " + io::fmt(integrate(w)));
  comments.push_back("min: " + io::fmt(grid_min(w)));
  std::ofstream os(path_str(r, "wigner.grid"));
  if (!os) throw Error(ErrorKind::InvalidConfig, "cannot write wigner.grid");
  write_grid(os, w, comments);
  return 0;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + io::fmt(v[i]);
  return s;
}

int cmd_scan(const Run& r) {
  const json& aj = need(r.config, "axis");
  io::reject_unknown(aj, {"name", "from", "to"}, "axis");
  analysis::Axis axis;
  if (!need(aj, "name").is_string()) throw Error(ErrorKind::InvalidConfig, "axis.name must be a string");
  axis.name = analysis::parse_axis(aj["name"].get<std::string>());
  if (axis.is_complex()) {
    axis.from = io::complex_from_json(need(aj, "from"), "axis.from");
    axis.to = io::complex_from_json(need(aj, "to"), "axis.to");
  } else {
    axis.from = io::number_from_json(need(aj, "from"), "axis.from");
    axis.to = io::number_from_json(need(aj, "to"), "axis.to");
  }
  const int points = io::int_from_json(need(r.config, "points"), "points");
  analysis::ScanOptions opt;
  opt.oracle = r.oracle;
  opt.cutoff = r.cutoff;
  opt.tol = r.tol;
  if (r.config.contains("oracle_stride")) opt.oracle_stride = io::int_from_json(r.config["oracle_stride"], "oracle_stride");
  if (r.config.contains("fock_levels")) opt.fock_levels = io::int_from_json(r.config["fock_levels"], "fock_levels");
  if (r.config.contains("classical")) opt.classical = io::bool_from_json(r.config["classical"], "classical");
  if (opt.fock_levels < 0) throw Error(ErrorKind::InvalidConfig, "fock_levels must be nonnegative");

  std::vector<std::string> header{"index", "value_re", "value_im", "r1_re", "r1_im", "r2_re", "r2_im", "class",
                                  "mean_n", "oracle_mean_n", "branches"};
  for (int k = 0; k < opt.fock_levels; ++k) header.push_back("p" + std::to_string(k));
  header.push_back("error");
  io::CsvWriter csv(path_str(r, "scan.csv"), r.config, header);
  auto res = analysis::scan(r.params, axis, points, opt, [&](const analysis::ScanRow& row) {
    csv.add(row.index).add(row.value).add(row.r1).add(row.r2).add(row.cls).add(row.mean_n);
    csv.add(row.oracle_mean_n ? io::fmt(*row.oracle_mean_n) : std::string());
    csv.add(join(row.branches));
    for (int k = 0; k < opt.fock_levels; ++k)
      csv.add(k < static_cast<int>(row.fock_probs.size()) ? row.fock_probs[k] : std::nan(""));
    csv.add(row.error);
    csv.end_row();
  });
  io::write_json(path_str(r, "scan_summary.json"), summary(r, res.rows.size(), res.failures));
  return finish_rows(res.rows.size(), res.failures);
}

int cmd_spectrum(const Run& r) {
  const int k = r.config.contains("k") ? io::int_from_json(r.config["k"], "k") : 2;
  const int cutoff = r.cutoff > 0 ? r.cutoff : 40;
  io::CsvWriter csv(path_str(r, "spectrum.csv"), r.config, {"index", "lambda_re", "lambda_im", "rate"});
  auto sp = oracle::spectrum(oracle::build_liouvillian(r.params, cutoff), k);
  for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
    csv.add(i).add(sp.eigenvalues[i]).add(sp.rates[i]);
    csv.end_row();
  }
  json s = summary(r, sp.eigenvalues.size(), 0);
  s["zero_mode"] = io::to_json(sp.zero_mode);
  io::write_json(path_str(r, "spectrum_summary.json"), s);
  return finish_rows(sp.eigenvalues.size(), 0);
}

int cmd_metastable(const Run& r) {
  const int n = io::int_from_json(need(r.config, "n"), "n");
  const auto kappas = numbers(need(r.config, "kappa1_values"), "kappa1_values");
  const int cutoff = r.cutoff > 0 ? r.cutoff : 60;
  io::CsvWriter csv(path_str(r, "metastable.csv"), r.config,
                    {"kappa1", "gamma1", "gamma2", "gamma2_over_gamma1", "kappa1_over_gamma1", "one_minus_P_bistable",
                     "one_minus_P_coherent", "basis", "error"});
  std::size_t failures = 0;
  auto rows = analysis::metastability_report(r.params, n, kappas, cutoff, [&](const analysis::MetastabilityRow& m) {
    if (!m.ok()) ++failures;
    csv.add(m.kappa1).add(m.gamma1).add(m.gamma2).add(m.ratio()).add(m.kappa_over_gamma());
    csv.add(m.one_minus_P_bistable).add(m.one_minus_P_coherent).add(m.cls).add(m.error);
    csv.end_row();
  });
  io::write_json(path_str(r, "metastable_summary.json"), summary(r, rows.size(), failures));
  return finish_rows(rows.size(), failures);
}

int cmd_parity(const Run& r) {
  const auto deltas = numbers(need(r.config, "delta_values"), "delta_values");
  io::CsvWriter csv(path_str(r, "parity.csv"), r.config,
                    {"Delta", "N", "N_sum", "F_even_cat", "F_even_vacuum", "F_odd_cat", "F_odd_one", "uhlmann_even_cat",
                     "parity_even", "parity_odd", "error"});
  std::size_t failures = 0;
  auto rows = analysis::parity_report(r.params, deltas, [&](const analysis::ParityRow& p) {
    if (!p.ok()) ++failures;
    csv.add(p.Delta).add(p.N).add(p.N_sum).add(p.F_even_cat).add(p.F_even_vacuum).add(p.F_odd_cat).add(p.F_odd_one);
    csv.add(p.uhlmann_even_cat).add(p.parity_even).add(p.parity_odd).add(p.error);
    csv.end_row();
  });
  io::write_json(path_str(r, "parity_summary.json"), summary(r, rows.size(), failures));
  return finish_rows(rows.size(), failures);
}

int cmd_phase_diagram(const Run& r) {
  const auto r1 = numbers(need(r.config, "r1_range"), "r1_range");
  const auto r2 = numbers(need(r.config, "r2_range"), "r2_range");
  const json& res = need(r.config, "resolution");
  if (r1.size() != 2 || r2.size() != 2) throw Error(ErrorKind::InvalidConfig, "ranges must be [min, max]");
  if (!res.is_array() || res.size() != 2) throw Error(ErrorKind::InvalidConfig, "resolution must be [n_r1, n_r2]");
  const int n1 = io::int_from_json(res[0], "resolution"), n2 = io::int_from_json(res[1], "resolution");
  io::CsvWriter csv(path_str(r, "phase_diagram.csv"), r.config,
                    {"r1_target", "r2_target", "Delta", "Lambda1_re", "Lambda1_im", "r1_re", "r1_im", "r2_re", "r2_im",
                     "class", "error"});
  std::size_t failures = 0;
  auto cells = analysis::phase_diagram(r.params, {r1[0], r1[1]}, {r2[0], r2[1]}, n1, n2, r.tol,
                                       [&](const analysis::PhaseCell& c) {
                                         if (!c.ok()) ++failures;
                                         csv.add(c.r1_target).add(c.r2_target).add(c.Delta).add(c.Lambda1);
                                         csv.add(c.r1).add(c.r2).add(c.cls).add(c.error);
                                         csv.end_row();
                                       });
  io::write_json(path_str(r, "phase_diagram_summary.json"), summary(r, cells.size(), failures));
  return finish_rows(cells.size(), failures);
}

void report(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact steady states of driven Kerr resonators"};
  std::string command, config_path, out_dir = ".";
  std::optional<int> cutoff;
  std::optional<double> tol;
  bool use_oracle = false;
  app.add_option("command", command, "derive | solve | wigner | scan | spectrum | metastable | parity | phase-diagram")
      ->required()
      ->check(CLI::IsMember({"derive", "solve", "wigner", "scan", "spectrum", "metastable", "parity", "phase-diagram"}));
  app.add_option("--config", config_path, "JSON configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--cutoff", cutoff, "Fock cutoff");
  app.add_flag("--oracle", use_oracle, "cross-check with the Lindblad solver");
  app.add_option("--tol", tol, "classification tolerance");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("InvalidConfig", e.what());
    return 2;
  }

  try {
    Run r;
    r.command = command;
    std::ifstream is(config_path);
    if (!is) throw Error(ErrorKind::InvalidConfig, "cannot read " + config_path);
    json cfg;
    try {
      cfg = json::parse(is);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    io::reject_unknown(cfg, keys_for(command), "config");
    if (cfg.contains("command") && cfg["command"] != command)
      throw Error(ErrorKind::InvalidConfig, "config is for command " + cfg["command"].dump());
    r.params = io::params_from_json(need(cfg, "params"));
    if (cfg.contains("cutoff")) r.cutoff = io::int_from_json(cfg["cutoff"], "cutoff");
    if (cfg.contains("tol")) r.tol = io::number_from_json(cfg["tol"], "tol");
    if (cfg.contains("oracle")) r.oracle = io::bool_from_json(cfg["oracle"], "oracle");
    if (cutoff) r.cutoff = *cutoff;
    if (tol) r.tol = *tol;
    r.oracle = r.oracle || use_oracle;
    if (!(r.tol > 0.0) || r.tol >= 0.5) throw Error(ErrorKind::InvalidConfig, "tol must lie in (0, 0.5)");
    if (r.cutoff == 0 || r.cutoff < -1) throw Error(ErrorKind::InvalidConfig, "cutoff must be positive");
    validate(r.params);

    cfg["command"] = command;
    cfg["params"] = io::to_json(r.params);
    cfg["cutoff"] = r.cutoff;
    cfg["tol"] = r.tol;
    cfg["oracle"] = r.oracle;
    r.config = cfg;
    r.out = out_dir;
    std::error_code ec;
    fs::create_directories(r.out, ec);
    if (ec) throw Error(ErrorKind::InvalidConfig, "cannot create output directory " + out_dir);

    if (command == "derive") return cmd_derive(r);
    if (command == "solve") return cmd_solve(r);
    if (command == "wigner") return cmd_wigner(r);
    if (command == "scan") return cmd_scan(r);
    if (command == "spectrum") return cmd_spectrum(r);
    if (command == "metastable") return cmd_metastable(r);
    if (command == "parity") return cmd_parity(r);
    return cmd_phase_diagram(r);
  } catch (const Error& e) {
    report(e.name(), e.what());
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    report("InvalidConfig", e.what());
    return 2;
  } catch (const std::exception& e) {
    report("NumericalFailure", e.what());
    return 3;
  }
}
