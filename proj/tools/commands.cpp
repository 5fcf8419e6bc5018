#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

namespace pom::cli {

namespace {

struct IoError : Error {
  using Error::Error;
};

struct Common {
  std::string config_path;
  std::string out_path;
  bool json = false;
  std::string protocol = "om";
  std::vector<std::string> sets;
  std::optional<double> theta, phi_mech, eta_cav, eta_det, eta_ver;
};

void add_common(CLI::App* app, Common& c, bool with_protocol) {
  app->add_option("--config", c.config_path, "Flat JSON file with ProtocolConfig keys");
  app->add_option("--out", c.out_path, "Output file (standard output when absent)");
  app->add_flag("--json", c.json, "Emit JSON instead of CSV");
  if (with_protocol) app->add_option("--protocol", c.protocol, "om, int or non")->capture_default_str();
  app->add_option("--set", c.sets, "Override a config key, key=value (repeatable)");
  app->add_option("--theta", c.theta, "Mechanics evolution angle, units of pi");
  app->add_option("--mech-phi", c.phi_mech, "Second mechanics evolution angle, units of pi");
  app->add_option("--eta-cav", c.eta_cav, "Cavity coupling efficiency");
  app->add_option("--eta-det", c.eta_det, "Detection efficiency");
  app->add_option("--eta-ver", c.eta_ver, "Verification-stage efficiency");
}

ProtocolConfig resolve_config(const Common& c) {
  ProtocolConfig cfg;
  if (!c.config_path.empty()) cfg = load_config_file(c.config_path);
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    nlohmann::json v;
    try {
      v = nlohmann::json::parse(kv.substr(eq + 1));
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("--set: cannot parse value in '" + kv + "'");
    }
    apply_config_json(nlohmann::json{{kv.substr(0, eq), v}}, cfg);
  }
  if (c.theta) cfg.theta = *c.theta * kPi;
  if (c.phi_mech) cfg.phi = *c.phi_mech * kPi;
  if (c.eta_cav) cfg.eta_cav = *c.eta_cav;
  if (c.eta_det) cfg.eta_det = *c.eta_det;
  if (c.eta_ver) cfg.eta_ver = *c.eta_ver;
  cfg.validate();
  return cfg;
}

void emit(const Common& c, const std::string& content, std::ostream& out) {
  if (c.out_path.empty()) {
    out << content;
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + c.out_path + "' for writing");
  f << content;
  f.flush();
  if (!f) throw IoError("write to '" + c.out_path + "' failed");
}

std::string table_json(const CsvTable& t) {
  nlohmann::ordered_json j;
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : t.rows) col.push_back(row[k]);
    j[t.header[k]] = col;
  }
  return j.dump(2) + "\n";
}

std::string emit_table(const Common& c, const CsvTable& t, std::ostream& out) {
  const std::string body = c.json ? table_json(t) : write_csv(t);
  emit(c, body, out);
  return body;
}

// Summary lines share stdout with the data when no --out is given.
std::ostream& summary_stream(const Common& c, std::ostream& out, std::ostream& err) {
  return c.out_path.empty() ? err : out;
}

struct AngleArgs {
  std::string phi = "0:1:41";
  std::string psi = "0:1:41";
};

int angle_scan(const Common& c, const ProtocolConfig& cfg, const AngleArgs& a, std::ostream& out, std::ostream& err) {
  const Protocol p = parse_protocol(c.protocol);
  const Axis phi = parse_axis("phi", a.phi, kPi);
  std::optional<Axis> psi;
  if (p == Protocol::interferometric) psi = parse_axis("psi", a.psi, kPi);
  const ScanGrid g = scan_angles(p, cfg, phi, psi);
  const CsvTable t = scan_table(g, kPi);
  emit_table(c, t, out);
  const std::size_t k = g.argmax();
  std::ostream& s = summary_stream(c, out, err);
  s << "max log_negativity=" << format_number(g.values[k]) << " at";
  for (std::size_t a2 = 0; a2 < t.header.size() - 1; ++a2) s << ' ' << t.header[a2] << '=' << format_number(t.rows[k][a2]);
  s << " (angles in units of pi)\n";
  return kExitOk;
}

int cmd_scan(const Common& c, const std::string& chi_s, const std::string& r_s, bool angles, const AngleArgs& a,
             const std::string& curves_path, std::ostream& out, std::ostream& err) {
  const ProtocolConfig cfg = resolve_config(c);
  if (angles) return angle_scan(c, cfg, a, out, err);
  const Protocol p = parse_protocol(c.protocol);
  const Axis chi = parse_axis("chi", chi_s), r = parse_axis("r", r_s);
  const ScanGrid g = scan_chi_r(p, cfg, chi, r, !curves_path.empty());
  emit_table(c, scan_table(g), out);
  if (!curves_path.empty()) {
    CsvTable ct{{"chi", "r_sym", "r_opt", "en_opt"}, {}};
    for (int i = 0; i < chi.steps; ++i) ct.rows.push_back({chi.at(i), g.r_sym[i], g.r_opt[i], g.en_opt[i]});
    Common cc = c;
    cc.out_path = curves_path;
    emit_table(cc, ct, out);
  }
  const std::size_t k = g.argmax();
  summary_stream(c, out, err) << "max log_negativity=" << format_number(g.values[k])
                              << " at chi=" << format_number(chi.at(static_cast<int>(k) / r.steps))
                              << " r=" << format_number(r.at(static_cast<int>(k) % r.steps)) << "\n";
  return kExitOk;
}

int cmd_table2(const Common& c, std::ostream& out) {
  const ProtocolConfig cfg = resolve_config(c);
  const Protocol ps[3] = {Protocol::om, Protocol::interferometric, Protocol::noninterferometric};
  const char* names[3] = {"om", "interferometric", "noninterferometric"};
  const char* cols[4] = {"theta_0", "theta_pi_2", "theta_2pi", "verification"};
  const double thetas[3] = {0.0, kPi / 2, 2 * kPi};
  EtaMin cells[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) cells[i][k] = min_eta_cav(ps[i], cfg, thetas[k], EtaTarget::generate);
    cells[i][3] = min_eta_cav(ps[i], cfg, 0.0, EtaTarget::verify);
  }
  auto cell_text = [](const EtaMin& e) {
    if (e.zero_limit) return std::string(">0");
    if (e.unreachable) return std::string(">1");
    return format_number(e.eta_min);
  };
  const double tot_int = total_optical_efficiency(Protocol::interferometric, cells[1][0].eta_min, cfg.eta_det);
  const double tot_non = total_optical_efficiency(Protocol::noninterferometric, cells[2][0].eta_min, cfg.eta_det);

  if (c.json) {
    nlohmann::ordered_json j;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 4; ++k)
        j[names[i]][cols[k]] = {{"eta_min", cells[i][k].eta_min},
                                {"zero_limit", cells[i][k].zero_limit},
                                {"unreachable", cells[i][k].unreachable}};
    j["total_efficiency"] = {{"interferometric", tot_int}, {"noninterferometric", tot_non}};
    emit(c, j.dump(2) + "\n", out);
    return kExitOk;
  }
  std::string csv = "protocol,theta_0,theta_pi_2,theta_2pi,verification\n";
  std::ostringstream text;
  text << std::left << std::setw(20) << "protocol";
  for (const char* col : cols) text << std::setw(20) << col;
  text << "\n";
  for (int i = 0; i < 3; ++i) {
    csv += names[i];
    text << std::setw(20) << names[i];
    for (int k = 0; k < 4; ++k) {
      csv += "," + cell_text(cells[i][k]);
      text << std::setw(20) << cell_text(cells[i][k]);
    }
    csv += "\n";
    text << "\n";
  }
  text << "total efficiency at theta_0: interferometric " << format_number(tot_int) << ", noninterferometric "
       << format_number(tot_non) << "\n";
  if (c.out_path.empty()) {
    out << text.str();
  } else {
    emit(c, csv, out);
    out << text.str();
  }
  return kExitOk;
}

struct VerifyArgs {
  std::string chi = "0.1:6:60";
  std::string r = "opt";
  std::string mode = "time";
  bool mc = false;
  std::int64_t samples = 100000;
  std::uint64_t seed = 42;
};

int cmd_verify(const Common& c, const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const ProtocolConfig cfg = resolve_config(c);
  const Protocol p = parse_protocol(c.protocol);
  const EstimationMode mode = parse_mode(a.mode);
  const Axis chi = parse_axis("chi", a.chi);
  std::optional<double> r_fixed;
  if (a.r != "opt") {
    try {
      std::size_t used = 0;
      r_fixed = std::stod(a.r, &used);
      if (used != a.r.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("--r expects a number or 'opt'");
    }
  }
  if (a.mc && a.samples < 2) throw InvalidArgument("--samples must be >= 2");

  CsvTable t{{"chi", "en_state", "en_ver_time", "en_ver_time_noise", "en_inverse", "r"}, {}};
  if (a.mc) {
    t.header.push_back("en_mc");
    t.header.push_back("mc_se_max");
  }
  std::size_t best = 0;
  for (int i = 0; i < chi.steps; ++i) {
    ProtocolConfig q = cfg;
    q.chi = chi.at(i);
    q.r = r_fixed ? *r_fixed : optimize_r(p, q.chi, q).r;
    const GaussianState s0 = entangle_at(p, q, 0.0, 0.0);
    const VerifiedCovariance vt = build_sigma_ver(p, q, EstimationMode::conservative_time);
    const VerifiedCovariance vn = build_sigma_ver(p, q, EstimationMode::conservative_time_noise);
    const VerifiedCovariance vm = build_sigma_ver(p, q, mode);
    const InverseMapResult inv = inverse_map(vm, q.gamma, q.N_bar, q.omega_m);
    std::vector<double> row = {q.chi,
                               log_negativity(s0.cov).log_neg,
                               log_negativity(vt.sigma_ver, false).log_neg,
                               log_negativity(vn.sigma_ver, false).log_neg,
                               log_negativity(inv.sigma_zero_est, false).log_neg,
                               q.r};
    if (a.mc) {
      const MonteCarloResult mc = monte_carlo_sigma_ver(p, q, mode, a.samples, a.seed + static_cast<std::uint64_t>(i));
      // Sampling noise can leave a near-singular estimate unphysical; E_N is then undefined.
      row.push_back(is_physical(mc.ver.sigma_ver) ? log_negativity(mc.ver.sigma_ver, false).log_neg
                                                  : std::numeric_limits<double>::quiet_NaN());
      row.push_back(mc.standard_errors.maxCoeff());
    }
    t.rows.push_back(row);
    if (t.rows[i][2] > t.rows[best][2]) best = static_cast<std::size_t>(i);
  }
  emit_table(c, t, out);
  summary_stream(c, out, err) << "max en_ver_time=" << format_number(t.rows[best][2])
                              << " at chi=" << format_number(t.rows[best][0]) << "\n";
  return kExitOk;
}

int cmd_precool(const Common& c, const std::string& chi_s, std::optional<int> pulses, std::ostream& out) {
  ProtocolConfig cfg = resolve_config(c);
  if (pulses) cfg.precool_pulses = *pulses;
  cfg.validate();
  const Axis chi = parse_axis("chi", chi_s);
  CsvTable t{{"chi", "v_x", "v_p"}, {}};
  for (int i = 0; i < chi.steps; ++i) {
    ProtocolConfig q = cfg;
    q.chi = chi.at(i);
    const PrecooledState s = precool(q);
    t.rows.push_back({q.chi, s.V_x, s.V_p});
  }
  emit_table(c, t, out);
  return kExitOk;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

Axis parse_axis(const std::string& name, const std::string& text, double scale) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw InvalidArgument("axis '" + name + "' expects min:max:steps, got '" + text + "'");
  auto num = [&](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw InvalidArgument("axis '" + name + "': bad number '" + s + "'");
    return v;
  };
  int steps = 0;
  const auto res = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), steps);
  if (res.ec != std::errc() || res.ptr != parts[2].data() + parts[2].size())
    throw InvalidArgument("axis '" + name + "': bad step count '" + parts[2] + "'");
  Axis a{name, num(parts[0]) * scale, num(parts[1]) * scale, steps};
  a.validate();
  return a;
}

void apply_config_json(const nlohmann::json& j, ProtocolConfig& c) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  auto number = [](const std::string& key, const nlohmann::json& v) {
    if (!v.is_number()) throw InvalidArgument("config: '" + key + "' must be a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "omega_m") c.omega_m = number(key, v);
    else if (key == "gamma") c.gamma = number(key, v);
    else if (key == "n_bar") c.n_bar = number(key, v);
    else if (key == "N_bar") c.N_bar = number(key, v);
    else if (key == "eta_cav") c.eta_cav = number(key, v);
    else if (key == "eta_det") c.eta_det = number(key, v);
    else if (key == "kappa") c.kappa = number(key, v);
    else if (key == "g0") c.g0 = number(key, v);
    else if (key == "chi") c.chi = number(key, v);
    else if (key == "r") c.r = number(key, v);
    else if (key == "theta") c.theta = number(key, v) * kPi;
    else if (key == "phi") c.phi = number(key, v) * kPi;
    else if (key == "lambda_kick") c.lambda_kick = number(key, v);
    else if (key == "homodyne_angle") c.homodyne_angle = number(key, v) * kPi;
    else if (key == "precool_pulses") {
      if (!v.is_number_integer()) throw InvalidArgument("config: 'precool_pulses' must be an integer");
      c.precool_pulses = v.get<int>();
    } else if (key == "homodyne_angles") {
      if (!v.is_array() || v.size() != 2) throw InvalidArgument("config: 'homodyne_angles' must be [phi, psi]");
      c.homodyne_angles = {number(key, v[0]) * kPi, number(key, v[1]) * kPi};
    } else if (key == "eta_ver") {
      if (v.is_null()) c.eta_ver.reset();
      else c.eta_ver = number(key, v);
    } else if (key == "lab_frame") {
      if (!v.is_boolean()) throw InvalidArgument("config: 'lab_frame' must be true or false");
      c.lab_frame = v.get<bool>();
    } else {
      throw InvalidArgument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
}

ProtocolConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
  ProtocolConfig c;
  apply_config_json(j, c);
  return c;
}

std::string write_csv(const CsvTable& t) {
  std::string s;
  for (std::size_t k = 0; k < t.header.size(); ++k) s += (k ? "," : "") + t.header[k];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + format_number(row[k]);
    s += "\n";
  }
  return s;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ls(l);
    std::string cell;
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(ss, line)) throw InvalidArgument("csv: empty input");
  t.header = split(line);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line)) {
      if (cell == "nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw InvalidArgument("csv: bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw InvalidArgument("csv: ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable scan_table(const ScanGrid& g, double axis_scale) {
  CsvTable t;
  for (const Axis& a : g.axes) t.header.push_back(a.name);
  t.header.push_back("log_negativity");
  const int inner = g.axes.size() > 1 ? g.axes[1].steps : 1;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    std::vector<double> row;
    row.push_back(g.axes[0].at(static_cast<int>(k) / inner) / axis_scale);
    if (g.axes.size() > 1) row.push_back(g.axes[1].at(static_cast<int>(k) % inner) / axis_scale);
    row.push_back(g.values[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulsed optomechanical entanglement: scans, tables and verification"};
  app.require_subcommand(1);

  Common scan_c, ang_c, t2_c, ver_c, pre_c;
  std::string scan_chi = "0:6:121", scan_r = "0:1.2:61", curves;
  bool scan_angles_flag = false;
  AngleArgs scan_a, ang_a;
  CLI::App* scan = app.add_subcommand("scan", "E_N over a (chi, r) grid, or over homodyne angles with --angles");
  add_common(scan, scan_c, true);
  scan->add_option("--chi", scan_chi, "chi axis min:max:steps")->capture_default_str();
  scan->add_option("--r", scan_r, "r axis min:max:steps")->capture_default_str();
  scan->add_flag("--angles", scan_angles_flag, "Scan homodyne angles at the config chi and r");
  scan->add_option("--phi", scan_a.phi, "phi axis, units of pi")->capture_default_str();
  scan->add_option("--psi", scan_a.psi, "psi axis, units of pi")->capture_default_str();
  scan->add_option("--curves", curves, "Also write chi,r_sym,r_opt,en_opt here");

  double ang_chi = 3.0, ang_r = 0.0;
  CLI::App* ang = app.add_subcommand("angles", "E_N over generation-stage homodyne angles");
  add_common(ang, ang_c, true);
  ang->add_option("--chi", ang_chi, "Interaction strength")->capture_default_str();
  ang->add_option("--r", ang_r, "Squeezing")->capture_default_str();
  ang->add_option("--phi", ang_a.phi, "phi axis, units of pi")->capture_default_str();
  ang->add_option("--psi", ang_a.psi, "psi axis, units of pi")->capture_default_str();

  CLI::App* t2 = app.add_subcommand("table2", "Minimum cavity efficiency for generation and verification");
  add_common(t2, t2_c, false);

  VerifyArgs va;
  CLI::App* ver = app.add_subcommand("verify", "E_N of the state and of its reconstructions versus chi");
  add_common(ver, ver_c, true);
  ver->add_option("--chi", va.chi, "chi axis min:max:steps")->capture_default_str();
  ver->add_option("--r", va.r, "Squeezing, or 'opt' for the optimum at each chi")->capture_default_str();
  ver->add_option("--mode", va.mode, "plain, time or time_noise (used for en_inverse and --mc)")->capture_default_str();
  ver->add_flag("--mc", va.mc, "Append Monte-Carlo estimates");
  ver->add_option("--samples", va.samples, "Monte-Carlo samples per setting")->capture_default_str();
  ver->add_option("--seed", va.seed, "Monte-Carlo seed")->capture_default_str();

  std::string pre_chi = "0:6:61";
  std::optional<int> pulses;
  CLI::App* pre = app.add_subcommand("precool", "Precooled mechanical variances versus chi");
  add_common(pre, pre_c, false);
  pre->add_option("--chi", pre_chi, "chi axis min:max:steps")->capture_default_str();
  pre->add_option("--pulses", pulses, "Number of precooling pulses");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (scan->parsed()) return cmd_scan(scan_c, scan_chi, scan_r, scan_angles_flag, scan_a, curves, out, err);
    if (ang->parsed()) {
      Common c = ang_c;
      c.sets.push_back("chi=" + format_number(ang_chi));
      c.sets.push_back("r=" + format_number(ang_r));
      return angle_scan(c, resolve_config(c), ang_a, out, err);
    }
    if (t2->parsed()) return cmd_table2(t2_c, out);
    if (ver->parsed()) return cmd_verify(ver_c, va, out, err);
    if (pre->parsed()) return cmd_precool(pre_c, pre_chi, pulses, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pom::cli
