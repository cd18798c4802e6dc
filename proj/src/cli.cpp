#include "csm/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "csm/bethe.hpp"
#include "csm/dynamics.hpp"
#include "csm/error.hpp"
#include "csm/oracle.hpp"
#include "csm/sector_spectrum.hpp"
#include "csm/verify.hpp"

namespace csm::cli {

namespace {

using json = nlohmann::json;

struct RunConfig {
  std::string s = "1";
  int N = 2;
  double A = 1.0;
  double B = 1.0;
  double theta = 0.5 * M_PI;
  int M = -1;
  double t_max = 40.0;
  int t_steps = 4000;
  std::string sector;
  std::string epsilons;
  std::string output;
  std::string format = "csv";
  std::uint64_t seed = 42;
  Tolerances tol;
  std::string method = "spectral";
  int starts = 200;
  std::vector<std::string> observables;
  bool verify = false;
  bool N_given = false;
};

ModelParams model(const RunConfig& cfg) {
  ModelParams p{HalfInt::parse(cfg.s), cfg.N, cfg.A, cfg.B};
  p.validate();
  return p;
}

json params_json(const ModelParams& p) {
  return {{"s", p.s.to_string()}, {"N", p.N}, {"A", p.A}, {"B", p.B}};
}

json params_json(const InhomModelParams& p) {
  return {{"s", p.s.to_string()}, {"N", p.N}, {"B", p.B}, {"eps0", p.eps0}, {"eps", p.eps}};
}

std::string num(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << x;
  return os.str();
}

std::vector<double> read_epsilons(const std::string& spec) {
  std::vector<double> out;
  std::ifstream file(spec);
  std::string text;
  if (file) {
    std::stringstream buf;
    buf << file.rdbuf();
    text = buf.str();
  } else {
    text = spec;
  }
  for (char& ch : text)
    if (ch == ',') ch = '\n';
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "cannot parse epsilon '" + line + "'");
    }
    if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "trailing text in epsilon '" + line + "'");
    }
    out.push_back(v);
  }
  if (out.size() < 2) throw Error(ErrorCode::InvalidArgument, "epsilons need eps0 and at least one eps_j");
  return out;
}

SectorKey parse_sector(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--sector expects j,m");
  return {HalfInt::parse(text.substr(0, comma)), HalfInt::parse(text.substr(comma + 1))};
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  const ModelParams p = model(cfg);
  std::vector<Level> levels;
  if (!cfg.sector.empty()) {
    const SectorKey key = parse_sector(cfg.sector);
    if (!sector_key_valid(p.s, p.N, key)) {
      throw Error(ErrorCode::InvalidArgument, "sector (" + key.j.to_string() + ", " + key.m.to_string() + ") not allowed");
    }
    const SectorBlock blk = build_sector(p, key);
    for (double e : blk.energies) levels.push_back({key.j, key.m, e, bath_spin_multiplicity(p.N, key.j)});
  } else {
    levels = full_spectrum(p);
  }

  if (cfg.format == "json") {
    json rows = json::array();
    for (const Level& l : levels) {
      rows.push_back({{"j", l.j.to_string()}, {"m", l.m.to_string()}, {"energy", l.energy}, {"multiplicity", l.multiplicity}});
    }
    out << json{{"params", params_json(p)}, {"levels", rows}}.dump(2) << "\n";
  } else {
    out << "j,m,E,multiplicity\n";
    for (const Level& l : levels) {
      out << l.j.to_string() << "," << l.m.to_string() << "," << num(l.energy) << "," << l.multiplicity << "\n";
    }
  }
  return kOk;
}

json state_json(const BetheState& st) {
  json roots = json::array();
  for (const cplx& v : st.roots) roots.push_back({v.real(), v.imag()});
  return {{"roots", roots}, {"energy", st.energy}, {"residual", st.residual_inf}};
}

void write_states_csv(const std::vector<const BetheState*>& states, std::ostream& out) {
  out << "state,energy,residual_inf,root_re,root_im\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const BetheState& st = *states[i];
    const std::string prefix = std::to_string(i) + "," + num(st.energy) + "," + num(st.residual_inf) + ",";
    if (st.roots.empty()) out << prefix << ",\n";
    for (const cplx& v : st.roots) out << prefix << num(v.real()) << "," << num(v.imag()) << "\n";
  }
}

int cmd_bethe(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.M < 0) throw Error(ErrorCode::InvalidArgument, "bethe requires --M >= 0");
  std::vector<const BetheState*> states;
  json doc;

  if (!cfg.epsilons.empty()) {
    const std::vector<double> eps = read_epsilons(cfg.epsilons);
    InhomModelParams p{HalfInt::parse(cfg.s), static_cast<int>(eps.size()) - 1, cfg.B, eps.front(),
                       std::vector<double>(eps.begin() + 1, eps.end())};
    if (cfg.N_given && cfg.N != p.N) {
      throw Error(ErrorCode::InvalidArgument, "--N disagrees with the number of bath epsilons");
    }
    p.validate();
    DirectNewtonOptions opts;
    opts.starts = cfg.starts;
    opts.seed = cfg.seed;
    opts.tol = cfg.tol;
    const InhomSolveReport rep = solve_inhom_newton(p, cfg.M, opts);
    if (!rep.epsilons_distinct) err << "warning: DegenerateEpsilons (repeated eps_j)\n";
    for (const BetheState& st : rep.states) states.push_back(&st);
    err << "found " << rep.states.size() << " expected " << rep.expected << "\n";
    if (cfg.format == "json") {
      json arr = json::array();
      for (const BetheState* st : states) arr.push_back(state_json(*st));
      doc = {{"params", params_json(p)}, {"M", cfg.M}, {"found", rep.states.size()},
             {"expected", rep.expected}, {"states", arr}};
      out << doc.dump(2) << "\n";
    } else {
      write_states_csv(states, out);
    }
    return kOk;
  }

  const ModelParams p = model(cfg);
  QPolyOptions opts;
  opts.starts = cfg.starts;
  opts.seed = cfg.seed;
  opts.tol = cfg.tol;
  const HomSolveReport rep = solve_hom_qpoly(p, cfg.M, opts);
  for (const QPolySolution& sol : rep.solutions) states.push_back(&sol.state);
  err << "found " << rep.solutions.size() << " expected " << rep.expected_top_sector << " (j = N/2 sector), "
      << rep.expected_inhom << " (generic count); quarantined " << rep.singular << " singular, " << rep.rejected
      << " rejected, " << rep.degenerate << " degenerate\n";
  if (cfg.format == "json") {
    json arr = json::array();
    for (const BetheState* st : states) arr.push_back(state_json(*st));
    doc = {{"params", params_json(p)},
           {"M", cfg.M},
           {"found", rep.solutions.size()},
           {"expected", rep.expected_top_sector},
           {"expected_generic", rep.expected_inhom},
           {"singular", rep.singular},
           {"rejected", rep.rejected},
           {"degenerate", rep.degenerate},
           {"states", arr}};
    out << doc.dump(2) << "\n";
  } else {
    write_states_csv(states, out);
  }
  return kOk;
}

int cmd_count(const RunConfig& cfg, std::ostream& out) {
  const HalfInt s = HalfInt::parse(cfg.s);
  ModelParams{s, cfg.N, 1.0, 1.0}.validate();
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  for (int M = 0; M <= cfg.N + s.twice(); ++M) {
    counts.push_back(count_solutions(s, cfg.N, M));
    total += counts.back();
  }
  const std::int64_t expected = total_levels(s, cfg.N);
  const bool pass = total == expected;
  if (cfg.format == "json") {
    json rows = json::array();
    for (std::size_t M = 0; M < counts.size(); ++M) rows.push_back({{"M", M}, {"count", counts[M]}});
    out << json{{"s", s.to_string()}, {"N", cfg.N}, {"counts", rows}, {"total", total},
                {"expected", expected}, {"status", pass ? "PASS" : "FAIL"}}
               .dump(2)
        << "\n";
  } else {
    out << "M,count\n";
    for (std::size_t M = 0; M < counts.size(); ++M) out << M << "," << counts[M] << "\n";
    out << "total," << total << "\n";
    out << "expected," << expected << "\n";
    out << "status," << (pass ? "PASS" : "FAIL") << "\n";
  }
  return pass ? kOk : kVerificationFailure;
}

ModeMethod parse_method(const std::string& m) {
  if (m == "spectral") return ModeMethod::Spectral;
  if (m == "recipe") return ModeMethod::Recipe;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + m + "'");
}

int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelParams p = model(cfg);
  std::vector<Observable> obs;
  if (cfg.observables.empty()) {
    obs = all_observables();
  } else {
    for (const std::string& name : cfg.observables) obs.push_back(parse_observable(name));
  }
  const std::vector<double> times = time_grid(cfg.t_max, cfg.t_steps);
  const TimeSeries ts = run_timeseries(p, cfg.theta, times, obs, parse_method(cfg.method));

  if (cfg.format == "json") {
    json cols = json::object();
    for (std::size_t o = 0; o < obs.size(); ++o) cols[to_string(obs[o])] = ts.values[o];
    out << json{{"params", params_json(p)}, {"theta", cfg.theta}, {"t", ts.times}, {"observables", cols}}.dump(2)
        << "\n";
  } else {
    out << "t";
    for (Observable o : obs) out << "," << to_string(o);
    out << "\n";
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
      out << num(ts.times[i]);
      for (std::size_t o = 0; o < obs.size(); ++o) out << "," << num(ts.values[o][i]);
      out << "\n";
    }
  }

  if (!cfg.verify) return kOk;
  const DenseSpectrum spec = diagonalize(build_dense(p));
  const Eigen::VectorXcd psi0 = coherent_product_state(p.s, p.N, cfg.theta);
  std::vector<double> dev(obs.size(), 0.0);
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    const OracleObservables o = oracle_observables(psi0, exact_evolve(spec, psi0, ts.times[i]), p.s, p.N);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      double ref = 0.0;
      switch (obs[k]) {
        case Observable::Entropy: ref = o.entropy; break;
        case Observable::Purity: ref = o.purity; break;
        case Observable::Sz: ref = o.sz; break;
        case Observable::Sminus2: ref = o.sminus2; break;
        case Observable::Loschmidt: ref = o.loschmidt; break;
        case Observable::Norm: ref = o.norm; break;
      }
      dev[k] = std::max(dev[k], std::abs(ts.values[k][i] - ref));
    }
  }
  bool pass = true;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const bool ok = dev[k] < 1e-8;
    pass = pass && ok;
    err << "verify " << to_string(obs[k]) << " max_dev=" << num(dev[k]) << " " << (ok ? "PASS" : "FAIL") << "\n";
  }
  return pass ? kOk : kVerificationFailure;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const ModelParams p = model(cfg);
  VerifyOptions opts;
  opts.theta = cfg.theta;
  opts.seed = cfg.seed;
  const VerifyReport rep = verify_model(p, opts);
  json checks = json::array();
  for (const VerifyCheck& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"status", c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL")},
                      {"value", std::isfinite(c.value) ? json(c.value) : json(nullptr)},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  const bool pass = rep.all_passed();
  out << json{{"params", params_json(p)}, {"status", pass ? "PASS" : "FAIL"}, {"checks", checks}}.dump(2) << "\n";
  return pass ? kOk : kVerificationFailure;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionGuard:
      return kBadInput;
    case ErrorCode::NoSolutionFound:
      return kNoBetheSolutions;
    default:
      return kNumericFailure;
  }
}

void add_common(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--s", cfg.s, "central spin, e.g. 1/2, 1, 3/2")->capture_default_str();
  cmd.add_option_function<int>("--N", [&cfg](const int& n) {
       cfg.N = n;
       cfg.N_given = true;
     }, "number of bath spins")
      ->default_str(std::to_string(cfg.N));
  cmd.add_option("--A", cfg.A, "homogeneous coupling")->capture_default_str();
  cmd.add_option("--B", cfg.B, "magnetic field")->capture_default_str();
  cmd.add_option("--output", cfg.output, "write results to this file instead of stdout");
  cmd.add_option("--format", cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  cmd.add_option("--tol-eig", cfg.tol.eig)->capture_default_str();
  cmd.add_option("--tol-root", cfg.tol.root)->capture_default_str();
  cmd.add_option("--tol-newton", cfg.tol.newton)->capture_default_str();
  cmd.add_option("--tol-bethe", cfg.tol.bethe)->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Exact spectra, Bethe roots and dynamics of the central spin model"};
  app.require_subcommand(1);

  auto* spectrum = app.add_subcommand("spectrum", "energy levels by (j, m) sector");
  add_common(*spectrum, cfg);
  spectrum->add_option("--sector", cfg.sector, "restrict to one sector, given as j,m");

  auto* bethe = app.add_subcommand("bethe", "solve the Bethe equations for M roots");
  add_common(*bethe, cfg);
  bethe->add_option("--M", cfg.M, "number of Bethe roots")->required();
  bethe->add_option("--epsilons", cfg.epsilons, "file with eps0 then eps_1..eps_N, one per line");
  bethe->add_option("--starts", cfg.starts, "random Newton starts")->capture_default_str();

  auto* count = app.add_subcommand("count", "number of Bethe solutions per M");
  add_common(*count, cfg);

  auto* evolve = app.add_subcommand("evolve", "observables after a coherent-state quench");
  add_common(*evolve, cfg);
  evolve->add_option("--theta", cfg.theta, "bath polar angle in radians")->capture_default_str();
  evolve->add_option("--t_max", cfg.t_max)->capture_default_str();
  evolve->add_option("--t_steps", cfg.t_steps)->capture_default_str();
  evolve->add_option("--method", cfg.method, "recipe or spectral")
      ->check(CLI::IsMember({"recipe", "spectral"}))
      ->capture_default_str();
  evolve->add_option("--observables", cfg.observables, "subset of entropy,purity,sz,sminus2,loschmidt,norm")
      ->delimiter(',');
  evolve->add_flag("--verify", cfg.verify, "compare every column with the dense oracle");

  auto* verify = app.add_subcommand("verify", "run the consistency suite");
  add_common(*verify, cfg);
  verify->add_option("--theta", cfg.theta, "bath polar angle in radians")->capture_default_str();

  std::vector<const char*> argv{"csm"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kBadInput;
  }

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      err << "cannot open " << cfg.output << "\n";
      return kBadInput;
    }
  }
  std::ostream& sink = cfg.output.empty() ? out : file;

  try {
    if (*spectrum) return cmd_spectrum(cfg, sink);
    if (*bethe) return cmd_bethe(cfg, sink, err);
    if (*count) return cmd_count(cfg, sink);
    if (*evolve) return cmd_evolve(cfg, sink, err);
    if (*verify) return cmd_verify(cfg, sink);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  return kBadInput;
}

}  // namespace csm::cli
