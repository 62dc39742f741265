#include "cli_app.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <system_error>

#include <CLI11.hpp>

#include "nbstein/nbstein.hpp"

namespace nbstein::cli {

namespace {

struct SubInfo {
  const char* name;
  const char* help;
};

// Each subcommand with the result it checks.
const std::vector<SubInfo>& sub_info() {
  static const std::vector<SubInfo> info = {
      {"r0", "Solve Gamma(r-1/2)/Gamma(r) = 3*sqrt(2e)/8 by bisection [Theorem 1.1, r0]"},
      {"bounds", "Stein factor bounds G1 and the three G2 components [Theorem 1.1]"},
      {"stein-solve", "Solve the NB Stein equation for f_i(j) = -|j - i| [Stein equation]"},
      {"stein-certify", "Measure G1, G2 and check them against their bounds [Theorem 1.1]"},
      {"simulate-ibd", "Exact simulation of the immigration-birth-death process [Lemmas 2.1, 2.2]"},
      {"verify-lemmas",
       "Monte Carlo checks of the single-ancestor law, the NB law and the coupling "
       "[Lemma 2.1, Lemma 2.2, coupling]"},
      {"verify-identities", "Quadrature of the two Lambda_t integral identities [Kendall identities for Lambda_t]"},
      {"parasite-bound", "Exposure functionals and the Wasserstein bound [Theorem 3.1]"},
      {"parasite-validate", "Empirical d_W of the parasite count against its bound [Theorem 3.1]"},
      {"aggregate-bound", "Multi-host bound with constant 24 [parasite model, several hosts]"},
      {"appendix-check", "Sum of (j-1) int |f_j'| against its closed form [Appendix, K1]"},
  };
  return info;
}

// Numeric flag with a range check whose message names the violated range.
template <class T>
CLI::Validator range(std::function<bool(T)> ok,
                     const std::string& text) {
  return CLI::Validator(
      [=](std::string& s) -> std::string {
        T v{};
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
          return "'" + s + "' is not a valid number";
        }
        if constexpr (std::is_floating_point_v<T>) {
          if (!std::isfinite(v)) return "value must be finite (got " + s + ")";
        }
        if (!ok(v)) return "value must satisfy " + text + " (got " + s + ")";
        return {};
      },
      text);
}

using Pred = std::function<bool(double)>;
const Pred kPositive = [](double v) { return v > 0.0; };
const Pred kNonNeg = [](double v) { return v >= 0.0; };
const Pred kOpenUnit = [](double v) { return v > 0.0 && v < 1.0; };

void add_double(CLI::App* sub, const std::string& flag, std::optional<double>& dst,
                const std::string& desc, const Pred& ok, const std::string& text) {
  sub->add_option_function<double>(flag, [&dst](const double& v) { dst = v; }, desc)
      ->check(range<double>(ok, text));
}

void add_int(CLI::App* sub, const std::string& flag, std::optional<std::int64_t>& dst,
             const std::string& desc, std::int64_t min) {
  sub->add_option_function<std::int64_t>(flag, [&dst](const std::int64_t& v) { dst = v; }, desc)
      ->check(range<std::int64_t>([min](std::int64_t v) { return v >= min; },
                                  ">= " + std::to_string(min)));
}

void add_output(CLI::App* sub, Args& a) {
  sub->add_option("--out", a.out, "Write to this file instead of stdout");
  sub->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_mc(CLI::App* sub, Args& a, std::uint64_t min_samples) {
  sub->add_option("--seed", a.seed, "Seed of the counter-based RNG");
  sub->add_option_function<std::uint64_t>(
         "--samples", [&a](const std::uint64_t& v) { a.samples = v; }, "Monte Carlo replicates")
      ->check(range<std::uint64_t>([min_samples](std::uint64_t v) { return v >= min_samples; },
                                   ">= " + std::to_string(min_samples)));
  sub->add_option("--workers", a.workers, "Worker threads (results do not depend on it)")
      ->check(range<unsigned>([](unsigned v) { return v >= 1; }, ">= 1"));
}

void add_r_p(CLI::App* sub, Args& a) {
  add_double(sub, "--r", a.r, "NB shape r", kPositive, "r > 0");
  add_double(sub, "--p", a.p, "NB parameter p", kOpenUnit, "0 < p < 1");
}

void add_scenario(CLI::App* sub, Args& a, bool many) {
  auto* o = sub->add_option("--scenario", a.scenario_paths, "Scenario JSON file")->required();
  if (!many) o->expected(1);
}

// ---------------------------------------------------------------------------

struct Output {
  std::ostream& out;
  std::ostream& err;
  const Args& args;

  std::string format(const char* natural) const {
    return args.format.empty() ? std::string(natural) : args.format;
  }

  void emit(const std::string& text) const {
    if (args.out.empty() || args.out == "-") {
      out << text;
      out.flush();
      if (!out) throw IoError("cannot write output");
    } else {
      write_output(text, args.out);
    }
  }

  void table(const std::string& command, const CsvTable& t) const {
    if (format("csv") == "csv") {
      err << "# " << command << " " << grids::kGridVersion << "\n";
      emit(t.str());
    } else {
      nlohmann::ordered_json j;
      j["command"] = command;
      j["grid_version"] = std::string(grids::kGridVersion);
      j["rows"] = t.to_json();
      emit(dump_json(j));
    }
  }

  void report(const nlohmann::ordered_json& j) const {
    if (format("json") == "json") {
      emit(dump_json(j));
      return;
    }
    // Flat objects only: one header row and one value row.
    std::string head, row;
    for (const auto& [k, v] : j.items()) {
      if (v.is_structured()) continue;
      if (!head.empty()) {
        head += ',';
        row += ',';
      }
      head += k;
      if (v.is_number_float()) {
        row += fmt_double(v.get<double>());
      } else if (v.is_string()) {
        row += v.get<std::string>();
      } else {
        row += v.dump();
      }
    }
    emit(head + "\n" + row + "\n");
  }
};

struct RPGrid {
  std::vector<double> r;
  std::vector<double> p;
};

RPGrid load_grid(const Args& a) {
  if (a.r || a.p) {
    if (!(a.r && a.p)) throw UsageError("--r and --p must be given together");
    return {{*a.r}, {*a.p}};
  }
  if (a.grid == "default") {
    return {{grids::kR.begin(), grids::kR.end()}, {grids::kP.begin(), grids::kP.end()}};
  }
  const nlohmann::json j = read_json_file(a.grid);
  detail::require_keys(j, "grid", {"r", "p"});
  RPGrid g{detail::json_numbers(j, "r", "grid"), detail::json_numbers(j, "p", "grid")};
  for (double r : g.r) {
    if (!(r > 0.0)) throw DomainError("grid: r values must be > 0");
  }
  for (double p : g.p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("grid: p values must lie in (0, 1)");
  }
  return g;
}

RngStream stream_family(std::uint64_t seed, std::uint64_t family) {
  return rng_stream(seed, family << 40);
}

nlohmann::ordered_json exposure_json(const ExposureSummary& s) {
  nlohmann::ordered_json j;
  j["A_T"] = s.A_T;
  j["A_star"] = s.A_star;
  j["R_T"] = s.R_T;
  j["R_a_star"] = s.R_a_star;
  j["theta_T"] = s.theta_T;
  j["mu_T"] = s.mu_T;
  return j;
}

nlohmann::ordered_json bound_json(const BoundReport& b) {
  nlohmann::ordered_json j;
  j["bound_total"] = b.bound_total;
  j["term_A"] = b.term_A;
  j["term_main"] = b.term_main;
  j["delta_g_factor"] = b.delta_g_factor;
  j["delta_g_c1"] = b.delta_g_c1;
  j["delta_g_c2"] = json_number(b.delta_g_c2);
  j["log_factor"] = b.log_factor;
  j["constant"] = b.constant;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_r0(const Output& o) {
  const double tol = o.args.tol.value_or(1e-12);
  const Bracket br = r0_bracket(tol);
  const double r0 = br.midpoint();
  nlohmann::ordered_json j;
  j["r0"] = r0;
  j["sqrt_r0"] = std::sqrt(r0);
  j["bracket_lo"] = br.lo;
  j["bracket_hi"] = br.hi;
  j["bracket_width"] = br.width();
  j["target"] = r0_target();
  o.report(j);
  return kOk;
}

int cmd_bounds(const Output& o) {
  const RPGrid g = load_grid(o.args);
  const double r0 = compute_r0();
  CsvTable t({"r", "p", "G1_bound", "G2_c1", "G2_c2", "G2_c3", "G2_bound"});
  for (double r : g.r) {
    for (double p : g.p) {
      const Theorem1Bound b = theorem1_bound(NegBinParams(r, p), r0);
      t.row(r, p, b.G1_bound, b.components[0], b.components[1], b.components[2], b.G2_bound);
    }
  }
  o.table("bounds", t);
  return kOk;
}

int cmd_stein_solve(const Output& o) {
  const Args& a = o.args;
  if (!a.r || !a.p) throw UsageError("stein-solve needs --r and --p");
  const NegBinParams nb(*a.r, *a.p);
  const std::int64_t i = a.i.value_or(0);
  const std::int64_t N =
      a.N.value_or(default_truncation(nb, std::max<std::int64_t>(i, default_i_max(nb))));
  const LipschitzFn f = extremal_f(i);
  const SteinSolution s = solve_stein(f, nb, N);
  CsvTable t({"k", "g", "delta_g", "residual"});
  for (std::int64_t k = 0; k <= N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double kk = static_cast<double>(k);
    const double res = nb.p * (nb.r + kk) * s.g[uk + 1] - kk * s.g[uk] - (f(k) - s.mu_f);
    t.row(k, s.g[uk], s.g[uk + 1] - s.g[uk], res);
  }
  o.table("stein-solve", t);
  return kOk;
}

int cmd_stein_certify(const Output& o) {
  const RPGrid g = load_grid(o.args);
  const double tol = o.args.tol.value_or(1e-9);
  const double r0 = compute_r0();
  CsvTable t({"r", "p", "i_max", "N", "G1_measured", "G1_bound", "G2_measured", "G2_bound",
              "argmax_i", "delta_at_i_max", "worst_scaled_residual", "pass"});
  std::vector<std::size_t> failed;
  for (double r : g.r) {
    for (double p : g.p) {
      const SteinFactorReport rep = measure_factors(NegBinParams(r, p), r0);
      const bool ok = std::abs(rep.G1_measured - rep.G1_bound) <= tol &&
                      rep.G2_measured <= rep.G2_bound + tol &&
                      rep.worst_scaled_residual <= kSteinResidualTol;
      if (!ok) failed.push_back(t.size());
      t.row(r, p, rep.i_max, rep.N, rep.G1_measured, rep.G1_bound, rep.G2_measured, rep.G2_bound,
            rep.argmax_i, rep.delta_at_i_max, rep.worst_scaled_residual, ok);
    }
  }
  o.table("stein-certify", t);
  for (std::size_t k : failed) o.err << "certification failed: " << t.row_str(k) << "\n";
  return failed.empty() ? kOk : kCertificationFailed;
}

int cmd_simulate_ibd(const Output& o) {
  const Args& a = o.args;
  if (!a.b || !a.t) throw UsageError("simulate-ibd needs --b and --t");
  const IBDParams params{ImmigrationRate::constant(a.a.value_or(0.0)), *a.b, a.z0.value_or(0)};
  const std::uint64_t n = a.samples.value_or(100'000);
  const EmpiricalDist d = replicate(n, rng_stream(a.seed, 0), a.workers, [&](RngStream& rng) {
    return simulate_ibd(params, *a.t, rng);
  });
  CsvTable t({"k", "count", "frequency"});
  for (const auto& [k, c] : d.counts()) {
    t.row(k, c, static_cast<double>(c) / static_cast<double>(n));
  }
  o.table("simulate-ibd", t);
  return kOk;
}

int cmd_verify_lemmas(const Output& o) {
  const Args& a = o.args;
  const std::uint64_t n = a.samples.value_or(100'000);
  CsvTable t({"check", "a", "b", "t", "i", "n", "tv", "threshold", "worst_cell_z", "moments_ok",
              "pass"});
  bool all = true;
  std::uint64_t family = 1;
  for (const auto& pt : grids::kLemma21) {
    const Lemma21Report rep =
        lemma21_check(pt.b, pt.t, n, stream_family(a.seed, family++), a.workers, 0.015);
    const bool ok = rep.law.pass && rep.moments_ok;
    all = all && ok;
    t.row("single_ancestor", 0.0, pt.b, pt.t, std::int64_t{1}, n, rep.law.tv, rep.law.threshold,
          rep.law.worst_cell_z, rep.moments_ok, ok);
  }
  for (const auto& pt : grids::kLemma22) {
    const LawCheckReport rep =
        lemma22_check(pt.a, pt.b, pt.t, n, stream_family(a.seed, family++), a.workers, 0.015);
    all = all && rep.pass;
    t.row("nb_law", pt.a, pt.b, pt.t, std::int64_t{0}, n, rep.tv, rep.threshold,
          rep.worst_cell_z, true, rep.pass);
  }
  {
    const auto& pt = grids::kLemma22Stationary;
    const IBDParams proc{ImmigrationRate::constant(pt.a), pt.b, 0};
    const EmpiricalDist sample = replicate(n, stream_family(a.seed, family++), a.workers,
                                           [&](RngStream& rng) { return simulate_ibd(proc, pt.t, rng); });
    const LawCheckReport rep =
        check_law(sample, nb_materialize(NegBinParams(pt.a / pt.b, pt.b)), 0.015);
    all = all && rep.pass;
    t.row("nb_stationary", pt.a, pt.b, pt.t, std::int64_t{0}, n, rep.tv, rep.threshold,
          rep.worst_cell_z, true, rep.pass);
  }
  for (const auto& pt : grids::kCoupling) {
    const LawCheckReport rep =
        coupling_check(pt.i, pt.a, pt.b, pt.t, n, stream_family(a.seed, family++), a.workers, 0.02);
    all = all && rep.pass;
    t.row("coupling", pt.a, pt.b, pt.t, std::int64_t{pt.i}, n, rep.tv, rep.threshold,
          rep.worst_cell_z, true, rep.pass);
  }
  o.table("verify-lemmas", t);
  if (!all) o.err << "certification failed: at least one law check exceeded its threshold\n";
  return all ? kOk : kCertificationFailed;
}

int cmd_verify_identities(const Output& o) {
  const Args& a = o.args;
  const double tol = a.tol.value_or(1e-8);
  std::vector<double> ps = a.p ? std::vector<double>{*a.p} : std::vector<double>{0.1, 0.5, 0.9};
  CsvTable t({"p", "I1", "I1_expected", "I1_err", "I2", "I2_expected", "I2_err", "pass"});
  bool all = true;
  for (double p : ps) {
    const IntegralIdentities id = verify_integral_identities(p);
    const double e1 = 2.0 / (1.0 - p);
    const double e2 = 4.0 / (3.0 * (1.0 - p));
    const bool ok = std::abs(id.I1 - e1) <= tol && std::abs(id.I2 - e2) <= tol;
    all = all && ok;
    t.row(p, id.I1, e1, id.I1_err, id.I2, e2, id.I2_err, ok);
  }
  o.table("verify-identities", t);
  return all ? kOk : kCertificationFailed;
}

int cmd_parasite_bound(const Output& o) {
  const ScenarioParams& sc = o.args.scenarios.front();
  const ExposureSummary ex = compute_exposure(sc);
  const BoundReport b = theorem31_bound(ex);
  nlohmann::ordered_json j;
  j["scenario"] = scenario_to_json(sc);
  j["exposure"] = exposure_json(ex);
  j["bound"] = bound_json(b);
  if (o.format("json") == "json") {
    o.emit(dump_json(j));
  } else {
    nlohmann::ordered_json flat = exposure_json(ex);
    const nlohmann::ordered_json bj = bound_json(b);
    for (const auto& [k, v] : bj.items()) flat[k] = v;
    o.report(flat);
  }
  return kOk;
}

int cmd_parasite_validate(const Output& o) {
  const Args& a = o.args;
  const ValidationReport rep = validate_scenario(
      a.scenarios.front(), a.samples.value_or(200'000), rng_stream(a.seed, 0), a.workers);
  nlohmann::ordered_json j;
  j["empirical_dW"] = rep.empirical_dW;
  j["bound"] = rep.bound;
  j["mc_halfwidth"] = rep.mc_halfwidth;
  j["pass"] = rep.pass;
  j["seed"] = rep.seed;
  j["n"] = rep.n;
  j["slack_ratio"] = json_number(rep.empirical_dW > 0.0
                                     ? rep.bound / rep.empirical_dW
                                     : std::numeric_limits<double>::infinity());
  if (o.format("json") == "json") {
    j["scenario"] = scenario_to_json(a.scenarios.front());
    j["exposure"] = exposure_json(rep.exposure);
  }
  o.report(j);
  if (!rep.pass) o.err << "certification failed: empirical d_W exceeds bound + half-width\n";
  return rep.pass ? kOk : kCertificationFailed;
}

int cmd_aggregate_bound(const Output& o) {
  const Args& a = o.args;
  std::vector<ExposureSummary> hosts;
  for (const auto& sc : a.scenarios) hosts.push_back(compute_exposure(sc));
  if (a.hosts) {
    if (hosts.size() != 1) throw UsageError("--hosts replicates a single --scenario");
    if (*a.hosts < 1) throw UsageError("--hosts must be >= 1");
    hosts.assign(static_cast<std::size_t>(*a.hosts), hosts.front());
  }
  const double r0 = compute_r0();
  const double bound = aggregate_bound(hosts, hosts.size(), r0);
  double nR = 0.0, sumA = 0.0;
  for (const auto& h : hosts) {
    nR += h.R_T;
    sumA += h.A_star;
  }
  nlohmann::ordered_json j;
  j["n_hosts"] = hosts.size();
  j["nRbar"] = nR;
  j["r0"] = r0;
  j["theta_T"] = hosts.front().theta_T;
  j["sum_A_star"] = sumA;
  j["bound"] = bound;
  o.report(j);
  return kOk;
}

int cmd_appendix_check(const Output& o) {
  const Args& a = o.args;
  const double tol = a.tol.value_or(1e-10);
  std::vector<double> thetas = a.theta ? std::vector<double>{*a.theta}
                                       : std::vector<double>(grids::kThetaT.begin(),
                                                             grids::kThetaT.end());
  CsvTable t({"theta_T", "lhs", "lhs_error", "j_max", "rhs_closed", "rhs_relaxed", "rhs_K1_34_3",
              "rhs_K1_37_3", "f2_integral", "f2_bound", "geometric_sum", "pass"});
  bool all = true;
  for (double th : thetas) {
    const AppendixReport r = appendix_check(th, tol);
    all = all && r.pass;
    t.row(th, r.lhs, r.lhs_error, r.j_max, r.rhs_closed, r.rhs_relaxed, r.rhs_K1_main,
          r.rhs_K1_appendix, r.f2_integral, r.f2_bound, r.geometric_sum, r.pass);
  }
  o.table("appendix-check", t);
  return all ? kOk : kCertificationFailed;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : sub_info()) v.emplace_back(s.name);
    return v;
  }();
  return names;
}

Command parse_args(const std::vector<std::string>& argv) {
  Command cmd;
  Args& a = cmd.args;
  CLI::App app{"Negative binomial approximation by Stein's method", "nbstein"};
  app.require_subcommand(1, 1);
  std::map<std::string, CLI::App*> subs;
  for (const auto& info : sub_info()) subs[info.name] = app.add_subcommand(info.name, info.help);

  add_double(subs["r0"], "--tol", a.tol, "Bracket width", kPositive, "tol > 0");
  add_output(subs["r0"], a);

  add_r_p(subs["bounds"], a);
  subs["bounds"]->add_option("--grid", a.grid, "'default' or a JSON file {\"r\": [...], \"p\": [...]}");
  add_output(subs["bounds"], a);

  add_r_p(subs["stein-solve"], a);
  add_int(subs["stein-solve"], "--i", a.i, "Test function f_i(j) = -|j - i|", 0);
  add_int(subs["stein-solve"], "--N", a.N, "Truncation point", 1);
  add_output(subs["stein-solve"], a);

  add_r_p(subs["stein-certify"], a);
  subs["stein-certify"]->add_option("--grid", a.grid,
                                    "'default' or a JSON file {\"r\": [...], \"p\": [...]}");
  add_double(subs["stein-certify"], "--tol", a.tol, "Slack on the bounds", kNonNeg, "tol >= 0");
  add_output(subs["stein-certify"], a);

  auto* sim = subs["simulate-ibd"];
  add_double(sim, "--a", a.a, "Immigration rate", kNonNeg, "a >= 0");
  add_double(sim, "--b", a.b, "Per-capita birth rate", kNonNeg, "b >= 0");
  add_double(sim, "--t", a.t, "Time horizon", kPositive, "t > 0");
  add_int(sim, "--z0", a.z0, "Initial population", 0);
  add_mc(sim, a, 1);
  add_output(sim, a);

  add_mc(subs["verify-lemmas"], a, 1000);
  add_output(subs["verify-lemmas"], a);

  add_double(subs["verify-identities"], "--p", a.p, "Birth rate p", kOpenUnit, "0 < p < 1");
  add_double(subs["verify-identities"], "--tol", a.tol, "Tolerance", kPositive, "tol > 0");
  add_output(subs["verify-identities"], a);

  add_scenario(subs["parasite-bound"], a, false);
  add_output(subs["parasite-bound"], a);

  add_scenario(subs["parasite-validate"], a, false);
  add_mc(subs["parasite-validate"], a, 1);
  add_output(subs["parasite-validate"], a);

  add_scenario(subs["aggregate-bound"], a, true);
  subs["aggregate-bound"]->add_option_function<std::uint64_t>(
      "--hosts", [&a](const std::uint64_t& v) { a.hosts = v; },
      "Replicate a single scenario over this many hosts");
  add_output(subs["aggregate-bound"], a);

  add_double(subs["appendix-check"], "--theta", a.theta, "theta_T", kOpenUnit, "0 < theta < 1");
  add_double(subs["appendix-check"], "--tol", a.tol, "Truncation tolerance of the j-sum",
             kPositive, "tol > 0");
  add_output(subs["appendix-check"], a);

  std::vector<const char*> raw;
  raw.reserve(argv.size());
  for (const auto& s : argv) raw.push_back(s.c_str());
  if (raw.empty()) raw.push_back("nbstein");
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (auto* s : app.get_subcommands()) target = s;
    throw HelpRequested(target->help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (msg.empty()) msg = e.get_name();
    throw UsageError(msg);
  }
  cmd.name = app.get_subcommands().front()->get_name();
  for (const auto& path : a.scenario_paths) a.scenarios.push_back(load_scenario(path));
  return cmd;
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
  const Output o{out, err, cmd.args};
  const std::string& n = cmd.name;
  if (n == "r0") return cmd_r0(o);
  if (n == "bounds") return cmd_bounds(o);
  if (n == "stein-solve") return cmd_stein_solve(o);
  if (n == "stein-certify") return cmd_stein_certify(o);
  if (n == "simulate-ibd") return cmd_simulate_ibd(o);
  if (n == "verify-lemmas") return cmd_verify_lemmas(o);
  if (n == "verify-identities") return cmd_verify_identities(o);
  if (n == "parasite-bound") return cmd_parasite_bound(o);
  if (n == "parasite-validate") return cmd_parasite_validate(o);
  if (n == "aggregate-bound") return cmd_aggregate_bound(o);
  if (n == "appendix-check") return cmd_appendix_check(o);
  throw UsageError("unknown command " + n);
}

int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_args(argv), out, err);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return kUsage;
  } catch (const PrecisionError& e) {
    err << "too few samples: " << e.what() << "\n";
    return kUsage;
  } catch (const AccuracyError& e) {
    err << "accuracy error: " << e.what() << " (best estimate " << fmt_double(e.best_estimate())
        << ")\n";
    return kAccuracy;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kAccuracy;
  }
}

}  // namespace nbstein::cli
