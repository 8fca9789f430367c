#include "mlpot/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "mlpot/corpus.hpp"
#include "mlpot/dyadic.hpp"
#include "mlpot/error.hpp"
#include "mlpot/grid.hpp"
#include "mlpot/kernels.hpp"
#include "mlpot/operators.hpp"
#include "mlpot/orlicz.hpp"
#include "mlpot/verify.hpp"
#include "mlpot/weights.hpp"

namespace mlpot {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands{"eval-op",           "eval-commutator", "maximal",     "cz-decompose",
                                         "check-condition-d", "verify",          "bessel-probe"};

Config defaults() {
  Config c;
  c["command"] = "";
  c["m"] = 2;
  c["n"] = 1;
  c["N"] = 64;
  c["L"] = 2.0;
  c["kernel"] = "frac1";
  c["weights"] = Config::object();
  c["norms"] = Config::array();
  c["exponents"] = Config::object();
  c["ell"] = 0;
  c["seed"] = 0;
  c["out_dir"] = "out";
  c["family"] = "centered";
  return c;
}

template <typename T>
T get_or(const Config& c, const char* key, T fallback) {
  return c.contains(key) && !c[key].is_null() ? c[key].get<T>() : fallback;
}

std::vector<double> number_list(const Config& v) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_string()) {
    std::vector<double> out;
    std::string s = v.get<std::string>();
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    double x = 0.0;
    while (is >> x) out.push_back(x);
    if (!is.eof()) throw std::invalid_argument("malformed number list '" + v.get<std::string>() + "'");
    return out;
  }
  throw std::invalid_argument("expected a number or a list of numbers");
}

std::vector<std::string> string_list(const Config& v, int m) {
  std::vector<std::string> out;
  if (v.is_string())
    out.assign(m, v.get<std::string>());
  else if (v.is_array())
    out = v.get<std::vector<std::string>>();
  else
    throw std::invalid_argument("expected a string or a list of strings");
  if (out.size() == 1 && m > 1) out.assign(m, out[0]);
  if (static_cast<int>(out.size()) != m) throw std::invalid_argument("expected one entry per slot (m)");
  return out;
}

std::pair<int, int> parse_k_range(const Config& v) {
  if (v.is_array() && v.size() == 2) return {v[0].get<int>(), v[1].get<int>()};
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
      try {
        std::size_t a = 0;
        std::size_t b = 0;
        const std::string lo = s.substr(0, dots);
        const std::string hi = s.substr(dots + 2);
        const int klo = std::stoi(lo, &a);
        const int khi = std::stoi(hi, &b);
        if (a == lo.size() && b == hi.size() && klo <= khi) return {klo, khi};
      } catch (const std::logic_error&) {
      }
    }
  }
  throw std::invalid_argument("k range must look like lo..hi with lo <= hi");
}

Grid grid_of(const Config& c) {
  const int n = c["n"].get<int>();
  const int N = c["N"].get<int>();
  if (n < 1 || n > 3) throw std::invalid_argument("n must be 1, 2 or 3");
  return make_grid(n, c["L"].get<double>(), N);
}

/// config["inputs"] as weight specs, otherwise one corpus tuple.
FunctionTuple inputs_of(const Config& c, const Grid& g) {
  const int m = c["m"].get<int>();
  if (c.contains("inputs")) {
    FunctionTuple f;
    for (const auto& s : string_list(c["inputs"], m)) f.push_back(make_weight(s, g));
    return f;
  }
  const int idx = get_or<int>(c, "corpus_index", 0);
  if (idx < 0) throw std::invalid_argument("corpus_index must be >= 0");
  return make_corpus(g, m, idx + 1, c["seed"].get<std::uint64_t>()).back();
}

PhiScaling phi_of(const Config& c, const Kernel& k, const Grid& g) {
  const std::string s = get_or<std::string>(c, "phi", "one");
  if (s.rfind("Phi", 0) == 0) {
    std::string t = s.substr(3);
    if (t.size() >= 2 && t.front() == '{' && t.back() == '}') t = t.substr(1, t.size() - 2);
    return PhiScaling::kernel_theta(k, t.empty() ? 1.0 : std::stod(t), 1.0, get_or<double>(c, "delta_d", 1.0),
                                    get_or<double>(c, "eps_d", 0.5), grid_nu_max(g));
  }
  return parse_phi_scaling(s);
}

Config report_envelope(const Config& c) {
  Config r;
  r["library"] = "mlpot";
  r["version"] = kLibraryVersion;
  r["config"] = c;
  return r;
}

fs::path out_dir(const Config& c) {
  fs::path d = c["out_dir"].get<std::string>();
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Config grid_summary(const GridFunction& g) {
  Config s;
  s["max_abs"] = g.max_abs();
  s["integral"] = integrate(g);
  return s;
}

int cmd_eval(const Config& c, bool commutator, std::ostream& out) {
  const Grid g = grid_of(c);
  const int m = c["m"].get<int>();
  const Kernel k = Kernel::parse(c["kernel"].get<std::string>(), g.dim(), m);
  const FunctionTuple f = inputs_of(c, g);
  GridFunction result;
  if (commutator) {
    const Config& w = c["weights"];
    const std::vector<std::string> bs = string_list(w.contains("symbol") ? w["symbol"] : Config("bmolog"), m);
    std::vector<GridFunction> b;
    for (const auto& s : bs) b.push_back(make_weight(s, g));
    result = apply_commutator(k, b, f, g);
  } else {
    result = apply_potential(k, f, g);
  }
  const std::string name = commutator ? "eval-commutator" : "eval-op";
  const fs::path dir = out_dir(c);
  write_csv_file((dir / (name + ".csv")).string(), result);
  Config r = report_envelope(c);
  r["result"] = grid_summary(result);
  write_text(dir / (name + ".json"), r.dump(2) + "\n");
  out << name << ": max|T| = " << fmt(result.max_abs()) << ", wrote " << (dir / (name + ".csv")).string() << "\n";
  return 0;
}

int cmd_maximal(const Config& c, std::ostream& out) {
  const Grid g = grid_of(c);
  const int m = c["m"].get<int>();
  const Kernel k = Kernel::parse(c["kernel"].get<std::string>(), g.dim(), m);
  const FunctionTuple f = inputs_of(c, g);
  std::vector<NormSpec> specs;
  const Config norms = c["norms"].empty() ? Config("L") : c["norms"];
  for (const auto& s : string_list(norms, m)) specs.push_back(NormSpec::parse(s));
  const PhiScaling phi = phi_of(c, k, g);
  const GridFunction mf = maximal(phi, specs, f, cube_family(g, parse_family(c["family"].get<std::string>())));
  const fs::path dir = out_dir(c);
  write_csv_file((dir / "maximal.csv").string(), mf);
  Config r = report_envelope(c);
  r["result"] = grid_summary(mf);
  write_text(dir / "maximal.json", r.dump(2) + "\n");
  out << "maximal: sup = " << fmt(mf.max_abs()) << ", wrote " << (dir / "maximal.csv").string() << "\n";
  return 0;
}

int cmd_cz(const Config& c, std::ostream& out) {
  const Grid g = grid_of(c);
  const int m = c["m"].get<int>();
  const FunctionTuple f = inputs_of(c, g);
  const double a = get_or<double>(c, "a", default_cz_base(g.dim(), m));
  std::vector<GridFunction> h;
  for (const auto& fi : f) h.push_back(abs(fi));
  const CZDecomposition cz = cz_decompose(h, a, DyadicLattice(g));
  const fs::path dir = out_dir(c);
  Config r = report_envelope(c);
  Config summary;
  summary["a"] = a;
  summary["levels"] = cz.levels.size();
  summary["cubes"] = cz.cube_count();
  const double qe = cz.max_q_over_e();
  summary["max_q_over_e"] = std::isfinite(qe) ? Config(qe) : Config("inf");
  r["result"] = summary;
  r["decomposition"] = Config::parse(cz_to_json(cz, -1));
  write_text(dir / "cz-decompose.json", r.dump(2) + "\n");
  out << "cz-decompose: " << cz.levels.size() << " levels, " << cz.cube_count() << " cubes, max |Q|/|E| = " << fmt(qe)
      << "\n";
  return 0;
}

int cmd_condition_d(const Config& c, std::ostream& out) {
  const int n = c["n"].get<int>();
  const int m = c["m"].get<int>();
  const Kernel k = Kernel::parse(c["kernel"].get<std::string>(), n, m);
  const auto [klo, khi] = parse_k_range(c.contains("k_range") ? c["k_range"] : Config("-6..0"));
  const double delta = get_or<double>(c, "delta", 1.0);
  const double eps = get_or<double>(c, "eps", 0.5);
  const int samples = get_or<int>(c, "samples", 10000);
  const ConditionDReport rep = condition_d_check(k, delta, eps, klo, khi, c["seed"].get<std::uint64_t>(), samples);
  const fs::path dir = out_dir(c);
  Config r = report_envelope(c);
  Config rows = Config::array();
  std::ostringstream plot;
  out << "k sup integral ratio\n";
  for (const auto& row : rep.rows) {
    rows.push_back({{"k", row.k}, {"sup", row.sup}, {"integral", row.integral}, {"ratio", row.ratio}});
    plot << row.k << " " << fmt(row.ratio) << "\n";
    out << row.k << " " << fmt(row.sup) << " " << fmt(row.integral) << " " << fmt(row.ratio) << "\n";
  }
  r["result"] = {{"delta", rep.delta}, {"eps", rep.eps}, {"rows", rows}, {"c_max", rep.c_max}, {"growing", rep.growing}};
  write_text(dir / "condition-d.json", r.dump(2) + "\n");
  write_text(dir / "condition-d.txt", plot.str());
  out << "c_max " << fmt(rep.c_max) << (rep.growing ? " (growing)" : "") << "\n";
  return 0;
}

int cmd_bessel_probe(const Config& c, std::ostream& out) {
  const Kernel k = Kernel::parse(c["kernel"].get<std::string>(), c["n"].get<int>(), c["m"].get<int>());
  if (k.family() != Kernel::Family::Bessel) throw std::invalid_argument("bessel-probe needs a bessel{alpha} kernel");
  const std::vector<double> xi = c.contains("xi") ? number_list(c["xi"]) : std::vector<double>{0.1, 0.25, 0.5, 1.0, 2.0};
  const FourierProbe p = bessel_fourier_probe(k, xi);
  const fs::path dir = out_dir(c);
  Config r = report_envelope(c);
  r["result"] = {{"xi", p.xi},
                 {"numeric", p.numeric},
                 {"squared", p.squared},
                 {"unsquared", p.unsquared},
                 {"err_squared", p.err_squared},
                 {"err_unsquared", p.err_unsquared},
                 {"verdict", p.verdict}};
  write_text(dir / "bessel-probe.json", r.dump(2) + "\n");
  std::ostringstream plot;
  for (std::size_t i = 0; i < p.xi.size(); ++i) plot << fmt(p.xi[i]) << " " << fmt(p.numeric[i]) << "\n";
  write_text(dir / "bessel-probe.txt", plot.str());
  out << "bessel-probe: verdict " << p.verdict << " (err squared " << fmt(p.err_squared) << ", unsquared "
      << fmt(p.err_unsquared) << ")\n";
  return 0;
}

HarnessConfig harness_of(const Config& c) {
  HarnessConfig h;
  h.n = c["n"].get<int>();
  h.m = c["m"].get<int>();
  h.N = c["N"].get<int>();
  h.L = c["L"].get<double>();
  h.kernel = c["kernel"].get<std::string>();
  h.ell = c["ell"].get<int>();
  h.family = parse_family(c["family"].get<std::string>());
  h.corpus_size = get_or<int>(c, "corpus_size", 20);
  h.seed = c["seed"].get<std::uint64_t>();
  h.refine = get_or<bool>(c, "refine", true);
  h.delta_d = get_or<double>(c, "delta_d", 1.0);
  h.eps_d = get_or<double>(c, "eps_d", 0.5);
  if (c["weights"].contains("symbol")) h.symbol = c["weights"]["symbol"].get<std::string>();
  h.symbol_scale = get_or<double>(c, "symbol_scale", 1.0);
  grid_of(c);
  return h;
}

std::string weight_or(const Config& c, const char* key, const std::string& fallback) {
  const Config& w = c["weights"];
  return w.contains(key) ? w[key].get<std::string>() : fallback;
}

std::vector<std::string> weight_list(const Config& c, const char* key, int m) {
  const Config& w = c["weights"];
  return w.contains(key) ? string_list(w[key], m) : std::vector<std::string>{};
}

const Config& exponent_p(const Config& c) {
  const Config& e = c["exponents"];
  if (!e.contains("p")) throw std::invalid_argument("this theorem needs exponents.p");
  return e["p"];
}

std::vector<double> p_tuple(const Config& c, int m) {
  std::vector<double> p = number_list(exponent_p(c));
  if (p.size() == 1 && m > 1) p.assign(m, p[0]);
  if (static_cast<int>(p.size()) != m) throw std::invalid_argument("exponents.p needs one entry per slot");
  return p;
}

double p_scalar(const Config& c) {
  const std::vector<double> p = number_list(exponent_p(c));
  if (p.size() != 1) throw std::invalid_argument("this theorem needs a single exponent p");
  return p[0];
}

void lambda_curve(const Config& c, std::ostream& os) {
  const HarnessConfig h = harness_of(c);
  const Grid g = make_grid(h.n, h.L, h.N);
  const NormSpec b = NormSpec::parse(get_or<std::string>(c, "young", "L"));
  const std::vector<NormSpec> specs(h.m, b);
  const FunctionTuple f = make_corpus(g, h.m, 1, h.seed).front();
  const GridFunction mf = maximal(parse_phi_scaling(get_or<std::string>(c, "phi", "one")), specs, f,
                                  cube_family(g, h.family));
  std::vector<double> v(mf.values().begin(), mf.values().end());
  std::sort(v.begin(), v.end(), std::greater<>());
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    mass += g.cell_volume();
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    if (v[i] > 0.0) os << fmt(v[i]) << " " << fmt(mass) << "\n";
  }
}

int cmd_verify(const Config& c, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const HarnessConfig h = harness_of(c);
  const std::string theorem = get_or<std::string>(c, "theorem", "");
  const std::string case_id = get_or<std::string>(c, "case", "i");
  InequalityReport rep;
  if (theorem == "strong") {
    StrongOptions o;
    o.exps.p_i = p_tuple(c, h.m);
    o.exps.q = c["exponents"].contains("q") ? c["exponents"]["q"].get<double>() : o.exps.p();
    o.u = weight_or(c, "u", "one");
    o.v = weight_list(c, "v", h.m);
    o.delta = get_or<double>(c, "delta", 0.5);
    o.unchecked = get_or<bool>(c, "unchecked", false);
    const Config& norms = c["norms"];
    if (norms.is_object()) {
      if (norms.contains("x")) o.x_override = NormSpec::parse(norms["x"].get<std::string>());
      if (norms.contains("y")) {
        std::vector<NormSpec> ys;
        for (const auto& s : string_list(norms["y"], h.m)) ys.push_back(NormSpec::parse(s));
        o.y_override = ys;
      }
    }
    rep = verify_strong(h, o);
  } else if (theorem == "fefferman-stein") {
    FeffermanSteinOptions o;
    o.case_id = case_id;
    o.p_i = p_tuple(c, h.m);
    o.delta = get_or<double>(c, "delta", 0.5);
    o.u = weight_list(c, "u", h.m);
    rep = verify_fefferman_stein(h, o);
  } else if (theorem == "coifman") {
    CoifmanOptions o;
    o.case_id = case_id;
    o.p = c["exponents"].contains("p") ? p_scalar(c) : 1.0;
    o.w = weight_or(c, "w", "one");
    o.rh_s = get_or<double>(c, "rh_s", 2.0);
    rep = verify_coifman(h, o);
  } else if (theorem == "ftd") {
    FtdOptions o;
    o.case_id = case_id;
    o.p = c["exponents"].contains("p") ? p_scalar(c) : 1.0;
    o.u = weight_or(c, "u", "one");
    rep = verify_ftd(h, o);
  } else if (theorem == "weak-maximal") {
    WeakMaximalOptions o;
    o.young = get_or<std::string>(c, "young", "L");
    o.phi = get_or<std::string>(c, "phi", "one");
    o.u = weight_list(c, "u", h.m);
    o.lambda_points = get_or<int>(c, "lambda_points", 64);
    rep = verify_weak_maximal(h, o);
  } else if (theorem == "control") {
    ControlOptions o;
    o.u = weight_or(c, "u", "one");
    if (c.contains("deltas")) o.deltas = number_list(c["deltas"]);
    o.corollary = get_or<bool>(c, "corollary", true);
    rep = verify_control(h, o);
  } else {
    throw std::invalid_argument("unknown theorem '" + theorem +
                                "' (expected strong, fefferman-stein, coifman, ftd, weak-maximal, control)");
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = out_dir(c);
  const std::string stem = "verify-" + theorem;
  Config r = report_envelope(c);
  r["report"] = Config::parse(report_to_json(rep, -1));
  write_text(dir / (stem + ".json"), r.dump(2) + "\n");

  std::ostringstream csv;
  csv << "theorem,case,m,n,N,kernel,ell,max_ratio,stable,wall_ms\n";
  const bool quote = rep.case_id.find(',') != std::string::npos;
  const std::string case_field = quote ? "\"" + rep.case_id + "\"" : rep.case_id;
  char ms[32];
  std::snprintf(ms, sizeof ms, "%.3f", wall_ms);
  csv << rep.theorem << "," << case_field << "," << rep.m << "," << rep.n << "," << rep.N << "," << rep.kernel
      << "," << rep.ell << "," << fmt(rep.max_ratio) << "," << (rep.stable ? "true" : "false") << ","
      << ms << "\n";
  write_text(dir / (stem + ".csv"), csv.str());

  std::ostringstream plot;
  plot << rep.N << " " << fmt(rep.max_ratio) << "\n";
  if (rep.refined) plot << 2 * rep.N << " " << fmt(rep.max_ratio_refined) << "\n";
  write_text(dir / (stem + "-ratio-vs-N.txt"), plot.str());
  if (theorem == "weak-maximal") {
    std::ostringstream lc;
    lambda_curve(c, lc);
    write_text(dir / (stem + "-level-measure.txt"), lc.str());
  }

  out << rep.theorem << " case " << rep.case_id << ": max ratio " << fmt(rep.max_ratio);
  if (rep.refined) out << " (2N: " << fmt(rep.max_ratio_refined) << ")";
  out << ", " << (rep.stable ? "stable" : "unstable") << ", wrote " << (dir / (stem + ".json")).string() << "\n";
  return 0;
}

}  // namespace

Config resolve_config(const Config& file, const Config& overrides) {
  if (!file.is_object() || !overrides.is_object()) throw std::invalid_argument("config must be a JSON object");
  Config c = defaults();
  c.merge_patch(file);
  c.merge_patch(overrides);
  const std::string cmd = c["command"].get<std::string>();
  if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end())
    throw std::invalid_argument("unknown command '" + cmd + "'");
  const int m = c["m"].get<int>();
  const int n = c["n"].get<int>();
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (n < 1 || n > 3) throw std::invalid_argument("n must be 1, 2 or 3");
  Kernel::parse(c["kernel"].get<std::string>(), n, m);
  return c;
}

int run(const Config& config, std::ostream& out, std::ostream& err) {
  try {
    const std::string cmd = config["command"].get<std::string>();
    if (cmd == "eval-op") return cmd_eval(config, false, out);
    if (cmd == "eval-commutator") return cmd_eval(config, true, out);
    if (cmd == "maximal") return cmd_maximal(config, out);
    if (cmd == "cz-decompose") return cmd_cz(config, out);
    if (cmd == "check-condition-d") return cmd_condition_d(config, out);
    if (cmd == "verify") return cmd_verify(config, out);
    if (cmd == "bessel-probe") return cmd_bessel_probe(config, out);
    throw std::invalid_argument("unknown command '" + cmd + "'");
  } catch (const HypothesisUnmet& e) {
    err << "hypothesis unmet: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilinear potential operators: evaluation, decompositions and inequality harnesses", "mlpot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kLibraryVersion));

  Config over = Config::object();
  std::string config_path;
  std::vector<std::string> list_inputs;

  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option_function<int>("--m", [&](int v) { over["m"] = v; }, "number of slots");
    sub->add_option_function<int>("--n", [&](int v) { over["n"] = v; }, "dimension");
    sub->add_option_function<int>("--N", [&](int v) { over["N"] = v; }, "cells per axis (power of two)");
    sub->add_option_function<double>("--L", [&](double v) { over["L"] = v; }, "box half-width");
    sub->add_option_function<std::string>("--kernel", [&](const std::string& v) { over["kernel"] = v; },
                                          "frac{alpha}, bessel{alpha} or profile:file.csv");
    sub->add_option_function<int>("--ell", [&](int v) { over["ell"] = v; }, "0: operator, 1: commutator");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { over["seed"] = v; }, "root seed");
    sub->add_option_function<std::string>("--out-dir,--out_dir", [&](const std::string& v) { over["out_dir"] = v; },
                                          "output directory");
    sub->add_option_function<std::string>("--family", [&](const std::string& v) { over["family"] = v; },
                                          "dyadic or centered");
    sub->add_option_function<std::vector<std::string>>(
        "--input", [&](const std::vector<std::string>& v) { over["inputs"] = v; }, "input function specs, one per slot");
    sub->add_option_function<int>("--corpus-index", [&](int v) { over["corpus_index"] = v; });
    sub->add_option_function<std::vector<std::string>>(
        "--norms", [&](const std::vector<std::string>& v) { over["norms"] = v; }, "norm specs");
    sub->add_option_function<std::string>("--phi", [&](const std::string& v) { over["phi"] = v; });
    sub->add_option_function<double>("--a", [&](double v) { over["a"] = v; }, "CZ base");
    sub->add_option_function<std::string>("--k", [&](const std::string& v) { over["k_range"] = v; }, "k range lo..hi");
    sub->add_option_function<double>("--delta", [&](double v) { over["delta"] = v; });
    sub->add_option_function<double>("--eps", [&](double v) { over["eps"] = v; });
    sub->add_option_function<int>("--samples", [&](int v) { over["samples"] = v; });
    sub->add_option_function<std::string>("--xi", [&](const std::string& v) { over["xi"] = v; }, "comma list");
    sub->add_option_function<std::string>("--symbol", [&](const std::string& v) { over["weights"]["symbol"] = v; });
    sub->add_option_function<std::string>("--theorem", [&](const std::string& v) { over["theorem"] = v; });
    sub->add_option_function<std::string>("--case", [&](const std::string& v) { over["case"] = v; });
    sub->add_option_function<std::string>("--p", [&](const std::string& v) { over["exponents"]["p"] = v; },
                                          "exponent or comma list");
    sub->add_option_function<double>("--q", [&](double v) { over["exponents"]["q"] = v; });
    sub->add_option_function<std::string>("--w", [&](const std::string& v) { over["weights"]["w"] = v; });
    sub->add_option_function<std::string>("--u", [&](const std::string& v) { over["weights"]["u"] = v; });
    sub->add_option_function<std::vector<std::string>>(
        "--v", [&](const std::vector<std::string>& v) { over["weights"]["v"] = v; });
    sub->add_option_function<std::string>("--young", [&](const std::string& v) { over["young"] = v; });
    sub->add_option_function<int>("--lambda-points", [&](int v) { over["lambda_points"] = v; });
    sub->add_option_function<int>("--corpus-size", [&](int v) { over["corpus_size"] = v; });
    sub->add_option_function<std::string>("--deltas", [&](const std::string& v) { over["deltas"] = v; });
    sub->add_flag_function("--refine,!--no-refine", [&](std::int64_t v) { over["refine"] = v > 0; });
    sub->add_flag_function("--unchecked", [&](std::int64_t) { over["unchecked"] = true; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    Config file = Config::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw std::invalid_argument("cannot open config '" + config_path + "'");
      file = Config::parse(is);
      if (file.contains("command") && file["command"] != cmd)
        throw std::invalid_argument("config command '" + file["command"].get<std::string>() +
                                    "' does not match subcommand '" + cmd + "'");
    }
    over["command"] = cmd;
    return run(resolve_config(file, over), out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mlpot
