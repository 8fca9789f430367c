#include "mlpot/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "mlpot/error.hpp"
#include "mlpot/weights.hpp"

namespace mlpot {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Context {
  Grid grid;
  Kernel kernel;
  std::vector<Cube> family;
  std::vector<FunctionTuple> corpus;
  GridFunction symbol;
  int nu_max = 0;
};

Context make_context(const HarnessConfig& cfg, int N) {
  Context c{make_grid(cfg.n, cfg.L, N), Kernel::parse(cfg.kernel, cfg.n, cfg.m), {}, {}, {}, 0};
  c.family = cube_family(c.grid, cfg.family);
  c.corpus = cfg.corpus ? cfg.corpus(c.grid) : make_corpus(c.grid, cfg.m, cfg.corpus_size, cfg.seed);
  for (const auto& t : c.corpus)
    if (static_cast<int>(t.size()) != cfg.m) throw std::invalid_argument("corpus tuple has the wrong arity");
  if (cfg.ell == 1) c.symbol = cfg.symbol_scale * make_weight(cfg.symbol, c.grid);
  c.nu_max = grid_nu_max(c.grid);
  return c;
}

PhiScaling phi_theta_scaling(const HarnessConfig& cfg, const Context& c, double theta, double exponent) {
  return PhiScaling::kernel_theta(c.kernel, theta, exponent, cfg.delta_d, cfg.eps_d, c.nu_max);
}

// T_{b^ell}(f): the potential, or the commutator with b in every slot.
GridFunction apply_op(const Context& c, int ell, const FunctionTuple& f) {
  if (ell == 0) return apply_potential(c.kernel, f, c.grid);
  const std::vector<GridFunction> b(f.size(), c.symbol);
  return apply_commutator(c.kernel, b, f, c.grid);
}

double weighted_power_integral(const GridFunction& g, double p, const GridFunction& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::abs(g[i]);
    if (a != 0.0 && w[i] != 0.0) acc += std::pow(a, p) * w[i];
  }
  return acc * g.grid().cell_volume();
}

InequalityReport base_report(const HarnessConfig& cfg, const std::string& theorem, const std::string& case_id) {
  if (cfg.ell != 0 && cfg.ell != 1) throw std::invalid_argument("ell must be 0 or 1");
  InequalityReport r;
  r.theorem = theorem;
  r.case_id = case_id;
  r.m = cfg.m;
  r.n = cfg.n;
  r.N = cfg.N;
  r.L = cfg.L;
  r.kernel = cfg.kernel;
  r.ell = cfg.ell;
  r.family = to_string(cfg.family);
  r.notes.push_back("sup over cubes restricted to the " + r.family + " family");
  r.notes.push_back("cubes clipped to the box; averages normalized by the clipped measure");
  if (cfg.ell == 1) r.params["symbol"] = num(cfg.symbol_scale) + "*" + cfg.symbol;
  return r;
}

InequalityCase make_case(std::string label, double lhs, double rhs) {
  return InequalityCase{std::move(label), lhs, rhs, safe_ratio(lhs, rhs)};
}

double max_ratio(const std::vector<InequalityCase>& cases) {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.ratio);
  return m;
}

using CaseFn = std::function<std::vector<InequalityCase>(const Context&, bool coarse)>;

void run_cases(InequalityReport& rep, const HarnessConfig& cfg, const CaseFn& fn) {
  const Context coarse = make_context(cfg, cfg.N);
  rep.cases = fn(coarse, true);
  rep.max_ratio = max_ratio(rep.cases);
  for (const auto& c : rep.cases)
    if (c.lhs > 0.0 && !(c.rhs > 0.0)) rep.notes.push_back("case " + c.label + " has LHS > 0 with RHS = 0");
  if (cfg.refine) {
    const Context fine = make_context(cfg, 2 * cfg.N);
    rep.refined = true;
    rep.max_ratio_refined = max_ratio(fn(fine, false));
    if (rep.max_ratio == 0.0)
      rep.stable = rep.max_ratio_refined == 0.0;
    else
      rep.stable = std::isfinite(rep.max_ratio) && std::isfinite(rep.max_ratio_refined) &&
                   std::abs(rep.max_ratio_refined / rep.max_ratio - 1.0) < 0.25;
  } else {
    rep.stable = std::isfinite(rep.max_ratio);
  }
}

NormSpec as_l1_if_identity(const NormSpec& x) {
  if (x.is_lebesgue()) return x;
  const YoungFunction& y = x.young();
  if (y.family() == YoungFunction::Family::Identity ||
      (y.family() == YoungFunction::Family::PowerLog && y.p() == 1.0 && y.alpha() == 0.0))
    return NormSpec::lebesgue(1.0);
  return x;
}

std::vector<GridFunction> weights_from(const std::vector<std::string>& specs, int m, const Grid& g) {
  std::vector<GridFunction> out;
  for (int i = 0; i < m; ++i) out.push_back(make_weight(specs.empty() ? "one" : specs.at(i), g));
  return out;
}

}  // namespace

double safe_ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

std::string report_to_json(const InequalityReport& r, int indent) {
  nlohmann::ordered_json j;
  j["theorem"] = r.theorem;
  j["case"] = r.case_id;
  j["m"] = r.m;
  j["n"] = r.n;
  j["N"] = r.N;
  j["L"] = r.L;
  j["kernel"] = r.kernel;
  j["ell"] = r.ell;
  j["family"] = r.family;
  j["params"] = r.params;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  auto finite_or_string = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "nan";
  };
  for (const auto& c : r.cases)
    cases.push_back({{"label", c.label},
                     {"lhs", finite_or_string(c.lhs)},
                     {"rhs", finite_or_string(c.rhs)},
                     {"ratio", finite_or_string(c.ratio)}});
  j["cases"] = cases;
  j["max_ratio"] = finite_or_string(r.max_ratio);
  j["refined"] = r.refined;
  j["max_ratio_refined"] = finite_or_string(r.max_ratio_refined);
  j["stable"] = r.stable;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = finite_or_string(v);
  j["metrics"] = metrics;
  j["notes"] = r.notes;
  return j.dump(indent);
}

double lorentz_weak_quasinorm(const GridFunction& g, const GridFunction& u, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weak quasinorm needs p > 0");
  require_same_grid(g, u);
  std::vector<std::pair<double, double>> vals;
  vals.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] != 0.0) vals.emplace_back(std::abs(g[i]), u[i]);
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const double cell = g.grid().cell_volume();
  double mass = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    mass += vals[i].second * cell;
    // the level set {|g| >= v} is complete once every tie is counted
    if (i + 1 < vals.size() && vals[i + 1].first == vals[i].first) continue;
    best = std::max(best, vals[i].first * std::pow(mass, 1.0 / p));
  }
  return best;
}

double testing_condition_W(const TestingCondition& tc) {
  const int m = static_cast<int>(tc.v.size());
  if (m == 0 || static_cast<int>(tc.y.size()) != m) throw std::invalid_argument("testing condition needs an m x m Y matrix");
  for (const auto& row : tc.y)
    if (static_cast<int>(row.size()) != m) throw std::invalid_argument("testing condition needs an m x m Y matrix");
  if (!(tc.gamma > 0.0)) throw std::invalid_argument("testing condition needs gamma > 0");
  if (tc.family.empty()) throw std::invalid_argument("testing condition needs a nonempty cube family");
  const Grid& g = tc.u.grid();
  std::vector<GridFunction> vinv;
  for (const auto& vi : tc.v) {
    require_same_grid(vi, tc.u);
    for (double x : vi.values())
      if (!(x > 0.0)) throw std::invalid_argument("testing condition: some v_i vanishes on a cell");
    vinv.push_back(map(vi, [](double x) { return 1.0 / x; }));
  }
  if (tc.u.is_zero()) return 0.0;
  const double p = tc.exps.p();
  const double q = tc.exps.q;
  const int nu_max = tc.nu_max >= 0 ? tc.nu_max : grid_nu_max(g);

  const std::vector<double> un = cube_norms(pow(abs(tc.u), tc.gamma), tc.family, tc.x);
  std::map<std::pair<int, std::string>, std::vector<double>> vn;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const auto key = std::make_pair(i, tc.y[i][j].to_string());
      if (!vn.count(key)) vn[key] = cube_norms(vinv[i], tc.family, tc.y[i][j]);
    }
  std::map<int, double> phi;
  double best = 0.0;
  for (std::size_t c = 0; c < tc.family.size(); ++c) {
    const Cube& qc = tc.family[c];
    if (!phi.count(qc.side))
      phi[qc.side] = phi_theta(tc.kernel, tc.theta, qc.side_length(g), tc.delta, tc.eps, nu_max).value *
                     std::pow(qc.measure(g), 1.0 / q - 1.0 / p);
    double col = 0.0;
    for (int j = 0; j < m; ++j) {
      double prod = 1.0;
      for (int i = 0; i < m; ++i) prod *= vn[{i, tc.y[i][j].to_string()}][c];
      col = std::max(col, prod);
    }
    best = std::max(best, phi[qc.side] * std::pow(un[c], 1.0 / tc.gamma) * col);
  }
  return best;
}

InequalityReport verify_strong(const HarnessConfig& cfg, const StrongOptions& opt) {
  opt.exps.validate();
  const int m = cfg.m;
  if (static_cast<int>(opt.exps.p_i.size()) != m) throw std::invalid_argument("need one p_i per slot");
  const double p = opt.exps.p();
  const double q = opt.exps.q;
  if (q < p * (1.0 - 1e-12)) throw std::invalid_argument("strong bound needs p <= q");
  if (!(opt.delta > 0.0)) throw std::invalid_argument("bundle parameter delta must be positive");
  if ((opt.x_override || opt.y_override) && !opt.unchecked)
    throw std::invalid_argument("custom norm bundles need the unchecked flag");

  InequalityReport rep = base_report(cfg, "strong", q > 1.0 ? "q>1" : "q<=1");
  for (int i = 0; i < m; ++i) rep.params["p" + std::to_string(i + 1)] = num(opt.exps.p_i[i]);
  rep.params["q"] = num(q);
  rep.params["delta"] = num(opt.delta);
  rep.params["u"] = opt.u;
  if (opt.unchecked) rep.notes.push_back("unverified hypothesis: custom norm bundle");

  const auto dual = [](double r) { return r / (r - 1.0); };
  std::vector<std::vector<NormSpec>> y0(m, std::vector<NormSpec>(m));
  std::vector<std::vector<NormSpec>> y1(m, std::vector<NormSpec>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double pi = dual(opt.exps.p_i[i]);
      y0[i][j] = opt.y_override ? opt.y_override->at(i) : NormSpec::llogl(pi, pi - 1.0 + opt.delta);
      y1[i][j] = i == j ? NormSpec::llogl(pi, 2.0 * pi - 1.0 + opt.delta) : y0[i][j];
    }
  struct Cond {
    double theta, gamma;
    NormSpec x;
    const std::vector<std::vector<NormSpec>>* y;
    std::string name;
  };
  std::vector<Cond> conds;
  if (q > 1.0) {
    const NormSpec x0 = opt.x_override ? *opt.x_override : NormSpec::llogl(q, q - 1.0 + opt.delta);
    const NormSpec x1 = opt.x_override ? *opt.x_override : NormSpec::llogl(q, 2.0 * q - 1.0 + opt.delta);
    conds.push_back({1.0, 1.0, cfg.ell == 1 ? x1 : x0, &y0, "W0"});
    if (cfg.ell == 1) conds.push_back({1.0, 1.0, x0, &y1, "W1"});
  } else {
    conds.push_back({q, q, opt.x_override ? *opt.x_override : NormSpec::llogl(1.0, cfg.ell * q), &y0, "W0"});
    if (cfg.ell == 1) conds.push_back({q, 1.0, NormSpec::lebesgue(1.0), &y1, "W1"});
  }

  run_cases(rep, cfg, [&](const Context& c, bool coarse) {
    const GridFunction u = make_weight(opt.u, c.grid);
    std::vector<GridFunction> v;
    for (int i = 0; i < m; ++i) v.push_back(make_weight(opt.v.empty() ? "one" : opt.v.at(i), c.grid));
    for (const auto& cond : conds) {
      TestingCondition tc;
      tc.theta = cond.theta;
      tc.gamma = cond.gamma;
      tc.x = cond.x;
      tc.y = *cond.y;
      tc.u = u;
      tc.v = v;
      tc.kernel = c.kernel;
      tc.exps = opt.exps;
      tc.family = c.family;
      tc.delta = cfg.delta_d;
      tc.eps = cfg.eps_d;
      tc.nu_max = c.nu_max;
      const double w = testing_condition_W(tc);
      if (!std::isfinite(w)) throw HypothesisUnmet("testing condition " + cond.name + " is infinite");
      rep.metrics[cond.name + (coarse ? "" : "_refined")] = w;
    }
    if (cfg.ell == 1) {
      const BmoNorm bn = bmo_norm(c.symbol, c.family);
      if (!std::isfinite(bn.l1)) throw HypothesisUnmet("commutator symbol is not in BMO on the family");
      rep.metrics[coarse ? "bmo_norm" : "bmo_norm_refined"] = bn.l1;
    }
    std::vector<InequalityCase> out;
    for (std::size_t t = 0; t < c.corpus.size(); ++t) {
      const auto& f = c.corpus[t];
      const GridFunction tf = apply_op(c, cfg.ell, f);
      const double lhs = std::pow(weighted_power_integral(tf * u, q, GridFunction::constant(c.grid, 1.0)), 1.0 / q);
      double rhs = 1.0;
      for (int i = 0; i < m; ++i) {
        const double pi = opt.exps.p_i[i];
        rhs *= std::pow(weighted_power_integral(f[i] * v[i], pi, GridFunction::constant(c.grid, 1.0)), 1.0 / pi);
      }
      out.push_back(make_case("t" + std::to_string(t), lhs, rhs));
    }
    return out;
  });
  if (rep.metrics.count("W0") && rep.metrics.count("W0_refined") &&
      rep.metrics["W0_refined"] > 2.0 * rep.metrics["W0"])
    throw HypothesisUnmet("testing condition W0 grows without bound under refinement");
  return rep;
}

InequalityReport verify_fefferman_stein(const HarnessConfig& cfg, const FeffermanSteinOptions& opt) {
  const int m = cfg.m;
  ExponentTuple exps{opt.p_i, 1.0};
  exps.validate();
  if (static_cast<int>(opt.p_i.size()) != m) throw std::invalid_argument("need one p_i per slot");
  const double p = exps.p();
  const std::string& cs = opt.case_id;
  if (cs == "i") {
    if (!(p > 1.0) || !(opt.delta > 0.0 && opt.delta < 1.0))
      throw std::invalid_argument("case i needs p > 1 and 0 < delta < 1");
  } else if (cs == "ii") {
    if (!(p <= 1.0) || cfg.ell != 0) throw std::invalid_argument("case ii needs p <= 1 and ell = 0");
  } else if (cs == "iii") {
    if (!(p <= 1.0) || cfg.ell != 1) throw std::invalid_argument("case iii needs p <= 1 and ell = 1");
  } else {
    throw std::invalid_argument("Fefferman-Stein case must be i, ii or iii");
  }
  InequalityReport rep = base_report(cfg, "fefferman-stein", cs);
  for (int i = 0; i < m; ++i) rep.params["p" + std::to_string(i + 1)] = num(opt.p_i[i]);
  rep.params["delta"] = num(opt.delta);
  for (int i = 0; i < m; ++i) rep.params["u" + std::to_string(i + 1)] = opt.u.empty() ? "one" : opt.u.at(i);

  run_cases(rep, cfg, [&](const Context& c, bool) {
    const std::vector<GridFunction> u = weights_from(opt.u, m, c.grid);
    PhiScaling phi = cs == "i" ? phi_theta_scaling(cfg, c, 1.0, p) : phi_theta_scaling(cfg, c, p, p);
    const NormSpec spec = cs == "i"    ? NormSpec::llogl(1.0, p * (1.0 + cfg.ell) - 1.0 + opt.delta)
                          : cs == "ii" ? NormSpec::lebesgue(1.0)
                                       : NormSpec::lebesgue(1.0 / p);
    std::vector<GridFunction> rw;
    for (int i = 0; i < m; ++i) rw.push_back(maximal_single(phi, spec, u[i], c.family));
    std::vector<double> lw(c.grid.size(), 1.0);
    for (int i = 0; i < m; ++i)
      for (std::size_t x = 0; x < lw.size(); ++x) lw[x] *= std::pow(u[i][x], p / opt.p_i[i]);
    const GridFunction left_weight(c.grid, std::move(lw));
    std::vector<InequalityCase> out;
    for (std::size_t t = 0; t < c.corpus.size(); ++t) {
      const auto& f = c.corpus[t];
      const double lhs = std::pow(weighted_power_integral(apply_op(c, cfg.ell, f), p, left_weight), 1.0 / p);
      double rhs = 1.0;
      for (int i = 0; i < m; ++i)
        rhs *= std::pow(weighted_power_integral(f[i], opt.p_i[i], rw[i]), 1.0 / opt.p_i[i]);
      out.push_back(make_case("t" + std::to_string(t), lhs, rhs));
    }
    return out;
  });
  return rep;
}

InequalityReport verify_coifman(const HarnessConfig& cfg, const CoifmanOptions& opt) {
  const std::string& cs = opt.case_id;
  const double p = opt.p;
  if (!(p > 0.0)) throw std::invalid_argument("Coifman harness needs p > 0");
  if (cs == "i") {
    if (!(p <= 1.0) || cfg.ell != 0) throw std::invalid_argument("case i needs 0 < p <= 1 and ell = 0");
  } else if (cs == "ii") {
    if (!(p <= 1.0) || cfg.ell != 1) throw std::invalid_argument("case ii needs 0 < p <= 1 and ell = 1");
  } else if (cs == "iii") {
    if (!(p > 1.0)) throw std::invalid_argument("case iii needs p > 1");
  } else {
    throw std::invalid_argument("Coifman case must be i, ii or iii");
  }
  InequalityReport rep = base_report(cfg, "coifman", cs);
  rep.params["p"] = num(p);
  rep.params["w"] = opt.w;

  const WeightFactory wf = parse_weight(opt.w);
  const Grid g0 = make_grid(cfg.n, cfg.L, cfg.N);
  std::vector<double> exps{opt.rh_s};
  if (cs == "ii" && 1.0 / p > 1.0) exps.push_back(1.0 / p);
  for (double s : exps) {
    const RhCertificate cert = certify_rh(wf, g0, s, cfg.family);
    rep.metrics["rh" + num(s)] = cert.coarse;
    rep.metrics["rh" + num(s) + "_refined"] = cert.fine;
    if (!cert.ok)
      throw HypothesisUnmet("weight " + opt.w + " is not certified in RH(" + num(s) + "): constant " +
                            num(cert.coarse) + " -> " + num(cert.fine) + " -> " + num(cert.finest) +
                            " under refinement");
  }

  run_cases(rep, cfg, [&](const Context& c, bool) {
    const GridFunction w = wf(c.grid);
    const PhiScaling phi = cs == "iii" ? phi_theta_scaling(cfg, c, 1.0, 1.0) : phi_theta_scaling(cfg, c, p, 1.0);
    const NormSpec spec = cs == "i" ? NormSpec::lebesgue(1.0)
                                    : (cs == "ii" ? NormSpec::llogl(1.0, 1.0) : NormSpec::llogl(1.0, cfg.ell));
    const std::vector<NormSpec> specs(cfg.m, spec);
    std::vector<InequalityCase> out;
    for (std::size_t t = 0; t < c.corpus.size(); ++t) {
      const auto& f = c.corpus[t];
      const double lhs = weighted_power_integral(apply_op(c, cfg.ell, f), p, w);
      const double rhs = weighted_power_integral(maximal(phi, specs, f, c.family), p, w);
      out.push_back(make_case("t" + std::to_string(t), lhs, rhs));
    }
    return out;
  });
  return rep;
}

InequalityReport verify_ftd(const HarnessConfig& cfg, const FtdOptions& opt) {
  const std::string& cs = opt.case_id;
  const double p = opt.p;
  double gamma = 0.0;
  if (cs == "i") {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("case i needs 0 < p <= 1");
    gamma = cfg.ell;
  } else if (cs == "ii") {
    if (!(p > 1.0)) throw std::invalid_argument("case ii needs p > 1");
    gamma = std::floor(cfg.ell * p + p);
  } else {
    throw std::invalid_argument("for-t-d case must be i or ii");
  }
  InequalityReport rep = base_report(cfg, "ftd", cs);
  rep.params["p"] = num(p);
  rep.params["u"] = opt.u;
  rep.params["gamma"] = num(gamma);

  run_cases(rep, cfg, [&](const Context& c, bool) {
    const GridFunction u = make_weight(opt.u, c.grid);
    const GridFunction mu = maximal_single(PhiScaling::constant(1.0), NormSpec::llogl(1.0, gamma), u, c.family);
    const PhiScaling phi = phi_theta_scaling(cfg, c, 1.0, 1.0);
    const std::vector<NormSpec> specs(cfg.m, NormSpec::llogl(1.0, cfg.ell));
    std::vector<InequalityCase> out;
    for (std::size_t t = 0; t < c.corpus.size(); ++t) {
      const auto& f = c.corpus[t];
      const double lhs = weighted_power_integral(apply_op(c, cfg.ell, f), p, u);
      const double rhs = weighted_power_integral(maximal(phi, specs, f, c.family), p, mu);
      out.push_back(make_case("t" + std::to_string(t), lhs, rhs));
    }
    return out;
  });
  return rep;
}

PhiScaling parse_phi_scaling(const std::string& text) {
  auto strip = [](std::string s) {
    if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
    return s;
  };
  try {
    if (text == "one") return PhiScaling::constant(1.0);
    if (text.rfind("const", 0) == 0) return PhiScaling::constant(std::stod(strip(text.substr(5))));
    if (text.rfind("t^", 0) == 0) return PhiScaling::power(1.0, std::stod(strip(text.substr(2))));
  } catch (const std::logic_error&) {
  }
  throw std::invalid_argument("unknown phi scaling '" + text + "' (expected one, const{c}, t^{e})");
}

InequalityReport verify_weak_maximal(const HarnessConfig& cfg, const WeakMaximalOptions& opt) {
  const int m = cfg.m;
  const NormSpec bspec = NormSpec::parse(opt.young);
  if (bspec.is_lebesgue() && bspec.exponent() != 1.0)
    throw std::invalid_argument("weak maximal harness needs a Young function B, got " + opt.young);
  const YoungFunction b = bspec.is_lebesgue() ? YoungFunction::identity() : bspec.young();
  if (!b.submultiplicative()) throw std::invalid_argument("Young function " + b.to_string() + " is not submultiplicative");
  if (opt.lambda_points < 2) throw std::invalid_argument("lambda grid needs at least 2 points");
  const PhiScaling phi = parse_phi_scaling(opt.phi);
  const YoungFunction bm = YoungFunction::iterate(b, m);
  const PhiScaling psi = PhiScaling::psi(b, m, phi);
  const NormSpec xb = as_l1_if_identity(NormSpec::orlicz(b));

  InequalityReport rep = base_report(cfg, "weak-maximal", "B=" + b.to_string() + ",phi=" + phi.name());
  rep.params["young"] = b.to_string();
  rep.params["phi"] = phi.name();
  rep.params["lambda_points"] = std::to_string(opt.lambda_points);
  rep.notes.push_back("LHS is the max over a logarithmic lambda grid spanning the range of the maximal function");
  double lambda_change = 0.0;

  run_cases(rep, cfg, [&](const Context& c, bool coarse) {
    const std::vector<GridFunction> ui = weights_from(opt.u, m, c.grid);
    std::vector<double> uv(c.grid.size(), 1.0);
    for (const auto& w : ui)
      for (std::size_t x = 0; x < uv.size(); ++x) uv[x] *= std::pow(w[x], 1.0 / m);
    const double cell = c.grid.cell_volume();
    std::vector<GridFunction> mu;
    for (const auto& w : ui) mu.push_back(maximal_single(psi, NormSpec::lebesgue(1.0), w, c.family));
    const std::vector<NormSpec> specs(m, xb);

    const auto lhs_on_grid = [&](const GridFunction& mf, int points) {
      double vmin = std::numeric_limits<double>::infinity();
      double vmax = 0.0;
      for (double v : mf.values())
        if (v > 0.0) {
          vmin = std::min(vmin, v);
          vmax = std::max(vmax, v);
        }
      if (!(vmax > 0.0)) return 0.0;
      double best = 0.0;
      for (int k = 0; k <= points; ++k) {
        // level lambda^m; the set is taken as the left limit {M >= level}
        const double level = vmin * std::pow(vmax / vmin, static_cast<double>(k) / points);
        double mass = 0.0;
        for (std::size_t x = 0; x < mf.size(); ++x)
          if (mf[x] >= level * (1.0 - 1e-12)) mass += uv[x] * cell;
        const double lambda = std::pow(level, 1.0 / m);
        best = std::max(best, std::pow(mass, m) / bm(1.0 / lambda));
      }
      return best;
    };

    std::vector<InequalityCase> out;
    for (std::size_t t = 0; t < c.corpus.size(); ++t) {
      const auto& f = c.corpus[t];
      const GridFunction mf = maximal(phi, specs, f, c.family);
      const double lhs = lhs_on_grid(mf, opt.lambda_points);
      if (coarse && lhs > 0.0)
        lambda_change = std::max(lambda_change, std::abs(lhs_on_grid(mf, 2 * opt.lambda_points) / lhs - 1.0));
      double rhs = 1.0;
      for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t x = 0; x < c.grid.size(); ++x) {
          const double a = std::abs(f[i][x]);
          if (a != 0.0) acc += bm(a) * mu[i][x];
        }
        rhs *= acc * cell;
      }
      out.push_back(make_case("t" + std::to_string(t), lhs, rhs));
    }
    return out;
  });
  rep.metrics["lambda_refinement"] = lambda_change;
  return rep;
}

InequalityReport verify_control(const HarnessConfig& cfg, const ControlOptions& opt) {
  if (opt.deltas.empty()) throw std::invalid_argument("control harness needs at least one delta");
  for (double d : opt.deltas)
    if (!(d > 0.0)) throw std::invalid_argument("control harness needs delta > 0");
  const int m = cfg.m;
  InequalityReport rep = base_report(cfg, "control", "ell=" + std::to_string(cfg.ell));
  rep.params["u"] = opt.u;
  std::string ds;
  for (double d : opt.deltas) ds += (ds.empty() ? "" : ",") + num(d);
  rep.params["deltas"] = ds;
  const bool corollary = opt.corollary && cfg.ell == 0;
  if (corollary) rep.notes.push_back("corollary form evaluated with u_i = u for every i");

  run_cases(rep, cfg, [&](const Context& c, bool coarse) {
    const GridFunction u = make_weight(opt.u, c.grid);
    for (double x : u.values())
      if (!(x > 0.0)) throw std::invalid_argument("control harness needs u > 0");
    const PhiScaling phi1 = phi_theta_scaling(cfg, c, 1.0, 1.0);
    const std::vector<NormSpec> specs(m, NormSpec::llogl(1.0, cfg.ell));
    std::vector<GridFunction> mu;
    std::vector<GridFunction> cor_w;
    for (double d : opt.deltas) {
      mu.push_back(maximal_single(PhiScaling::constant(1.0), NormSpec::llogl(1.0, cfg.ell + d), u, c.family));
      if (corollary) {
        const GridFunction inner = maximal_single(PhiScaling::constant(1.0), NormSpec::llogl(1.0, d), u, c.family);
        cor_w.push_back(maximal_single(phi_theta_scaling(cfg, c, 1.0, 1.0 / m), NormSpec::lebesgue(1.0), inner, c.family));
      }
    }
    const double wp = 1.0 / m;
    std::vector<double> per_delta(opt.deltas.size() * 2, 0.0);
    std::vector<InequalityCase> out;
    for (std::size_t t = 0; t < c.corpus.size(); ++t) {
      const auto& f = c.corpus[t];
      const double lhs = lorentz_weak_quasinorm(apply_op(c, cfg.ell, f), u, wp);
      const GridFunction mf = maximal(phi1, specs, f, c.family);
      for (std::size_t k = 0; k < opt.deltas.size(); ++k) {
        const double rhs = lorentz_weak_quasinorm(mf, mu[k], wp);
        out.push_back(make_case("t" + std::to_string(t) + "/theorem/delta=" + num(opt.deltas[k]), lhs, rhs));
        per_delta[2 * k] = std::max(per_delta[2 * k], out.back().ratio);
        if (corollary) {
          double prod = 1.0;
          for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t x = 0; x < c.grid.size(); ++x) acc += std::abs(f[i][x]) * cor_w[k][x];
            prod *= acc * c.grid.cell_volume();
          }
          out.push_back(make_case("t" + std::to_string(t) + "/corollary/delta=" + num(opt.deltas[k]), lhs, prod));
          per_delta[2 * k + 1] = std::max(per_delta[2 * k + 1], out.back().ratio);
        }
      }
    }
    const std::string suffix = coarse ? "" : "_refined";
    for (std::size_t k = 0; k < opt.deltas.size(); ++k) {
      rep.metrics["theorem_delta=" + num(opt.deltas[k]) + suffix] = per_delta[2 * k];
      if (corollary) rep.metrics["corollary_delta=" + num(opt.deltas[k]) + suffix] = per_delta[2 * k + 1];
    }
    return out;
  });
  return rep;
}

}  // namespace mlpot
