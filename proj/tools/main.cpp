#include "hartree/bubbles.hpp"
#include "hartree/core.hpp"
#include "hartree/energy.hpp"
#include "hartree/geometry.hpp"
#include "hartree/potential.hpp"
#include "hartree/quadrature.hpp"
#include "hartree/reduction.hpp"
#include "hartree/riesz.hpp"
#include "hartree/special.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

// Command-line front end: JSON config in, CSV/JSON out. All numeric output
// is rendered with shortest round-trip formatting and fixed accumulation
// order, so identical configs (including seed) give byte-identical output
// for any --threads value.

namespace {

using nlohmann::json;
using namespace hartree;

//==============================================================================
// Formatting

std::string fmt(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

// RFC-4180 with LF line endings: cells containing comma, quote, or newline
// are quoted with doubled inner quotes.
class Csv {
public:
  void cell(const std::string &s) {
    if (!row_.empty())
      row_ += ',';
    if (s.find_first_of(",\"\n") != std::string::npos) {
      row_ += '"';
      for (char c : s) {
        row_ += c;
        if (c == '"')
          row_ += '"';
      }
      row_ += '"';
    } else {
      row_ += s;
    }
  }
  // without this overload a string literal would convert to bool, not to
  // std::string, and print as "true"
  void cell(const char *s) { cell(std::string(s)); }
  void cell(double v) { cell(fmt(v)); }
  void cell(bool v) { cell(fmt(v)); }
  void cell(int v) { cell(fmt(v)); }
  void cell(long v) { cell(fmt(v)); }
  void end_row() {
    text_ += row_;
    text_ += '\n';
    row_.clear();
  }
  const std::string &str() const { return text_; }

private:
  std::string text_, row_;
};

//==============================================================================
// Configuration

json default_config() {
  return json{
      {"problem", {{"N", 6}, {"alpha", 4.0}}},
      {"potential",
       {{"kind", "quadratic"},
        {"r0", 1.0},
        {"x0_pp", nullptr},
        {"a", nullptr},
        {"rho_t", 0.5}}},
      {"ansatz",
       {{"m", 2},
        {"r_bar", nullptr},
        {"x_bar_pp", nullptr},
        {"lambda", 8.0},
        {"delta", 0.1},
        {"L0", 0.02},
        {"L1", 2.0},
        {"theta", 0.1},
        {"use_cutoff", false}}},
      {"quadrature",
       {{"scheme", "qmc"},
        {"nodes", 262144},
        {"shifts", 8},
        {"seed", 12345},
        {"rel_tol", 1e-8},
        {"abs_tol", 0.0},
        {"domain_radius", 60.0}}},
      {"verify", {{"suite", "riesz"}}},
      {"expansion",
       {{"lambda_grid", nullptr},
        {"deriv_method", "analytic"},
        {"residual_threshold", 0.1},
        {"synthetic", nullptr}}},
      {"solve",
       {{"tol", 1e-12},
        {"force_a3_equal_a1", false},
        {"synthetic", nullptr}}},
      {"pohozaev",
       {{"rho_over_delta", {2.5, 3.5, 4.5}},
        {"strategy", "auto"},
        {"perturbation", 0.0},
        {"translations", nullptr}}},
      {"norms", {{"target_points", 10000}}},
      {"lemma", {{"budget", 64}}},
  };
}

// User keys must exist in the defaults at the same place; objects merge
// recursively, everything else replaces the default.
void merge_config(json &base, const json &user, const std::string &path) {
  if (!user.is_object())
    fail("ConfigError", "expected a JSON object at " + path);
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string where = path + "/" + it.key();
    if (!base.contains(it.key()))
      fail("ConfigError", "unknown config key " + where);
    json &slot = base[it.key()];
    if (slot.is_object() && it.value().is_object())
      merge_config(slot, it.value(), where);
    else
      slot = it.value();
  }
}

double num_at(const json &j, const std::string &key) {
  if (!j.at(key).is_number())
    fail("ConfigError", "config key " + key + " must be a number");
  return j.at(key).get<double>();
}

// Fill the nullable keys with their derived defaults so --print-config shows
// every value explicitly.
void resolve_config(json &cfg) {
  const int N = cfg["problem"]["N"].get<int>();
  json &potj = cfg["potential"];
  if (potj["x0_pp"].is_null())
    potj["x0_pp"] = std::vector<double>(static_cast<std::size_t>(
                                            std::max(0, N - 2)),
                                        0.0);
  if (potj["a"].is_null())
    potj["a"] = pot::default_curvature(N);
  json &ansj = cfg["ansatz"];
  if (ansj["r_bar"].is_null())
    ansj["r_bar"] = potj["r0"];
  if (ansj["x_bar_pp"].is_null())
    ansj["x_bar_pp"] = potj["x0_pp"];
  json &expj = cfg["expansion"];
  if (expj["lambda_grid"].is_null()) {
    if (ansj["m"].get<int>() == 1)
      expj["lambda_grid"] = {20.0, 28.0, 40.0, 56.0, 80.0};
    else
      expj["lambda_grid"] = {6.0, 8.5, 12.0, 17.0, 24.0};
  }
  json &poj = cfg["pohozaev"];
  if (poj["translations"].is_null()) {
    std::vector<int> tr;
    for (int i = 3; i <= N; ++i)
      tr.push_back(i);
    poj["translations"] = tr;
  }
}

struct Run {
  json cfg;
  double hook_coeff_scale = 1.0;
  std::string out_dir;

  ProblemParams problem() const {
    return make_problem(cfg["problem"]["N"].get<int>(),
                        num_at(cfg["problem"], "alpha"));
  }
  pot::PotentialModel potential(const ProblemParams &p) const {
    const json &j = cfg["potential"];
    const std::string kind = j["kind"].get<std::string>();
    std::vector<double> x0 = j["x0_pp"].get<std::vector<double>>();
    if (kind == "one")
      return pot::make_constant_one(p.N, num_at(j, "r0"), x0);
    if (kind == "quadratic")
      return pot::make_quadratic_model(p.N, num_at(j, "r0"), x0,
                                       num_at(j, "a"), num_at(j, "rho_t"));
    fail("ConfigError", "potential.kind must be \"quadratic\" or \"one\"");
  }
  AnsatzConfig ansatz_config(const ProblemParams &p) const {
    const json &j = cfg["ansatz"];
    AnsatzConfig a = make_ansatz_config(
        p, j["m"].get<int>(), num_at(j, "r_bar"),
        j["x_bar_pp"].get<std::vector<double>>(), num_at(j, "lambda"));
    a.delta = num_at(j, "delta");
    a.L0 = num_at(j, "L0");
    a.L1 = num_at(j, "L1");
    a.theta = num_at(j, "theta");
    return a;
  }
  bubbles::Ansatz ansatz(const ProblemParams &p,
                         const pot::PotentialModel &K) const {
    bubbles::Ansatz a =
        bubbles::make_ansatz(p, ansatz_config(p), K.center_w(),
                             cfg["ansatz"]["use_cutoff"].get<bool>());
    a.c *= hook_coeff_scale;
    return a;
  }
  QuadratureSpec quadrature() const {
    const json &j = cfg["quadrature"];
    QuadratureSpec q;
    const std::string scheme = j["scheme"].get<std::string>();
    if (scheme == "radial")
      q.scheme = Scheme::radial_1d;
    else if (scheme == "two_center")
      q.scheme = Scheme::two_center_2d;
    else if (scheme == "qmc")
      q.scheme = Scheme::qmc_nd;
    else
      fail("ConfigError",
           "quadrature.scheme must be \"radial\", \"two_center\", or \"qmc\"");
    q.nodes = j["nodes"].get<long>();
    q.shifts = j["shifts"].get<int>();
    q.seed = j["seed"].get<std::uint64_t>();
    q.rel_tol = num_at(j, "rel_tol");
    q.abs_tol = num_at(j, "abs_tol");
    q.domain_radius = num_at(j, "domain_radius");
    return q;
  }
};

void emit(const Run &run, const std::string &filename,
          const std::string &text) {
  std::cout << text;
  if (!run.out_dir.empty()) {
    std::filesystem::create_directories(run.out_dir);
    std::ofstream f(std::filesystem::path(run.out_dir) / filename,
                    std::ios::binary);
    f << text;
  }
}

//==============================================================================
// constants

int cmd_constants(const Run &run) {
  const ProblemParams p = run.problem();
  const special::SharpConstants sc = special::sharp_constants(p);
  json items = json::array();
  auto add = [&](const std::string &name, double value,
                 const std::string &method, double tolerance) {
    items.push_back({{"name", name},
                     {"value", value},
                     {"method", method},
                     {"tolerance", tolerance}});
  };
  add("hls_c", sc.C_hls, "Gamma closed form", 4e-16);
  add("sobolev_s", sc.S_sobolev, "Rayleigh quotient of the extremal profile",
      1e-10);
  add("hartree_sobolev_s", sc.S_hartree, "S / C^{1/two_star_alpha}", 1e-10);
  add("bubble_c", sc.c_bubble, "closed form from S and C", 1e-10);
  add("i_half_alpha", sc.I_half_alpha, "Gamma closed form", 4e-16);
  const double identity =
      std::pow(sc.c_bubble, 2.0 * (p.two_star_alpha - 1.0)) * sc.I_half_alpha;
  add("normalization_identity", identity,
      "c^{2(P-1)} I(alpha/2); equals N(N-2)", 1e-9);
  json out = {{"N", p.N},
              {"alpha", p.alpha},
              {"two_star_alpha", p.two_star_alpha},
              {"tau", p.tau},
              {"constants", items}};
  emit(run, "constants.json", out.dump(2) + "\n");
  return 0;
}

//==============================================================================
// verify suites

struct CheckRow {
  std::string id;
  double expected = 0, actual = 0, tol = 0;
  bool pass = false;
};

void check_abs(std::vector<CheckRow> &rows, const std::string &id,
               double expected, double actual, double tol) {
  rows.push_back({id, expected, actual, tol,
                  std::abs(actual - expected) <= tol});
}

void check_rel(std::vector<CheckRow> &rows, const std::string &id,
               double expected, double actual, double rtol) {
  rows.push_back({id, expected, actual, rtol,
                  std::abs(actual - expected) <=
                      rtol * std::max(std::abs(expected), 1e-300)});
}

void suite_riesz(const Run &run, std::vector<CheckRow> &rows) {
  const ProblemParams p = run.problem();
  QuadratureSpec spec = run.quadrature();
  spec.scheme = Scheme::qmc_nd;

  // kernel-power-2s convolution of (1+|y|^2)^{-(N-s)} against
  // I(s)(1+|x|^2)^{-s}, at s = alpha/2
  const double s = 0.5 * p.alpha;
  const double is = special::riesz_identity_constant(p.N, s);
  auto f = [&](const Vec &y) {
    return std::pow(1.0 + norm2(y), -(p.N - s));
  };
  quad::MixtureComponent origin;
  origin.center = Vec(p.N);
  origin.scale = 1.0;
  origin.radius = spec.domain_radius;
  for (double r : {0.0, 1.0, 2.0}) {
    Vec x(p.N);
    x[0] = r;
    const IntegralResult got =
        riesz::numeric(f, p.N, p.alpha, 2.0 * (p.N - s), x, {origin}, spec);
    check_rel(rows, "identity_r" + fmt(r), is * std::pow(1.0 + r * r, -s),
              got.value, 1e-3);
  }

  // closed bubble convolution against the numeric route at five radii
  const special::SharpConstants sc = special::sharp_constants(p);
  auto g = [&](const Vec &y) {
    return std::pow(bubbles::profile(p, sc.c_bubble, 1.0, norm(y)),
                    p.two_star_alpha);
  };
  const double decay = (p.N - 2) * p.two_star_alpha;
  for (double r : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    Vec x(p.N);
    x[0] = r;
    const IntegralResult got =
        riesz::numeric(g, p.N, p.alpha, decay, x, {origin}, spec);
    check_rel(rows, "closed_vs_numeric_r" + fmt(r),
              riesz::bubble_closed_radial(p, sc, 1.0, r), got.value, 1e-3);
  }
}

void suite_hls(const Run &run, std::vector<CheckRow> &rows) {
  const ProblemParams p = run.problem();
  const special::SharpConstants sc = special::sharp_constants(p);
  const double P = p.two_star_alpha;
  const QuadratureSpec rs = QuadratureSpec::radial(1e-12, 16384);

  // quotient |grad U|_2^2 / (double integral)^{1/P} at the bubble, against
  // S / C^{1/P} with S from the Rayleigh-quotient oracle
  const IntegralResult d = quad::radial_integral(
      [&](double s) {
        const double ds = bubbles::profile_ds(p, sc.c_bubble, 1.0, s);
        return ds * ds;
      },
      p, rs);
  const IntegralResult t00 = quad::radial_integral(
      [&](double s) {
        return riesz::bubble_closed_radial(p, sc, 1.0, s) *
               std::pow(bubbles::profile(p, sc.c_bubble, 1.0, s), P);
      },
      p, rs);
  const double quotient = d.value / std::pow(t00.value, 1.0 / P);
  check_rel(rows, "hls_quotient", sc.S_hartree, quotient, 1e-3);
  check_rel(rows, "normalization_identity",
            static_cast<double>(p.N) * (p.N - 2),
            std::pow(sc.c_bubble, 2.0 * (P - 1.0)) * sc.I_half_alpha, 1e-9);
}

void suite_invariance(const Run &run, std::vector<CheckRow> &rows) {
  const ProblemParams p = run.problem();
  const special::SharpConstants sc = special::sharp_constants(p);
  const double P = p.two_star_alpha;
  const double scale = run.hook_coeff_scale;
  const double c = sc.c_bubble * scale;
  QuadratureSpec spec = run.quadrature();
  const pot::PotentialModel K =
      pot::make_constant_one(p.N, num_at(run.cfg["potential"], "r0"),
                             run.cfg["potential"]["x0_pp"]
                                 .get<std::vector<double>>());

  const double lams[] = {0.5, 1.0, 2.0};
  double J[3];
  for (int i = 0; i < 3; ++i) {
    AnsatzConfig cfg = make_ansatz_config(p, 1, K.r0, K.x0_pp, lams[i]);
    bubbles::Ansatz a = bubbles::make_ansatz(p, cfg, K.center_w(), false);
    a.c *= scale;
    J[i] = energy::energy_eval(a, K, spec).total;
  }
  check_rel(rows, "j_half_vs_one", J[1], J[0], 1e-3);
  check_rel(rows, "j_two_vs_one", J[1], J[2], 1e-3);
  check_rel(rows, "j_half_vs_two", J[2], J[0], 1e-3);

  {
    AnsatzConfig cfg = make_ansatz_config(p, 1, K.r0, K.x0_pp, 1.0);
    bubbles::Ansatz a = bubbles::make_ansatz(p, cfg, K.center_w(), false);
    a.c *= scale;
    const energy::Deriv dj =
        energy::dj_dlambda(a, K, spec, energy::DerivMethod::analytic);
    check_abs(rows, "dj_dlambda_zero", 0.0, dj.value,
              std::max(3.0 * dj.est_error, 1e-12));
  }

  // int (conv Z^P) Z^P == int |grad Z|^2 iff the profile actually solves the
  // equation; a scaled coefficient breaks this by scale^{2(P-1)}
  const QuadratureSpec rs = QuadratureSpec::radial(1e-12, 16384);
  const IntegralResult d = quad::radial_integral(
      [&](double s) {
        const double ds = bubbles::profile_ds(p, c, 1.0, s);
        return ds * ds;
      },
      p, rs);
  const IntegralResult t00 = quad::radial_integral(
      [&](double s) {
        return std::pow(scale, P) *
               riesz::bubble_closed_radial(p, sc, 1.0, s) *
               std::pow(bubbles::profile(p, c, 1.0, s), P);
      },
      p, rs);
  check_rel(rows, "pde_normalization", 1.0, t00.value / d.value, 1e-6);
}

std::vector<std::pair<std::string, reduction::LemmaReport>>
lemma_grid(const Run &run) {
  const ProblemParams p = run.problem();
  const QuadratureSpec spec = run.quadrature();
  const long budget = run.cfg["lemma"]["budget"].get<long>();
  std::vector<std::pair<std::string, reduction::LemmaReport>> out;

  auto run_b1 = [&](double a, double b, double d) {
    reduction::LemmaParams lp;
    lp.N = p.N;
    lp.a = a;
    lp.b = b;
    lp.delta = d;
    out.emplace_back("B1_a" + fmt(a) + "_b" + fmt(b) + "_d" + fmt(d),
                     reduction::lemma_check(reduction::Lemma::B1, lp, budget,
                                            spec));
  };
  run_b1(2.0, 2.0, 1.0);
  run_b1(2.0, 3.0, 2.0);
  run_b1(1.5, 2.5, 1.5);

  for (double d : {0.5, 0.5 * (p.N - 2), p.N - 2.5}) {
    reduction::LemmaParams lp;
    lp.N = p.N;
    lp.delta = d;
    out.emplace_back("B3_d" + fmt(d),
                     reduction::lemma_check(reduction::Lemma::B3, lp, budget,
                                            spec));
  }

  if (p.N > 5) {
    for (auto [eta, lam] : {std::pair{0.5, 4.0}, std::pair{1.0, 8.0}}) {
      reduction::LemmaParams lp;
      lp.N = p.N;
      lp.alpha = p.alpha;
      lp.eta = eta;
      lp.lambda = lam;
      out.emplace_back("B4_eta" + fmt(eta) + "_lam" + fmt(lam),
                       reduction::lemma_check(reduction::Lemma::B4, lp,
                                              budget, spec));
    }
  }
  return out;
}

void suite_lemmas(const Run &run, std::vector<CheckRow> &rows) {
  for (const auto &[id, rep] : lemma_grid(run)) {
    CheckRow r;
    r.id = id;
    r.expected = rep.half_budget_ratio;
    r.actual = rep.worst_ratio;
    r.tol = 0.1;
    r.pass = rep.holds;
    rows.push_back(r);
  }
}

void suite_pohozaev(const Run &run, std::vector<CheckRow> &rows) {
  const ProblemParams p = run.problem();
  const QuadratureSpec spec = run.quadrature();
  const json &potj = run.cfg["potential"];
  const pot::PotentialModel K = pot::make_constant_one(
      p.N, num_at(potj, "r0"), potj["x0_pp"].get<std::vector<double>>());
  AnsatzConfig acfg = run.ansatz_config(p);
  acfg.m = 1;
  acfg.r_bar = K.r0;
  acfg.x_bar_pp = K.x0_pp;
  const bubbles::Ansatz ref =
      bubbles::make_ansatz(p, acfg, K.center_w(), false);
  const reduction::BubbleField u(ref);
  for (double rr : {2.5, 3.5, 4.5}) {
    const reduction::Residual res = reduction::pohozaev_dilation_residual(
        u, K, rr * acfg.delta, ref, reduction::ConvStrategy::closed_bubble,
        spec);
    check_abs(rows, "dilation_rho" + fmt(rr), 0.0, res.value,
              3.0 * res.est_error);
  }
  const reduction::Residual tr = reduction::pohozaev_translation_residual(
      u, K, 3.5 * acfg.delta, 3, ref, reduction::ConvStrategy::closed_bubble,
      spec);
  check_abs(rows, "translation_i3_rho3.5", 0.0, tr.value,
            3.0 * tr.est_error);
}

int cmd_verify(const Run &run, std::string suite) {
  if (suite.empty())
    suite = run.cfg["verify"]["suite"].get<std::string>();
  std::vector<CheckRow> rows;
  if (suite == "riesz")
    suite_riesz(run, rows);
  else if (suite == "hls")
    suite_hls(run, rows);
  else if (suite == "invariance")
    suite_invariance(run, rows);
  else if (suite == "lemmas")
    suite_lemmas(run, rows);
  else if (suite == "pohozaev")
    suite_pohozaev(run, rows);
  else
    fail("ConfigError", "verify.suite must be one of riesz, hls, invariance, "
                        "lemmas, pohozaev");
  Csv csv;
  csv.cell("check_id");
  csv.cell("expected");
  csv.cell("actual");
  csv.cell("tol");
  csv.cell("pass");
  csv.end_row();
  bool all = true;
  for (const CheckRow &r : rows) {
    csv.cell(r.id);
    csv.cell(r.expected);
    csv.cell(r.actual);
    csv.cell(r.tol);
    csv.cell(r.pass);
    csv.end_row();
    all = all && r.pass;
  }
  emit(run, "verify_" + suite + ".csv", csv.str());
  return all ? 0 : 1;
}

//==============================================================================
// expansion

int cmd_expansion(const Run &run) {
  const ProblemParams p = run.problem();
  const pot::PotentialModel K = run.potential(p);
  const QuadratureSpec spec = run.quadrature();
  const json &ej = run.cfg["expansion"];
  const json &aj = run.cfg["ansatz"];
  const int m = aj["m"].get<int>();
  const double r_bar = num_at(aj, "r_bar");
  const std::vector<double> grid =
      ej["lambda_grid"].get<std::vector<double>>();

  energy::ExpansionFit fit;
  if (!ej["synthetic"].is_null()) {
    // model-injection mode: generate exact model samples, fit them back
    const double A1 = num_at(ej["synthetic"], "A1");
    const double A2 =
        ej["synthetic"].contains("A2") ? num_at(ej["synthetic"], "A2") : 0.0;
    const double B = m >= 2 ? geom::interaction_sum(m, r_bar, p.N - 2) : 0.0;
    std::vector<double> samples, errors;
    for (double lam : grid) {
      double v = -A1 * m / std::pow(lam, 3);
      if (m >= 2)
        v += A2 * m * B / std::pow(lam, p.N - 1);
      samples.push_back(v);
      errors.push_back(0.0);
    }
    fit = energy::fit_points(p, m, B, grid, samples, errors);
  } else {
    fit = energy::fit_expansion(p, K, m, r_bar,
                                aj["x_bar_pp"].get<std::vector<double>>(),
                                grid, spec);
  }

  Csv csv;
  csv.cell("lambda");
  csv.cell("dj_dlambda");
  csv.cell("est_error");
  csv.cell("model_prediction");
  csv.cell("residual");
  csv.cell("A1");
  if (fit.has_a2)
    csv.cell("A2");
  csv.end_row();
  double worst = 0;
  for (std::size_t i = 0; i < fit.lambda_grid.size(); ++i) {
    csv.cell(fit.lambda_grid[i]);
    csv.cell(fit.samples[i]);
    csv.cell(fit.errors[i]);
    csv.cell(fit.model[i]);
    csv.cell(fit.residuals[i]);
    csv.cell(fit.A1);
    if (fit.has_a2)
      csv.cell(fit.A2);
    csv.end_row();
    worst = std::max(worst, std::abs(fit.residuals[i]) /
                                std::max(std::abs(fit.samples[i]), 1e-300));
  }
  emit(run, "expansion.csv", csv.str());
  return worst <= num_at(ej, "residual_threshold") ? 0 : 1;
}

//==============================================================================
// solve

int cmd_solve(const Run &run) {
  const ProblemParams p = run.problem();
  const pot::PotentialModel K = run.potential(p);
  const json &sj = run.cfg["solve"];
  const json &aj = run.cfg["ansatz"];
  const int m = aj["m"].get<int>();
  const double r_bar = num_at(aj, "r_bar");

  energy::ExpansionFit fit;
  if (!sj["synthetic"].is_null()) {
    fit.A1 = num_at(sj["synthetic"], "A1");
    fit.A2 = sj["synthetic"].contains("A2") ? num_at(sj["synthetic"], "A2")
                                            : 0.0;
    fit.has_a2 = fit.A2 != 0.0;
  } else {
    const json &ej = run.cfg["expansion"];
    fit = energy::fit_expansion(p, K, m, r_bar,
                                aj["x_bar_pp"].get<std::vector<double>>(),
                                ej["lambda_grid"].get<std::vector<double>>(),
                                run.quadrature());
  }
  if (sj["force_a3_equal_a1"].get<bool>())
    fit.A3 = fit.A1;
  else
    fit.A3 = reduction::coefficient_a3(p, fit.A2, m, r_bar);

  const reduction::ReducedSolution sol = reduction::solve_reduced(
      K, m, fit, p, num_at(sj, "tol"), num_at(aj, "L0"), num_at(aj, "L1"),
      num_at(aj, "theta"));

  json out = {{"m", m},
              {"A1", fit.A1},
              {"A2", fit.A2},
              {"A3", fit.A3},
              {"r_bar_m", sol.r_bar_m},
              {"x_bar_pp_m", sol.x_bar_pp_m},
              {"t_m", sol.t_m},
              {"lambda_m", sol.lambda_m},
              {"in_window", sol.in_window},
              {"grad_k_residual", sol.grad_k_residual},
              {"balance_residual", sol.balance_residual},
              {"proximity", sol.proximity},
              {"proximity_bound", sol.proximity_bound},
              {"proximity_ok", sol.proximity_ok},
              {"degree_sign", sol.degree_sign},
              {"newton_tol", num_at(sj, "tol")}};
  emit(run, "solve.json", out.dump(2) + "\n");
  return 0;
}

//==============================================================================
// pohozaev

int cmd_pohozaev(const Run &run) {
  const ProblemParams p = run.problem();
  const pot::PotentialModel K = run.potential(p);
  const QuadratureSpec spec = run.quadrature();
  const json &pj = run.cfg["pohozaev"];
  const bubbles::Ansatz ref = run.ansatz(p, K);
  const double delta = ref.cutoff.delta;
  const double amp = num_at(pj, "perturbation");

  const reduction::BubbleField base(ref);
  Vec xc(p.N);
  const std::vector<double> w0 = K.center_w();
  xc[0] = w0[0];
  for (int i = 1; i < p.N - 1; ++i)
    xc[i + 1] = w0[static_cast<std::size_t>(i)];
  const reduction::GaussianBump bump(xc, amp, delta);
  std::vector<const reduction::Field *> parts{&base};
  if (amp != 0.0)
    parts.push_back(&bump);
  const reduction::SumField u(parts);

  const std::string strat = pj["strategy"].get<std::string>();
  reduction::ConvStrategy strategy;
  if (strat == "closed_bubble")
    strategy = reduction::ConvStrategy::closed_bubble;
  else if (strat == "closed_plus_delta")
    strategy = reduction::ConvStrategy::closed_plus_delta;
  else if (strat == "auto")
    strategy = (K.is_one() && amp == 0.0 && !ref.use_cutoff)
                   ? reduction::ConvStrategy::closed_bubble
                   : reduction::ConvStrategy::closed_plus_delta;
  else
    fail("ConfigError", "pohozaev.strategy must be auto, closed_bubble, or "
                        "closed_plus_delta");

  Csv csv;
  csv.cell("test");
  csv.cell("rho_over_delta");
  csv.cell("value");
  csv.cell("est_error");
  csv.cell("zero_within_3est");
  csv.end_row();
  bool all = true;
  for (double rr : pj["rho_over_delta"].get<std::vector<double>>()) {
    const reduction::Residual res = reduction::pohozaev_dilation_residual(
        u, K, rr * delta, ref, strategy, spec);
    const bool ok = std::abs(res.value) <= 3.0 * res.est_error;
    all = all && ok;
    csv.cell("dilation");
    csv.cell(rr);
    csv.cell(res.value);
    csv.cell(res.est_error);
    csv.cell(ok);
    csv.end_row();
  }
  for (int i : pj["translations"].get<std::vector<int>>()) {
    const reduction::Residual res = reduction::pohozaev_translation_residual(
        u, K, 3.5 * delta, i, ref, strategy, spec);
    const bool ok = std::abs(res.value) <= 3.0 * res.est_error;
    all = all && ok;
    csv.cell("translation_i" + fmt(i));
    csv.cell(3.5);
    csv.cell(res.value);
    csv.cell(res.est_error);
    csv.cell(ok);
    csv.end_row();
  }
  emit(run, "pohozaev.csv", csv.str());
  return (all || amp != 0.0) ? 0 : 1;
}

//==============================================================================
// norms

int cmd_norms(const Run &run) {
  const ProblemParams p = run.problem();
  const pot::PotentialModel K = run.potential(p);
  const QuadratureSpec spec = run.quadrature();
  const bubbles::Ansatz a = run.ansatz(p, K);
  const reduction::WeightedNormSpec ns = reduction::make_norm_spec(
      p, a.placement, a.lambda,
      run.cfg["norms"]["target_points"].get<int>(), spec.seed);
  auto u = [&](const Vec &x) { return bubbles::ansatz_eval(a, x); };
  Csv csv;
  csv.cell("norm");
  csv.cell("value");
  csv.cell("sample_points");
  csv.cell("tolerance");
  csv.end_row();
  csv.cell("star");
  csv.cell(reduction::weighted_norm_star(u, ns));
  csv.cell(static_cast<long>(ns.sample_points.size()));
  csv.cell(0.0);
  csv.end_row();
  csv.cell("starstar");
  csv.cell(reduction::weighted_norm_starstar(u, ns));
  csv.cell(static_cast<long>(ns.sample_points.size()));
  csv.cell(0.0);
  csv.end_row();
  emit(run, "norms.csv", csv.str());
  return 0;
}

//==============================================================================
// lemma-check

int cmd_lemma_check(const Run &run) {
  Csv csv;
  csv.cell("check_id");
  csv.cell("budget");
  csv.cell("worst_ratio");
  csv.cell("half_budget_ratio");
  csv.cell("growth_tol");
  csv.cell("holds");
  csv.cell("witness");
  csv.end_row();
  const long budget = run.cfg["lemma"]["budget"].get<long>();
  bool all = true;
  for (const auto &[id, rep] : lemma_grid(run)) {
    csv.cell(id);
    csv.cell(budget);
    csv.cell(rep.worst_ratio);
    csv.cell(rep.half_budget_ratio);
    csv.cell(0.1);
    csv.cell(rep.holds);
    std::string w;
    for (int i = 0; i < rep.witness.dim(); ++i)
      w += (i ? " " : "") + fmt(rep.witness[i]);
    csv.cell(w);
    csv.end_row();
    all = all && rep.holds;
  }
  emit(run, "lemma_check.csv", csv.str());
  return all ? 0 : 1;
}

//==============================================================================

int exit_code_for(const Error &e) {
  static const char *config_codes[] = {
      "ConfigError",       "DimensionTooSmall", "DimensionTooLarge",
      "AlphaOutOfRange",   "NonPositiveArgument", "BadCenterDimension",
      "ExponentOutOfRange", "SOutOfRange",      "MTooSmall",
      "RhoOutOfRange",     "CurvatureTooLarge"};
  for (const char *c : config_codes)
    if (e.code() == c)
      return 2;
  return 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"multi-bubble constructions for the critical Hartree "
               "equation: constants, expansion fits, reduced solves, and "
               "identity checks"};
  app.require_subcommand(0, 1);

  std::string config_path, out_dir, suite;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool print_config = false;
  double hook_scale = 1.0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "override quadrature.seed");
  app.add_option("--out", out_dir, "directory for output files");
  app.add_option("--threads", threads, "cap worker threads (default: cores)");
  app.add_flag("--print-config", print_config,
               "print the fully resolved config and exit");
  app.add_option("--hook-bubble-coeff-scale", hook_scale,
                 "scale the bubble coefficient (negative-control hook)")
      ->capture_default_str();

  CLI::App *c_const = app.add_subcommand("constants", "sharp constants");
  CLI::App *c_verify = app.add_subcommand("verify", "property suites");
  c_verify->add_option("--suite", suite,
                       "riesz, hls, invariance, lemmas, pohozaev");
  CLI::App *c_exp = app.add_subcommand("expansion", "energy derivative fit");
  CLI::App *c_solve = app.add_subcommand("solve", "reduced system solve");
  CLI::App *c_poho = app.add_subcommand("pohozaev", "tube residuals");
  CLI::App *c_norms = app.add_subcommand("norms", "weighted sup-norms");
  CLI::App *c_lemma = app.add_subcommand("lemma-check", "decay estimates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    Run run;
    run.cfg = default_config();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f)
        fail("ConfigError", "cannot open config file " + config_path);
      json user = json::parse(f, nullptr, true, true);
      merge_config(run.cfg, user, "");
    }
    if (seed)
      run.cfg["quadrature"]["seed"] = *seed;
    resolve_config(run.cfg);
    run.hook_coeff_scale = hook_scale;
    run.out_dir = out_dir;
    if (threads)
      set_thread_cap(*threads);

    if (print_config) {
      std::cout << run.cfg.dump(2) << "\n";
      return 0;
    }
    if (c_const->parsed())
      return cmd_constants(run);
    if (c_verify->parsed())
      return cmd_verify(run, suite);
    if (c_exp->parsed())
      return cmd_expansion(run);
    if (c_solve->parsed())
      return cmd_solve(run);
    if (c_poho->parsed())
      return cmd_pohozaev(run);
    if (c_norms->parsed())
      return cmd_norms(run);
    if (c_lemma->parsed())
      return cmd_lemma_check(run);
    std::cerr << app.help();
    return 2;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
