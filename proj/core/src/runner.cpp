#include "mtube/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mtube/util.hpp"

namespace mtube {

namespace {

using nlohmann::json;

const std::vector<std::string> kExperiments = {
    "verify-weights", "expansion", "lelong",  "reltype",   "localize",
    "siu",            "compare",   "minimal", "full-suite"};

bool close_rel(double measured, double expected, double rel) {
  return std::abs(measured - expected) <=
         rel * std::max(std::abs(expected), 1e-12);
}

CheckRecord make_record(std::string name, std::string anchor, std::string basis,
                        json measured, json expected, double tolerance,
                        bool pass) {
  return {std::move(name), std::move(anchor), std::move(basis),
          std::move(measured), std::move(expected), tolerance, pass};
}

// The nonconstant torus profile used across experiments: 1 + cos(x), exact
// minimum 0, exact mean 1.
ThetaField bump_theta(const FlatModel& model) {
  TrigTerm t;
  t.freq.assign(static_cast<std::size_t>(2 * (model.n - model.k)), 0);
  t.freq[0] = 1;
  t.amplitude = 1.0;
  return ThetaField(1.0, {t}, model.torus_periods);
}

void experiment_verify_weights(const RunConfig& cfg,
                               std::vector<CheckRecord>& out) {
  json tuples = cfg.params.value(
      "tuples", json::parse("[[2,1,3],[3,1,5],[2,2,2],[3,2,2],[4,3,2]]"));
  for (const auto& t : tuples) {
    const int k = t[0], m = t[1];
    const double delta = t[2];
    const std::string tag =
        "k" + std::to_string(k) + "m" + std::to_string(m);

    // Exact vanishing of sigma_m for the unperturbed profile.
    const WeightFamily pure = WeightFamily::g_pure(k, m);
    double worst = 0.0;
    for (const double r : log_grid(1e-3, 0.2, 50)) {
      const EigenProfile p = radial_eigprofile(eval_weight(pure, r), r, k, k);
      worst = std::max(worst, std::abs(sigma_profile(p, m)) /
                                  std::pow(std::abs(p.lambda_tan), m));
    }
    out.push_back(make_record(
        "maximality-" + tag,
        "sigma_m of the model weight profile vanishes identically", "exact",
        worst, 0.0, 1e-10, worst < 1e-10));

    const FlatModel model(k + 1, k, m);
    const CertifiedWeight sub =
        make_weight(WeightKind::GSub, k, m, delta, 0.0, model);
    const double coeff_expected =
        binom(k - 1, m - 1) * std::abs(sigma_m_leading(k, m, delta));
    const bool sub_ok =
        !sub.certificate.points.empty() &&
        close_rel(sub.certificate.fitted_exponent, delta, 0.02) &&
        close_rel(sub.certificate.fitted_coefficient, coeff_expected, 0.05);
    out.push_back(make_record(
        "subweight-" + tag + "-d" + std::to_string(int(delta)),
        "perturbed weight stays in the cone; sigma_m grows like r^delta "
        "with the predicted coefficient",
        "derived",
        json{{"exponent", sub.certificate.fitted_exponent},
             {"coefficient", sub.certificate.fitted_coefficient},
             {"certified_radius", sub.certified_radius}},
        json{{"exponent", delta}, {"coefficient", coeff_expected}}, 0.05,
        sub_ok));

    const CertifiedWeight super =
        make_weight(WeightKind::GSuper, k, m, delta, 0.0, model);
    bool super_ok = !super.certificate.points.empty();
    for (const auto& p : super.certificate.points) {
      super_ok = super_ok && p.sigma.back() <= 1e-9;
      for (std::size_t j = 0; j + 1 < p.sigma.size(); ++j)
        super_ok = super_ok && p.sigma[j] > 0.0;
    }
    out.push_back(make_record(
        "superweight-" + tag + "-d" + std::to_string(int(delta)),
        "negatively perturbed weight leaves the cone through sigma_m only",
        "derived", json{{"certified_radius", super.certified_radius}},
        json{{"sigma_m_sign", "<= 0"}}, 1e-9, super_ok));
  }
}

void experiment_expansion(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  json tuples = cfg.params.value(
      "tuples", json::parse("[[2,1,3],[3,1,5],[2,2,2],[3,2,2],[4,3,2]]"));
  const std::vector<double> grid = log_grid(2e-2, 3e-1, 24);
  for (const auto& t : tuples) {
    const int k = t[0], m = t[1];
    const double delta = t[2];
    for (const int A : {1, -1}) {
      for (const double eps : {0.0, 1e-4}) {
        const ExpansionReport rep =
            verify_expansion(k, m, delta, eps, A, grid);
        std::ostringstream name;
        name << "expansion-k" << k << "m" << m << "-A" << (A > 0 ? "+" : "-")
             << "-eps" << (eps > 0 ? "1e-4" : "0");
        out.push_back(make_record(
            name.str(),
            "residual beyond the first-order radial expansion decays faster "
            "than r^delta",
            "derived", json{{"fitted_exponent", rep.fitted_exponent}},
            json{{"exponent_exceeds", delta}}, 0.0,
            rep.exponent_exceeds_delta));
      }
    }
  }
}

void experiment_lelong(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  const FlatModel& model = cfg.model;
  const TubeMethod method =
      model.m == 1 ? TubeMethod::Flux : TubeMethod::RadialQuadrature;
  const Calibration calib = calibrate(model);
  IntegralParams params;
  params.seed = cfg.seed;
  params.threads = cfg.threads;
  const std::string tag =
      "k" + std::to_string(model.k) + "m" + std::to_string(model.m);

  for (const double gamma : {0.5, 1.0, 2.0}) {
    const ScalarField f =
        ScalarField::radial(WeightFamily::g_pure(model.k, model.m, gamma));
    const TubeSeries ts =
        lelong_series(f, model, default_s_grid(model), method, calib, params);
    const double nu = lelong_number(ts);
    out.push_back(make_record(
        "lelong-linearity-" + tag + "-g" + std::to_string(gamma),
        "scaled tube mass of a multiple of the reference weight equals the "
        "multiple",
        "exact", nu, gamma, 0.02, close_rel(nu, gamma, 0.02)));

    const TubeSeries sl =
        sublevel_series(f, model, default_level_grid(model), params);
    const bool agree = sl.monotone &&
                       close_rel(sl.extrapolated_limit, nu, 0.02);
    out.push_back(make_record(
        "sublevel-consistency-" + tag + "-g" + std::to_string(gamma),
        "sublevel-set series is monotone and converges to the same mass",
        "derived",
        json{{"limit", sl.extrapolated_limit}, {"monotone", sl.monotone}},
        json{{"limit", nu}}, 0.02, agree));
  }

  const ScalarField bounded = ScalarField::affine(
      {{1.0, ScalarField::norm_sq(false)},
       // floor above the tube's weight range: the truncation kink stays
       // outside every scanned radius
       {1.0, ScalarField::floored(
                 ScalarField::radial(WeightFamily::g_pure(model.k, model.m)),
                 -1.0)}},
      0.0);
  const TubeSeries tb = lelong_series(bounded, model, default_s_grid(model),
                                      model.m == 1 ? TubeMethod::Flux
                                                   : TubeMethod::MonteCarlo,
                                      calib, params);
  out.push_back(make_record(
      "lelong-bounded-" + tag,
      "fields bounded near V carry no mass on V", "exact",
      tb.extrapolated_limit, 0.0, 0.01,
      std::abs(tb.extrapolated_limit) <= 0.01));
}

void experiment_reltype(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  const FlatModel& model = cfg.model;
  const std::string tag =
      "k" + std::to_string(model.k) + "m" + std::to_string(model.m);
  for (const double gamma : {0.5, 1.0, 2.0}) {
    const ScalarField f =
        ScalarField::radial(WeightFamily::g_pure(model.k, model.m, gamma));
    const SlopeSeries ss =
        relative_type(f, model, default_type_levels(model), 32, 32, cfg.threads);
    const bool ok = ss.convexity_ok && ss.secants_monotone &&
                    close_rel(ss.sigma_hat, gamma, 0.02);
    out.push_back(make_record(
        "reltype-" + tag + "-g" + std::to_string(gamma),
        "sublevel maxima are convex in the level and their slope recovers "
        "the multiple",
        "exact",
        json{{"sigma", ss.sigma_hat}, {"convex", ss.convexity_ok}},
        json{{"sigma", gamma}}, 0.02, ok));
  }

  const ScalarField shifted = ScalarField::affine(
      {{1.0, ScalarField::radial(WeightFamily::g_pure(model.k, model.m))}},
      5.0);
  const SlopeSeries ss =
      relative_type(shifted, model, default_type_levels(model), 32, 32,
                    cfg.threads);
  out.push_back(make_record(
      "reltype-shift-" + tag,
      "bounded perturbations do not change the type", "exact", ss.sigma_hat,
      1.0, 0.02, close_rel(ss.sigma_hat, 1.0, 0.02)));
}

void experiment_localize(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  json cases = cfg.params.value(
      "cases",
      json::parse(R"([{"k":2,"m":1,"nu":1.5},{"k":2,"m":2,"nu":0.75}])"));
  for (const auto& c : cases) {
    const int k = c["k"], m = c["m"];
    const double nu = c["nu"];
    const FlatModel model(k + 1, k, m);
    const std::string tag = "k" + std::to_string(k) + "m" + std::to_string(m);
    const ThetaField theta = bump_theta(model);

    LocalizeSearch search;
    search.threads = cfg.threads;
    const LocalizedField loc = make_localized(theta, nu, k, m, model, search);
    out.push_back(make_record(
        "localize-certify-" + tag,
        "a finite multiple of the comparison term restores cone membership",
        "derived",
        json{{"C", loc.C}, {"min_margin", loc.certificate.min_margin}},
        json{{"certified", true}}, 0.0, loc.certificate.passed()));

    const SlopeSeries ss = relative_type(loc.field, model,
                                         default_type_levels(model), 36, 16,
                                         cfg.threads);
    out.push_back(make_record(
        "localize-type-" + tag,
        "vanishing minimum of the torus profile forces vanishing type",
        "stated", ss.sigma_hat, 0.0, 0.02, ss.sigma_hat <= 0.02));

    const Calibration calib = calibrate(model);
    IntegralParams params;
    params.seed = cfg.seed;
    params.threads = cfg.threads;
    params.samples_per_stratum = 2048;
    const TubeMethod method =
        m == 1 ? TubeMethod::Flux : TubeMethod::MonteCarlo;
    const TubeSeries ts = lelong_series(loc.field, model,
                                        default_s_grid(model), method, calib,
                                        params);
    const double nu_hat = lelong_number(ts);
    out.push_back(make_record(
        "localize-mass-" + tag,
        "mass on V equals the torus mean of the profile", "derived", nu_hat,
        theta.mean(), 0.05, close_rel(nu_hat, theta.mean(), 0.05)));

    bool probes_ok = true;
    json probe_vals = json::array();
    const auto probes = v_grid(model, 3);  // 9 points, first 8 used
    const auto radii = default_probe_radii(model);
    for (std::size_t i = 0; i < std::min<std::size_t>(8, probes.size()); ++i) {
      const LProbe p = l_pointwise(loc.field, model, probes[i], radii);
      const double expect = theta.eval(probes[i]);
      probe_vals.push_back(json{{"l", p.liminf_estimate}, {"theta", expect}});
      probes_ok = probes_ok &&
                  std::abs(p.liminf_estimate - expect) <=
                      0.05 * std::max(1.0, std::abs(expect));
    }
    out.push_back(make_record(
        "localize-pointwise-" + tag,
        "pointwise singularity weight along V recovers the torus profile",
        "derived", probe_vals, json{{"matches_theta", true}}, 0.05, probes_ok));

    out.push_back(make_record(
        "localize-inequality-" + tag,
        "type bounded by mass", "derived",
        json{{"sigma", ss.sigma_hat}, {"nu", nu_hat}},
        json{{"sigma_le_nu", true}}, 0.02,
        ss.sigma_hat <= nu_hat + 0.02));
  }
}

void experiment_siu(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  const FlatModel model(2, 1, 2);

  for (const double gamma : {0.5, 2.0}) {
    const ScalarField f =
        ScalarField::radial(WeightFamily::g_pure(1, 1, gamma));
    const SiuReport rep = siu_scan(f, model, 16, cfg.threads);
    const bool ok = rep.constant_ok && close_rel(rep.l_min, gamma, 0.03);
    out.push_back(make_record(
        "constancy-radial-g" + std::to_string(gamma),
        "pointwise weight of a log pole is constant along V", "exact",
        json{{"l_min", rep.l_min}, {"l_max", rep.l_max},
             {"spread", rep.spread}},
        json{{"value", gamma}}, 0.03, ok));
  }

  TrigTerm t;
  t.freq = {1, 0};
  t.amplitude = 0.5;
  const ThetaField theta(1.0, {t}, model.torus_periods);
  const ScalarField falsifier = ScalarField::scaled_log(theta);
  const SiuReport rep = siu_scan(falsifier, model, 16, cfg.threads);
  out.push_back(make_record(
      "constancy-falsifier",
      "a nonconstant log-pole profile along V cannot stay in the cone",
      "derived",
      json{{"violations", rep.scan.violations},
           {"first_r", rep.scan.first_violation_r}},
      json{{"violation_found", true}}, 0.0, rep.violation_found));

  // A truncated pole: the pointwise weight tends to zero only
  // logarithmically in the radius, so the checkable content at double
  // precision is its constancy along V, not its limiting value.
  const ScalarField truncated = ScalarField::affine(
      {{1.0, ScalarField::floored(
                 ScalarField::radial(WeightFamily::g_pure(1, 1)), -10.0)},
       {1.0, ScalarField::norm_sq(false)}},
      0.0);
  const SiuReport rb = siu_scan(truncated, model, 16, cfg.threads, 0.03);
  out.push_back(make_record(
      "constancy-bounded",
      "a truncated pole has constant pointwise weight along V", "exact",
      json{{"l_min", rb.l_min}, {"l_max", rb.l_max}, {"spread", rb.spread}},
      json{{"spread", 0.0}}, 0.03, rb.spread <= 0.03));
}

void experiment_compare(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  const FlatModel& model = cfg.model;
  const Calibration calib = calibrate(model);
  IntegralParams params;
  params.seed = cfg.seed;
  params.threads = cfg.threads;
  const TubeMethod method =
      model.m == 1 ? TubeMethod::Flux : TubeMethod::RadialQuadrature;
  const std::string tag =
      "k" + std::to_string(model.k) + "m" + std::to_string(model.m);

  const ScalarField psi =
      ScalarField::radial(WeightFamily::g_pure(model.k, model.m, 1.5));
  const BoundsReport eq = compare_bounds(psi, model, calib, method, params);
  out.push_back(make_record(
      "compare-equality-" + tag,
      "type equals mass for multiples of the reference weight", "exact",
      json{{"sigma", eq.sigma_hat}, {"nu", eq.nu_hat}},
      json{{"sigma", 1.5}, {"nu", 1.5}}, 0.02,
      eq.holds && close_rel(eq.sigma_hat, 1.5, 0.02) &&
          close_rel(eq.nu_hat, 1.5, 0.02)));

  const ScalarField smooth = ScalarField::affine(
      {{1.0, ScalarField::radial(WeightFamily::g_pure(model.k, model.m))},
       {1.0, ScalarField::norm_sq(false)}},
      0.0);
  const BoundsReport sm = compare_bounds(smooth, model, calib, method, params);
  out.push_back(make_record(
      "compare-smooth-" + tag,
      "smooth perturbations change neither side", "exact",
      json{{"sigma", sm.sigma_hat}, {"nu", sm.nu_hat}},
      json{{"sigma", 1.0}, {"nu", 1.0}}, 0.02,
      sm.holds && close_rel(sm.sigma_hat, 1.0, 0.02) &&
          close_rel(sm.nu_hat, 1.0, 0.02)));

  // The separating example: zero type, positive mass.
  const FlatModel sep_model(3, 2, 1);
  const ThetaField theta = bump_theta(sep_model);
  LocalizeSearch search;
  search.threads = cfg.threads;
  const LocalizedField loc = make_localized(theta, 1.5, 2, 1, sep_model, search);
  const Calibration sep_calib = calibrate(sep_model);
  IntegralParams sp = params;
  const BoundsReport strict =
      compare_bounds(loc.field, sep_model, sep_calib, TubeMethod::Flux, sp);
  out.push_back(make_record(
      "compare-strict",
      "the bound can be strict: zero type with unit mean mass", "stated",
      json{{"sigma", strict.sigma_hat}, {"nu", strict.nu_hat}},
      json{{"sigma", 0.0}, {"nu", theta.mean()}}, 0.05,
      strict.holds && strict.sigma_hat <= 0.02 &&
          close_rel(strict.nu_hat, theta.mean(), 0.05)));
}

void experiment_minimal(const RunConfig& cfg, std::vector<CheckRecord>& out) {
  json kappas = cfg.params.value("kappas", json::parse("[3,4]"));
  for (const int kappa : kappas) {
    const WeightFamily w = minimal_real_weight(kappa);
    // radii where the pole terms are O(1): the identity is exact and the
    // check measures roundoff, not truncation
    double worst = 0.0;
    for (const double r : log_grid(0.05, 1.0, 20))
      worst = std::max(worst, std::abs(laplacian_residual(w, r)));
    out.push_back(make_record(
        "minimal-harmonic-k" + std::to_string(kappa),
        "the codimension-kappa pole is harmonic off the submanifold", "exact",
        worst, 0.0, 1e-8, worst < 1e-8));
  }

  // Perturbed control: -1/r + r in kappa = 3 has radial Laplacian 2/r.
  double worst = 0.0;
  for (const double r : log_grid(1e-2, 1.0, 20)) {
    const DerivTriple pole = eval_weight(minimal_real_weight(3), r);
    const DerivTriple lin{r, 1.0, 0.0};
    const double res = radial_laplacian(pole + lin, 3, r);
    worst = std::max(worst, std::abs(res - 2.0 / r));
  }
  out.push_back(make_record(
      "minimal-control",
      "a linear perturbation contributes exactly its own Laplacian", "exact",
      worst, 0.0, 1e-8, worst < 1e-8));
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (std::find(kExperiments.begin(), kExperiments.end(), experiment) ==
      kExperiments.end())
    throw ConstraintError("unknown experiment: " + experiment);
  if (format != "csv" && format != "json" && format != "both")
    throw ConstraintError("format must be csv, json, or both");
  if (threads < 1) throw ConstraintError("threads must be >= 1");
  if (out_dir.empty()) throw ConstraintError("output directory must be set");
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  if (j.contains("model")) {
    const auto& m = j["model"];
    c.model.n = m.value("n", c.model.n);
    c.model.k = m.value("k", c.model.k);
    c.model.m = m.value("m", c.model.m);
    c.model.tube_radius = m.value("tube_radius", c.model.tube_radius);
    if (m.contains("periods"))
      c.model.torus_periods = m["periods"].get<std::vector<double>>();
    else
      c.model.torus_periods.assign(
          static_cast<std::size_t>(c.model.n - c.model.k), 2.0 * M_PI);
  }
  c.experiment = j.value("experiment", c.experiment);
  c.params = j.value("params", json::object());
  c.out_dir = j.value("out", c.out_dir);
  c.format = j.value("format", c.format);
  c.threads = j.value("threads", c.threads);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConstraintError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConstraintError(std::string("malformed config JSON: ") + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  return json{{"model",
               {{"n", model.n},
                {"k", model.k},
                {"m", model.m},
                {"tube_radius", model.tube_radius},
                {"periods", model.torus_periods}}},
              {"experiment", experiment},
              {"params", params},
              {"out", out_dir},
              {"format", format},
              {"threads", threads},
              {"seed", seed}};
}

std::string RunConfig::canonical() const {
  // Thread count affects scheduling only, never the numbers; it is excluded
  // from the identity of a run.
  json j = to_json();
  j.erase("threads");
  j.erase("out");
  j.erase("format");
  return j.dump();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

json RunReport::to_json() const {
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back(json{{"name", r.name},
                        {"anchor", r.anchor},
                        {"basis", r.basis},
                        {"measured", r.measured},
                        {"expected", r.expected},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass}});
  return json{{"experiment", experiment},
              {"records", recs},
              {"all_pass", all_pass}};
}

std::string RunReport::to_csv() const {
  std::ostringstream os;
  os << "name,basis,pass,measured,expected,tolerance\n";
  auto quote = [](const json& j) {
    std::string s = j.dump();
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += "\"\"";
      else q += ch;
    }
    return q + "\"";
  };
  for (const auto& r : records)
    os << r.name << "," << r.basis << "," << (r.pass ? "pass" : "FAIL") << ","
       << quote(r.measured) << "," << quote(r.expected) << "," << r.tolerance
       << "\n";
  return os.str();
}

std::string RunReport::summary() const {
  std::ostringstream os;
  for (const auto& r : records)
    os << (r.pass ? "[pass] " : "[FAIL] ") << r.name << "\n";
  os << (all_pass ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
  return os.str();
}

RunReport run(const RunConfig& config) {
  config.validate();
  RunReport rep;
  rep.experiment = config.experiment;

  auto dispatch = [&](const std::string& name) {
    RunConfig sub = config;
    sub.experiment = name;
    if (name == "verify-weights") experiment_verify_weights(sub, rep.records);
    else if (name == "expansion") experiment_expansion(sub, rep.records);
    else if (name == "lelong") experiment_lelong(sub, rep.records);
    else if (name == "reltype") experiment_reltype(sub, rep.records);
    else if (name == "localize") experiment_localize(sub, rep.records);
    else if (name == "siu") experiment_siu(sub, rep.records);
    else if (name == "compare") experiment_compare(sub, rep.records);
    else if (name == "minimal") experiment_minimal(sub, rep.records);
  };

  if (config.experiment == "full-suite") {
    for (const auto& e : kExperiments)
      if (e != "full-suite") dispatch(e);
  } else {
    dispatch(config.experiment);
  }

  rep.all_pass = true;
  for (const auto& r : rep.records) rep.all_pass = rep.all_pass && r.pass;
  return rep;
}

std::string write_outputs(const RunConfig& config, const RunReport& report) {
  std::ostringstream dir;
  dir << config.out_dir << "/" << std::hex << config.hash();
  std::filesystem::create_directories(dir.str());
  if (config.format == "json" || config.format == "both") {
    std::ofstream out(dir.str() + "/report.json");
    out << report.to_json().dump(2) << "\n";
  }
  if (config.format == "csv" || config.format == "both") {
    std::ofstream out(dir.str() + "/report.csv");
    out << report.to_csv();
  }
  {
    std::ofstream out(dir.str() + "/config.json");
    out << config.to_json().dump(2) << "\n";
  }
  return dir.str();
}

}  // namespace mtube
