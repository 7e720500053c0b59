#include "mtube/fields.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mtube/parallel.hpp"
#include "mtube/util.hpp"

namespace mtube {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double lattice_alpha(std::size_t d) {
  const double s = std::sqrt(double(kPrimes[d % std::size(kPrimes)]));
  return s - std::floor(s);
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

ThetaField::ThetaField(double offset, std::vector<TrigTerm> terms,
                       std::vector<double> periods)
    : offset_(offset), terms_(std::move(terms)), periods_(std::move(periods)) {
  for (double p : periods_)
    if (p <= 0.0) throw ConstraintError("ThetaField: periods must be positive");
  const std::size_t dims = 2 * periods_.size();
  for (auto& t : terms_) {
    if (t.freq.size() != dims)
      throw ConstraintError("ThetaField: frequency vector must have 2(n-k) entries");
    bool all_zero = true;
    for (int f : t.freq) all_zero = all_zero && f == 0;
    if (all_zero) {
      // Zero-frequency terms are constants; fold them into the offset so the
      // mean stays readable off the coefficients.
      offset_ += t.amplitude * std::cos(t.phase);
      t.amplitude = 0.0;
    }
  }
  std::erase_if(terms_, [](const TrigTerm& t) { return t.amplitude == 0.0; });

  // Dense nonnegativity sampling: a rank-1 lattice plus, in low dimension, a
  // uniform grid that hits the axis extrema exactly.
  min_ = max_ = offset_;
  Eigen::VectorXcd z(periods_.size());
  auto probe = [&](const std::vector<double>& x) {
    for (std::size_t a = 0; a < periods_.size(); ++a)
      z[static_cast<Eigen::Index>(a)] = {x[2 * a], x[2 * a + 1]};
    const double v = eval(z);
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
  };
  if (dims > 0 && !terms_.empty()) {
    std::vector<double> x(dims);
    for (int j = 0; j < 8192; ++j) {
      for (std::size_t d = 0; d < dims; ++d)
        x[d] = periods_[d / 2] * frac((j + 0.5) * lattice_alpha(d));
      probe(x);
    }
    if (dims <= 2) {
      const int per = 256;
      for (int j = 0; j < per * (dims == 2 ? per : 1); ++j) {
        x[0] = periods_[0] * (j % per) / double(per);
        if (dims == 2) x[1] = periods_[0] * (j / per) / double(per);
        probe(x);
      }
    }
  }
  if (min_ < -1e-9 * std::max(1.0, std::abs(max_)))
    throw ConstraintError("ThetaField: sampled minimum is negative (" +
                          std::to_string(min_) + ")");
  min_ = std::max(min_, 0.0);
}

ThetaField ThetaField::constant(double c, std::vector<double> periods) {
  return ThetaField(c, {}, std::move(periods));
}

ThetaField ThetaField::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  std::vector<TrigTerm> terms;
  for (const auto& t : j.value("terms", nlohmann::json::array())) {
    TrigTerm term;
    term.freq = t.at("freq").get<std::vector<int>>();
    term.amplitude = t.at("amplitude").get<double>();
    term.phase = t.value("phase", 0.0);
    terms.push_back(std::move(term));
  }
  return ThetaField(j.value("offset", 0.0), std::move(terms),
                    j.at("periods").get<std::vector<double>>());
}

double ThetaField::eval(const Eigen::VectorXcd& tangent) const {
  if (static_cast<std::size_t>(tangent.size()) != periods_.size())
    throw ConstraintError("ThetaField::eval: tangent dimension mismatch");
  double v = offset_;
  for (const auto& t : terms_) {
    double arg = t.phase;
    for (std::size_t a = 0; a < periods_.size(); ++a) {
      const double w = 2.0 * M_PI / periods_[a];
      arg += t.freq[2 * a] * w * tangent[static_cast<Eigen::Index>(a)].real() +
             t.freq[2 * a + 1] * w * tangent[static_cast<Eigen::Index>(a)].imag();
    }
    v += t.amplitude * std::cos(arg);
  }
  return v;
}

double ThetaField::patch_mean(
    const std::vector<std::pair<double, double>>& box) const {
  const std::size_t dims = 2 * periods_.size();
  if (box.size() != dims)
    throw ConstraintError("patch_mean: box must have 2(n-k) intervals");
  double vol = 1.0;
  for (const auto& [lo, hi] : box) {
    if (hi <= lo) throw ConstraintError("patch_mean: empty interval");
    vol *= hi - lo;
  }
  double v = offset_;
  // Each term integrates in closed form:
  //   int cos(sum c_d x_d + phase) = Re[e^{i phase} prod_d int e^{i c_d x_d}].
  for (const auto& t : terms_) {
    std::complex<double> prod = std::exp(std::complex<double>(0.0, t.phase));
    for (std::size_t d = 0; d < dims; ++d) {
      const double c = t.freq[d] * 2.0 * M_PI / periods_[d / 2];
      const auto [lo, hi] = box[d];
      if (c == 0.0) {
        prod *= hi - lo;
      } else {
        const std::complex<double> ic(0.0, c);
        prod *= (std::exp(ic * hi) - std::exp(ic * lo)) / ic;
      }
    }
    v += t.amplitude * prod.real() / vol;
  }
  return v;
}

struct ScalarField::Impl {
  Arm arm = Arm::Radial;
  WeightFamily fam;  // radial
  std::optional<ThetaField> theta;
  WeightFamily gpart, fpart;  // localized
  double C = 0.0;
  double cutoff_lo = 0.0, cutoff_hi = 0.0;
  bool include_tangent = false;  // norm_sq
  std::vector<std::pair<double, ScalarField>> parts;  // affine
  double constant = 0.0;
  std::optional<ScalarField> inner;  // floored
  double level = 0.0;
};

namespace {

// Quintic smootherstep cutoff: 1 below lo, 0 above hi.
double cutoff(double r, double lo, double hi) {
  if (r <= lo) return 1.0;
  if (r >= hi) return 0.0;
  const double t = (hi - r) / (hi - lo);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

}  // namespace

ScalarField ScalarField::radial(WeightFamily fam) {
  auto impl = std::make_shared<Impl>();
  impl->arm = Arm::Radial;
  impl->fam = std::move(fam);
  ScalarField f;
  f.impl_ = std::move(impl);
  return f;
}

ScalarField ScalarField::localized(ThetaField theta, int k, int m, double nu,
                                   double C, const FlatModel& model) {
  check_nu_range(nu, k, m);
  if (C <= 0.0) throw ConstraintError("localized: C must be positive");
  auto impl = std::make_shared<Impl>();
  impl->arm = Arm::Localized;
  impl->theta = std::move(theta);
  impl->gpart = WeightFamily::g_pure(k, m);
  WeightFamily f;
  f.kind = WeightKind::FNu;
  f.k = k;
  f.m = m;
  f.nu = nu;
  f.A = 0;  // unperturbed F_nu: the raw power/log profile
  f.validate();
  impl->fpart = f;
  impl->C = C;
  impl->cutoff_lo = model.tube_radius / 2.0;
  impl->cutoff_hi = model.tube_radius;
  ScalarField out;
  out.impl_ = std::move(impl);
  return out;
}

ScalarField ScalarField::scaled_log(ThetaField theta) {
  auto impl = std::make_shared<Impl>();
  impl->arm = Arm::ScaledLog;
  impl->theta = std::move(theta);
  ScalarField f;
  f.impl_ = std::move(impl);
  return f;
}

ScalarField ScalarField::norm_sq(bool include_tangent) {
  auto impl = std::make_shared<Impl>();
  impl->arm = Arm::NormSq;
  impl->include_tangent = include_tangent;
  ScalarField f;
  f.impl_ = std::move(impl);
  return f;
}

ScalarField ScalarField::affine(std::vector<std::pair<double, ScalarField>> parts,
                                double constant) {
  auto impl = std::make_shared<Impl>();
  impl->arm = Arm::Affine;
  impl->parts = std::move(parts);
  impl->constant = constant;
  ScalarField f;
  f.impl_ = std::move(impl);
  return f;
}

ScalarField ScalarField::floored(ScalarField inner, double level) {
  auto impl = std::make_shared<Impl>();
  impl->arm = Arm::Floored;
  impl->inner = std::move(inner);
  impl->level = level;
  ScalarField f;
  f.impl_ = std::move(impl);
  return f;
}

ScalarField::Arm ScalarField::arm() const { return impl_->arm; }

bool ScalarField::singular_on_v() const {
  switch (impl_->arm) {
    case Arm::Radial:
      return impl_->fam.singular_at_zero() && impl_->fam.epsilon == 0.0;
    case Arm::Localized:
    case Arm::ScaledLog:
      return true;
    case Arm::NormSq:
      return false;
    case Arm::Affine:
      for (const auto& [c, part] : impl_->parts)
        if (c != 0.0 && part.singular_on_v()) return true;
      return false;
    case Arm::Floored:
      return false;  // the floor bounds the field below
  }
  return false;
}

const ThetaField& ScalarField::theta() const {
  if (!impl_->theta) throw ConstraintError("field has no theta component");
  return *impl_->theta;
}

double ScalarField::localization_constant() const {
  if (impl_->arm != Arm::Localized)
    throw ConstraintError("field is not a localized weight");
  return impl_->C;
}

double ScalarField::eval(const Point& p) const {
  const double r = p.r();
  switch (impl_->arm) {
    case Arm::Radial:
      return eval_weight(impl_->fam, r).value;
    case Arm::Localized: {
      const double th = impl_->theta->eval(p.tangent) *
                        cutoff(r, impl_->cutoff_lo, impl_->cutoff_hi);
      return th * eval_weight(impl_->gpart, r).value +
             impl_->C * eval_weight(impl_->fpart, r).value;
    }
    case Arm::ScaledLog:
      if (r == 0.0) throw SingularityError("scaled log field is -infinity on V");
      return impl_->theta->eval(p.tangent) * std::log(r);
    case Arm::NormSq: {
      double v = r * r;
      if (impl_->include_tangent) v += p.tangent.squaredNorm();
      return v;
    }
    case Arm::Affine: {
      double v = impl_->constant;
      for (const auto& [c, part] : impl_->parts) v += c * part.eval(p);
      return v;
    }
    case Arm::Floored:
      try {
        return std::max(impl_->inner->eval(p), impl_->level);
      } catch (const SingularityError&) {
        return impl_->level;  // -infinity truncates to the floor
      }
  }
  throw ConstraintError("eval: unknown arm");
}

std::optional<EigenProfile> ScalarField::radial_profile(
    double r, const FlatModel& model) const {
  switch (impl_->arm) {
    case Arm::Radial:
      return radial_eigprofile(eval_weight(impl_->fam, r), r, model);
    case Arm::NormSq:
      if (!impl_->include_tangent) return EigenProfile{1.0, 1.0, model.k, model.n};
      return std::nullopt;
    case Arm::Affine: {
      EigenProfile sum{0.0, 0.0, model.k, model.n};
      for (const auto& [c, part] : impl_->parts) {
        const auto p = part.radial_profile(r, model);
        if (!p) return std::nullopt;
        sum.lambda_rad += c * p->lambda_rad;
        sum.lambda_tan += c * p->lambda_tan;
      }
      return sum;
    }
    default:
      return std::nullopt;
  }
}

void check_nu_range(double nu, int k, int m) {
  if (m < 1 || m > k) throw ConstraintError("localization requires 1 <= m <= k");
  const double hi = double(k) / double(m);
  const double lo = (m == 1) ? double(k) - 1.0 : hi - 0.5;
  if (nu < lo || nu >= hi)
    throw ConstraintError("localization exponent must lie in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

namespace {

Point shifted(const Point& p, int coord, int real_part, double delta, int k) {
  Point q = p;
  const std::complex<double> d =
      real_part == 0 ? std::complex<double>(delta, 0.0)
                     : std::complex<double>(0.0, delta);
  if (coord < k)
    q.normal[coord] += d;
  else
    q.tangent[coord - k] += d;
  return q;
}

void check_stencil_domain(const ScalarField& f, const Point& p,
                          const FlatModel& model, double step) {
  const double r = p.r();
  if (step <= 0.0) throw ConstraintError("fd step must be positive");
  if (r + 2.0 * step > model.tube_radius)
    throw GeometryError("fd stencil leaves the tube");
  if (f.singular_on_v() && r <= 2.0 * step)
    throw GeometryError("fd stencil reaches V");
}

}  // namespace

HermitianMatrix fd_hessian(const ScalarField& f, const Point& p,
                           const FlatModel& model, double step) {
  check_stencil_domain(f, p, model, step);
  const int n = model.n;
  const int k = model.k;
  const double f0 = f.eval(p);
  const double inv = 1.0 / (step * step);

  auto ev = [&](int c, int part, double d) { return f.eval(shifted(p, c, part, d, k)); };
  auto mixed = [&](int ca, int pa, int cb, int pb) {
    Point pp = shifted(shifted(p, ca, pa, step, k), cb, pb, step, k);
    Point pm = shifted(shifted(p, ca, pa, step, k), cb, pb, -step, k);
    Point mp = shifted(shifted(p, ca, pa, -step, k), cb, pb, step, k);
    Point mm = shifted(shifted(p, ca, pa, -step, k), cb, pb, -step, k);
    return (f.eval(pp) - f.eval(pm) - f.eval(mp) + f.eval(mm)) * inv / 4.0;
  };

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const double dxx = (ev(a, 0, step) - 2.0 * f0 + ev(a, 0, -step)) * inv;
    const double dyy = (ev(a, 1, step) - 2.0 * f0 + ev(a, 1, -step)) * inv;
    h(a, a) = (dxx + dyy) / 4.0;
    for (int b = a + 1; b < n; ++b) {
      const double re = mixed(a, 0, b, 0) + mixed(a, 1, b, 1);
      const double im = mixed(a, 0, b, 1) - mixed(a, 1, b, 0);
      h(a, b) = std::complex<double>(re, im) / 4.0;
      h(b, a) = std::conj(h(a, b));
    }
  }
  return HermitianMatrix(h);
}

BlockTraces fd_block_traces(const ScalarField& f, const Point& p,
                            const FlatModel& model, double step) {
  check_stencil_domain(f, p, model, step);
  const double f0 = f.eval(p);
  const double inv = 1.0 / (step * step);
  auto ev = [&](int c, int part, double d) {
    return f.eval(shifted(p, c, part, d, model.k));
  };
  BlockTraces t;
  for (int a = 0; a < model.n; ++a) {
    const double dxx = (ev(a, 0, step) - 2.0 * f0 + ev(a, 0, -step)) * inv;
    const double dyy = (ev(a, 1, step) - 2.0 * f0 + ev(a, 1, -step)) * inv;
    (a < model.k ? t.normal : t.tangent) += (dxx + dyy) / 4.0;
  }
  return t;
}

std::vector<Point> scan_grid(const FlatModel& model, double r_lo, double r_hi,
                             int n_r, int n_torus, int n_sphere,
                             std::uint64_t seed) {
  if (r_lo <= 0.0 || r_hi <= r_lo || r_hi > model.tube_radius)
    throw ConstraintError("scan_grid: need 0 < r_lo < r_hi <= tube_radius");
  const std::vector<double> radii = log_grid(r_lo, r_hi, n_r);

  const int torus_dims = 2 * (model.n - model.k);
  std::vector<Eigen::VectorXcd> torus_pts;
  if (torus_dims == 0) {
    torus_pts.emplace_back(Eigen::VectorXcd::Zero(0));
  } else {
    for (int j = 0; j < n_torus; ++j) {
      Eigen::VectorXcd z(model.n - model.k);
      for (int a = 0; a < model.n - model.k; ++a) {
        const double period = model.torus_periods[static_cast<std::size_t>(a)];
        z[a] = {period * frac((j + 0.5) * lattice_alpha(2 * a)),
                period * frac((j + 0.5) * lattice_alpha(2 * a + 1))};
      }
      torus_pts.push_back(std::move(z));
    }
  }

  std::vector<Eigen::VectorXcd> dirs;
  if (model.k == 1) {
    for (int s = 0; s < n_sphere; ++s) {
      Eigen::VectorXcd u(1);
      u[0] = std::polar(1.0, 2.0 * M_PI * s / n_sphere);
      dirs.push_back(std::move(u));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int s = 0; s < n_sphere; ++s) {
      Eigen::VectorXcd u(model.k);
      for (int a = 0; a < model.k; ++a) u[a] = {gauss(rng), gauss(rng)};
      u /= u.norm();
      dirs.push_back(std::move(u));
    }
  }

  std::vector<Point> grid;
  grid.reserve(radii.size() * torus_pts.size() * dirs.size());
  for (const double r : radii)
    for (const auto& t : torus_pts)
      for (const auto& u : dirs) grid.push_back(Point{r * u, t});
  return grid;
}

std::string ScanReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"points\":" << point_count << ",\"violations\":" << violations
     << ",\"geometry_errors\":" << geometry_errors
     << ",\"min_margin\":" << min_margin;
  if (first_violation)
    os << ",\"first_violation_index\":" << *first_violation
       << ",\"first_violation_r\":" << first_violation_r;
  os << "}";
  return os.str();
}

ScanReport gamma_m_scan(const ScalarField& f, const FlatModel& model,
                        const std::vector<Point>& grid, double step,
                        double tolerance, int threads) {
  struct Slot {
    int state = 0;  // 0 ok, 1 violation, 2 geometry error
    double margin = 0.0;
    double r = 0.0;
  };
  std::vector<Slot> slots(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const Point& p = grid[i];
    Slot& s = slots[i];
    s.r = p.r();
    try {
      const double st = step > 0.0 ? step : fd_default_step(s.r);
      const HermitianMatrix h = fd_hessian(f, p, model, st);
      const ConeVerdict v = gamma_m_test(h, model.m, tolerance);
      s.margin = v.margin;
      s.state = v.status == ConeStatus::Outside ? 1 : 0;
    } catch (const GeometryError&) {
      s.state = 2;
    }
  });

  ScanReport rep;
  rep.point_count = grid.size();
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    if (s.state == 2) {
      ++rep.geometry_errors;
      continue;
    }
    rep.min_margin = std::min(rep.min_margin, s.margin);
    if (s.state == 1) {
      ++rep.violations;
      if (!rep.first_violation) {
        rep.first_violation = i;
        rep.first_violation_r = s.r;
      }
    }
  }
  if (rep.point_count == rep.geometry_errors) rep.min_margin = 0.0;
  return rep;
}

LocalizedField make_localized(const ThetaField& theta, double nu, int k, int m,
                              const FlatModel& model,
                              const LocalizeSearch& search) {
  check_nu_range(nu, k, m);
  if (model.k != k || model.m != m)
    throw ConstraintError("make_localized: model (k, m) mismatch");
  const std::vector<Point> grid =
      scan_grid(model, model.tube_radius / 50.0, model.tube_radius / 2.0,
                search.n_r, search.n_torus, search.n_sphere);
  for (double C = search.c_start; C <= search.c_cap; C *= 2.0) {
    ScalarField f = ScalarField::localized(theta, k, m, nu, C, model);
    const ScanReport rep = gamma_m_scan(f, model, grid, 0.0,
                                        search.scan_tolerance, search.threads);
    if (rep.passed()) return {std::move(f), C, rep};
  }
  throw ConstructionError(
      "make_localized: no C up to the cap passes the cone scan");
}

}  // namespace mtube
