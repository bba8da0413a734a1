#include "rotafem/verify.hpp"

#include <cmath>
#include <numeric>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>

namespace rotafem {

const char* to_string(Variant v) { return v == Variant::Printed ? "printed" : "stream-function"; }

Variant parse_variant(const std::string& s) {
  if (s == "printed" || s == "A") return Variant::Printed;
  if (s == "stream-function" || s == "B") return Variant::StreamFunction;
  throw InvalidArgument("unknown variant '" + s + "' (expected printed or stream-function)");
}

const char* to_string(Geometry g) { return g == Geometry::Square ? "square" : "lshape"; }

namespace {

constexpr double kPi = std::numbers::pi;

// Value, gradient and Hessian of a scalar field (second-order forward mode).
struct Jet {
  double v = 0.0;
  Vec2 g = Vec2::Zero();
  Mat2 H = Mat2::Zero();
};

Jet var(double x, int axis) {
  Jet j;
  j.v = x;
  j.g(axis) = 1.0;
  return j;
}

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.g + b.g, a.H + b.H}; }
Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.g, s * a.H}; }
Jet operator-(double s, const Jet& a) { return {s - a.v, -a.g, -a.H}; }
Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.g * b.v + a.v * b.g, a.H * b.v + a.v * b.H + a.g * b.g.transpose() + b.g * a.g.transpose()};
}

Jet chain(const Jet& a, double f, double d1, double d2) { return {f, d1 * a.g, d1 * a.H + d2 * a.g * a.g.transpose()}; }
Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

struct Jets {
  Jet u1, u2, p;
};

using JetField = std::function<Jets(const Vec2&)>;

double curl(const Jets& j) { return j.u2.g.x() - j.u1.g.y(); }
double div(const Jets& j) { return j.u1.g.x() + j.u2.g.y(); }
Vec2 grad_curl(const Jets& j) { return {j.u2.H(0, 0) - j.u1.H(0, 1), j.u2.H(1, 0) - j.u1.H(1, 1)}; }
Vec2 grad_div(const Jets& j) { return {j.u1.H(0, 0) + j.u2.H(1, 0), j.u1.H(0, 1) + j.u2.H(1, 1)}; }
Mat2 grad_u(const Jets& j) {
  Mat2 G;
  G.row(0) = j.u1.g.transpose();
  G.row(1) = j.u2.g.transpose();
  return G;
}

JetField square_field(Variant variant, double a, double lambda) {
  return [=](const Vec2& x) {
    const Jet X = var(x.x(), 0), Y = var(x.y(), 1);
    const Jet p = X * Y * (1.0 - X) * (a - Y);
    const Jet sx = sin(kPi * X), cx = cos(kPi * X), sy = sin(kPi * Y), cy = cos(kPi * Y);
    const Jet q = (0.5 / lambda) * p;
    Jets j;
    j.p = p;
    if (variant == Variant::Printed) {
      j.u1 = kPi * (sx * sx * sy * cy) + q;
      j.u2 = (-kPi) * (sx * cy * sy * sy) + q;
    } else {
      j.u1 = kPi * (sx * sx * sy * cy) + q;
      j.u2 = (-kPi) * (sx * cx * sy * sy) + q;
    }
    return j;
  };
}

JetField lshape_field() {
  return [](const Vec2& x) {
    const Jet X = var(x.x(), 0), Y = var(x.y(), 1);
    const Jet r2 = X * X + Y * Y;
    const Jet e = exp(-50.0 * r2);
    return Jets{e, e, exp(-25.0 * r2)};
  };
}

// Subdomain of a point for the partitioned geometries.
bool poro_at(const ManufacturedCase& c, const Vec2& x) {
  switch (c.kind) {
    case ProblemKind::Elasticity: return false;
    case ProblemKind::Biot: return true;
    case ProblemKind::Interface: break;
  }
  return c.geometry == Geometry::Square ? x.y() < 0.5 : x.y() > x.x();
}

void build(ManufacturedCase& c, const JetField& field) {
  const ProblemParams P = c.params;
  const double se = std::sqrt(P.elastic.mu), sp = std::sqrt(P.poro.mu);
  const double ste = P.elastic.stiffness(), stp = P.poro.stiffness();
  const double cc = P.c0 + P.alpha * P.alpha / stp;
  const double kx = P.kappa / P.xi;
  const bool fluid = c.kind != ProblemKind::Elasticity;

  ExactSolution& ex = c.exact;
  ex.u = [field](const Vec2& x) {
    const Jets j = field(x);
    return Vec2(j.u1.v, j.u2.v);
  };
  ex.grad_u = [field](const Vec2& x) { return grad_u(field(x)); };
  ex.omega_elastic = [field, se](const Vec2& x) { return se * curl(field(x)); };
  ex.pressure_elastic = [field, ste](const Vec2& x) { return -ste * div(field(x)); };
  ex.omega_poro = [field, sp](const Vec2& x) { return sp * curl(field(x)); };
  if (fluid) {
    ex.total_pressure = [field, P, stp](const Vec2& x) {
      const Jets j = field(x);
      return P.alpha * j.p.v - stp * div(j);
    };
    ex.fluid_pressure = [field](const Vec2& x) { return field(x).p.v; };
    ex.grad_fluid = [field](const Vec2& x) { return field(x).p.g; };
  }

  c.second.grad_curl_u = [field](const Vec2& x) { return grad_curl(field(x)); };
  c.second.grad_div_u = [field](const Vec2& x) { return grad_div(field(x)); };
  c.second.laplace_fluid = [field](const Vec2& x) { return field(x).p.H.trace(); };

  ProblemData& d = c.data;
  d.f_elastic = [field, P, ste](const Vec2& x) {
    const Jets j = field(x);
    const Vec2 gc = grad_curl(j);
    return Vec2(P.elastic.mu * Vec2(gc.y(), -gc.x()) - ste * grad_div(j));
  };
  d.dirichlet = ex.u;
  if (!fluid) return;
  d.f_poro = [field, P, stp](const Vec2& x) {
    const Jets j = field(x);
    const Vec2 gc = grad_curl(j);
    return Vec2(P.poro.mu * Vec2(gc.y(), -gc.x()) + P.alpha * j.p.g - stp * grad_div(j));
  };
  d.source = [field, P, stp, cc, kx](const Vec2& x) {
    const Jets j = field(x);
    const double phi = P.alpha * j.p.v - stp * div(j);
    return cc * j.p.v - P.alpha / stp * phi - kx * j.p.H.trace();
  };
  d.boundary_flux = [field, P, kx](const Vec2& x, const Vec2& n) {
    return kx * (field(x).p.g - P.rho * P.gravity).dot(n);
  };
  if (c.kind != ProblemKind::Interface) return;
  d.interface_flux = d.boundary_flux;
  d.interface_traction = [field, P, stp, ste](const Vec2& x, const Vec2& n) {
    const Jets j = field(x);
    const double jump_p = P.alpha * j.p.v - stp * div(j) + ste * div(j);
    const double jump_w = (P.poro.mu - P.elastic.mu) * curl(j);
    return Vec2(jump_p * n - jump_w * Vec2(-n.y(), n.x()));
  };
}

std::string kind_name(ProblemKind k) { return to_string(k); }

}  // namespace

Mesh ManufacturedCase::mesh(int n) const {
  const Partition part = kind == ProblemKind::Interface ? partition : Partition::None;
  if (geometry == Geometry::Square) return build_unit_square(n, part);
  // Criss-cross: every square split by both diagonals.
  const Mesh m = build_l_shape(n, part);
  std::vector<int> all(m.num_cells());
  std::iota(all.begin(), all.end(), 0);
  return bisect(m, all);
}

ProblemSetup ManufacturedCase::setup(int k, ExecPolicy policy) const {
  ProblemSetup s;
  s.kind = kind;
  s.k = k;
  s.params = params;
  s.data = data;
  s.exact = exact;
  s.policy = policy;
  return s;
}

ProblemParams square_params(double E, double nu, double kappa) {
  ProblemParams P;
  P.elastic = P.poro = Material::from_young(E, nu);
  P.alpha = 1.0;
  P.c0 = 1.0;
  P.kappa = kappa;
  P.xi = 1.0;
  P.rho = 1.0;
  P.gravity = Vec2::Zero();
  return P;
}

ProblemParams lshape_params() {
  ProblemParams P;
  P.elastic = Material::from_young(10.0, 0.25);
  P.poro = Material::from_young(1.0, 0.45);
  P.c0 = 0.0;
  P.alpha = 1.0;
  P.xi = 1.0;
  P.kappa = 1e-3;
  P.rho = 1.0;
  P.gravity = Vec2::Zero();
  return P;
}

ManufacturedCase case_square(ProblemKind kind, const ProblemParams& params, double a, Variant variant) {
  params.validate();
  ManufacturedCase c;
  c.kind = kind;
  c.geometry = Geometry::Square;
  c.partition = kind == ProblemKind::Interface ? Partition::HorizontalMidline : Partition::None;
  c.variant = variant;
  c.a = a;
  c.params = params;
  c.name = kind_name(kind) + std::string("-square");
  const double lambda = kind == ProblemKind::Elasticity ? params.elastic.lambda : params.poro.lambda;
  build(c, square_field(variant, a, lambda));
  self_check(c);
  return c;
}

ManufacturedCase case_lshape(const ProblemParams& params, ProblemKind kind) {
  params.validate();
  ManufacturedCase c;
  c.kind = kind;
  c.geometry = Geometry::LShape;
  c.partition = kind == ProblemKind::Interface ? Partition::LShapeDiagonal : Partition::None;
  c.params = params;
  c.a = 0.0;
  c.name = kind_name(kind) + std::string("-lshape");
  build(c, lshape_field());
  self_check(c);
  return c;
}

SelfCheck self_check(const ManufacturedCase& c, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto sample = [&]() {
    for (;;) {
      const Vec2 x = c.geometry == Geometry::Square ? Vec2(U(rng), U(rng)) : Vec2(2 * U(rng) - 1, 2 * U(rng) - 1);
      if (c.geometry == Geometry::LShape && x.x() > 0 && x.y() > 0) continue;
      return x;
    }
  };
  const ProblemParams& P = c.params;
  const ExactSolution& ex = c.exact;
  const bool fluid = c.kind != ProblemKind::Elasticity;
  const double h = 1e-6;
  const Vec2 ex_(h, 0), ey_(0, h);
  auto curl_at = [&](const Vec2& x) { return curl_of_vector(ex.grad_u(x)); };
  auto div_at = [&](const Vec2& x) { return div_of_vector(ex.grad_u(x)); };
  auto fd = [&](const ScalarFunction& f, const Vec2& x) {
    return Vec2((f(x + ex_) - f(x - ex_)) / (2 * h), (f(x + ey_) - f(x - ey_)) / (2 * h));
  };

  // Per-quantity maxima of |coded - reference| and |coded|.
  struct Pair {
    double diff = 0.0, scale = 0.0;
    void add(double d, double s) {
      diff = std::max(diff, d);
      scale = std::max(scale, s);
    }
    double rel() const { return scale > 0 ? diff / scale : diff; }
  };
  Pair dgu, dgp, dgc, dgd, dlp, rmom, rrot, rcon, rmass, rdir;

  for (int s = 0; s < samples; ++s) {
    const Vec2 x = sample();
    const Mat2 G = ex.grad_u(x);
    for (int i = 0; i < 2; ++i) {
      const Vec2 g = fd([&](const Vec2& y) { return ex.u(y)(i); }, x);
      dgu.add((g - G.row(i).transpose()).norm(), G.row(i).norm());
    }
    const Vec2 gc = c.second.grad_curl_u(x), gd = c.second.grad_div_u(x);
    // div u may be a small cancellation of O(1) terms, so both second-order
    // quantities share one scale.
    const double s2 = std::max(gc.norm(), gd.norm());
    dgc.add((fd(curl_at, x) - gc).norm(), s2);
    dgd.add((fd(div_at, x) - gd).norm(), s2);
    if (fluid) {
      const Vec2 gp = ex.grad_fluid(x);
      dgp.add((fd(ex.fluid_pressure, x) - gp).norm(), gp.norm());
      const double lap = (ex.grad_fluid(x + ex_).x() - ex.grad_fluid(x - ex_).x() + ex.grad_fluid(x + ey_).y() -
                          ex.grad_fluid(x - ey_).y()) /
                         (2 * h);
      dlp.add(std::abs(lap - c.second.laplace_fluid(x)), std::abs(c.second.laplace_fluid(x)));
    }

    const bool poro = poro_at(c, x);
    const Material& m = poro ? P.poro : P.elastic;
    const double sm = std::sqrt(m.mu), st = m.stiffness();
    const double om = poro ? ex.omega_poro(x) : ex.omega_elastic(x);
    rrot.add(std::abs(om - sm * curl_of_vector(G)), std::abs(om));
    const double pr = poro ? ex.total_pressure(x) : ex.pressure_elastic(x);
    const double pf = poro ? ex.fluid_pressure(x) : 0.0;
    rcon.add(std::abs(div_of_vector(G) + pr / st - (poro ? P.alpha * pf / st : 0.0)), std::abs(div_of_vector(G)));
    // grad of the pressure-like field from coded second derivatives
    const Vec2 gpr = (poro ? Vec2(P.alpha * ex.grad_fluid(x)) : Vec2::Zero()) - st * gd;
    const Vec2 f = poro ? c.data.f_poro(x) : c.data.f_elastic(x);
    const Vec2 mom = f - (m.mu * Vec2(gc.y(), -gc.x()) + gpr);
    rmom.add(mom.norm(), f.norm());
    if (poro) {
      const double cc = P.c0 + P.alpha * P.alpha / P.poro.stiffness();
      const double src = c.data.source(x);
      const double r = src - cc * pf + P.alpha / st * pr + P.kappa / P.xi * c.second.laplace_fluid(x);
      rmass.add(std::abs(r), std::abs(src));
    }
    rdir.add((c.data.dirichlet(x) - ex.u(x)).norm(), ex.u(x).norm());
  }

  SelfCheck out;
  for (const Pair* p : {&dgu, &dgp, &dgc, &dgd, &dlp}) out.derivative_error = std::max(out.derivative_error, p->rel());
  for (const Pair* p : {&rmom, &rrot, &rcon, &rmass, &rdir})
    out.strong_residual = std::max(out.strong_residual, p->rel());
  if (out.derivative_error > kDerivativeTolerance)
    throw TopologyError(c.name + ": coded derivatives disagree with central differences (" +
                        std::to_string(out.derivative_error) + ")");
  if (out.strong_residual > kStrongResidualTolerance)
    throw TopologyError(c.name + ": manufactured data do not satisfy the equations (" +
                        std::to_string(out.strong_residual) + ")");
  return out;
}

std::vector<ErrorColumn> error_columns(ProblemKind kind, const ErrorReport& e, bool mean_term) {
  const double pm = mean_term ? e.pressure_mean2 : 0.0;
  const double tm = mean_term ? e.total_pressure_mean2 : 0.0;
  switch (kind) {
    case ProblemKind::Elasticity:
      return {{"e_omega", std::sqrt(e.omega2 + e.pressure2 + pm), NAN}, {"e_u", e.e_u(), NAN}};
    case ProblemKind::Biot:
      return {{"e_omega", std::sqrt(e.omega2 + e.total_pressure2 + tm), NAN},
              {"e_u", e.e_u(), NAN},
              {"e_p", e.e_fluid(), NAN}};
    case ProblemKind::Interface:
      return {{"e_omegaP", std::sqrt(e.omega_poro2), NAN},
              {"e_phiP", std::sqrt(e.total_pressure2 + tm), NAN},
              {"e_pP", e.e_fluid(), NAN},
              {"e_u", e.e_u(), NAN},
              {"e_omegaE", std::sqrt(e.omega_elastic2), NAN},
              {"e_pE", std::sqrt(e.pressure2 + pm), NAN}};
  }
  return {};
}

double uniform_rate(double e, double e_next, double h, double h_next) {
  if (e == e_next && h == h_next) return 0.0;
  return std::log(e / e_next) / std::log(h / h_next);
}

double dof_rate(double e, double e_next, double n, double n_next) {
  if (e == e_next) return 0.0;
  return -2.0 * std::log(e / e_next) / std::log(n / n_next);
}

std::vector<double> adaptive_rate(const std::vector<double>& errors, const std::vector<int>& dofs) {
  if (errors.size() != dofs.size() || errors.size() < 2)
    throw InvalidArgument("adaptive_rate: need at least two matching records");
  std::vector<double> r;
  for (std::size_t i = 1; i < errors.size(); ++i) r.push_back(dof_rate(errors[i - 1], errors[i], dofs[i - 1], dofs[i]));
  return r;
}

namespace {

ConvergenceRow make_row(ProblemKind kind, const StepRecord& rec, bool mean_term) {
  ConvergenceRow row;
  row.dofs = rec.dofs;
  row.cells = rec.cells;
  row.h = rec.h_max;
  row.estimator = rec.estimator;
  row.oscillation = rec.oscillation;
  row.solve_residual = rec.solve_residual;
  row.seconds = rec.seconds;
  row.total_rate = NAN;
  if (rec.errors) {
    row.errors = error_columns(kind, *rec.errors, mean_term);
    double s = 0.0;
    for (const ErrorColumn& c : row.errors) s += c.value * c.value;
    row.total = std::sqrt(s);
    row.effectivity = effectivity(row.total, row.estimator);
  }
  return row;
}

template <class Rate>
void fill_rates(std::vector<ConvergenceRow>& rows, Rate rate) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ConvergenceRow &a = rows[i - 1], &b = rows[i];
    for (std::size_t j = 0; j < b.errors.size(); ++j) b.errors[j].rate = rate(a, b, a.errors[j].value, b.errors[j].value);
    b.total_rate = rate(a, b, a.total, b.total);
  }
}

}  // namespace

std::vector<ConvergenceRow> uniform_convergence(const ManufacturedCase& c, int k, int levels,
                                                const ConvergenceOptions& opts) {
  if (levels < 1) throw InvalidArgument("uniform_convergence: levels must be >= 1");
  const ProblemSetup setup = c.setup(k, opts.policy);
  std::vector<ConvergenceRow> rows;
  for (int l = 0; l < levels; ++l) {
    const Mesh mesh = c.mesh(c.geometry == Geometry::Square ? 4 << l : 1 << l);
    const StepResult step = solve_and_estimate(mesh, setup);
    rows.push_back(make_row(c.kind, step.record, opts.mean_term));
    rows.back().level = l;
    if (rows.size() > 1) {
      // The L-shape table has no h column; its rates use dofs.
      ConvergenceRow &a = rows[rows.size() - 2], &b = rows.back();
      auto rate = [&](double ea, double eb) {
        return c.geometry == Geometry::Square ? uniform_rate(ea, eb, a.h, b.h) : dof_rate(ea, eb, a.dofs, b.dofs);
      };
      for (std::size_t j = 0; j < b.errors.size(); ++j) b.errors[j].rate = rate(a.errors[j].value, b.errors[j].value);
      b.total_rate = rate(a.total, b.total);
    }
    if (opts.on_level) opts.on_level(rows.back(), mesh, step);
  }
  return rows;
}

std::vector<ConvergenceRow> adaptive_rows(ProblemKind kind, const AmrHistory& h, bool mean_term) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < h.records.size(); ++i) {
    rows.push_back(make_row(kind, h.records[i], mean_term));
    rows.back().level = static_cast<int>(i);
  }
  fill_rates(rows, [](const ConvergenceRow& a, const ConvergenceRow& b, double ea, double eb) {
    return dof_rate(ea, eb, a.dofs, b.dofs);
  });
  return rows;
}

std::string format_error(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string format_rate(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace {

bool has_h_column(const std::vector<ConvergenceRow>& rows) {
  // Interface tables list six error columns and no mesh size.
  return rows.empty() || rows.front().errors.size() != 6;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_table_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  const bool with_h = has_h_column(rows);
  out << "dofs";
  if (with_h) out << ",h";
  if (!rows.empty())
    for (const ErrorColumn& c : rows.front().errors) out << ',' << c.name << ",r_" << c.name.substr(2);
  out << ",e,eff\r\n";
  for (const ConvergenceRow& r : rows) {
    out << r.dofs;
    if (with_h) out << ',' << fixed4(r.h);
    for (const ErrorColumn& c : r.errors) out << ',' << format_error(c.value) << ',' << format_rate(c.rate);
    out << ',' << format_error(r.total) << ',' << std::fixed << std::setprecision(3) << r.effectivity
        << std::defaultfloat << "\r\n";
  }
}

void write_table_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path);
  write_table_csv(out, rows);
}

void print_table(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  if (rows.empty()) return;
  const bool with_h = has_h_column(rows);
  out << std::setw(8) << "DoFs";
  if (with_h) out << std::setw(8) << "h";
  for (const ErrorColumn& c : rows.front().errors)
    out << std::setw(10) << c.name << std::setw(9) << ("r_" + c.name.substr(2));
  out << std::setw(10) << "e" << std::setw(7) << "eff" << '\n';
  for (const ConvergenceRow& r : rows) {
    out << std::setw(8) << r.dofs;
    if (with_h) out << std::setw(8) << fixed4(r.h);
    for (const ErrorColumn& c : r.errors) {
      const std::string rate = format_rate(c.rate);
      out << std::setw(10) << format_error(c.value) << std::setw(9) << (rate.empty() ? "--" : rate);
    }
    char eff[16];
    std::snprintf(eff, sizeof eff, "%.3f", r.effectivity);
    out << std::setw(10) << format_error(r.total) << std::setw(7) << eff << '\n';
  }
}

}  // namespace rotafem
