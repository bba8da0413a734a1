#include "rotafem/linsolve.hpp"

#include <Eigen/SparseLU>
#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rotafem {

bool FieldSolution::has(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return true;
  return false;
}

const Eigen::VectorXd& FieldSolution::operator[](std::string_view name) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == name) return values[i];
  throw InvalidArgument("solution has no field " + std::string(name));
}

const Space& FieldSolution::space(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return f.space;
  throw InvalidArgument("solution has no field " + std::string(name));
}

int FieldSolution::num_dofs() const {
  int n = 0;
  for (const auto& v : values) n += static_cast<int>(v.size());
  return n;
}

double backward_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  double anorm = 0.0;
  for (int r = 0; r < A.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) s += std::abs(it.value());
    anorm = std::max(anorm, s);
  }
  const double denom = anorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double r = (A * x - b).lpNorm<Eigen::Infinity>();
  if (denom == 0.0) return r == 0.0 ? 0.0 : INFINITY;
  return r / denom;
}

namespace {

void check_input(const LinearSystem& s) {
  if (s.A.rows() != s.A.cols()) throw InvalidArgument("solve: matrix is not square");
  if (s.b.size() != s.A.rows()) throw InvalidArgument("solve: right-hand side has wrong length");
  if (s.A.rows() == 0) throw InvalidArgument("solve: empty system");
  if (!s.b.allFinite()) throw InvalidArgument("solve: non-finite right-hand side");
}

void finish(const LinearSystem& s, const Eigen::VectorXd& x, double pivot_ratio, SolveInfo* info) {
  const double res = x.allFinite() ? backward_residual(s.A, x, s.b) : INFINITY;
  if (!(res <= kResidualTolerance)) {
    std::ostringstream msg;
    msg << "solve: backward residual " << res << " exceeds " << kResidualTolerance;
    throw SolveError(msg.str(), -1, res);
  }
  if (info) *info = {res, pivot_ratio};
}

[[noreturn]] void singular(int dof, double ratio) {
  std::ostringstream msg;
  msg << "solve: singular pivot at dof " << dof << " (|u_kk| / max = " << ratio << ")";
  throw SolveError(msg.str(), dof, INFINITY);
}

struct UmfSymbolic {
  void* p = nullptr;
  ~UmfSymbolic() { if (p) umfpack_di_free_symbolic(&p); }
};
struct UmfNumeric {
  void* p = nullptr;
  ~UmfNumeric() { if (p) umfpack_di_free_numeric(&p); }
};

// Factor A (row-major, so handed to UMFPACK as A^T) and solve A x = b.
// Singular pivots are reported through dof_of (reduced -> original index).
Eigen::VectorXd umfpack_solve(const SparseMatrix& A, const Eigen::VectorXd& b, const std::vector<int>& dof_of,
                              double* pivot_ratio) {
  const int n = static_cast<int>(A.rows());
  const int* Ap = A.outerIndexPtr();
  const int* Ai = A.innerIndexPtr();
  const double* Ax = A.valuePtr();

  double control[UMFPACK_CONTROL], stats[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  UmfSymbolic sym;
  UmfNumeric num;
  int status = umfpack_di_symbolic(n, n, Ap, Ai, Ax, &sym.p, control, stats);
  if (status != UMFPACK_OK) {
    control[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
    status = umfpack_di_symbolic(n, n, Ap, Ai, Ax, &sym.p, control, stats);
  }
  if (status != UMFPACK_OK) throw SolveError("solve: symbolic factorization failed", -1, INFINITY);
  status = umfpack_di_numeric(Ap, Ai, Ax, sym.p, &num.p, control, stats);
  if (status == UMFPACK_ERROR_out_of_memory) throw SolveError("solve: out of memory in factorization", -1, INFINITY);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
    throw SolveError("solve: numeric factorization failed", -1, INFINITY);

  std::vector<double> udiag(n);
  std::vector<int> Q(n);
  int do_recip = 0;
  umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, Q.data(), udiag.data(),
                         &do_recip, nullptr, num.p);
  double umax = 0.0;
  for (double d : udiag) umax = std::max(umax, std::abs(d));
  double ratio = umax > 0.0 ? INFINITY : 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = umax > 0.0 ? std::abs(udiag[i]) / umax : 0.0;
    if (r <= kPivotTolerance) singular(dof_of.empty() ? Q[i] : dof_of[Q[i]], r);
    ratio = std::min(ratio, r);
  }
  if (pivot_ratio) *pivot_ratio = ratio;

  Eigen::VectorXd x(n);
  status = umfpack_di_solve(UMFPACK_At, Ap, Ai, Ax, x.data(), b.data(), num.p, control, stats);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
    throw SolveError("solve: triangular solve failed", -1, INFINITY);
  return x;
}

// Fields whose diagonal block splits into small invertible blocks (the
// discontinuous rotations) are eliminated exactly before factorization.
struct Condensation {
  std::vector<int> keep, drop;  // original indices, ascending
  SparseMatrix inv;             // inverse of A_CC in drop ordering
};

constexpr int kMaxLocalBlock = 8;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

// Inverts the diagonal block of one field if it splits into small
// invertible components; appends the inverse entries to trips.
bool invert_field_block(const SparseMatrix& A, const FieldRange& f, std::vector<Eigen::Triplet<double>>& trips) {
  const int n0 = f.begin, m = f.end - f.begin;
  if (m <= 0) return false;
  UnionFind uf(m);
  for (int r = n0; r < f.end; ++r) {
    int inside = 0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (it.col() >= n0 && it.col() < f.end) {
        ++inside;
        uf.join(r - n0, static_cast<int>(it.col()) - n0);
      }
    if (inside == 0 || inside > kMaxLocalBlock) return false;
  }
  std::vector<std::vector<int>> comps(m);
  for (int i = 0; i < m; ++i) {
    auto& c = comps[uf.find(i)];
    if (static_cast<int>(c.size()) == kMaxLocalBlock) return false;
    c.push_back(i + n0);
  }
  const std::size_t mark = trips.size();
  for (const auto& c : comps) {
    if (c.empty()) continue;
    const int sz = static_cast<int>(c.size());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(sz, sz);
    for (int a = 0; a < sz; ++a)
      for (SparseMatrix::InnerIterator it(A, c[a]); it; ++it) {
        const auto pos = std::find(c.begin(), c.end(), static_cast<int>(it.col()));
        if (pos != c.end()) B(a, pos - c.begin()) = it.value();
      }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) {
      trips.resize(mark);
      return false;
    }
    const Eigen::MatrixXd Binv = lu.inverse();
    for (int a = 0; a < sz; ++a)
      for (int b = 0; b < sz; ++b) trips.emplace_back(c[a], c[b], Binv(a, b));
  }
  return true;
}

bool couples(const SparseMatrix& A, const FieldRange& f, const FieldRange& g) {
  for (int r = f.begin; r < f.end; ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (it.col() >= g.begin && it.col() < g.end) return true;
  return false;
}

bool plan_condensation(const LinearSystem& s, Condensation& plan) {
  const int n = static_cast<int>(s.A.rows());
  std::vector<std::uint8_t> dropped(n, 0);
  std::vector<const FieldRange*> chosen;
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& f : s.partition) {
    if (f.begin < 0 || f.end > n) return false;
    bool free = true;
    for (const FieldRange* g : chosen) free = free && !couples(s.A, f, *g) && !couples(s.A, *g, f);
    if (!free || !invert_field_block(s.A, f, trips)) continue;
    chosen.push_back(&f);
    for (int i = f.begin; i < f.end; ++i) dropped[i] = 1;
  }
  if (chosen.empty()) return false;
  for (int r = 0; r < n; ++r) (dropped[r] ? plan.drop : plan.keep).push_back(r);
  std::vector<int> local(n, -1);
  for (std::size_t i = 0; i < plan.drop.size(); ++i) local[plan.drop[i]] = static_cast<int>(i);
  for (auto& t : trips) t = Eigen::Triplet<double>(local[t.row()], local[t.col()], t.value());
  const int nd = static_cast<int>(plan.drop.size());
  plan.inv.resize(nd, nd);
  plan.inv.setFromTriplets(trips.begin(), trips.end());
  return true;
}

SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> col_of(A.cols(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_of[cols[j]] = static_cast<int>(j);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseMatrix::InnerIterator it(A, rows[i]); it; ++it)
      if (col_of[it.col()] >= 0) trips.emplace_back(static_cast<int>(i), col_of[it.col()], it.value());
  SparseMatrix S(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

}  // namespace

Eigen::VectorXd solve_vector(const LinearSystem& system, SolveInfo* info, const SolverOptions& opts) {
  check_input(system);
  SparseMatrix A = system.A;
  A.makeCompressed();
  double ratio = 0.0;
  Condensation plan;
  Eigen::VectorXd x;
  if (opts.condense && plan_condensation(system, plan)) {
    const SparseMatrix Arr = submatrix(A, plan.keep, plan.keep);
    const SparseMatrix Arc = submatrix(A, plan.keep, plan.drop);
    const SparseMatrix Acr = submatrix(A, plan.drop, plan.keep);
    const SparseMatrix G = plan.inv * Acr;
    SparseMatrix S = Arr - SparseMatrix(Arc * G);
    S.prune(0.0);
    S.makeCompressed();
    const Eigen::VectorXd bc = gather(system.b, plan.drop);
    const Eigen::VectorXd ib = plan.inv * bc;
    const Eigen::VectorXd g = gather(system.b, plan.keep) - Arc * ib;
    const Eigen::VectorXd xr = umfpack_solve(S, g, plan.keep, &ratio);
    const Eigen::VectorXd xc = ib - G * xr;
    x.resize(A.rows());
    for (std::size_t i = 0; i < plan.keep.size(); ++i) x(plan.keep[i]) = xr(i);
    for (std::size_t i = 0; i < plan.drop.size(); ++i) x(plan.drop[i]) = xc(i);
  } else {
    x = umfpack_solve(A, system.b, {}, &ratio);
  }
  finish(system, x, ratio, info);
  if (info) info->condensed = static_cast<int>(plan.drop.size());
  return x;
}

Eigen::VectorXd solve_vector_reference(const LinearSystem& system, SolveInfo* info) {
  check_input(system);
  Eigen::SparseMatrix<double> A = system.A;
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    // Eigen reports the 1-based column of the first zero pivot in its message.
    int col = -1;
    const std::string msg = lu.lastErrorMessage();
    const auto pos = msg.find_last_of(' ');
    if (pos != std::string::npos) col = std::atoi(msg.c_str() + pos + 1) - 1;
    const int dof = col >= 0 && col < A.cols() ? lu.colsPermutation().indices()(col) : col;
    singular(dof, 0.0);
  }
  Eigen::VectorXd x = lu.solve(system.b);
  finish(system, x, NAN, info);
  return x;
}

FieldSolution split(const Discretization& disc, const Eigen::VectorXd& x) {
  if (x.size() != disc.num_dofs()) throw InvalidArgument("split: vector length does not match the dof count");
  if (!x.allFinite()) throw InvalidArgument("split: non-finite coefficients");
  FieldSolution s;
  s.kind = disc.kind;
  s.k = disc.k;
  s.fields = disc.fields;
  for (const auto& f : disc.fields) s.values.push_back(x.segment(f.offset, f.space.dof_count()));
  return s;
}

FieldSolution solve(const LinearSystem& system, const Discretization& disc, const SolverOptions& opts) {
  SolveInfo info;
  const Eigen::VectorXd x = solve_vector(system, &info, opts);
  FieldSolution s = split(disc, x);
  s.info = info;
  return s;
}

}  // namespace rotafem
