#include "latmax/maximizer.hpp"

#include <algorithm>
#include <cmath>

#include "latmax/errors.hpp"

namespace latmax {
namespace {

mpq_class membership_tol(long prec) {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(prec / 2));
  return mpq_class(1, den);
}

bool has_integer_coords(const LatticeBasis& basis, const LogVector& w) {
  for (const Scalar& c : basis.coords_in(w)) {
    if (c.is_exact()) {
      if (c.rat().get_den() != 1) return false;
    } else if (!integer_within(c, membership_tol(c.precision()))) {
      return false;
    }
  }
  return true;
}

std::vector<double> row_norms(const LatticeBasis& basis) {
  std::vector<double> out(basis.rank());
  for (std::size_t i = 0; i < basis.rank(); ++i)
    out[i] = std::sqrt(std::max(norm_sq(basis[i]).to_double(), 1e-300));
  return out;
}

double grid_target(double det, const TuningParams& tp) {
  const double vol = det / tp.bound;
  return std::pow(std::max(vol, 1.0), 1.0 - tp.delta);
}

}  // namespace

TuningParams tune_unbounded(double det, std::size_t n) {
  if (!(det > 0) || n == 0) throw Error("tuning needs det > 0, n >= 1");
  const double nn = static_cast<double>(n);
  TuningParams tp;
  tp.bound = std::max(
      1.0, std::pow(det, 1 / (2 * nn + 1)) * std::pow(nn, -2 / (2 * nn + 1)));
  tp.delta = 0.5;
  tp.grid = make_grid(grid_target(det, tp), std::vector<double>(n, 1.0));
  return tp;
}

double unbounded_stock(double det, std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::pow(det, nn / (2 * nn + 1)) * std::pow(nn, 1 / (2 * nn + 1));
}

TuningParams tune_memory_limited(double det, std::size_t n,
                                 unsigned long long cap) {
  if (!(det > 0) || n == 0) throw Error("tuning needs det > 0, n >= 1");
  if (cap <= 1) throw MemoryCapExceeded("stock cap must exceed one entry");
  const double nn = static_cast<double>(n);
  const double t = static_cast<double>(cap);
  if (t >= unbounded_stock(det, n))
    throw CapNotBinding("cap is looser than the unbounded optimum");
  TuningParams tp;
  tp.bound = std::max(1.0, std::pow(det / t, 1 / (nn + 1)));
  tp.delta = (1 + nn) * std::log(t) / (std::log(t) + nn * std::log(det));
  tp.memory_cap = cap;
  tp.grid = make_grid(grid_target(det, tp), std::vector<double>(n, 1.0));
  return tp;
}

std::vector<unsigned long> sieve_primes(double bound) {
  std::vector<unsigned long> out;
  if (!(bound >= 2)) return out;
  if (bound > 5e7) throw RegionTooLarge("prime bound too large to sieve");
  const auto limit = static_cast<unsigned long>(bound);
  std::vector<char> composite(limit + 1, 0);
  for (unsigned long p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    out.push_back(p);
    for (unsigned long q = p * p; q <= limit; q += p) composite[q] = 1;
  }
  return out;
}

CandidateSet candidate_set(const LatticeBasis& basis, unsigned long p) {
  const std::size_t n = basis.rank();
  if (p < 2) throw Error("candidate prime must be >= 2");
  CandidateSet set;
  set.prime = p;
  std::vector<unsigned long> a(n >= 1 ? n - 1 : 0, 0);
  const mpq_class inv(1, p);
  for (;;) {
    LogVector acc = basis[n - 1];
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (a[i]) acc = acc + scaled(mpq_class(a[i]), basis[i]);
    set.points.push_back(scaled(inv, acc));
    std::size_t i = 0;
    while (i + 1 < n && ++a[i] == p) a[i++] = 0;
    if (i + 1 >= n) break;
  }
  return set;
}

std::vector<std::vector<unsigned long>> cyclic_subgroup_representatives(
    unsigned long p, std::size_t m) {
  std::vector<std::vector<unsigned long>> out;
  for (std::size_t k = 0; k < m; ++k) {
    // 1 at position k, free prefix, zero suffix
    std::vector<unsigned long> t(m, 0);
    t[k] = 1;
    for (;;) {
      out.push_back(t);
      std::size_t i = 0;
      while (i < k && ++t[i] == p) t[i++] = 0;
      if (i == k) break;
    }
  }
  return out;
}

std::vector<unsigned long> make_grid(double target,
                                     const std::vector<double>& norms) {
  const std::size_t n = norms.size();
  if (n == 0) throw Error("grid needs n >= 1");
  if (!(target >= 1)) target = 1;
  if (target > 9e15) throw RegionTooLarge("sweep grid too large");

  double logmean = 0;
  for (double v : norms) logmean += std::log(std::max(v, 1e-300));
  logmean /= static_cast<double>(n);
  const double per = std::pow(target, 1.0 / static_cast<double>(n));

  std::vector<unsigned long> a(n);
  std::vector<double> weight(n);
  double prod = 1;
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = std::exp(std::log(std::max(norms[i], 1e-300)) - logmean);
    double ideal = std::min(per * weight[i], 4e15);
    a[i] = std::max<unsigned long>(1, static_cast<unsigned long>(std::llround(ideal)));
    prod *= static_cast<double>(a[i]);
  }
  // Land prod a_i in [target, 2*target]: each unit change scales the product
  // by at most 2, so one pass in each direction settles it.
  while (prod < target) {
    std::size_t pick = 0;
    double best = static_cast<double>(a[0]) / weight[0];
    for (std::size_t i = 1; i < n; ++i) {
      double r = static_cast<double>(a[i]) / weight[i];
      if (r < best) best = r, pick = i;
    }
    prod = prod / static_cast<double>(a[pick]) * static_cast<double>(a[pick] + 1);
    ++a[pick];
  }
  while (prod > 2 * target) {
    std::size_t pick = n;
    double best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] < 2) continue;
      double r = static_cast<double>(a[i]) / weight[i];
      if (pick == n || r > best) best = r, pick = i;
    }
    if (pick == n) break;
    prod = prod / static_cast<double>(a[pick]) * static_cast<double>(a[pick] - 1);
    --a[pick];
  }
  return a;
}

LatticeBasis prime_scan(const LatticeBasis& basis, LatticeOracle& oracle,
                        double bound, RunStats& stats) {
  const auto primes = sieve_primes(bound);
  LatticeBasis cur = basis;
  bool dirty = true;
  while (dirty) {
    dirty = false;
    for (unsigned long p : primes) {
      ++stats.primes_scanned;
      for (const LogVector& w : candidate_set(cur, p).points) {
        ++stats.membership_tests;
        if (!oracle.contains(w)) continue;
        Extension ext = extend_basis(cur, w, p);
        cur = reduce_basis(ext.basis);
        stats.enlargements.push_back(
            {HitSource::prime_probe, mpz_class(p), ext.index});
        stats.index_found *= ext.index;
        ++stats.restarts;
        dirty = true;
        break;  // restart the scan from p = 2 on the enlarged lattice
      }
      if (dirty) break;
    }
  }
  return cur;
}

std::optional<LogVector> bsgs_search(const LatticeBasis& basis,
                                     LatticeOracle& oracle,
                                     const TuningParams& params,
                                     RunStats& stats) {
  const std::size_t n = basis.rank();
  if (params.grid.size() != n) throw Error("grid does not match basis rank");
  const double det = basis.determinant().to_double();
  const double vol = det / params.bound;

  double ncells = 1;
  for (unsigned long c : params.grid) ncells *= static_cast<double>(c);
  const double stock = std::max(1.0, vol / ncells);
  const auto stock_entries =
      static_cast<unsigned long long>(std::ceil(stock - 1e-9));
  const bool model = !oracle.self_instrumenting();
  // Self-instrumenting oracles manage (and cap) their own baby stock; the
  // cost model below applies only to oracles answering for free.
  if (model && params.memory_cap && stock_entries > params.memory_cap)
    throw MemoryCapExceeded("baby stock would exceed the memory cap");
  ++stats.sweeps;
  if (model) {
    stats.max_baby_stock = std::max(stats.max_baby_stock, stock_entries);
    stats.baby_steps += stock_entries;
  }

  mpq_class inv_bound(1);
  inv_bound /= mpq_class(params.bound);  // doubles are dyadic: exact

  std::vector<unsigned long> idx(n, 0);
  for (;;) {
    Parallelepiped cell;
    cell.origin = LogVector(n, Scalar::integer(0));
    cell.generators = basis.rows();
    cell.extents.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      AxisRange ax;
      ax.lo = mpq_class(idx[i], params.grid[i]);
      ax.hi = mpq_class(idx[i] + 1, params.grid[i]);
      if (i + 1 == n) {
        ax.lo *= inv_bound;
        ax.hi *= inv_bound;
      }
      ax.lo.canonicalize();
      ax.hi.canonicalize();
      cell.extents[i] = ax;
    }
    if (model) ++stats.giant_steps;
    for (const LogVector& w : oracle.search(cell))
      if (!has_integer_coords(basis, w)) return w;
    std::size_t i = 0;
    while (i < n && ++idx[i] == params.grid[i]) idx[i++] = 0;
    if (i == n) break;
  }
  return std::nullopt;
}

MaximizeResult maximize(const LatticeBasis& basis, LatticeOracle& oracle,
                        std::optional<TuningParams> params) {
  if (oracle.rank() != basis.rank())
    throw DimensionMismatch("oracle and basis rank differ");
  LatticeBasis cur = reduce_basis(basis);
  const std::size_t n = cur.rank();
  RunStats st;

  TuningParams tp =
      params ? *params : tune_unbounded(cur.determinant().to_double(), n);

  const OracleWork before = oracle.work();
  for (;;) {
    cur = prime_scan(cur, oracle, tp.bound, st);
    // Re-derive the giant grid for the current (possibly enlarged) basis.
    TuningParams sweep_params = tp;
    sweep_params.grid =
        make_grid(grid_target(cur.determinant().to_double(), tp),
                  row_norms(cur));
    auto hit = bsgs_search(cur, oracle, sweep_params, st);
    if (!hit) break;
    // A hit's coordinate denominators divide the index [full : current],
    // which is at most det(current) / covolume(full).
    mpz_class denom_bound(0);
    const mpq_class covol = oracle.covolume_floor();
    if (covol > 0) {
      mpq_class q = cur.determinant().upper() / covol;
      denom_bound = q.get_num() / q.get_den() + 2;
    }
    Extension ext = extend_basis(cur, *hit, denom_bound);
    cur = reduce_basis(ext.basis);
    st.enlargements.push_back({HitSource::sweep, mpz_class(0), ext.index});
    st.index_found *= ext.index;
    ++st.restarts;
  }
  if (oracle.self_instrumenting()) {
    const OracleWork after = oracle.work();
    st.baby_steps += after.baby_steps - before.baby_steps;
    st.giant_steps += after.giant_steps - before.giant_steps;
    st.max_baby_stock = std::max(st.max_baby_stock, after.max_stock);
  }
  st.final_det = cur.determinant();
  return {std::move(cur), std::move(st), std::move(tp)};
}

}  // namespace latmax
