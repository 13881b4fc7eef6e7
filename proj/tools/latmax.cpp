#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "latmax/errors.hpp"
#include "latmax/io.hpp"
#include "latmax/lattice.hpp"
#include "latmax/maximizer.hpp"
#include "latmax/oracle.hpp"
#include "latmax/quad.hpp"
#include "latmax/scalar.hpp"
#include "latmax/synthetic.hpp"

namespace {

using namespace latmax;

std::string trim_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_stats_file(const std::string& path, const RunStats& stats) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  const bool json = path.size() >= 5 && path.rfind(".json") == path.size() - 5;
  out << (json ? stats_json_text(stats) : stats_text(stats));
}

// Shared tuning flags; B defaults to "auto".
struct TuneFlags {
  std::string bound = "auto";
  double delta = -1;
  unsigned long long memory = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--B", bound, "prime-scan bound (number or 'auto')");
    cmd->add_option("--delta", delta, "baby-stock exponent in (0,1)");
    cmd->add_option("--memory", memory, "baby-stock entry cap (0 = none)");
  }

  std::optional<TuningParams> resolve(double det, std::size_t n) const {
    if (bound == "auto" && delta < 0 && memory == 0) return std::nullopt;
    TuningParams p = memory ? tune_memory_limited(det, n, memory)
                            : tune_unbounded(det, n);
    if (bound != "auto") {
      p.bound = std::stod(bound);
      if (p.bound < 1) throw Error("--B must be at least 1");
      p.grid.clear();  // re-derived per sweep
    }
    if (delta >= 0) {
      if (delta <= 0 || delta >= 1) throw Error("--delta must lie in (0,1)");
      p.delta = delta;
      p.grid.clear();
    }
    return p;
  }
};

std::vector<unsigned long> parse_factor_list(const std::string& text) {
  std::vector<unsigned long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

// Fractional decimal digits of a numeric literal (exponent applied);
// -1 when the text is an integer or a p/q rational.
long frac_digits(const std::string& text) {
  if (text.find('/') != std::string::npos) return -1;
  const auto epos = text.find_first_of("eE");
  const std::string mant =
      epos == std::string::npos ? text : text.substr(0, epos);
  const long exp10 =
      epos == std::string::npos ? 0 : std::stol(text.substr(epos + 1));
  const auto dot = mant.find('.');
  if (dot == std::string::npos && epos == std::string::npos) return -1;
  const long after =
      dot == std::string::npos ? 0 : static_cast<long>(mant.size() - dot - 1);
  return after - exp10;
}

// A decimal literal is a truncated real, not an exact rational: re-express
// it as an approximate scalar carrying a half-ulp error bound so that
// downstream enclosures account for the input's resolution.
Scalar decimal_scalar(const mpq_class& q, const mpq_class& err, long prec) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, static_cast<unsigned long>(prec));
  const mpq_class sm = q * scale;
  mpz_class mant, twice = 2 * sm.get_num() + sm.get_den(),
                  den2 = 2 * sm.get_den();
  mpz_fdiv_q(mant.get_mpz_t(), twice.get_mpz_t(), den2.get_mpz_t());
  const mpq_class es = err * scale;
  mpz_class e;
  mpz_cdiv_q(e.get_mpz_t(), es.get_num().get_mpz_t(),
             es.get_den().get_mpz_t());
  return Scalar::fixed_point(mant, e + 1, prec);
}

int cmd_maximize(const std::string& truth_path, const std::string& sub_path,
                 const TuneFlags& tf, const std::string& stats_path) {
  LatticeBasis truth = read_basis_file(truth_path);
  LatticeBasis sub = read_basis_file(sub_path);
  SyntheticOracle oracle{HiddenLattice{truth}};
  MaximizeResult r =
      maximize(sub, oracle, tf.resolve(sub.determinant().to_double(),
                                       sub.rank()));
  write_basis(std::cout, r.basis);
  std::cout << stats_text(r.stats);
  if (!stats_path.empty()) write_stats_file(stats_path, r.stats);
  return 0;
}

int cmd_certify(const std::string& disc, const std::string& multiple,
                long precision, bool precision_set, const TuneFlags& tf,
                bool dump_stock, const std::string& stats_path) {
  Scalar S = Scalar::parse(multiple);
  const long digits = frac_digits(multiple);
  if (digits >= 0 && S.is_exact()) {
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    mpq_class err(1, 2 * p10);  // half an ulp of the last printed digit
    if (!precision_set) {
      // adapt the working precision to the input's resolution: the
      // membership tolerance 2^(-prec/2) must dominate the input error
      auto eps_of = [](long prec) {
        mpz_class half;
        mpz_ui_pow_ui(half.get_mpz_t(), 2,
                      static_cast<unsigned long>(prec / 2));
        return mpq_class(1, half);
      };
      while (precision > 16 && eps_of(precision) < 8 * err) precision -= 2;
      if (eps_of(precision) < 8 * err)
        throw Error("the multiple needs more fractional digits");
    }
    S = decimal_scalar(S.rat(), err, precision);
  }
  QuadField F = make_field(mpz_class(disc, 10), precision);
  CertifyResult r =
      certify_run(F, S, tf.resolve(S.abs().to_double(), 1));
  const Scalar shown = r.regulator.is_exact()
                           ? r.regulator.to_approx(r.precision_used)
                           : r.regulator;
  std::cout << "regulator = " << shown.str() << '\n'
            << "index = " << r.index.get_str() << '\n'
            << "precision = " << r.precision_used << '\n';
  std::cout << stats_text(r.stats);
  if (dump_stock) {
    // Rebuild the final run's stock: one sweep cell plus the walk window.
    QuadField Fd = make_field(F.D, r.precision_used);
    const double wd = mpq_get_d(Fd.window.get_mpq_t());
    const double reg = r.regulator.to_double();
    double cell = reg / std::max(1.0, static_cast<double>(
                                          r.params.grid.empty()
                                              ? 1
                                              : r.params.grid[0]));
    cell = std::min(cell, reg);
    BabyStock st = build_baby_stock(Fd, -(cell + wd + 1), wd + 1,
                                    r.params.memory_cap);
    for (const auto& [key, dists] : st.table)
      for (const Scalar& d : dists)
        std::cout << key.first.get_str() << ' ' << key.second.get_str() << ' '
                  << d.str() << '\n';
  }
  if (!stats_path.empty()) write_stats_file(stats_path, r.stats);
  return 0;
}

int cmd_tune(double det, std::size_t rank, unsigned long long memory) {
  TuningParams p =
      memory ? tune_memory_limited(det, rank, memory) : tune_unbounded(det, rank);
  std::cout << "B=" << trim_num(p.bound) << ", delta=" << trim_num(p.delta)
            << '\n';
  return 0;
}

int cmd_primes(double bound) {
  auto ps = sieve_primes(bound);
  for (std::size_t i = 0; i < ps.size(); ++i)
    std::cout << (i ? " " : "") << ps[i];
  std::cout << '\n';
  return 0;
}

int cmd_gen(const std::string& truth_path, const std::string& sub_path,
            std::size_t rank, unsigned long long seed,
            const std::string& factors_text, unsigned long entry_bound) {
  InstanceSpec spec;
  spec.n = rank;
  spec.seed = seed;
  spec.basis_entry_bound = entry_bound;
  spec.index_factors = parse_factor_list(factors_text);
  Instance inst = gen_instance(spec);
  std::ostringstream manifest;
  manifest << "seed=" << seed << " factors=" << factors_text
           << " index=" << inst.planted_index.get_str();
  write_basis_file(truth_path, inst.hidden.secret_basis,
                   "hidden lattice, " + manifest.str());
  write_basis_file(sub_path, inst.sublattice, "sublattice, " + manifest.str());
  std::cout << "index = " << inst.planted_index.get_str() << '\n';
  return 0;
}

int cmd_bench(std::size_t rank, const std::string& dets_text,
              unsigned long long reps, unsigned long long memory,
              const std::string& stats_path) {
  std::vector<double> dets;
  for (unsigned long d : parse_factor_list(dets_text))
    dets.push_back(static_cast<double>(d));
  if (dets.empty()) throw Error("--dets needs at least one value");
  if (reps == 0) throw Error("--seeds must be positive");

  struct Row {
    double det;
    double membership, baby, giant, total;
  };
  std::vector<Row> rows;
  std::vector<double> xs, ys;  // per-instance (log det, log ops) for the fit
  for (double det : dets) {
    Row row{det, 0, 0, 0, 0};
    std::mt19937_64 rng(0xBE2CCull ^ (static_cast<unsigned long long>(rank) << 40) ^
                        static_cast<unsigned long long>(det));
    for (unsigned long long seed = 0; seed < reps; ++seed) {
      // Index-1 instance with determinant near det: the oracle's lattice is
      // the start basis itself, so the run is a full verification pass (all
      // primes p <= B probed, the whole shrunken cell swept) -- the cost the
      // tuners model.  A planted index would let the sweep exit early and
      // the scan alone would be measured.  Lower-triangular rows with skewed
      // diagonal shares; the shear entries do not change the determinant.
      std::vector<LogVector> rows_b(rank);
      double det_actual = 1;
      for (std::size_t i = 0; i < rank; ++i) {
        const double skew = 0.5 + 1.5 * static_cast<double>(rng() % 1024) / 1024.0;
        const double share = std::pow(std::max(det / det_actual, 1.0),
                                      1.0 / static_cast<double>(rank - i));
        const long di =
            std::max(2L, std::lround(i + 1 < rank ? share * skew : share));
        rows_b[i].assign(rank, Scalar::integer(0));
        rows_b[i][i] = Scalar::integer(di);
        for (std::size_t j = 0; j < i; ++j) {
          const long dj = rows_b[j][j].rat().get_num().get_si();
          rows_b[i][j] = Scalar::integer(
              static_cast<long>(rng() % static_cast<unsigned long>(2 * dj + 1)) - dj);
        }
        det_actual *= static_cast<double>(di);
      }
      LatticeBasis basis{rows_b};
      SyntheticOracle oracle{HiddenLattice{basis}};
      TuningParams params = memory ? tune_memory_limited(det_actual, rank, memory)
                                   : tune_unbounded(det_actual, rank);
      MaximizeResult r = maximize(basis, oracle, params);
      row.membership += static_cast<double>(r.stats.membership_tests) / reps;
      row.baby += static_cast<double>(r.stats.baby_steps) / reps;
      row.giant += static_cast<double>(r.stats.giant_steps) / reps;
      row.total += static_cast<double>(r.stats.total_ops()) / reps;
      xs.push_back(std::log(det_actual));
      ys.push_back(std::log(std::max(
          static_cast<double>(r.stats.total_ops()), 1.0)));
    }
    rows.push_back(row);
    std::cout << trim_num(row.det) << ' ' << trim_num(row.membership) << ' '
              << trim_num(row.baby) << ' ' << trim_num(row.giant) << ' '
              << trim_num(row.total) << '\n';
  }

  std::string slope = "n/a";
  if (rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double m = static_cast<double>(xs.size());
    slope = trim_num((m * sxy - sx * sy) / (m * sxx - sx * sx));
  }
  std::cout << "slope=" << slope << '\n';

  if (!stats_path.empty()) {
    std::ofstream out(stats_path);
    if (!out) throw ParseError("cannot open '" + stats_path + "' for writing");
    out << "{\n  \"rows\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
      out << "    {\"det\": " << trim_num(rows[i].det)
          << ", \"membership_tests\": " << trim_num(rows[i].membership)
          << ", \"baby_steps\": " << trim_num(rows[i].baby)
          << ", \"giant_steps\": " << trim_num(rows[i].giant)
          << ", \"total\": " << trim_num(rows[i].total) << "}"
          << (i + 1 < rows.size() ? "," : "") << '\n';
    out << "  ],\n  \"slope\": \"" << slope << "\"\n}\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice maximization toolkit"};
  app.require_subcommand(1);

  // maximize
  auto* mx = app.add_subcommand("maximize", "recover a hidden lattice");
  std::string mx_truth, mx_sub, mx_stats;
  TuneFlags mx_tf;
  mx->add_option("--truth", mx_truth, "hidden lattice basis file")->required();
  mx->add_option("--sub", mx_sub, "sublattice basis file")->required();
  mx_tf.attach(mx);
  mx->add_option("--stats", mx_stats, "stats output path (.json for JSON)");

  // certify
  auto* cf = app.add_subcommand("certify", "certify a quadratic regulator");
  std::string cf_disc, cf_mult, cf_stats;
  long cf_prec = kDefaultPrecision;
  bool cf_dump = false;
  TuneFlags cf_tf;
  cf->add_option("--disc", cf_disc, "squarefree radicand D >= 2")->required();
  cf->add_option("--multiple", cf_mult, "known multiple of the regulator")
      ->required();
  auto* cf_prec_opt =
      cf->add_option("--precision", cf_prec, "fixed-point fraction bits");
  cf_tf.attach(cf);
  cf->add_flag("--dump-stock", cf_dump, "print baby-stock lines 'Q P distance'");
  cf->add_option("--stats", cf_stats, "stats output path (.json for JSON)");

  // tune
  auto* tn = app.add_subcommand("tune", "closed-form parameter choice");
  double tn_det = 0;
  std::size_t tn_rank = 1;
  unsigned long long tn_memory = 0;
  tn->add_option("--det", tn_det, "sublattice determinant")->required();
  tn->add_option("--rank", tn_rank, "lattice rank")->required();
  tn->add_option("--memory", tn_memory, "baby-stock entry cap");

  // primes
  auto* pr = app.add_subcommand("primes", "primes up to a bound");
  double pr_bound = 0;
  pr->add_option("--bound", pr_bound, "inclusive bound")->required();

  // gen
  auto* gn = app.add_subcommand("gen", "generate a planted instance");
  std::string gn_truth, gn_sub, gn_factors;
  std::size_t gn_rank = 1;
  unsigned long long gn_seed = 0;
  unsigned long gn_entry = 4;
  gn->add_option("--truth", gn_truth, "output path, hidden basis")->required();
  gn->add_option("--sub", gn_sub, "output path, sublattice basis")->required();
  gn->add_option("--rank", gn_rank, "lattice rank");
  gn->add_option("--seed", gn_seed, "generator seed");
  gn->add_option("--index-factors", gn_factors, "comma-separated prime factors")
      ->required();
  gn->add_option("--entry-bound", gn_entry, "hidden diagonal entry bound");

  // bench
  auto* bn = app.add_subcommand("bench", "operation-count scaling sweep");
  std::string bn_dets, bn_stats;
  std::size_t bn_rank = 1;
  unsigned long long bn_reps = 1, bn_memory = 0;
  bn->add_option("--rank", bn_rank, "lattice rank");
  bn->add_option("--dets", bn_dets, "comma-separated determinant targets")
      ->required();
  bn->add_option("--seeds", bn_reps, "instances per determinant");
  bn->add_option("--memory", bn_memory, "fixed baby-stock cap for every run");
  bn->add_option("--stats", bn_stats, "JSON output path");

  try {
    app.parse(argc, argv);
    if (*mx) return cmd_maximize(mx_truth, mx_sub, mx_tf, mx_stats);
    if (*cf)
      return cmd_certify(cf_disc, cf_mult, cf_prec, cf_prec_opt->count() > 0,
                         cf_tf, cf_dump, cf_stats);
    if (*tn) return cmd_tune(tn_det, tn_rank, tn_memory);
    if (*pr) return cmd_primes(pr_bound);
    if (*gn)
      return cmd_gen(gn_truth, gn_sub, gn_rank, gn_seed, gn_factors, gn_entry);
    if (*bn) return cmd_bench(bn_rank, bn_dets, bn_reps, bn_memory, bn_stats);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const latmax::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
