#include "latmax/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <vector>

#include "latmax/errors.hpp"

namespace latmax {
namespace {

std::vector<std::string> tokenize(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

std::string entry_text(const Scalar& v) {
  return v.is_exact() ? v.str() : v.decimal(40);
}

const char* source_name(HitSource s) {
  return s == HitSource::prime_probe ? "prime" : "sweep";
}

}  // namespace

LatticeBasis read_basis(std::istream& in) {
  auto tokens = tokenize(in);
  if (tokens.empty()) throw ParseError("empty basis file");
  std::size_t n = 0;
  try {
    std::size_t used = 0;
    n = std::stoul(tokens[0], &used);
    if (used != tokens[0].size()) throw ParseError("bad rank");
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad rank '" + tokens[0] + "'");
  }
  if (n == 0 || n > 64) throw ParseError("rank out of range");
  if (tokens.size() != 1 + n * n)
    throw ParseError("expected " + std::to_string(n * n) +
                     " basis entries, found " +
                     std::to_string(tokens.size() - 1));
  std::vector<LogVector> rows;
  rows.reserve(n);
  std::size_t k = 1;
  for (std::size_t i = 0; i < n; ++i) {
    LogVector row;
    row.reserve(n);
    for (std::size_t j = 0; j < n; ++j) row.push_back(Scalar::parse(tokens[k++]));
    rows.push_back(std::move(row));
  }
  return LatticeBasis(std::move(rows));
}

LatticeBasis read_basis_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_basis(in);
}

void write_basis(std::ostream& out, const LatticeBasis& basis,
                 const std::string& comment) {
  if (!comment.empty()) {
    std::istringstream cs(comment);
    std::string line;
    while (std::getline(cs, line)) out << "# " << line << '\n';
  }
  const std::size_t n = basis.rank();
  out << n << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      out << (j ? " " : "") << entry_text(basis[i][j]);
    out << '\n';
  }
}

void write_basis_file(const std::string& path, const LatticeBasis& basis,
                      const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_basis(out, basis, comment);
}

std::string stats_text(const RunStats& s) {
  std::ostringstream out;
  out << "membership_tests=" << s.membership_tests << '\n'
      << "baby_steps=" << s.baby_steps << '\n'
      << "giant_steps=" << s.giant_steps << '\n'
      << "max_baby_stock=" << s.max_baby_stock << '\n'
      << "restarts=" << s.restarts << '\n'
      << "primes_scanned=" << s.primes_scanned << '\n'
      << "sweeps=" << s.sweeps << '\n'
      << "total_ops=" << s.total_ops() << '\n'
      << "index_found=" << s.index_found.get_str() << '\n'
      << "final_det=" << s.final_det.str() << '\n';
  out << "enlargements=";
  for (std::size_t i = 0; i < s.enlargements.size(); ++i) {
    const auto& e = s.enlargements[i];
    out << (i ? ";" : "") << source_name(e.source) << ':'
        << e.prime.get_str() << ':' << e.ratio.get_str();
  }
  out << '\n';
  return out.str();
}

std::string stats_json_text(const RunStats& s) {
  nlohmann::json j;
  j["membership_tests"] = s.membership_tests;
  j["baby_steps"] = s.baby_steps;
  j["giant_steps"] = s.giant_steps;
  j["max_baby_stock"] = s.max_baby_stock;
  j["restarts"] = s.restarts;
  j["primes_scanned"] = s.primes_scanned;
  j["sweeps"] = s.sweeps;
  j["total_ops"] = s.total_ops();
  j["index_found"] = s.index_found.get_str();
  j["final_det"] = s.final_det.str();
  auto arr = nlohmann::json::array();
  for (const auto& e : s.enlargements)
    arr.push_back({{"source", source_name(e.source)},
                   {"prime", e.prime.get_str()},
                   {"ratio", e.ratio.get_str()}});
  j["enlargements"] = std::move(arr);
  return j.dump(2) + "\n";
}

}  // namespace latmax
