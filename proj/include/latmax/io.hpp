#pragma once

#include <iosfwd>
#include <string>

#include "latmax/lattice.hpp"
#include "latmax/maximizer.hpp"

namespace latmax {

// Shared basis text format: the first non-comment token is the rank n; the
// following n*n tokens fill the basis row by row.  Entries are "p/q",
// integers, or decimal literals.  '#' starts a comment to end of line.
LatticeBasis read_basis(std::istream& in);
LatticeBasis read_basis_file(const std::string& path);

// Nonempty `comment` lines are emitted first, each prefixed with "# ".
void write_basis(std::ostream& out, const LatticeBasis& basis,
                 const std::string& comment = "");
void write_basis_file(const std::string& path, const LatticeBasis& basis,
                      const std::string& comment = "");

// Flat key=value block, one field per line, fixed order.
std::string stats_text(const RunStats& stats);

// The same content as a JSON object (keys sorted, 2-space indent).
std::string stats_json_text(const RunStats& stats);

}  // namespace latmax
