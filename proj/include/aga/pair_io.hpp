#pragma once

#include <iosfwd>
#include <string>

#include "aga/model.hpp"

namespace aga {

// Line-oriented UTF-8 pair file (format "AGPAIR v1"):
//   AGPAIR v1
//   params <n> <m> <q_u> <rho_u> <q_a> <rho_a> <seed>
//   truth <n space-separated images>
//   g1.uu ... end, g1.ua ... end, g2.uu ... end, g2.ua ... end
// Each section lists one `i j` pair per line (users and attributes 0-based)
// and is closed by its own `end` line. User-user edges appear once with
// i < j. The reader is strict: duplicate edges, out-of-range indices and
// malformed lines are errors, never silently repaired.
void write_pair(const AttributedGraphPair& pair, const std::string& path);
void write_pair(const AttributedGraphPair& pair, std::ostream& out);

AttributedGraphPair read_pair(const std::string& path);
AttributedGraphPair read_pair(std::istream& in);

}  // namespace aga
