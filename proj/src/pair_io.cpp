#include "aga/pair_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aga {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("pair file: " + what);
}

void write_user_section(std::ostream& out, const char* name, const AttributedGraph& g) {
  out << name << '\n';
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.user_edge(i, j)) out << i << ' ' << j << '\n';
  out << "end\n";
}

void write_attr_section(std::ostream& out, const char* name, const AttributedGraph& g) {
  out << name << '\n';
  for (int i = 0; i < g.n; ++i)
    for (int a = 0; a < g.m; ++a)
      if (g.attr_edge(i, a)) out << i << ' ' << a << '\n';
  out << "end\n";
}

// Reads `i j` lines until `end`, applying them through add_edge.
template <typename AddEdge>
void read_section(std::istream& in, const std::string& name, AddEdge add_edge) {
  std::string line;
  if (!std::getline(in, line) || line != name) fail("expected section header '" + name + "'");
  while (std::getline(in, line)) {
    if (line == "end") return;
    std::istringstream ls(line);
    long long i = -1;
    long long j = -1;
    if (!(ls >> i >> j)) fail("malformed edge line in " + name + ": '" + line + "'");
    std::string rest;
    if (ls >> rest) fail("trailing tokens in " + name + ": '" + line + "'");
    add_edge(i, j);
  }
  fail("unterminated section " + name);
}

}  // namespace

void write_pair(const AttributedGraphPair& pair, std::ostream& out) {
  const ModelParams& p = pair.params;
  out << "AGPAIR v1\n";
  out << "params " << p.n << ' ' << p.m << ' ' << format_double(p.q_u) << ' '
      << format_double(p.rho_u) << ' ' << format_double(p.q_a) << ' ' << format_double(p.rho_a)
      << ' ' << pair.seed << '\n';
  out << "truth";
  for (int image : pair.truth.images()) out << ' ' << image;
  out << '\n';
  write_user_section(out, "g1.uu", pair.g1);
  write_attr_section(out, "g1.ua", pair.g1);
  write_user_section(out, "g2.uu", pair.g2);
  write_attr_section(out, "g2.ua", pair.g2);
}

void write_pair(const AttributedGraphPair& pair, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open for writing: " + path);
  write_pair(pair, out);
  out.flush();
  if (!out) fail("write failed: " + path);
}

AttributedGraphPair read_pair(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "AGPAIR v1") fail("missing 'AGPAIR v1' header");

  AttributedGraphPair pair;
  {
    if (!std::getline(in, line)) fail("missing params line");
    std::istringstream ls(line);
    std::string tag;
    ModelParams p;
    if (!(ls >> tag >> p.n >> p.m >> p.q_u >> p.rho_u >> p.q_a >> p.rho_a >> pair.seed) ||
        tag != "params")
      fail("malformed params line: '" + line + "'");
    std::string rest;
    if (ls >> rest) fail("trailing tokens on params line");
    p.validate();
    pair.params = p;
  }
  {
    if (!std::getline(in, line)) fail("missing truth line");
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag != "truth") fail("malformed truth line");
    std::vector<int> images;
    images.reserve(static_cast<std::size_t>(pair.params.n));
    int image = 0;
    while (ls >> image) images.push_back(image);
    if (static_cast<int>(images.size()) != pair.params.n)
      fail("truth length does not match n");
    try {
      pair.truth = Permutation(std::move(images));
    } catch (const std::invalid_argument&) {
      fail("truth is not a bijection");
    }
  }

  const int n = pair.params.n;
  const int m = pair.params.m;
  pair.g1 = AttributedGraph(n, m);
  pair.g2 = AttributedGraph(n, m);

  auto user_adder = [n](AttributedGraph& g, const std::string& name) {
    return [&g, n, name](long long i, long long j) {
      if (i < 0 || j < 0 || i >= n || j >= n) fail("user index out of range in " + name);
      if (i >= j) fail("user-user edge must satisfy i < j in " + name);
      if (g.user_edge(static_cast<int>(i), static_cast<int>(j)))
        fail("duplicate edge in " + name);
      g.add_user_edge(static_cast<int>(i), static_cast<int>(j));
    };
  };
  auto attr_adder = [n, m](AttributedGraph& g, const std::string& name) {
    return [&g, n, m, name](long long i, long long a) {
      if (i < 0 || i >= n) fail("user index out of range in " + name);
      if (a < 0 || a >= m) fail("attribute index out of range in " + name);
      if (g.attr_edge(static_cast<int>(i), static_cast<int>(a)))
        fail("duplicate edge in " + name);
      g.add_attr_edge(static_cast<int>(i), static_cast<int>(a));
    };
  };

  read_section(in, "g1.uu", user_adder(pair.g1, "g1.uu"));
  read_section(in, "g1.ua", attr_adder(pair.g1, "g1.ua"));
  read_section(in, "g2.uu", user_adder(pair.g2, "g2.uu"));
  read_section(in, "g2.ua", attr_adder(pair.g2, "g2.ua"));

  if (std::getline(in, line) && !line.empty()) fail("unexpected trailing content");
  return pair;
}

AttributedGraphPair read_pair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open for reading: " + path);
  return read_pair(in);
}

}  // namespace aga
