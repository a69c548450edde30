#ifndef SEMGRAPH_CAS_HPP
#define SEMGRAPH_CAS_HPP

#include <sstream>
#include <string>
#include <vector>

#include "semgraph/graph.hpp"

namespace semgraph {

enum class CasTask { identifiability, vanishing_ideal };
enum class CasDialect { singular, macaulay2 };

struct CasScript {
  CasTask task;
  CasDialect dialect;
  std::string text;
  std::string suggested_extension;  // ".sing" or ".m2"
};

namespace cas_detail {

inline std::string lname(int i, int j) {
  return "l" + std::to_string(i + 1) + std::to_string(j + 1);
}
inline std::string wname(int i, int j) {
  return "w" + std::to_string(i + 1) + std::to_string(j + 1);
}
inline std::string sname(int i, int j) {
  return "s" + std::to_string(i + 1) + std::to_string(j + 1);
}

//! Entries of I - Lambda, with prefix "l" or "l0" for the coefficients.
inline std::vector<std::vector<std::string>> i_minus_lambda_entries(const MixedGraph& g,
                                                                    const std::string& prefix) {
  int n = g.node_count();
  std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
  for (int i = 0; i < n; ++i) m[i][i] = "1";
  for (auto& [i, j] : g.directed())
    m[i][j] = "-" + prefix + std::to_string(i + 1) + std::to_string(j + 1);
  return m;
}

inline std::vector<std::vector<std::string>> omega_entries(const MixedGraph& g,
                                                           const std::string& prefix) {
  int n = g.node_count();
  std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
  for (int i = 0; i < n; ++i) m[i][i] = prefix + std::to_string(i + 1) + std::to_string(i + 1);
  for (auto& [i, j] : g.bidirected()) {
    std::string name = prefix + std::to_string(i + 1) + std::to_string(j + 1);
    m[i][j] = name;
    m[j][i] = name;
  }
  return m;
}

inline std::vector<std::vector<std::string>> sigma_entries(const MixedGraph& g) {
  int n = g.node_count();
  std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = sname(std::min(i, j), std::max(i, j));
  return m;
}

//! Singular matrix literal: rows comma-separated, continuation lines
//! aligned under the first entry.
inline std::string singular_matrix(const std::string& name, int n,
                                   const std::vector<std::vector<std::string>>& entries) {
  std::string head = "matrix " + name + "[" + std::to_string(n) + "][" + std::to_string(n) +
                     "] = ";
  std::string pad(head.size(), ' ');
  std::ostringstream out;
  out << head;
  for (int r = 0; r < n; ++r) {
    if (r) out << pad;
    for (int c = 0; c < n; ++c) out << (c ? "," : "") << entries[r][c];
    out << (r + 1 < n ? ",\n" : ";\n");
  }
  return out.str();
}

inline std::string m2_matrix(const std::string& name,
                             const std::vector<std::vector<std::string>>& entries) {
  std::string head = name + " = matrix{";
  std::string pad(head.size(), ' ');
  std::ostringstream out;
  out << head;
  for (size_t r = 0; r < entries.size(); ++r) {
    if (r) out << pad;
    out << '{';
    for (size_t c = 0; c < entries[r].size(); ++c)
      out << (c ? ", " : "") << entries[r][c];
    out << '}' << (r + 1 < entries.size() ? ",\n" : "};\n");
  }
  return out.str();
}

inline std::vector<std::string> lambda_vars(const MixedGraph& g) {
  std::vector<std::string> v;
  for (auto& [i, j] : g.directed()) v.push_back(lname(i, j));
  return v;
}

inline std::vector<std::pair<int, int>> non_edges_of_b(const MixedGraph& g) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < g.node_count(); ++i)
    for (int j = i + 1; j < g.node_count(); ++j)
      if (!g.has_bidirected(i, j)) out.emplace_back(i, j);
  return out;
}

inline std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (size_t k = 0; k < items.size(); ++k) out += (k ? sep : "") + items[k];
  return out;
}

}  // namespace cas_detail

//! Generates a computer-algebra script for the fiber/identifiability or the
//! implicitization (vanishing ideal) computation on the given graph: the
//! W = (I - Lambda)^T Sigma (I - Lambda) entries over non-edges of the
//! bidirected part generate the ideal, saturated by det(I - Lambda) when the
//! graph is cyclic; the terminal command is dim/mult for identifiability and
//! elimination of the lambda variables for the vanishing ideal. Byte-stable
//! for a fixed graph and options.
inline CasScript emit_cas_script(const MixedGraph& g, CasTask task, CasDialect dialect) {
  using namespace cas_detail;
  const int n = g.node_count();
  if (n > 9) throw SizeGuardError("emit_cas_script: variable naming limited to 9 nodes");
  const bool cyclic = !topological_order(g).has_value();
  const auto lambdas = lambda_vars(g);
  const auto nonedges = non_edges_of_b(g);
  std::ostringstream out;

  if (dialect == CasDialect::singular) {
    out << "LIB \"linalg.lib\"; option(redSB);\n";
    if (task == CasTask::identifiability) {
      if (lambdas.empty())
        throw GraphError("emit_cas_script: identifiability task needs directed edges");
      std::vector<std::string> params;
      for (auto& [i, j] : g.directed()) params.push_back("l0" + std::to_string(i + 1) +
                                                          std::to_string(j + 1));
      for (int i = 0; i < n; ++i) params.push_back("w0" + std::to_string(i + 1) +
                                                   std::to_string(i + 1));
      for (auto& [i, j] : g.bidirected()) params.push_back("w0" + std::to_string(i + 1) +
                                                           std::to_string(j + 1));
      out << "ring R = (0," << join(params, ",") << "),(" << join(lambdas, ",") << "),dp;\n";
      out << singular_matrix("L", n, i_minus_lambda_entries(g, "l"));
      out << singular_matrix("L0", n, i_minus_lambda_entries(g, "l0"));
      out << singular_matrix("W0", n, omega_entries(g, "w0"));
      out << "matrix W[" << n << "][" << n
          << "] = transpose(L)*inverse(transpose(L0))*W0*inverse(L0)*L;\n";
      std::vector<std::string> gens;
      for (auto& [i, j] : nonedges)
        gens.push_back("W[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]");
      if (cyclic)
        out << "ideal GB = sat(ideal(" << join(gens, ",") << "), det(L))[1];\n";
      else
        out << "ideal GB = std(ideal(" << join(gens, ",") << "));\n";
      out << "dim(GB); mult(GB);\n";
    } else {
      std::vector<std::string> sigmas;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) sigmas.push_back(sname(i, j));
      if (lambdas.empty())
        out << "ring R = 0,(" << join(sigmas, ",") << "),dp;\n";
      else
        out << "ring R = 0,(" << join(lambdas, ",") << "," << join(sigmas, ",") << "),(dp("
            << lambdas.size() << "));\n";
      if (!lambdas.empty()) out << singular_matrix("L", n, i_minus_lambda_entries(g, "l"));
      out << singular_matrix("S", n, sigma_entries(g));
      std::vector<std::string> gens;
      if (lambdas.empty()) {
        for (auto& [i, j] : nonedges)
          gens.push_back("S[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]");
        out << "ideal I = ideal(" << join(gens, ",") << ");\n";
        out << "// The generators below cut out the model; the full vanishing ideal\n"
               "// may additionally require saturation by the principal minors of S.\n";
        out << "ideal GB = std(I); GB;\n";
      } else {
        out << "matrix W[" << n << "][" << n << "] = transpose(L)*S*L;\n";
        for (auto& [i, j] : nonedges)
          gens.push_back("W[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]");
        out << "ideal I = ideal(" << join(gens, ",") << ");\n";
        if (cyclic) out << "I = sat(I, det(L))[1];\n";
        out << "// Elimination yields generators that cut out the model; the full\n"
               "// vanishing ideal may additionally require saturation by the\n"
               "// principal minors of S.\n";
        std::vector<std::string> lprod = lambdas;
        out << "eliminate(I, " << join(lprod, "*") << ");\n";
      }
    }
    return CasScript{task, dialect, out.str(), ".sing"};
  }

  // Macaulay2
  if (task == CasTask::vanishing_ideal) {
    std::vector<std::string> ring_vars = lambdas;
    std::vector<std::string> sigma_groups;
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> row;
      for (int j = i; j < n; ++j) row.push_back(sname(i, j));
      sigma_groups.push_back(join(row, ","));
    }
    out << "R = QQ[";
    if (!lambdas.empty()) out << join(lambdas, ",") << ", ";
    out << join(sigma_groups, ", ");
    if (!lambdas.empty())
      out << ", \n       MonomialOrder => Eliminate " << lambdas.size() << "];\n";
    else
      out << "];\n";
    if (!lambdas.empty()) out << m2_matrix("Lambda", i_minus_lambda_entries(g, "l"));
    out << m2_matrix("S", sigma_entries(g));
    std::vector<std::string> gens;
    if (lambdas.empty()) {
      for (auto& [i, j] : nonedges)
        gens.push_back("S_(" + std::to_string(i) + "," + std::to_string(j) + ")");
      out << "I = ideal{" << join(gens, ",") << "};\n";
      out << "-- The generators below cut out the model; the full vanishing ideal\n"
             "-- may additionally require saturation by the principal minors of S.\n";
      out << "I\n";
    } else {
      out << "W = transpose(Lambda)*S*Lambda;\n";
      for (auto& [i, j] : nonedges)
        gens.push_back("W_(" + std::to_string(i) + "," + std::to_string(j) + ")");
      out << "I = ideal{" << join(gens, ",") << "};\n";
      if (cyclic) out << "I = saturate(I, det(Lambda));\n";
      out << "-- Elimination yields generators that cut out the model; the full\n"
             "-- vanishing ideal may additionally require saturation by the\n"
             "-- principal minors of S.\n";
      out << "eliminate({" << join(lambdas, ",") << "},I)\n";
    }
  } else {
    if (lambdas.empty())
      throw GraphError("emit_cas_script: identifiability task needs directed edges");
    std::vector<std::string> params;
    for (auto& [i, j] : g.directed())
      params.push_back("l0" + std::to_string(i + 1) + std::to_string(j + 1));
    for (int i = 0; i < n; ++i)
      params.push_back("w0" + std::to_string(i + 1) + std::to_string(i + 1));
    for (auto& [i, j] : g.bidirected())
      params.push_back("w0" + std::to_string(i + 1) + std::to_string(j + 1));
    out << "R = frac(QQ[" << join(params, ",") << "])[" << join(lambdas, ",") << "];\n";
    out << m2_matrix("Lambda", i_minus_lambda_entries(g, "l"));
    out << m2_matrix("Lambda0", i_minus_lambda_entries(g, "l0"));
    out << m2_matrix("W0", omega_entries(g, "w0"));
    out << "W = transpose(Lambda)*inverse(transpose(Lambda0))*W0*inverse(Lambda0)*Lambda;\n";
    std::vector<std::string> gens;
    for (auto& [i, j] : nonedges)
      gens.push_back("W_(" + std::to_string(i) + "," + std::to_string(j) + ")");
    out << "I = ideal{" << join(gens, ",") << "};\n";
    if (cyclic) out << "I = saturate(I, det(Lambda));\n";
    out << "dim I, degree I\n";
  }
  return CasScript{task, dialect, out.str(), ".m2"};
}

}  // namespace semgraph

#endif
