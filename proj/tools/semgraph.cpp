// semgraph: analyses of linear structural equation models given as mixed
// graphs. Subcommands cover validation, the covariance parametrization,
// treks, separation statements, Tian decomposition, identifiability,
// parameter recovery, fiber degree estimation, covariance constraints and
// CAS script export.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "semgraph/cas.hpp"
#include "semgraph/constraints.hpp"
#include "semgraph/decomposition.hpp"
#include "semgraph/graph.hpp"
#include "semgraph/identifiability.hpp"
#include "semgraph/numerics.hpp"
#include "semgraph/parametrization.hpp"
#include "semgraph/separation.hpp"

using json = nlohmann::ordered_json;
using namespace semgraph;

namespace {

constexpr const char* kSchemaVersion = "1";

struct RunConfig {
  std::uint64_t seed = 20240801;
  int threads = 1;
  bool json_output = false;
  bool fail_on_negative = false;
  int symbolic_guard = kDefaultSymbolicGuard;
  double newton_residual_tol = 1e-10;
  double cluster_radius = 1e-5;
  double certify_rel_tol = 1e-8;
  std::string config_file;

  json to_json() const {
    json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["guards"]["symbolic_nodes"] = symbolic_guard;
    j["tolerances"]["newton_residual"] = newton_residual_tol;
    j["tolerances"]["cluster_radius"] = cluster_radius;
    j["tolerances"]["certify_rel"] = certify_rel_tol;
    return j;
  }

  void load_config_file() {
    if (config_file.empty()) return;
    std::ifstream in(config_file);
    if (!in) throw std::runtime_error("cannot open config file: " + config_file);
    json j = json::parse(in);
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) threads = j["threads"].get<int>();
    if (j.contains("guards") && j["guards"].contains("symbolic_nodes"))
      symbolic_guard = j["guards"]["symbolic_nodes"].get<int>();
    if (j.contains("tolerances")) {
      auto& t = j["tolerances"];
      if (t.contains("newton_residual")) newton_residual_tol = t["newton_residual"].get<double>();
      if (t.contains("cluster_radius")) cluster_radius = t["cluster_radius"].get<double>();
      if (t.contains("certify_rel")) certify_rel_tol = t["certify_rel"].get<double>();
    }
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

MixedGraph load_graph(const std::string& path) { return MixedGraph::parse(read_file(path)); }

NodeSet parse_node_list(const MixedGraph& g, const std::string& csv) {
  NodeSet out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(g.require_node(tok));
  }
  return make_set(out);
}

json labels_json(const MixedGraph& g, const NodeSet& s) {
  json arr = json::array();
  for (int v : s) arr.push_back(g.label(v));
  return arr;
}

json report_header(const std::string& command, const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = cfg.to_json();
  return j;
}

void emit(const json& j, const RunConfig& cfg, const std::string& text) {
  if (cfg.json_output)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

const char* status_name(IdStatus s) {
  switch (s) {
    case IdStatus::globally_identifiable: return "globally-identifiable";
    case IdStatus::htc_identifiable: return "generically-identifiable (HTC)";
    case IdStatus::generically_infinite: return "generically-infinite-to-one";
    case IdStatus::undecided: return "undecided";
  }
  return "?";
}

const char* necessary_name(NecessaryStatus s) {
  switch (s) {
    case NecessaryStatus::passes: return "passes";
    case NecessaryStatus::fails: return "fails";
    case NecessaryStatus::budget_exceeded: return "undecided (budget)";
  }
  return "?";
}

json identify_report_json(const MixedGraph& g, const IdentifiabilityReport& rep) {
  json j;
  j["status"] = status_name(rep.status);
  j["global"]["injective"] = rep.global.injective;
  if (rep.global.witness) j["global"]["witness"] = labels_json(g, *rep.global.witness);
  if (!rep.global.note.empty()) j["global"]["note"] = rep.global.note;
  j["necessary_condition"] = necessary_name(rep.necessary);
  j["subgraphs_explored"] = rep.subgraphs_explored;
  j["sink_removal_used"] = rep.sink_removal_used;
  json comps = json::array();
  for (auto& cr : rep.components) {
    json c;
    c["block"] = labels_json(g, cr.block);
    c["vertex_set"] = labels_json(g, cr.vertex_set);
    c["globally_injective"] = cr.global.injective;
    c["htc_certified"] = cr.htc_certified;
    c["necessary_condition"] = necessary_name(cr.necessary);
    comps.push_back(c);
  }
  j["components"] = comps;
  json certs = json::object();
  for (auto& [node, cert] : rep.node_certs) {
    json c;
    c["y_set"] = labels_json(g, cert.y_set);
    c["subgraph"] = labels_json(g, cert.subgraph);
    c["provenance"] = cert.provenance;
    certs[g.label(node)] = c;
  }
  j["edge_certificates"] = certs;
  json order = json::array();
  for (int v : rep.solve_order) order.push_back(g.label(v));
  j["solve_order"] = order;
  j["unsolved"] = labels_json(g, rep.unsolved);
  if (rep.degree_estimate) j["degree_estimate"] = *rep.degree_estimate;
  return j;
}

int cmd_validate(const std::string& path, const RunConfig& cfg) {
  auto g = load_graph(path);
  auto props = properties(g);
  json j = report_header("validate", cfg);
  j["nodes"] = g.node_count();
  j["directed_edges"] = g.directed().size();
  j["bidirected_edges"] = g.bidirected().size();
  j["acyclic"] = props.acyclic;
  j["simple"] = props.simple;
  j["sinks"] = labels_json(g, props.sinks);
  j["sources"] = labels_json(g, props.sources);
  std::ostringstream text;
  text << "valid mixed graph: " << g.node_count() << " nodes, " << g.directed().size()
       << " directed, " << g.bidirected().size() << " bidirected\n"
       << "acyclic: " << (props.acyclic ? "yes" : "no")
       << ", simple: " << (props.simple ? "yes" : "no") << "\n";
  emit(j, cfg, text.str());
  return 0;
}

int cmd_parametrize(const std::string& path, const std::string& entry, bool numeric,
                    const RunConfig& cfg) {
  auto g = load_graph(path);
  bool underscores = g.node_count() > 9;
  json j = report_header("parametrize", cfg);
  std::ostringstream text;
  if (numeric) {
    ParamPoint p = sample_params(g, cfg.seed);
    FloatMatrix sigma = phi_numeric(g, p);
    j["nodes"] = json::array();
    for (auto& l : g.labels()) j["nodes"].push_back(l);
    j["data"] = json::array();
    for (int r = 0; r < g.node_count(); ++r) {
      json row = json::array();
      for (int c = 0; c < g.node_count(); ++c) row.push_back(sigma(r, c));
      j["data"].push_back(row);
    }
    text << sigma.serialize();
    emit(j, cfg, text.str());
    return 0;
  }
  auto phi = phi_symbolic(g, cfg.symbolic_guard);
  auto entry_string = [&](int r, int c) { return phi.entry(r, c).to_string(underscores); };
  if (!entry.empty()) {
    auto comma = entry.find(',');
    if (comma == std::string::npos) throw std::runtime_error("--entry expects i,j");
    int r = g.require_node(entry.substr(0, comma));
    int c = g.require_node(entry.substr(comma + 1));
    j["entry"] = {g.label(r), g.label(c)};
    j["value"] = entry_string(r, c);
    text << entry_string(r, c) << "\n";
  } else {
    json entries = json::object();
    for (int r = 0; r < g.node_count(); ++r)
      for (int c = r; c < g.node_count(); ++c) {
        std::string key = g.label(r) + "," + g.label(c);
        entries[key] = entry_string(r, c);
        text << "sigma[" << key << "] = " << entry_string(r, c) << "\n";
      }
    j["entries"] = entries;
  }
  j["acyclic"] = phi.acyclic;
  emit(j, cfg, text.str());
  return 0;
}

int cmd_treks(const std::string& path, const std::string& from, const std::string& to,
              int max_edges, const RunConfig& cfg) {
  auto g = load_graph(path);
  int i = g.require_node(from), jn = g.require_node(to);
  std::optional<int> bound;
  if (max_edges >= 0) bound = max_edges;
  auto treks = list_treks(g, i, jn, bound);
  bool underscores = g.node_count() > 9;
  json j = report_header("treks", cfg);
  j["from"] = from;
  j["to"] = to;
  json arr = json::array();
  std::ostringstream text;
  for (auto& t : treks) {
    json tj;
    tj["walk"] = t.describe(g);
    tj["monomial"] = trek_monomial(t).to_string(underscores);
    tj["edges"] = t.edge_count();
    arr.push_back(tj);
    text << t.describe(g) << "   [" << trek_monomial(t).to_string(underscores) << "]\n";
  }
  j["treks"] = arr;
  j["count"] = treks.size();
  text << treks.size() << " treks\n";
  emit(j, cfg, text.str());
  return 0;
}

int cmd_dsep_all(const std::string& path, int max_cond, const RunConfig& cfg) {
  auto g = load_graph(path);
  if (max_cond < 0) max_cond = std::max(0, g.node_count() - 2);
  auto statements = ci_statements(g, max_cond);
  json j = report_header("dsep", cfg);
  j["max_cond"] = max_cond;
  json arr = json::array();
  std::ostringstream text;
  for (auto& st : statements) {
    json sj;
    sj["i"] = g.label(st.i);
    sj["j"] = g.label(st.j);
    sj["given"] = labels_json(g, st.conditioning);
    arr.push_back(sj);
    text << g.label(st.i) << " _||_ " << g.label(st.j) << " | {";
    for (size_t k = 0; k < st.conditioning.size(); ++k)
      text << (k ? "," : "") << g.label(st.conditioning[k]);
    text << "}\n";
  }
  j["statements"] = arr;
  j["count"] = statements.size();
  text << statements.size() << " d-separation statements\n";
  emit(j, cfg, text.str());
  return 0;
}

int cmd_dsep(const std::string& path, const std::string& i_label, const std::string& j_label,
             const std::string& given, const RunConfig& cfg) {
  auto g = load_graph(path);
  int i = g.require_node(i_label), jn = g.require_node(j_label);
  NodeSet s = given.empty() ? NodeSet{} : parse_node_list(g, given);
  bool sep = d_separated(g, i, jn, s);
  json j = report_header("dsep", cfg);
  j["i"] = i_label;
  j["j"] = j_label;
  j["given"] = labels_json(g, s);
  j["d_separated"] = sep;
  std::ostringstream text;
  text << i_label << (sep ? " _||_ " : " not independent of ") << j_label << " | {";
  for (size_t k = 0; k < s.size(); ++k) text << (k ? "," : "") << g.label(s[k]);
  text << "}\n";
  emit(j, cfg, text.str());
  return (!sep && cfg.fail_on_negative) ? 2 : 0;
}

int cmd_treksep(const std::string& path, const std::string& rows, const std::string& cols,
                bool verify, const RunConfig& cfg) {
  auto g = load_graph(path);
  NodeSet a = parse_node_list(g, rows), c = parse_node_list(g, cols);
  auto cert = trek_separation_rank(g, a, c);
  json j = report_header("treksep", cfg);
  j["rows"] = labels_json(g, a);
  j["cols"] = labels_json(g, c);
  j["rank"] = cert.rank;
  j["s_a"] = labels_json(g, cert.s_a);
  j["s_c"] = labels_json(g, cert.s_c);
  if (verify) j["certificate_verified"] = verify_trek_certificate(g, cert);
  std::ostringstream text;
  text << "generic rank " << cert.rank << ", cut (S_A = {";
  for (size_t k = 0; k < cert.s_a.size(); ++k) text << (k ? "," : "") << g.label(cert.s_a[k]);
  text << "}, S_C = {";
  for (size_t k = 0; k < cert.s_c.size(); ++k) text << (k ? "," : "") << g.label(cert.s_c[k]);
  text << "})\n";
  emit(j, cfg, text.str());
  return 0;
}

int cmd_decompose(const std::string& path, const RunConfig& cfg) {
  auto g = load_graph(path);
  auto d = mixed_components(g);
  json j = report_header("decompose", cfg);
  json blocks = json::array();
  for (auto& b : d.blocks) blocks.push_back(labels_json(g, b));
  j["blocks"] = blocks;
  json comps = json::array();
  size_t dir_total = 0, bidir_total = 0;
  std::ostringstream text;
  for (auto& comp : d.components) {
    json c;
    c["block"] = labels_json(g, comp.block);
    c["vertex_set"] = labels_json(g, comp.vertex_set);
    c["graph"] = comp.graph.serialize();
    c["directed_edges"] = comp.graph.directed().size();
    c["bidirected_edges"] = comp.graph.bidirected().size();
    dir_total += comp.graph.directed().size();
    bidir_total += comp.graph.bidirected().size();
    comps.push_back(c);
    text << "component over block {";
    for (size_t k = 0; k < comp.block.size(); ++k) text << (k ? "," : "") << g.label(comp.block[k]);
    text << "}:\n" << comp.graph.serialize();
  }
  j["components"] = comps;
  j["edge_accounting"]["directed_total"] = dir_total;
  j["edge_accounting"]["directed_in_graph"] = g.directed().size();
  j["edge_accounting"]["bidirected_total"] = bidir_total;
  j["edge_accounting"]["bidirected_in_graph"] = g.bidirected().size();
  emit(j, cfg, text.str());
  return 0;
}

int cmd_identify(const std::string& path, bool with_degree, const RunConfig& cfg) {
  auto g = load_graph(path);
  auto rep = identify(g);
  std::optional<DegreeEstimate> est;
  if (with_degree) {
    NewtonOptions nopt;
    nopt.residual_tol = cfg.newton_residual_tol;
    nopt.cluster_radius = cfg.cluster_radius;
    est = fiber_degree_estimate(g, 10, 100, cfg.seed, cfg.threads, nopt);
    rep.degree_estimate = est->modal;
  }
  json j = report_header("identify", cfg);
  j.update(identify_report_json(g, rep));
  if (est) {
    json dj;
    dj["modal"] = est->modal;
    dj["trials"] = est->trials;
    dj["starts"] = est->starts;
    json dist = json::object();
    for (auto& [count, freq] : est->distribution) dist[std::to_string(count)] = freq;
    dj["distribution"] = dist;
    dj["note"] = est->note;
    j["degree"] = dj;
  }
  std::ostringstream text;
  text << "status: " << status_name(rep.status) << "\n";
  if (rep.global.witness) {
    text << "global witness: {";
    for (size_t k = 0; k < rep.global.witness->size(); ++k)
      text << (k ? "," : "") << g.label((*rep.global.witness)[k]);
    text << "}\n";
  }
  text << "necessary condition: " << necessary_name(rep.necessary) << "\n";
  if (rep.degree_estimate) text << "degree estimate: " << *rep.degree_estimate << "\n";
  emit(j, cfg, text.str());
  bool positive = rep.status == IdStatus::globally_identifiable ||
                  rep.status == IdStatus::htc_identifiable;
  return (!positive && cfg.fail_on_negative) ? 2 : 0;
}

int cmd_recover(const std::string& path, const std::string& sigma_path, const RunConfig& cfg) {
  auto g = load_graph(path);
  std::string stext = read_file(sigma_path);
  FloatMatrix sigma;
  auto first = stext.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && stext[first] == '{') {
    json sj = json::parse(stext);
    if (sj.contains("nodes")) {
      auto nodes = sj["nodes"];
      if (nodes.size() != static_cast<size_t>(g.node_count()))
        throw std::runtime_error("sigma JSON node list does not match the graph");
      for (int k = 0; k < g.node_count(); ++k)
        if (nodes[k].get<std::string>() != g.label(k))
          throw std::runtime_error("sigma JSON node order does not match the graph");
    }
    auto data = sj["data"];
    int n = static_cast<int>(data.size());
    sigma = FloatMatrix(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) sigma(r, c) = data[r][c].get<double>();
  } else {
    sigma = FloatMatrix::parse(stext);
  }
  if (sigma.rows() != g.node_count())
    throw std::runtime_error("sigma dimension does not match the graph");
  RecoveryResult rec;
  auto rep = identify(g, {}, &sigma, &rec);
  json j = report_header("recover", cfg);
  j["status"] = status_name(rep.status);
  std::ostringstream text;
  if (!rep.unsolved.empty()) {
    j["error"] = "graph not certified identifiable; recovery unavailable";
    j["unsolved"] = labels_json(g, rep.unsolved);
    emit(j, cfg, "not certified identifiable; cannot recover\n");
    return cfg.fail_on_negative ? 2 : 1;
  }
  json lam = json::array(), om = json::array();
  for (int r = 0; r < g.node_count(); ++r) {
    json lrow = json::array(), orow = json::array();
    for (int c = 0; c < g.node_count(); ++c) {
      lrow.push_back(rec.lambda(r, c));
      orow.push_back(rec.omega(r, c));
    }
    lam.push_back(lrow);
    om.push_back(orow);
  }
  j["lambda"] = lam;
  j["omega"] = om;
  j["fiber_residual"] = rec.fiber_residual;
  text << "lambda =\n" << rec.lambda.serialize() << "omega =\n" << rec.omega.serialize();
  text << "fiber residual: " << rec.fiber_residual << "\n";
  emit(j, cfg, text.str());
  return 0;
}

int cmd_degree(const std::string& path, int trials, int starts, double scale,
               const RunConfig& cfg) {
  auto g = load_graph(path);
  NewtonOptions nopt;
  nopt.residual_tol = cfg.newton_residual_tol;
  nopt.cluster_radius = cfg.cluster_radius;
  auto est = fiber_degree_estimate(g, trials, starts, cfg.seed, cfg.threads, nopt, scale);
  json j = report_header("degree", cfg);
  j["modal"] = est.modal;
  j["trials"] = est.trials;
  j["starts"] = est.starts;
  json dist = json::object();
  for (auto& [count, freq] : est.distribution) dist[std::to_string(count)] = freq;
  j["distribution"] = dist;
  j["note"] = est.note;
  std::ostringstream text;
  text << "modal real fiber size: " << est.modal << " (" << est.note << ")\n";
  for (auto& [count, freq] : est.distribution)
    text << "  " << count << " solution(s): " << freq << "/" << est.trials << " trials\n";
  emit(j, cfg, text.str());
  return 0;
}

int cmd_constraints(const std::string& path, int max_cond, int max_minor, int max_depth,
                    bool certify, const RunConfig& cfg) {
  auto g = load_graph(path);
  DiscoveryOptions opt;
  opt.max_cond = max_cond;
  opt.max_minor_size = max_minor;
  opt.verma.max_depth = max_depth;
  opt.verma.symbolic_guard = cfg.symbolic_guard;
  opt.certify.seed = cfg.seed;
  opt.certify.vanish_rel_tol = cfg.certify_rel_tol;
  opt.run_certify = certify;
  auto cs = discover_constraints(g, opt);
  bool underscores = g.node_count() > 9;
  json j = report_header("constraints", cfg);
  json arr = json::array();
  std::ostringstream text;
  bool all_certified = true;
  for (auto& c : cs) {
    json cj;
    cj["kind"] = to_string(c.kind);
    if (!c.rows.empty()) {
      cj["rows"] = labels_json(g, c.rows);
      cj["cols"] = labels_json(g, c.cols);
    }
    cj["polynomial"] = c.payload.to_string(underscores);
    cj["provenance"] = c.provenance;
    if (c.certification.ran) {
      cj["certification"]["certified"] = c.certification.certified;
      cj["certification"]["on_model_max_rel"] = c.certification.on_model_max_rel;
      cj["certification"]["off_model_nonzero"] = c.certification.off_model_nonzero;
      all_certified = all_certified && c.certification.certified;
    }
    arr.push_back(cj);
    text << to_string(c.kind) << ": " << c.payload.to_string(underscores) << "\n    ["
         << c.provenance << "]";
    if (c.certification.ran)
      text << (c.certification.certified ? "  certified" : "  NOT certified");
    text << "\n";
  }
  j["constraints"] = arr;
  j["count"] = cs.size();
  text << cs.size() << " constraints\n";
  emit(j, cfg, text.str());
  return (certify && !all_certified && cfg.fail_on_negative) ? 2 : 0;
}

int cmd_emit_cas(const std::string& path, const std::string& task_name,
                 const std::string& dialect_name, const std::string& out_path,
                 const RunConfig& cfg) {
  auto g = load_graph(path);
  CasTask task;
  if (task_name == "identifiability")
    task = CasTask::identifiability;
  else if (task_name == "vanishing-ideal")
    task = CasTask::vanishing_ideal;
  else
    throw std::runtime_error("unknown task: " + task_name);
  CasDialect dialect;
  if (dialect_name.empty())
    dialect = task == CasTask::identifiability ? CasDialect::singular : CasDialect::macaulay2;
  else if (dialect_name == "singular")
    dialect = CasDialect::singular;
  else if (dialect_name == "macaulay2")
    dialect = CasDialect::macaulay2;
  else
    throw std::runtime_error("unknown dialect: " + dialect_name);
  auto script = emit_cas_script(g, task, dialect);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << script.text;
    if (!cfg.json_output) std::cout << "wrote " << out_path << "\n";
  } else {
    std::cout << script.text;
  }
  if (cfg.json_output) {
    json j = report_header("emit-cas", cfg);
    j["task"] = task_name;
    j["dialect"] = script.dialect == CasDialect::singular ? "singular" : "macaulay2";
    j["extension"] = script.suggested_extension;
    if (!out_path.empty()) j["output"] = out_path;
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_export_dot(const std::string& path, const std::string& out_path, const RunConfig&) {
  auto g = load_graph(path);
  std::string dot = to_dot(g);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << dot;
  } else {
    std::cout << dot;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear structural equation model analysis on mixed graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  app.add_option("--seed", cfg.seed, "random seed echoed into every report");
  app.add_option("--threads", cfg.threads, "worker threads for parallel trials");
  app.add_flag("--json", cfg.json_output, "machine-readable JSON on stdout");
  app.add_flag("--fail-on-negative", cfg.fail_on_negative,
               "exit 2 on analysis-level negative verdicts");
  app.add_option("--config", cfg.config_file, "JSON config file (flags override)");
  app.add_option("--symbolic-guard", cfg.symbolic_guard, "symbolic size guard (nodes)");
  app.add_option("--newton-tol", cfg.newton_residual_tol, "Newton residual tolerance");
  app.add_option("--cluster-radius", cfg.cluster_radius, "multistart cluster radius");
  app.add_option("--certify-tol", cfg.certify_rel_tol, "constraint vanishing tolerance");

  std::string graph_path, entry, from, to, given, i_label, j_label, rows, cols;
  std::string sigma_path, task_name, dialect_name, out_path;
  int max_edges = -1, trials = 20, starts = 200;
  double sample_scale = 1.0;
  int max_cond = -1, max_minor = 3, max_depth = 2;
  bool numeric = false, verify = false, with_degree = false, no_certify = false;

  auto* validate = app.add_subcommand("validate", "parse a graph file and report properties");
  validate->add_option("graph", graph_path)->required();

  auto* parametrize =
      app.add_subcommand("parametrize", "symbolic or sampled covariance parametrization");
  parametrize->add_option("graph", graph_path)->required();
  parametrize->add_option("--entry", entry, "single entry i,j (node labels)");
  parametrize->add_flag("--numeric", numeric, "sample a parameter point and print sigma");

  auto* treks = app.add_subcommand("treks", "enumerate treks between two nodes");
  treks->add_option("graph", graph_path)->required();
  treks->add_option("--from", from)->required();
  treks->add_option("--to", to)->required();
  treks->add_option("--max-edges", max_edges, "edge bound (required for cyclic graphs)");

  bool dsep_all = false;
  auto* dsep = app.add_subcommand("dsep", "d-separation query or full CI-statement list");
  dsep->add_option("graph", graph_path)->required();
  dsep->add_option("--i", i_label);
  dsep->add_option("--j", j_label);
  dsep->add_option("--given", given, "conditioning set, comma-separated labels");
  dsep->add_flag("--all", dsep_all, "enumerate every d-separation statement");
  dsep->add_option("--max-cond", max_cond, "conditioning-set size bound for --all");

  auto* treksep = app.add_subcommand("treksep", "trek-separation generic rank with min cut");
  treksep->add_option("graph", graph_path)->required();
  treksep->add_option("--rows", rows)->required();
  treksep->add_option("--cols", cols)->required();
  treksep->add_flag("--verify", verify, "re-check the certificate by trek enumeration");

  auto* decompose = app.add_subcommand("decompose", "Tian mixed components");
  decompose->add_option("graph", graph_path)->required();

  auto* identify_cmd = app.add_subcommand("identify", "identifiability report");
  identify_cmd->add_option("graph", graph_path)->required();
  identify_cmd->add_flag("--degree", with_degree, "attach a multistart degree estimate");

  auto* recover = app.add_subcommand("recover", "recover (Lambda, Omega) from a covariance");
  recover->add_option("graph", graph_path)->required();
  recover->add_option("--sigma", sigma_path, "matrix file or JSON")->required();

  auto* degree = app.add_subcommand("degree", "multistart fiber degree estimate");
  degree->add_option("graph", graph_path)->required();
  degree->add_option("--trials", trials);
  degree->add_option("--starts", starts);
  degree->add_option("--scale", sample_scale, "coefficient sampling scale");

  auto* constraints_cmd = app.add_subcommand("constraints", "covariance constraint discovery");
  constraints_cmd->add_option("graph", graph_path)->required();
  constraints_cmd->add_option("--max-cond", max_cond, "conditioning set bound (default |V|-2)");
  constraints_cmd->add_option("--max-minor", max_minor, "largest minor size");
  constraints_cmd->add_option("--max-depth", max_depth, "verma recursion depth");
  constraints_cmd->add_flag("--no-certify", no_certify, "skip numeric certification");

  auto* emit_cas = app.add_subcommand("emit-cas", "emit a computer-algebra script");
  emit_cas->add_option("graph", graph_path)->required();
  emit_cas->add_option("--task", task_name, "identifiability | vanishing-ideal")->required();
  emit_cas->add_option("--dialect", dialect_name, "singular | macaulay2");
  emit_cas->add_option("-o,--output", out_path, "output file (default stdout)");

  auto* export_dot = app.add_subcommand("export-dot", "DOT export (blue directed, red bidirected)");
  export_dot->add_option("graph", graph_path)->required();
  export_dot->add_option("-o,--output", out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.load_config_file();
    if (validate->parsed()) return cmd_validate(graph_path, cfg);
    if (parametrize->parsed()) return cmd_parametrize(graph_path, entry, numeric, cfg);
    if (treks->parsed()) return cmd_treks(graph_path, from, to, max_edges, cfg);
    if (dsep->parsed()) {
      if (dsep_all) return cmd_dsep_all(graph_path, max_cond, cfg);
      if (i_label.empty() || j_label.empty())
        throw std::runtime_error("dsep needs --i and --j (or --all)");
      return cmd_dsep(graph_path, i_label, j_label, given, cfg);
    }
    if (treksep->parsed()) return cmd_treksep(graph_path, rows, cols, verify, cfg);
    if (decompose->parsed()) return cmd_decompose(graph_path, cfg);
    if (identify_cmd->parsed()) return cmd_identify(graph_path, with_degree, cfg);
    if (recover->parsed()) return cmd_recover(graph_path, sigma_path, cfg);
    if (degree->parsed()) return cmd_degree(graph_path, trials, starts, sample_scale, cfg);
    if (constraints_cmd->parsed())
      return cmd_constraints(graph_path, max_cond, max_minor, max_depth, !no_certify, cfg);
    if (emit_cas->parsed())
      return cmd_emit_cas(graph_path, task_name, dialect_name, out_path, cfg);
    if (export_dot->parsed()) return cmd_export_dot(graph_path, out_path, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
