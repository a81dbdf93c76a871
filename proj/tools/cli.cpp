#include "cli.hpp"

#include "rwt/audit.hpp"
#include "rwt/error.hpp"
#include "rwt/geometry.hpp"
#include "rwt/graph.hpp"
#include "rwt/kernel.hpp"
#include "rwt/montecarlo.hpp"
#include "rwt/parallel.hpp"
#include "rwt/quantum.hpp"
#include "rwt/torsion.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace rwt::cli {
namespace {

using json = nlohmann::json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Document {
  json inputs = json::object();
  json results = json::object();
  std::vector<std::string> warnings;
  Table table;
  int exit_code = kOk;
};

struct Options {
  std::string graph;
  std::string domain;
  std::string metric_graph;
  std::string format = "json";
  int threads = 0;
  std::vector<double> t;
  std::vector<int> j;
  std::vector<double> p;
  std::string method = "exact";
  std::size_t n = 30;
  std::string mode = "exhaustive";
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::string kernel;
  std::vector<double> eps;
  double h = 0.0;
  std::vector<double> box;
  std::vector<double> ball;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, r.ptr};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv(std::ostream& out, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

Error with_path(const Error& e, const std::string& path) { return Error(e.code(), path + ": " + e.message()); }

struct Instance {
  FiniteRWSpace space;
  Domain domain;
};

Instance load_instance(const Options& o, Document& doc) {
  if (o.graph.empty()) throw Error(Errc::invalid_argument, "--graph is required");
  if (o.domain.empty()) throw Error(Errc::invalid_argument, "--domain is required");
  WeightedGraph g;
  try {
    g = parse_graph_file(read_text_file(o.graph));
  } catch (const Error& e) {
    throw with_path(e, o.graph);
  }
  FiniteRWSpace space = from_weighted_graph(g);
  StateSet omega;
  try {
    omega = parse_domain_file(read_text_file(o.domain), space);
  } catch (const Error& e) {
    throw with_path(e, o.domain);
  }
  doc.inputs["graph"] = o.graph;
  doc.inputs["domain"] = o.domain;
  Domain domain = make_domain(space, omega);
  if (!is_m_connected(space, domain.omega)) doc.warnings.push_back("domain is not m-connected");
  return {std::move(space), std::move(domain)};
}

MetricGraph load_metric_graph(const Options& o, Document& doc) {
  if (o.metric_graph.empty()) throw Error(Errc::invalid_argument, "--metric-graph is required");
  doc.inputs["metric_graph"] = o.metric_graph;
  try {
    return parse_metric_graph(read_text_file(o.metric_graph));
  } catch (const Error& e) {
    throw with_path(e, o.metric_graph);
  }
}

json state_map(const FiniteRWSpace& space, const Domain& d, const Eigen::VectorXd& f) {
  json out = json::object();
  for (std::size_t i = 0; i < d.size(); ++i) out[space.id(d.omega[i])] = f[static_cast<Eigen::Index>(i)];
  return out;
}

void per_state_rows(Table& t, const char* quantity, const FiniteRWSpace& space, const Domain& d,
                    const Eigen::VectorXd& f) {
  for (std::size_t i = 0; i < d.size(); ++i)
    t.rows.push_back({quantity, space.id(d.omega[i]), num(f[static_cast<Eigen::Index>(i)])});
}

void cmd_torsion(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  const auto r = stress_solve(space, d);
  doc.results["rigidity"] = r.rigidity;
  doc.results["stress"] = state_map(space, d, r.stress);
  doc.results["residual"] = stress_residual(d, r.stress);
  doc.table.header = {"quantity", "state", "value"};
  doc.table.rows.push_back({"rigidity", "", num(r.rigidity)});
  per_state_rows(doc.table, "stress", space, d, r.stress);
}

void cmd_heat_content(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  doc.inputs["t"] = o.t;
  json series = json::array();
  doc.table.header = {"t", "Q"};
  for (double t : o.t) {
    const double q = heat_content(space, d, t, 1e-14);
    series.push_back({{"t", t}, {"Q", q}});
    doc.table.rows.push_back({num(t), num(q)});
  }
  doc.results["series"] = std::move(series);
}

void cmd_moments(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  doc.inputs["j"] = o.j;
  json list = json::array();
  doc.table.header = {"j", "EM"};
  for (int j : o.j) {
    const double em = exit_moment(space, d, j, 1e-13);
    list.push_back({{"j", j}, {"EM", em}});
    doc.table.rows.push_back({std::to_string(j), num(em)});
  }
  doc.results["moments"] = std::move(list);
}

void cmd_eigenvalue(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  doc.inputs["method"] = o.method;
  double lambda = 0.0;
  if (o.method == "exact") {
    lambda = eigenvalue_exact(space, d);
  } else if (o.method == "limit") {
    doc.inputs["n"] = o.n;
    lambda = eigenvalue_limit(space, d, o.n);
  } else {
    throw Error(Errc::invalid_argument, "unknown eigenvalue method '" + o.method + "'");
  }
  doc.results["lambda"] = lambda;
  doc.table.header = {"quantity", "value"};
  doc.table.rows.push_back({"lambda", num(lambda)});
}

void cmd_cheeger(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  const CheegerMode mode = parse_cheeger_mode(o.mode);
  doc.inputs["p"] = o.p;
  doc.inputs["mode"] = o.mode;
  json list = json::array();
  doc.table.header = {"p", "value", "exact", "argmin_set"};
  for (double p : o.p) {
    const auto r = cheeger(space, d, p, mode);
    std::vector<std::string> ids;
    std::string joined;
    for (Index x : r.argmin_set) {
      ids.push_back(space.id(x));
      joined += (joined.empty() ? "" : " ") + space.id(x);
    }
    list.push_back({{"p", p}, {"value", r.value}, {"exact", r.exact}, {"argmin_set", ids}});
    doc.table.rows.push_back({num(p), num(r.value), r.exact ? "true" : "false", joined});
  }
  if (mode == CheegerMode::greedy) doc.warnings.push_back("greedy search gives an upper bound only");
  doc.results["cheeger"] = std::move(list);
}

void cmd_ptorsion(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  doc.inputs["p"] = o.p;
  json list = json::array();
  doc.table.header = {"p", "rigidity", "upper_bound", "duality_gap", "energy_gap", "identity_residual", "iterations"};
  for (double p : o.p) {
    const auto r = p_torsion(space, d, p);
    list.push_back({{"p", p},
                    {"rigidity", r.rigidity},
                    {"upper_bound", r.upper_bound},
                    {"duality_gap", r.duality_gap},
                    {"energy_gap", r.energy_gap},
                    {"identity_residual", r.identity_residual},
                    {"iterations", r.iterations},
                    {"stress", state_map(space, d, r.stress)}});
    doc.table.rows.push_back({num(p), num(r.rigidity), num(r.upper_bound), num(r.duality_gap), num(r.energy_gap),
                              num(r.identity_residual),
                              std::to_string(r.iterations)});
  }
  doc.results["ptorsion"] = std::move(list);
}

void cmd_mc(const Options& o, Document& doc) {
  const auto [space, d] = load_instance(o, doc);
  doc.inputs["samples"] = o.samples;
  doc.inputs["seed"] = o.seed;
  const auto r = mc_torsion(space, d, o.samples, o.seed);
  doc.results["mean"] = r.mean;
  doc.results["half_width_95"] = r.half_width_95;
  doc.results["stddev"] = r.stddev;
  doc.table.header = {"quantity", "value"};
  doc.table.rows = {{"mean", num(r.mean)}, {"half_width_95", num(r.half_width_95)}, {"stddev", num(r.stddev)}};
}

void cmd_quantum(const Options& o, Document& doc) {
  const MetricGraph g = load_metric_graph(o, doc);
  const auto q = quantum_torsion(g);
  const double lower = quantum_lower_bound(g);
  doc.results["T_q"] = q.t_q;
  doc.results["c"] = q.c;
  doc.results["c_invariance_gap"] = q.c_invariance_gap;
  doc.results["lower_bound"] = lower;
  doc.results["reduced_torsion"] = q.reduced_torsion;
  doc.results["vertex_values"] = q.vertex_values;
  doc.table.header = {"quantity", "vertex", "value"};
  doc.table.rows = {{"T_q", "", num(q.t_q)},
                    {"c", "", num(q.c)},
                    {"c_invariance_gap", "", num(q.c_invariance_gap)},
                    {"lower_bound", "", num(lower)}};
  for (const auto& [v, val] : q.vertex_values) doc.table.rows.push_back({"vertex_value", v, num(val)});
}

Region parse_region(const Options& o) {
  if (!o.box.empty() == !o.ball.empty()) throw Error(Errc::invalid_argument, "give exactly one of --box and --ball");
  if (!o.box.empty()) {
    if (o.box.size() % 2 != 0 || o.box.size() > 6)
      throw Error(Errc::invalid_argument, "--box takes lo,hi per axis (1 to 3 axes)");
    const int dim = static_cast<int>(o.box.size() / 2);
    std::array<double, 3> lo{}, hi{};
    for (int a = 0; a < dim; ++a) {
      lo[a] = o.box[2 * a];
      hi[a] = o.box[2 * a + 1];
    }
    return box_region(dim, lo, hi);
  }
  if (o.ball.size() != 2) throw Error(Errc::invalid_argument, "--ball takes dim,radius");
  const double dim = o.ball[0];
  if (dim != std::floor(dim)) throw Error(Errc::invalid_argument, "--ball dimension must be an integer");
  return ball_region(static_cast<int>(dim), {0.0, 0.0, 0.0}, o.ball[1]);
}

void cmd_rescale(const Options& o, Document& doc) {
  const RadialKernel k = parse_kernel_spec(o.kernel);
  const Region region = parse_region(o);
  if (!(o.h > 0.0)) throw Error(Errc::invalid_argument, "--h must be positive");
  doc.inputs["kernel"] = kernel_spec_string(k);
  doc.inputs["eps"] = o.eps;
  doc.inputs["h"] = o.h;
  if (!o.box.empty()) doc.inputs["box"] = o.box;
  else doc.inputs["ball"] = o.ball;
  const double reference = region.local_torsion();
  doc.results["local_torsion"] = number_or_null(reference);
  json list = json::array();
  doc.table.header = {"eps", "value", "torsion", "cells", "rel_error"};
  for (double eps : o.eps) {
    const auto r = rescaled_torsion(region, k, eps, o.h);
    const double rel = std::isfinite(reference) ? std::abs(r.value - reference) / reference : std::nan("");
    list.push_back({{"eps", eps},
                    {"value", r.value},
                    {"torsion", r.torsion},
                    {"c2", r.c2},
                    {"cells", r.cells},
                    {"rel_error", number_or_null(rel)}});
    doc.table.rows.push_back({num(eps), num(r.value), num(r.torsion), std::to_string(r.cells), num(rel)});
    for (const auto& w : r.warnings) doc.warnings.push_back("eps=" + num(eps) + ": " + w);
  }
  doc.results["rescaled"] = std::move(list);
}

void report_rows(const AuditReport& rep, Document& doc) {
  json rows = json::array();
  doc.table.header = {"name", "lhs", "rhs", "slack", "tol", "status", "note"};
  for (const auto& r : rep.rows) {
    const bool skipped = r.status == RowStatus::skipped;
    rows.push_back({{"name", r.name},
                    {"lhs", skipped ? json(nullptr) : number_or_null(r.lhs)},
                    {"rhs", skipped ? json(nullptr) : number_or_null(r.rhs)},
                    {"slack", skipped ? json(nullptr) : number_or_null(r.slack)},
                    {"tol", r.tol},
                    {"status", std::string(row_status_name(r.status))},
                    {"note", r.note}});
    doc.table.rows.push_back({r.name, skipped ? "" : num(r.lhs), skipped ? "" : num(r.rhs),
                              skipped ? "" : num(r.slack), num(r.tol), std::string(row_status_name(r.status)),
                              r.note});
  }
  doc.results["rows"] = std::move(rows);
  doc.results["all_pass"] = rep.all_pass();
  doc.warnings.insert(doc.warnings.end(), rep.warnings.begin(), rep.warnings.end());
  if (!rep.all_pass()) doc.exit_code = kAuditFailure;
}

void cmd_audit(const Options& o, Document& doc) {
  if (!o.metric_graph.empty()) {
    if (!o.graph.empty() || !o.domain.empty())
      throw Error(Errc::invalid_argument, "--metric-graph cannot be combined with --graph/--domain");
    report_rows(audit_quantum(load_metric_graph(o, doc)), doc);
    return;
  }
  const auto [space, d] = load_instance(o, doc);
  doc.warnings.clear();
  doc.inputs["p"] = o.p;
  const AuditReport rep = audit(space, d, o.p);
  doc.results["instance"] = {{"domain_size", rep.domain_size}, {"nu_domain", rep.nu_domain},
                             {"nu_closure", rep.nu_closure},   {"perimeter", rep.perimeter},
                             {"lambda", rep.lambda},           {"torsion", rep.torsion},
                             {"connected", rep.connected},     {"reversible", rep.reversible}};
  report_rows(rep, doc);
}

int default_threads() {
  const char* env = std::getenv("TORSION_RW_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  int n = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), n);
  if (ec != std::errc{} || *ptr != '\0' || n < 1)
    throw Error(Errc::invalid_argument, "TORSION_RW_THREADS must be a positive integer");
  return n;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Torsional rigidity and related quantities on finite random walk spaces", "rwtorsion"};
  app.require_subcommand(1);
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", o.threads, "OpenMP worker threads (default: $TORSION_RW_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  auto graph_inputs = [&](CLI::App* sub) {
    sub->add_option("--graph", o.graph, "weighted edge list")->check(CLI::ExistingFile);
    sub->add_option("--domain", o.domain, "domain state ids")->check(CLI::ExistingFile);
  };
  std::string name;
  std::function<void(const Options&, Document&)> handler;
  auto add = [&](const char* cmd, const char* help, void (*fn)(const Options&, Document&)) {
    CLI::App* sub = app.add_subcommand(cmd, help);
    sub->callback([&, cmd, fn] {
      name = cmd;
      handler = fn;
    });
    return sub;
  };

  auto* torsion = add("torsion", "torsional rigidity and stress function", cmd_torsion);
  graph_inputs(torsion);

  auto* heat = add("heat-content", "spectral heat content Q(t)", cmd_heat_content);
  graph_inputs(heat);
  heat->add_option("--t", o.t, "times")->delimiter(',')->required();

  auto* moments = add("moments", "exit moments EM_j", cmd_moments);
  graph_inputs(moments);
  moments->add_option("--j", o.j, "moment orders")->delimiter(',')->required()->check(CLI::PositiveNumber);

  auto* eig = add("eigenvalue", "first Dirichlet eigenvalue", cmd_eigenvalue);
  graph_inputs(eig);
  eig->add_option("--method", o.method, "exact or limit")->check(CLI::IsMember({"exact", "limit"}));
  eig->add_option("--n", o.n, "limit-formula index")->check(CLI::PositiveNumber);

  auto* chg = add("cheeger", "Cheeger constants h_p", cmd_cheeger);
  graph_inputs(chg);
  chg->add_option("--p", o.p, "exponents >= 1")->delimiter(',')->required();
  chg->add_option("--mode", o.mode, "exhaustive or greedy")->check(CLI::IsMember({"exhaustive", "greedy"}));

  auto* pt = add("ptorsion", "p-torsional rigidity", cmd_ptorsion);
  graph_inputs(pt);
  pt->add_option("--p", o.p, "exponents > 1")->delimiter(',')->required();

  auto* mc = add("mc", "Monte-Carlo torsion estimate", cmd_mc);
  graph_inputs(mc);
  mc->add_option("--samples", o.samples, "samples per state");
  mc->add_option("--seed", o.seed, "random seed");

  auto* qu = add("quantum", "quantum-graph torsional rigidity", cmd_quantum);
  qu->add_option("--metric-graph", o.metric_graph, "metric graph file")->check(CLI::ExistingFile)->required();

  auto* rs = add("rescale", "rescaled nonlocal torsion on a grid", cmd_rescale);
  rs->add_option("--kernel", o.kernel, "uniform:<r>, tent:<r> or gauss:<sigma>:<cutoff>")->required();
  rs->add_option("--eps", o.eps, "kernel scales")->delimiter(',')->required();
  rs->set_help_flag("--help", "Print this help message and exit");
  rs->add_option("--h", o.h, "cell width")->required();
  rs->add_option("--box", o.box, "lo,hi per axis")->delimiter(',');
  rs->add_option("--ball", o.ball, "dim,radius (centered at the origin)")->delimiter(',');

  auto* au = add("audit", "check the inequality chain on an instance", cmd_audit);
  graph_inputs(au);
  au->add_option("--metric-graph", o.metric_graph, "audit a metric graph instead")->check(CLI::ExistingFile);
  au->add_option("--p", o.p, "p-torsion exponents")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  Document doc;
  try {
    set_num_threads(o.threads > 0 ? o.threads : default_threads());
    if (name == "audit" && o.p.empty() && o.metric_graph.empty()) o.p = {2.0};
    handler(o, doc);
  } catch (const Error& e) {
    err << "error [" << errc_name(e.code()) << "]: " << e.message() << '\n';
    return e.is_input_error() ? kInputError : kComputationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputationError;
  }

  for (const auto& w : doc.warnings) err << "warning: " << w << '\n';
  if (o.format == "csv") {
    write_csv(out, doc.table);
  } else {
    json j{{"command", name}, {"inputs", doc.inputs}, {"results", doc.results}, {"warnings", doc.warnings}};
    out << j.dump(2) << '\n';
  }
  return doc.exit_code;
}

}  // namespace rwt::cli
