// slopeforge command-line front end. Every command prints a key=value summary
// on stdout; failures print one `error: kind=... reason="..."` line on stderr.

#include "slopeforge/approximation.hpp"
#include "slopeforge/coding.hpp"
#include "slopeforge/entropy.hpp"
#include "slopeforge/error.hpp"
#include "slopeforge/graphmap.hpp"
#include "slopeforge/markov.hpp"
#include "slopeforge/operator.hpp"
#include "slopeforge/pwa_io.hpp"
#include "slopeforge/semiconjugacy.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace slopeforge;

namespace {

enum ExitCode { kOk = 0, kParse = 2, kPrecondition = 3, kConvergence = 4, kVerification = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
      return kParse;
    case ErrorKind::precondition:
    case ErrorKind::budget:
      return kPrecondition;
    case ErrorKind::convergence:
      return kConvergence;
    case ErrorKind::verification:
      return kVerification;
  }
  return kPrecondition;
}

int report_error(const std::string& kind, const std::string& reason, int code) {
  std::string escaped;
  for (const char c : reason) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c == '\n' ? ' ' : c;
  }
  std::cerr << "error: kind=" << kind << " reason=\"" << escaped << "\"\n";
  return code;
}

class Summary {
 public:
  template <class T>
  void add(const std::string& key, const T& value) {
    std::ostringstream s;
    s << value;
    lines_ += key + "=" + s.str() + "\n";
  }
  void fixed6(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    add(key, buf);
  }
  void sci(const std::string& key, const Real& v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v.convert_to<double>());
    add(key, buf);
  }
  void artifact(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_file(path, text);
    add("artifact", path.string());
  }
  void print() const { std::cout << lines_; }

 private:
  std::string lines_;
};

std::string yes_no(bool b) { return b ? "true" : "false"; }

bool strictly_increasing(const PsiTable& psi) {
  if (!psi.collapse_intervals.empty()) return false;
  for (std::size_t i = 0; i + 1 < psi.ys.size(); ++i) {
    if (!(psi.ys[i + 1] > psi.ys[i])) return false;
  }
  return true;
}

std::vector<Rational> parse_points(const std::string& list) {
  std::vector<Rational> out;
  std::stringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(parse_rational(item));
  }
  return out;
}

// Options shared by the commands that run the approximation pipeline.
struct PipelineFlags {
  double tol = NormalizeOptions{}.target;
  std::vector<int> schedule = NormalizeOptions{}.schedule;
  std::size_t grid = NormalizeOptions{}.grid;
  int entropy_depth = NormalizeOptions{}.entropy_depth;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "Cauchy-gap target")->capture_default_str();
    cmd->add_option("--schedule", schedule, "Approximation indices n_i")->delimiter(',');
    cmd->add_option("--grid", grid, "Check grid size")->capture_default_str();
    cmd->add_option("--entropy-depth", entropy_depth, "Lap-count depth for the entropy check")
        ->capture_default_str();
  }
  NormalizeOptions options() const {
    NormalizeOptions o;
    o.target = tol;
    o.schedule = schedule;
    o.grid = grid;
    o.entropy_depth = entropy_depth;
    return o;
  }
};

int cmd_entropy(const std::string& file, int depth, const std::string& report_path) {
  const PwaMap f = read_pwa_file(file);
  EntropyOptions options;
  options.depth = depth;
  const EntropyReport r = entropy(f, options);
  Summary s;
  s.fixed6("h_est", r.trend);
  if (r.spectral) s.fixed6("h_spectral", *r.spectral);
  s.add("c_n", r.lap_counts.back());
  s.add("depth", r.depth());
  if (r.spectral) s.add("agreed", yes_no(r.agreed));
  if (!r.positive()) s.add("warning", "entropy not positive");
  for (const std::string& w : r.warnings) s.add("warning", w);
  if (!report_path.empty()) s.artifact(report_path, entropy_tsv(r));
  s.print();
  return kOk;
}

int cmd_markov_check(const std::string& file, const std::string& points, std::size_t budget,
                     const std::string& matrix_path) {
  const PwaMap f = read_pwa_file(file);
  Summary s;
  std::optional<MarkovStructure> structure;
  if (!points.empty()) {
    const MarkovCheck check = is_markov(f, parse_points(points));
    s.add("markov", yes_no(check.ok));
    if (!check.ok) {
      s.add("condition", check.condition);
      s.add("message", check.message);
      s.print();
      return report_error("verification", check.message, kVerification);
    }
    structure = build_markov_structure(f, parse_points(points));
  } else {
    structure = markov_closure(f, budget);
    s.add("markov", yes_no(structure.has_value()));
    if (!structure) {
      s.print();
      return report_error("budget", "no Markov partition within " + std::to_string(budget) + " points",
                          kPrecondition);
    }
  }
  s.add("points", structure->points.size());
  s.add("cells", structure->cells.size());
  s.fixed6("beta", structure->beta.convert_to<double>());
  s.add("primitive", yes_no(is_mixing_matrix(structure->matrix).primitive));
  if (!matrix_path.empty()) s.artifact(matrix_path, serialize_matrix(structure->matrix));
  s.print();
  return kOk;
}

int cmd_normalize(const std::string& file, const PipelineFlags& flags, const std::string& g_path,
                  const std::string& psi_path, const std::string& trace_path) {
  const PwaMap f = read_pwa_file(file);
  const PipelineTrace trace = normalize(f, flags.options());
  Summary s;
  s.fixed6("beta", trace.betas.back().convert_to<double>());
  s.fixed6("gamma", trace.gamma.convert_to<double>());
  s.sci("residual", trace.residuals.back());
  if (!trace.cauchy_gaps.empty() && trace.cauchy_gaps.back()) s.sci("cauchy_gap", *trace.cauchy_gaps.back());
  s.fixed6("h_est", trace.entropy_estimate);
  s.add("markov_exact", yes_no(trace.markov_exact));
  s.add("converged", yes_no(trace.converged));
  s.add("conjugacy", yes_no(strictly_increasing(trace.psi)));
  s.add("collapse_intervals", trace.psi.collapse_intervals.size());
  for (const std::string& w : trace.warnings) s.add("warning", w);
  if (!g_path.empty()) s.artifact(g_path, serialize_pwa_decimal(trace.g->map));
  if (!psi_path.empty()) s.artifact(psi_path, psi_tsv(trace.psi));
  if (!trace_path.empty()) s.artifact(trace_path, trace_tsv(trace));
  s.print();
  if (!trace.converged) return report_error("convergence", "Cauchy gap above target", kConvergence);
  return kOk;
}

int cmd_approx(const std::string& file, int n, const std::string& g_path) {
  const PwaMap f = read_pwa_file(file);
  const MarkovApprox a = markov_approx(f, n);
  const Rational dist = sup_dist(f, a.g);
  Summary s;
  s.add("n", n);
  s.add("delta", to_string(a.config.delta));
  s.add("grid", a.config.grid);
  s.add("points", a.config.points.size());
  s.add("sup_dist", to_string(dist));
  s.add("within_1_over_n", yes_no(dist * n < 1));
  bool shadow_ok = true;
  for (int k = 1; k <= std::min(n, kMaxShadowDepth); ++k) {
    const ShadowReport r = check_shadowing(f, a.g, k);
    if (!r.ok) {
      s.add("shadowing_failure", r.message);
      shadow_ok = false;
      break;
    }
  }
  s.add("shadowing", yes_no(shadow_ok));
  if (!g_path.empty()) s.artifact(g_path, serialize_pwa(a.g));
  s.print();
  if (!shadow_ok || dist * n >= 1) return report_error("verification", "approximation contract violated", kVerification);
  return kOk;
}

int cmd_verify(const std::string& f_file, const std::string& g_file, const std::string& psi_file,
               std::size_t grid, double tol) {
  const PwaMap f = read_pwa_file(f_file);
  const PwaMap g = read_pwa_file(g_file);
  const PsiTable psi = parse_psi_tsv(read_text_file(psi_file));
  const VerifyReport r = verify_semiconjugacy(f, g, psi, grid);
  Summary s;
  s.sci("residual", r.residual);
  s.sci("lower", r.lower);
  s.sci("upper", r.upper);
  s.add("samples", r.samples);
  if (r.worst) s.add("worst_x", to_string(*r.worst));
  s.print();
  if (r.residual > Real(tol)) return report_error("verification", "residual above tolerance", kVerification);
  return kOk;
}

int cmd_reduce(const std::string& file, int depth, const std::string& collapse_path,
               const std::string& psi0_path, const std::string& fhat_path) {
  const PwaMap f = read_pwa_file(file);
  const QuotientResult r = psm_reduce(f, depth);
  Summary s;
  s.add("depth", r.depth);
  s.add("collapse_intervals", r.collapse_intervals.size());
  s.add("collapsed_runs", r.collapsed_runs.size());
  s.add("factor_residual", to_string(r.factor_residual));
  s.fixed6("h_est_f", entropy_lapcount(f, 10).trend);
  s.fixed6("h_est_fhat", entropy_lapcount(r.fhat, 10).trend);
  if (!collapse_path.empty()) s.artifact(collapse_path, collapse_tsv(r.collapse_intervals));
  if (!psi0_path.empty()) s.artifact(psi0_path, serialize_pwa(r.psi0));
  if (!fhat_path.empty()) s.artifact(fhat_path, serialize_pwa(r.fhat));
  s.print();
  return kOk;
}

int cmd_phi(const std::string& file, const PipelineFlags& flags, int coding_depth, const std::string& out_dir) {
  const PwaMap f = read_pwa_file(file);
  PhiOptions options;
  options.normalize = flags.options();
  options.coding_depth = coding_depth;
  const NormalForm nf = phi(f, options);
  Summary s;
  s.fixed6("beta", nf.g.slope.convert_to<double>());
  s.sci("residual", nf.residual);
  s.add("conjugacy", yes_no(nf.conjugacy));
  s.add("evidence", to_string(nf.evidence));
  s.add("input_modality", nf.input_modality);
  s.add("output_modality", nf.output_modality);
  std::ostringstream evidence;
  evidence << "evidence=" << to_string(nf.evidence) << "\nconjugacy=" << yes_no(nf.conjugacy)
           << "\ninput_modality=" << nf.input_modality << "\noutput_modality=" << nf.output_modality
           << "\nmarkov_exact=" << yes_no(nf.trace.markov_exact) << '\n';
  for (const std::string& note : nf.notes) evidence << "note=" << note << '\n';
  const fs::path dir(out_dir);
  s.artifact(dir / "g.pwa", serialize_pwa_decimal(nf.g.map));
  s.artifact(dir / "psi.tsv", psi_tsv(nf.psi));
  s.artifact(dir / "evidence.txt", evidence.str());
  s.print();
  return kOk;
}

int cmd_flatten(const std::string& file, const std::string& out_path, bool normalize_too,
                const PipelineFlags& flags) {
  const GraphMapSpec gm = read_graphmap_file(file);
  const Flattening fl = flatten(gm);
  std::size_t jumps = 0;
  for (const Node& n : fl.f.nodes()) jumps += n.is_jump() ? 1 : 0;
  Summary s;
  s.add("edges", gm.graph.edges.size());
  s.add("vertices", gm.graph.vertices.size());
  s.add("cut_points", fl.chart.cut_points.size());
  s.add("jumps", jumps);
  s.add("laps", laps(fl.f).size());
  s.artifact(out_path, serialize_pwa(fl.f));
  if (!normalize_too) {
    s.print();
    return kOk;
  }
  const GraphNormalForm nf = normalize_graph(gm, flags.options());
  s.fixed6("beta", nf.trace.g->slope.convert_to<double>());
  s.add("quotient_edges", nf.quotient_edges.size());
  s.add("quotient_vertices", nf.quotient_vertices);
  s.add("lifted_continuity", yes_no(nf.continuous));
  for (const std::string& note : nf.notes) s.add("note", note);
  s.print();
  if (!nf.continuous) return report_error("verification", "lifted g is discontinuous at a vertex", kVerification);
  return kOk;
}

int cmd_plot(const std::string& file, std::size_t samples, const std::string& out_path) {
  if (samples == 0) throw PreconditionError("--samples must be positive");
  const PwaMap f = read_pwa_file(file);
  std::set<Rational> xs;
  for (std::size_t i = 0; i <= samples; ++i) {
    xs.insert(f.lo() + f.domain().length() * Rational(static_cast<long>(i), static_cast<long>(samples)));
  }
  for (const Node& n : f.nodes()) {
    if (n.is_jump()) xs.insert(n.x);
  }
  std::ostringstream out;
  for (const Rational& x : xs) {
    const auto write = [&](const Rational& y) { out << format_decimal(x) << '\t' << format_decimal(y) << '\n'; };
    if (x != f.lo()) write(f.eval(x, Side::left));
    if (x != f.hi() && (x == f.lo() || f.eval(x, Side::left) != f.eval(x, Side::right))) {
      write(f.eval(x, Side::right));
    }
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    Summary s;
    s.add("samples", samples);
    s.artifact(out_path, out.str());
    s.print();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-slope normal forms of piecewise monotone interval and graph maps"};
  app.require_subcommand(1);
  unsigned precision = 0;
  app.add_option("--precision", precision, "Mantissa bits (overrides SLOPEFORGE_PRECISION)");

  std::string file, g_file, psi_file, out, psi_out, trace_out, points, matrix_out, collapse_out,
      psi0_out, fhat_out, flat_out = "flat.pwa", phi_dir = ".";
  int depth = 12;
  int coding_depth = kDefaultCodingDepth;
  int n = 8;
  std::size_t grid = 10000, samples = 100, budget = 1000;
  double tol = 1e-6;
  bool normalize_graph_too = false;
  PipelineFlags flags;

  auto* entropy_cmd = app.add_subcommand("entropy", "Lap-count and spectral entropy");
  entropy_cmd->add_option("file", file, "PWA map")->required();
  entropy_cmd->add_option("--depth", depth, "Lap-count depth")->capture_default_str();
  entropy_cmd->add_option("--report", out, "Write the TSV report here");

  auto* markov_cmd = app.add_subcommand("markov-check", "Validate or search for a Markov partition");
  markov_cmd->add_option("file", file, "PWA map")->required();
  markov_cmd->add_option("--points", points, "Comma-separated candidate partition points");
  markov_cmd->add_option("--budget", budget, "Closure point budget")->capture_default_str();
  markov_cmd->add_option("--matrix", matrix_out, "Write the transition matrix here");

  auto* normalize_cmd = app.add_subcommand("normalize", "Approximation pipeline to constant slope");
  normalize_cmd->add_option("file", file, "PWA map")->required();
  flags.attach(normalize_cmd);
  normalize_cmd->add_option("--out", out, "Write g (PWA) here");
  normalize_cmd->add_option("--psi", psi_out, "Write the psi table here");
  normalize_cmd->add_option("--trace", trace_out, "Write the pipeline trace here");

  auto* approx_cmd = app.add_subcommand("approx", "Markov approximation g_n");
  approx_cmd->add_option("file", file, "PWA map")->required();
  approx_cmd->add_option("--n", n, "Approximation index")->capture_default_str();
  approx_cmd->add_option("--out", out, "Write g_n (PWA) here");

  auto* verify_cmd = app.add_subcommand("verify", "Check psi o f = g o psi");
  verify_cmd->add_option("f", file, "PWA map f")->required();
  verify_cmd->add_option("g", g_file, "PWA map g")->required();
  verify_cmd->add_option("psi", psi_file, "psi TSV")->required();
  verify_cmd->add_option("--grid", grid, "Check grid size")->capture_default_str();
  verify_cmd->add_option("--tol", tol, "Residual tolerance")->capture_default_str();

  auto* reduce_cmd = app.add_subcommand("reduce", "Collapse flat pieces to a strictly monotone factor");
  reduce_cmd->add_option("file", file, "PWA map")->required();
  reduce_cmd->add_option("--depth", coding_depth, "Coding depth")->capture_default_str();
  reduce_cmd->add_option("--collapse", collapse_out, "Write collapse intervals here");
  reduce_cmd->add_option("--psi0", psi0_out, "Write psi0 (PWA) here");
  reduce_cmd->add_option("--fhat", fhat_out, "Write fhat (PWA) here");

  auto* phi_cmd = app.add_subcommand("phi", "Normal form of a continuous map");
  phi_cmd->add_option("file", file, "PWA map")->required();
  flags.attach(phi_cmd);
  phi_cmd->add_option("--coding-depth", coding_depth, "Depth for flat-piece reduction")->capture_default_str();
  phi_cmd->add_option("--out-dir", phi_dir, "Directory for g.pwa, psi.tsv, evidence.txt")->capture_default_str();

  auto* flatten_cmd = app.add_subcommand("flatten", "Flatten a graph map to an interval map");
  flatten_cmd->add_option("file", file, "Graph map")->required();
  flatten_cmd->add_option("--out", flat_out, "Write the flattened map here")->capture_default_str();
  flatten_cmd->add_flag("--normalize", normalize_graph_too, "Also normalize and lift to the quotient graph");
  flags.attach(flatten_cmd);

  auto* plot_cmd = app.add_subcommand("plot", "Sample a PWA map as x<TAB>f(x)");
  plot_cmd->add_option("file", file, "PWA map")->required();
  plot_cmd->add_option("--samples", samples, "Number of sample intervals")->capture_default_str();
  plot_cmd->add_option("--out", out, "Write the TSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), kParse);
  }

  try {
    init_precision_from_env();
    if (precision) set_precision_bits(precision);
    if (*entropy_cmd) return cmd_entropy(file, depth, out);
    if (*markov_cmd) return cmd_markov_check(file, points, budget, matrix_out);
    if (*normalize_cmd) return cmd_normalize(file, flags, out, psi_out, trace_out);
    if (*approx_cmd) return cmd_approx(file, n, out);
    if (*verify_cmd) return cmd_verify(file, g_file, psi_file, grid, tol);
    if (*reduce_cmd) return cmd_reduce(file, coding_depth, collapse_out, psi0_out, fhat_out);
    if (*phi_cmd) return cmd_phi(file, flags, coding_depth, phi_dir);
    if (*flatten_cmd) return cmd_flatten(file, flat_out, normalize_graph_too, flags);
    if (*plot_cmd) return cmd_plot(file, samples, out);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("io", e.what(), kParse);
  }
  return kOk;
}
