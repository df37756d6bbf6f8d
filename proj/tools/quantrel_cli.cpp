#include "quantrel/errors.hpp"
#include "quantrel/experiments.hpp"
#include "quantrel/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace quantrel;
using io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::save_json(out, j);
  }
}

// Behaviours that signal (e.g. from counts) are projected first.
Behaviour nonlocal_input(const json& in, json& note) {
  Behaviour b = io::behaviour_from_input(in);
  if (!b.signalling()) return b;
  const NsProjection p = ns_project(b);
  note = {{"divergence", p.divergence}, {"kkt_residual", p.kkt_residual},
          {"floored_entries", p.floored_entries}};
  return p.behaviour;
}

NonlocalityOptions nl_options(int level, const std::string& pinned) {
  NonlocalityOptions o;
  o.level = level;
  if (pinned == "alice") o.pinned = Party::alice;
  else if (pinned != "bob") throw ValidationError("--pinned must be alice or bob");
  return o;
}

json quantify(const std::string& family, const std::string& kind, const std::string& path,
              int level, const std::string& pinned) {
  const json in = io::load_json(path);
  if (family == "incompat") {
    return io::to_json(incompatibility_quantifier(io::measurements_from_input(in),
                                                  parse_incompat_kind(kind)));
  }
  if (family == "steer") {
    return io::to_json(steering_quantifier(io::assemblage_from_input(in), parse_steering_kind(kind)));
  }
  json note;
  const Behaviour b = nonlocal_input(in, note);
  json out = io::to_json(nonlocality_quantifier(b, parse_nonlocality_kind(kind), nl_options(level, pinned)));
  if (!note.is_null()) out["ns_projection"] = note;
  return out;
}

json certificate(const std::string& kind_name, const std::string& path, int level,
                 const std::string& pinned, std::string& text) {
  const json in = io::load_json(path);
  const Quantifier q = parse_quantifier(kind_name);
  switch (q.family) {
    case QuantifierFamily::incompatibility: {
      const MeasurementSet m = io::measurements_from_input(in);
      const IncompatResult r = incompatibility_quantifier(m, q.incompat);
      json j = io::to_json(r.certificate);
      j["margin"] = certificate_margin(r.certificate, m.outcomes());
      std::ostringstream os;
      os << "sum_{a,x} tr[F_{a|x} M_{a|x}] <= tr Y = " << r.certificate.bound << "\nvalue "
         << r.certificate.value << ", violation " << r.certificate.violation << "\n";
      text = os.str();
      return j;
    }
    case QuantifierFamily::steering: {
      const Assemblage a = io::assemblage_from_input(in);
      const SteeringCertificate c = steering_certificate(steering_quantifier(a, q.steering), a);
      text = format_inequality(c);
      return io::to_json(c);
    }
    case QuantifierFamily::nonlocality: {
      json note;
      const Behaviour b = nonlocal_input(in, note);
      const BellCertificate c =
          bell_certificate(nonlocality_quantifier(b, q.nonlocality, nl_options(level, pinned)), b);
      text = format_inequality(c);
      return io::to_json(c);
    }
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantifiers of measurement incompatibility, steering and Bell nonlocality"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  app.add_option("-o,--out", out, "write JSON output to this file instead of stdout");

  std::string family, kind, in, pinned = "bob";
  int level = 2;
  auto* q = app.add_subcommand("quantify", "evaluate one quantifier");
  q->add_option("family", family, "incompat | steer | nonlocal")
      ->required()
      ->check(CLI::IsMember({"incompat", "steer", "nonlocal"}));
  q->add_option("--kind", kind, "quantifier kind, e.g. IR, SR_c, NLW")->required();
  q->add_option("--in", in, "input JSON")->required();
  q->add_option("--level", level, "NPA level for relaxed nonlocality kinds")->check(CLI::Range(1, 2));
  q->add_option("--pinned", pinned, "party whose marginal the consistent kinds fix");

  std::string spec_path, csv_path;
  auto* sw = app.add_subcommand("sweep", "parameter sweep over a state family");
  sw->add_option("--spec", spec_path, "sweep spec JSON")->required();
  sw->add_option("--csv", csv_path, "write the value table as CSV");

  double theta = 0;
  int restarts = 1;
  std::uint64_t seed = 1;
  auto* ss = app.add_subcommand("seesaw", "optimize Bob's measurements by see-saw");
  ss->add_option("--theta", theta, "state angle in (0, pi/4]")->required();
  ss->add_option("--kind", kind, "nonlocality kind")->required();
  ss->add_option("--restarts", restarts, "random restarts")->check(CLI::PositiveNumber);
  ss->add_option("--seed", seed, "seed for the restarts");
  ss->add_option("--level", level, "NPA level")->check(CLI::Range(1, 2));

  std::string target, outdir = "reproduce_out", baseline;
  bool extended = false;
  int points = 51;
  auto* rp = app.add_subcommand("reproduce", "reproduce a table or figure");
  rp->add_option("target", target, "table1 | fig1 | fig2 | fig3")->required();
  rp->add_flag("--extended", extended, "include the Bennet row of table1");
  rp->add_option("--dir", outdir, "output directory");
  rp->add_option("--baseline", baseline, "previous table1_deviations.json to compare against");
  rp->add_option("--points", points, "grid points for fig1/fig2")->check(CLI::Range(2, 100000));
  rp->add_option("--restarts", restarts, "see-saw restarts for fig3")->check(CLI::PositiveNumber);
  rp->add_option("--seed", seed, "see-saw seed for fig3");

  auto* pn = app.add_subcommand("project-ns", "relative-entropy projection onto no-signalling");
  pn->add_option("--in", in, "behaviour or counts JSON")->required();

  auto* ce = app.add_subcommand("certificate", "extract and check a dual certificate");
  ce->add_option("--in", in, "input JSON")->required();
  ce->add_option("--kind", kind, "quantifier kind")->required();
  ce->add_option("--level", level, "NPA level")->check(CLI::Range(1, 2));
  ce->add_option("--pinned", pinned, "party whose marginal the consistent kinds fix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*q) {
      emit(quantify(family, kind, in, level, pinned), out);
    } else if (*sw) {
      const SweepResult r = sweep(SweepSpec::from_json(io::load_json(spec_path)));
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        f << r.csv();
      }
      json j = json::array();
      for (const auto& s : r.summaries) {
        j.push_back({{"quantifier", s.quantifier},
                     {"threshold", s.threshold ? json(*s.threshold) : json(nullptr)},
                     {"refined_threshold",
                      s.refined_threshold ? json(*s.refined_threshold) : json(nullptr)},
                     {"slope", s.slope},
                     {"intercept", s.intercept},
                     {"max_linear_deviation", s.max_linear_deviation}});
      }
      json pts = json::array();
      for (const auto& p : r.points)
        pts.push_back({{"param", p.param}, {"quantifier", p.quantifier}, {"value", p.value}});
      emit({{"summaries", j}, {"points", pts}}, out);
    } else if (*ss) {
      SeesawOptions o;
      o.restarts = restarts;
      o.seed = seed;
      o.level = level;
      const SeesawResult r = seesaw_optimize(theta, parse_nonlocality_kind(kind), o);
      json runs = json::array();
      for (const auto& st : r.runs) {
        runs.push_back({{"history", st.history},
                        {"converged", st.converged},
                        {"failed_solves", st.failed_solves}});
      }
      emit({{"value", r.value}, {"best_run", r.best_run}, {"bob", io::to_json(r.bob)}, {"runs", runs}},
           out);
    } else if (*rp) {
      ReproduceOptions o;
      o.outdir = outdir;
      o.extended = extended;
      o.baseline = baseline;
      o.points = points;
      o.restarts = restarts;
      o.seed = seed;
      const ReproduceReport r = reproduce(target, o);
      std::cout << r.markdown;
      for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
      std::cout << "status: " << r.status << "\n";
      for (const auto& f : r.files) std::cout << "wrote " << f << "\n";
      if (!r.regressions.empty()) {
        std::cerr << "deviation regressions against baseline:";
        for (const auto& k : r.regressions) std::cerr << " " << k;
        std::cerr << "\n";
        return 1;
      }
    } else if (*pn) {
      emit(io::to_json(ns_project(io::behaviour_from_input(io::load_json(in)))), out);
    } else if (*ce) {
      std::string text;
      const json j = certificate(kind, in, level, pinned, text);
      std::cerr << text;
      emit(j, out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
