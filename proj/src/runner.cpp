#include "frob/runner.hpp"

#include "frob/dynsys.hpp"
#include "frob/geometry.hpp"
#include "frob/moduli.hpp"
#include "frob/mollify.hpp"
#include "frob/odelab.hpp"
#include "frob/pdelab.hpp"
#include "frob/surface.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace frob {

namespace {

std::string join_numbers(const Vector& v, const char* sep = ";") {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? sep : "") + format_number(v[i]);
  return s;
}

std::string columns_text(const Matrix& m) {
  std::string s;
  for (int j = 0; j < m.cols(); ++j) s += (j ? " | " : "") + join_numbers(m.col(j), ",");
  return s;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

std::vector<std::string> names_of(const ExperimentConfig& c, const std::string& key) {
  if (!c.has("field", key)) throw DomainError("config: [field] " + key + " is required");
  return split_list(c.get("field", key));
}

std::string require(const ExperimentConfig& c, const std::string& section, const std::string& key) {
  if (!c.has(section, key)) throw DomainError("config: [" + section + "] " + key + " is required");
  return c.get(section, key);
}

std::vector<std::vector<std::string>> rows_of(const std::string& s) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : split_list(s)) rows.push_back(split_list(r, ','));
  return rows;
}

std::string repeat_axis(const std::string& axis, std::size_t d) {
  std::string s;
  for (std::size_t i = 0; i < d; ++i) s += (i ? ";" : "") + axis;
  return s;
}

Vector point_of(const ExperimentConfig& c, const std::string& key) {
  return to_vector(parse_numbers(require(c, "field", key)));
}

void need_preset(const std::string& kind, const std::string& preset, std::initializer_list<const char*> allowed) {
  if (preset.empty()) return;
  for (const char* a : allowed)
    if (preset == a) return;
  throw DomainError("config: preset '" + preset + "' does not apply to " + kind);
}

bool is_dyn(const std::string& kind) { return kind.rfind("dyn-", 0) == 0; }

// ---- builders ---------------------------------------------------------

OdeSpec ode_spec(const ExperimentConfig& c) {
  const std::string p = c.preset();
  if (p == "paper-ex1")
    return example1(c.number("alpha", 0), c.number("beta", 0), c.number("gamma", 0), c.number("delta", 0));
  if (p == "peano") return peano();
  const auto names = names_of(c, "names");
  OdeSpec s = OdeSpec::parse(names, split_list(require(c, "field", "components")),
                             parse_box(require(c, "field", "domain")));
  s.lattice = c.integer("lattice", 0);
  return s;
}

PdeSpec pde_spec(const ExperimentConfig& c) {
  const std::string p = c.preset();
  if (p == "paper-ex2") return example2(c.number("alpha", 0), c.number("beta", 0));
  if (p == "paper-ex3") {
    Example3Params e;
    e.a11 = c.number("a11", e.a11);
    e.a12 = c.number("a12", e.a12);
    e.a21 = c.number("a21", e.a21);
    e.a22 = c.number("a22", e.a22);
    e.b1 = c.number("b1", e.b1);
    e.b2 = c.number("b2", e.b2);
    return example3(e);
  }
  PdeSpec s = PdeSpec::parse(names_of(c, "names"), std::stoi(require(c, "field", "m")),
                             rows_of(require(c, "field", "components")), parse_box(require(c, "field", "domain")));
  s.lattice = c.integer("lattice", 0);
  return s;
}

SpecialFormSpec special_spec(const ExperimentConfig& c) {
  if (c.preset() == "paper-ex2") return example2_special(c.number("alpha", 0), c.number("beta", 0));
  return SpecialFormSpec::parse(names_of(c, "x_names"), names_of(c, "y_names"), split_list(require(c, "field", "g")),
                                split_list(require(c, "field", "h")), parse_box(require(c, "field", "domain")));
}

DiffeoSpec diffeo_spec(const ExperimentConfig& c) {
  const std::string p = c.preset();
  if (p == "cat-map") return cat_map();
  if (p == "skew-product") return skew_product(c.number("amp", 0.1));
  if (p == "identity") return identity_map(2);
  return DiffeoSpec::parse(names_of(c, "names"), split_list(require(c, "field", "map")),
                           split_list(require(c, "field", "inverse")), c.get("field", "torus", "true") == "true");
}

std::vector<int> axes_of(const ExperimentConfig& c) {
  std::vector<int> a;
  if (c.has("field", "y_axes"))
    for (double v : parse_numbers(c.get("field", "y_axes"))) a.push_back(static_cast<int>(v));
  return a;
}

// ---- defaults ---------------------------------------------------------

void resolve_dyn(ExperimentConfig& c, const std::string& kind) {
  const std::string p = c.preset();
  need_preset(kind, p, {"cat-map", "skew-product", "identity"});
  if (p.empty()) {
    require(c, "field", "map");
    c.set_default("field", "torus", "true");
  }
  const bool dominate = kind == "dyn-dominate";
  if (p == "cat-map") {
    c.set_default("field", "e0", dominate ? columns_text(Matrix(cat_contracting())) : "1,0");
    c.set_default("field", "f", columns_text(Matrix(cat_expanding())));
  } else if (p == "skew-product") {
    c.set_default("params", "amp", "0.1");
    const Vector s = cat_contracting(), u = cat_expanding();
    c.set_default("field", "e0", dominate ? columns_text(Matrix(Vector{{s[0], s[1], 0.0}})) + " | 0,0,1"
                                          : "1,0,0 | 0,0,1");
    c.set_default("field", "f", columns_text(Matrix(Vector{{u[0], u[1], 0.0}})));
    c.set_default("field", "y_axes", "1");
  } else if (p == "identity") {
    c.set_default("field", "e0", "1,0");
    c.set_default("field", "f", "0,1");
  }
  require(c, "field", "e0");
  if (kind != "dyn-transport") require(c, "field", "f");
  if (kind == "dyn-transport") {
    c.set_default("params", "k", "10");
    c.set_default("params", "grid", "5");
  } else if (dominate) {
    c.set_default("params", "k_max", "15");
    c.set_default("params", "eps_list", "0.1;0.5;1");
    c.set_default("params", "grid", "6");
  } else {
    c.set_default("params", "k_max", "8");
    c.set_default("params", "eps_list", "0.1;0.5;1");
    c.set_default("params", "grid", "4");
    c.set_default("params", "lattice", "4");
    c.set_default("params", "limit_extra", "12");
  }
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"moduli",          "mollify",      "frobenius",       "surface",
                                          "ode-check",       "ode-funnel",   "pde-check",       "pde-solve-special",
                                          "pde-frames",      "dyn-transport", "dyn-dominate",   "dyn-traces"};
  return k;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> p{"paper-ex1", "paper-ex2", "paper-ex3", "cat-map",    "skew-product",
                                          "peano",     "contact",   "involutive", "identity"};
  return p;
}

ExperimentConfig resolve(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  const std::string kind = c.kind();
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw DomainError("config: unknown experiment kind '" + kind + "'");
  const std::string p = c.preset();
  if (!p.empty() && std::find(preset_names().begin(), preset_names().end(), p) == preset_names().end())
    throw DomainError("config: unknown preset '" + p + "'");
  c.set_default("experiment", "seed", "20240601");
  c.set_default("output", "file", kind + ".csv");

  if (kind == "moduli") {
    need_preset(kind, p, {});
    require(c, "field", "modulus");
    if (!c.has("field", "modulus2")) {
      c.set_default("params", "eps", "0.5");
      c.set_default("params", "depth", "40");
    }
  } else if (kind == "mollify") {
    need_preset(kind, p, {});
    require(c, "field", "function");
    c.set_default("field", "names", "x");
    c.set_default("field", "domain", repeat_axis("-1:1", names_of(c, "names").size()));
    c.set_default("field", "modulus", "lipschitz(K=1)");
    c.set_default("params", "grid", "4001");
    c.set_default("params", "eps_list", "0.1;0.05;0.025");
  } else if (kind == "frobenius") {
    need_preset(kind, p, {});
    require(c, "field", "form");
    c.set_default("field", "names", "x;y;z");
    c.set_default("field", "domain", repeat_axis("-1:1", names_of(c, "names").size()));
    c.set_default("params", "grid", "5");
  } else if (kind == "surface") {
    need_preset(kind, p, {"contact", "involutive"});
    if (p == "contact" || p == "involutive" || !c.has("field", "components")) {
      if (p.empty()) c.set("experiment", "preset", "contact");
      c.set_default("field", "names", "x;y;z");
      c.set_default("field", "m", "2");
      c.set_default("field", "components", c.preset() == "involutive" ? "x; 0" : "y; 0");
      c.set_default("field", "domain", "-2:2;-2:2;-2:2");
    }
    c.set_default("field", "point", repeat_axis("0", names_of(c, "names").size()));
    c.set_default("params", "eps1", "0.1");
    c.set_default("params", "res", "17");
    c.set_default("params", "step", format_number(c.number("eps1", 0.1) / 32));
    c.set_default("params", "lattice", "5");
  } else if (kind == "ode-check" || kind == "ode-funnel") {
    need_preset(kind, p, {"paper-ex1", "peano"});
    if (p == "paper-ex1") {
      c.set_default("params", "alpha", "0.9");
      c.set_default("params", "beta", "0.5");
      c.set_default("params", "gamma", "0.5");
      c.set_default("params", "delta", "0.5");
      c.set_default("field", "point", "0;0;0");
    } else if (p == "peano") {
      c.set_default("field", "point", "0;0");
    } else {
      c.set_default("field", "point", join_numbers(parse_box(require(c, "field", "domain")).lo));
    }
    if (kind == "ode-funnel") {
      c.set_default("params", "T", p == "paper-ex1" ? "0.5" : "1");
      c.set_default("params", "deltas", p == "peano" ? "1e-4;1e-5;1e-6;1e-7;1e-8" : "1e-3;1e-4;1e-5;1e-6");
      c.set_default("params", "ensemble", "16");
      c.set_default("params", "step", "1e-3");
      c.set_default("params", "initial_probe", p == "peano" ? "false" : "true");
      c.set_default("params", "field_probe", "true");
    }
  } else if (kind == "pde-check") {
    need_preset(kind, p, {"paper-ex2", "paper-ex3"});
    if (p == "paper-ex2") {
      c.set_default("params", "alpha", "0.8");
      c.set_default("params", "beta", "0.4");
      c.set_default("field", "index", "1;2");
      c.set_default("field", "point", "0.5;0.5;0.5;0.5");
    } else if (p == "paper-ex3") {
      const Example3Params e;
      c.set_default("params", "a11", format_number(e.a11));
      c.set_default("params", "a12", format_number(e.a12));
      c.set_default("params", "a21", format_number(e.a21));
      c.set_default("params", "a22", format_number(e.a22));
      c.set_default("params", "b1", format_number(e.b1));
      c.set_default("params", "b2", format_number(e.b2));
      c.set_default("field", "index", "2;3");
      c.set_default("field", "point", "0;0;0;0");
    } else {
      require(c, "field", "index");
      c.set_default("field", "point", join_numbers(parse_box(require(c, "field", "domain")).lo));
    }
  } else if (kind == "pde-solve-special" || kind == "pde-frames") {
    need_preset(kind, p, {"paper-ex2"});
    if (p == "paper-ex2") {
      c.set_default("params", "alpha", "0.8");
      c.set_default("params", "beta", "0.4");
      c.set_default("field", "x0", "0.5;0.5");
      c.set_default("field", "y0", "0.4;0.7");
    }
    if (kind == "pde-solve-special") {
      require(c, "field", "x0");
      require(c, "field", "y0");
      c.set_default("params", "grid", "5");
    } else {
      c.set_default("params", "eps_list", "0.25;0.125");
      c.set_default("params", "grid", "3");
      c.set_default("params", "cells", "12");
    }
  } else if (is_dyn(kind)) {
    resolve_dyn(c, kind);
  }
  return c;
}

RunResult run(const ExperimentConfig& cfg) {
  RunResult res;
  const ExperimentConfig c = resolve(cfg);
  res.resolved = c;
  const std::string kind = c.kind();
  std::ostringstream body;
  body.precision(17);
  std::string verdict;

  if (kind == "moduli") {
    const Modulus w = Modulus::parse(c.get("field", "modulus"));
    const CriterionReport r = c.has("field", "modulus2")
                                  ? limit_condition_check(w, Modulus::parse(c.get("field", "modulus2")))
                                  : osgood_check(w, c.number("eps", 0.5), c.integer("depth", 40));
    body << r.to_csv();
    verdict = to_string(r.verdict);
  } else if (kind == "mollify") {
    const auto names = names_of(c, "names");
    const Expr f = parse_expr(c.get("field", "function"), names);
    const Box box = parse_box(c.get("field", "domain"));
    if (box.dim() != static_cast<int>(names.size())) throw DomainError("mollify: domain dimension mismatch");
    const int grid = c.integer("grid", 4001);
    std::vector<double> origin, spacing;
    std::vector<int> count;
    for (int i = 0; i < box.dim(); ++i) {
      origin.push_back(box.lo[i]);
      spacing.push_back((box.hi[i] - box.lo[i]) / (grid - 1));
      count.push_back(grid);
    }
    const auto g = GridFunction::sample(origin, spacing, count, [&](const Vector& x) { return f.eval(x); });
    const auto reps = verify_bounds(g, Modulus::parse(c.get("field", "modulus")), {}, c.numbers("eps_list", {}));
    body << reports_to_csv(reps);
    verdict = "Completed";
  } else if (kind == "frobenius") {
    const auto names = names_of(c, "names");
    std::vector<OneForm> rows;
    for (const auto& f : split_list(c.get("field", "form"))) rows.push_back(parse_one_form(f, names));
    const Box box = parse_box(c.get("field", "domain"));
    const FrameSection frame(names, rows, box);
    const auto pts = lattice(box, c.integer("grid", 5));
    const auto defects = frobenius_defect(frame, pts);
    const double worst = *std::max_element(defects.begin(), defects.end());
    body << "# frobenius max_defect=" << worst << "\n";
    for (std::size_t i = 0; i < names.size(); ++i) body << names[i] << ",";
    body << "defect\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      for (int i = 0; i < pts[k].size(); ++i) body << pts[k][i] << ",";
      body << defects[k] << "\n";
    }
    verdict = worst <= 1e-10 ? "Involutive" : "NotInvolutive";
  } else if (kind == "surface") {
    const auto names = names_of(c, "names");
    auto d = std::make_shared<Distribution>(Distribution::parse(
        names, std::stoi(c.get("field", "m")), rows_of(c.get("field", "components")), parse_box(c.get("field", "domain"))));
    const FrameSection frame = annihilator_frame(*d);
    FlowConfig fc;
    fc.h = c.number("step", 0.1 / 32);
    fc.domain = d->domain();
    SamplingProtocol proto;
    proto.lattice = c.integer("lattice", 5);
    proto.seed = std::stoull(c.get("experiment", "seed"));
    const SurfacePatch patch =
        build_surface(d, point_of(c, "point"), c.number("eps1", 0.1), c.integer("res", 17), fc);
    const DefectReport rep = tangency_defect(patch, d, frame, proto);
    body << "# defect max=" << rep.max_defect << " rhs=" << rep.rhs << " fd_tolerance=" << rep.fd_tolerance
         << " margin=" << rep.margin << " dA_on_E=" << rep.dA_on_E << " inverse_norm=" << rep.inverse_norm
         << " M=" << rep.M << " protocol=" << rep.protocol << "\n";
    body << patch.to_csv(&rep.defect);
    verdict = rep.holds() ? "Holds" : "Fails";
  } else if (kind == "ode-check") {
    const OdeSpec s = ode_spec(c);
    const auto cert = theorem1_check(s, point_of(c, "point"));
    body << cert.to_csv(s.F.names());
    verdict = to_string(cert.verdict);
  } else if (kind == "ode-funnel") {
    const OdeSpec s = ode_spec(c);
    FunnelConfig fc;
    fc.T = c.number("T", 1.0);
    fc.deltas = c.numbers("deltas", fc.deltas);
    fc.ensemble = c.integer("ensemble", fc.ensemble);
    fc.seed = std::stoull(c.get("experiment", "seed"));
    fc.initial_probe = c.flag("initial_probe", true);
    fc.field_probe = c.flag("field_probe", true);
    fc.flow.h = c.number("step", 1e-3);
    const auto r = funnel(s, point_of(c, "point"), fc);
    body << r.to_csv();
    verdict = to_string(r.verdict);
  } else if (kind == "pde-check") {
    const PdeSpec s = pde_spec(c);
    std::vector<int> I;
    for (double v : parse_numbers(c.get("field", "index"))) I.push_back(static_cast<int>(v));
    const auto cert = theorem2_check(s, point_of(c, "point"), I);
    body << cert.to_csv();
    verdict = cert.verdict_name();
  } else if (kind == "pde-solve-special") {
    const SpecialFormSpec sf = special_spec(c);
    std::vector<Vector> targets;
    if (c.has("field", "targets")) {
      const Matrix t = parse_columns(c.get("field", "targets"));
      for (int j = 0; j < t.cols(); ++j) targets.push_back(t.col(j));
    } else {
      const Box xb(sf.domain.lo.head(sf.m()), sf.domain.hi.head(sf.m()));
      targets = lattice(xb, c.integer("grid", 5));
    }
    const auto sol = special_solve(sf, point_of(c, "x0"), point_of(c, "y0"), targets);
    body << sol.to_csv(sf);
    verdict = sol.max_residual <= 1e-6 ? "Solved" : "ResidualExceeded";
  } else if (kind == "pde-frames") {
    const SpecialFormSpec sf = special_spec(c);
    const Vector w = sf.domain.hi - sf.domain.lo;
    const Box region(sf.domain.lo + 0.3 * w, sf.domain.lo + 0.7 * w);
    const auto fr = involutive_mollified_frames(sf, c.numbers("eps_list", {}), region, c.integer("grid", 3),
                                                c.integer("cells", 12));
    body << "# frames tolerance=" << fr.wedge_tolerance << "\neps,wedge\n";
    for (std::size_t k = 0; k < fr.eps.size(); ++k) body << fr.eps[k] << "," << fr.wedge[k] << "\n";
    verdict = fr.involutive() ? "Involutive" : "NotInvolutive";
  } else if (is_dyn(kind)) {
    const DiffeoSpec phi = diffeo_spec(c);
    const Box region = c.has("field", "domain") ? parse_box(c.get("field", "domain")) : Box::cube(phi.dim(), 0, 1);
    phi.validate(region);
    const Matrix e0 = parse_columns(c.get("field", "e0"));
    const auto pts = lattice(region, c.integer("grid", 5));
    if (kind == "dyn-transport") {
      const PlaneField f = c.has("field", "f") ? constant_plane(parse_columns(c.get("field", "f"))) : PlaneField{};
      body << transport(phi, constant_plane(e0), c.integer("k", 10), pts, f).to_csv();
      verdict = "Completed";
    } else if (kind == "dyn-dominate") {
      DominationConfig dc;
      dc.k_max = c.integer("k_max", 15);
      dc.eps = c.numbers("eps_list", dc.eps);
      dc.y_axes = axes_of(c);
      const auto rep = domination_report(phi, constant_plane(e0), constant_plane(parse_columns(c.get("field", "f"))),
                                         pts, dc);
      body << rep.to_csv();
      verdict = rep.dominated ? "Dominated" : "NotDominated";
    } else {
      PipelineConfig pc;
      pc.k_max = c.integer("k_max", 8);
      pc.eps = c.numbers("eps_list", pc.eps);
      pc.lattice = c.integer("lattice", 4);
      pc.domination_lattice = c.integer("grid", 4);
      pc.limit_extra = c.integer("limit_extra", 12);
      pc.y_axes = axes_of(c);
      pc.proto.seed = std::stoull(c.get("experiment", "seed"));
      const auto tr = splitting_involutivity_pipeline(phi, e0, parse_columns(c.get("field", "f")), region, pc);
      body << tr.to_csv();
      bool decays = true;
      for (std::size_t e = 0; e < tr.eps.size(); ++e)
        decays = decays && tr.involutivity_bound[e].back() <= tr.involutivity_bound[e].front() / 10 &&
                 tr.regularity_bound[e].back() <= tr.regularity_bound[e].front() / 10;
      verdict = !tr.applicable ? "NotApplicable" : decays ? "Decaying" : "NotDecaying";
    }
  }

  std::ostringstream out;
  out << "# frobctl report\n";
  std::istringstream lines(c.serialize());
  for (std::string line; std::getline(lines, line);) out << "# " << line << "\n";
  out << "# verdict = " << verdict << "\n";
  out << body.str();
  res.report = out.str();
  res.verdict = verdict;
  if (c.has("experiment", "expect") && c.get("experiment", "expect") != verdict) res.exit_code = 2;

  if (c.has("output", "dir")) {
    const std::filesystem::path dir(c.get("output", "dir"));
    std::filesystem::create_directories(dir);
    const auto path = dir / c.get("output", "file");
    std::ofstream f(path);
    if (!f) throw DomainError("output: cannot write " + path.string());
    f << res.report;
    res.path = path.string();
  }
  return res;
}

}  // namespace frob
