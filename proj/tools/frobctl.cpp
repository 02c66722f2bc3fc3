#include "CLI11.hpp"
#include "frob/runner.hpp"

#include <iostream>
#include <map>
#include <optional>

namespace {

using frob::ExperimentConfig;

struct Binding {
  std::string section, key;
  std::optional<std::string> value;
};

// Flag storage is keyed by subcommand so identically named flags don't collide.
struct Bindings {
  std::map<CLI::App*, std::vector<std::unique_ptr<Binding>>> by_app;

  void add(CLI::App* app, const std::string& flag, const std::string& section, const std::string& key,
           const std::string& help) {
    auto b = std::make_unique<Binding>(Binding{section, key, std::nullopt});
    app->add_option(flag, b->value, help);
    by_app[app].push_back(std::move(b));
  }

  void apply(CLI::App* app, ExperimentConfig& c) const {
    const auto it = by_app.find(app);
    if (it == by_app.end()) return;
    for (const auto& b : it->second)
      if (b->value) c.set(b->section, b->key, *b->value);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrability experiments for continuous distributions and equations"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, seed, eps, grid, expect;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Config file (flags override its values)");
  app.add_option("--out", out_dir, "Directory for the CSV report (default: stdout)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--eps", eps, "Scale or ';'-separated scale list");
  app.add_option("--grid", grid, "Lattice points per axis");
  app.add_option("--expect", expect, "Exit with 2 when the verdict differs");
  app.add_option("--set", sets, "Raw override section.key=value (repeatable)");

  Bindings bind;
  std::map<CLI::App*, std::string> kinds;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& kind, const std::string& help) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->fallthrough();
    kinds[s] = kind;
    return s;
  };
  auto example = [&](CLI::App* s) { bind.add(s, "--example", "experiment", "preset", "Named preset"); };
  auto params = [&](CLI::App* s, std::initializer_list<const char*> keys) {
    for (const char* k : keys) bind.add(s, std::string("--") + k, "params", k, k);
  };
  auto fields = [&](CLI::App* s, std::initializer_list<const char*> keys) {
    for (const char* k : keys) bind.add(s, std::string("--") + k, "field", k, k);
  };

  CLI::App* moduli = leaf(&app, "moduli", "moduli", "Osgood or limit-condition check of a modulus");
  fields(moduli, {"modulus", "modulus2"});
  params(moduli, {"depth"});

  CLI::App* mollify = leaf(&app, "mollify", "mollify", "Mollification bounds on a sampled function");
  fields(mollify, {"function", "names", "domain", "modulus"});

  CLI::App* frobenius = leaf(&app, "frobenius", "frobenius", "Frobenius defect of a coframe");
  fields(frobenius, {"form", "names", "domain"});

  CLI::App* surface = leaf(&app, "surface", "surface", "Almost-integral surface and its tangency defect");
  example(surface);
  fields(surface, {"names", "m", "components", "domain", "point"});
  params(surface, {"eps1", "res", "step", "lattice"});

  CLI::App* ode = app.add_subcommand("ode", "ODE uniqueness");
  ode->require_subcommand(1);
  ode->fallthrough();
  for (auto [name, kind] : {std::pair{"check", "ode-check"}, std::pair{"funnel", "ode-funnel"}}) {
    CLI::App* s = leaf(ode, name, kind, name);
    example(s);
    fields(s, {"names", "components", "domain", "point"});
    params(s, {"alpha", "beta", "gamma", "delta", "lattice"});
    if (std::string(name) == "funnel") params(s, {"T", "deltas", "ensemble", "step", "initial_probe", "field_probe"});
  }

  CLI::App* pde = app.add_subcommand("pde", "PDE uniqueness and special-form solutions");
  pde->require_subcommand(1);
  pde->fallthrough();
  for (auto [name, kind] : {std::pair{"check", "pde-check"}, std::pair{"solve-special", "pde-solve-special"},
                            std::pair{"frames", "pde-frames"}}) {
    CLI::App* s = leaf(pde, name, kind, name);
    example(s);
    params(s, {"alpha", "beta"});
    if (std::string(name) == "check") {
      fields(s, {"names", "m", "components", "domain", "point", "index"});
      params(s, {"a11", "a12", "a21", "a22", "b1", "b2", "lattice"});
    } else {
      fields(s, {"x_names", "y_names", "domain"});
      bind.add(s, "--G", "field", "g", "G_i(y^i), ';'-separated");
      bind.add(s, "--H", "field", "h", "H_i(x), ';'-separated");
      if (std::string(name) == "solve-special") fields(s, {"x0", "y0", "targets"});
      else params(s, {"cells"});
    }
  }

  CLI::App* dyn = app.add_subcommand("dyn", "Dominated splittings");
  dyn->require_subcommand(1);
  dyn->fallthrough();
  for (auto [name, kind] : {std::pair{"transport", "dyn-transport"}, std::pair{"dominate", "dyn-dominate"},
                            std::pair{"traces", "dyn-traces"}}) {
    CLI::App* s = leaf(dyn, name, kind, name);
    example(s);
    fields(s, {"names", "map", "inverse", "torus", "e0", "f", "y_axes", "domain"});
    params(s, {"amp"});
    if (std::string(name) == "transport") params(s, {"k"});
    else params(s, {"k_max"});
    if (std::string(name) == "traces") params(s, {"lattice", "limit_extra"});
  }

  CLI::App* run = app.add_subcommand("run", "Run a config file");
  run->fallthrough();

  CLI11_PARSE(app, argc, argv);

  std::string kind;
  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
    else if (run->parsed()) throw frob::DomainError("run: --config is required");

    CLI::App* chosen = nullptr;
    for (const auto& [a, k] : kinds)
      if (a->parsed()) chosen = a;
    if (chosen) {
      const std::string k = kinds.at(chosen);
      if (cfg.has("experiment", "kind") && cfg.kind() != k)
        throw frob::DomainError("config kind '" + cfg.kind() + "' conflicts with subcommand '" + k + "'");
      cfg.set("experiment", "kind", k);
      bind.apply(chosen, cfg);
    }
    kind = cfg.kind();
    if (!out_dir.empty()) cfg.set("output", "dir", out_dir);
    if (!seed.empty()) cfg.set("experiment", "seed", seed);
    if (!expect.empty()) cfg.set("experiment", "expect", expect);
    if (!grid.empty()) cfg.set("params", "grid", grid);
    if (!eps.empty()) {
      const bool list = kind == "mollify" || kind == "pde-frames" || kind == "dyn-dominate" || kind == "dyn-traces";
      cfg.set("params", list ? "eps_list" : (kind == "surface" ? "eps1" : "eps"), eps);
    }
    for (const auto& s : sets) {
      const auto dot = s.find('.'), eq = s.find('=');
      if (dot == std::string::npos || eq == std::string::npos || dot > eq)
        throw frob::DomainError("--set expects section.key=value, got '" + s + "'");
      cfg.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
    }

    const frob::RunResult r = frob::run(cfg);
    if (r.path.empty()) std::cout << r.report;
    std::cerr << "verdict: " << r.verdict << (r.path.empty() ? "" : " (" + r.path + ")") << "\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << (kind.empty() ? "" : kind + ": ") << e.what() << "\n";
    return 1;
  }
}
