// delaystab: delay-stability certificates and numerics for mass-action networks.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "delaystab/delaystab.hpp"

namespace fs = std::filesystem;
using namespace delaystab;

namespace {

constexpr int kExitError = 1;

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Certified: return 0;
    case Verdict::Refuted: return 2;
    case Verdict::Inconclusive: return 3;
  }
  return kExitError;
}

struct Common {
  std::uint64_t seed = 20190713;
  unsigned threads = 1;
  bool timing = false;
};

unsigned default_threads() {
  if (const char* env = std::getenv("DELAYSTAB_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return unsigned(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

struct Loaded {
  std::string text;
  ReactionNetwork net;
};

Loaded load(const std::string& path, RunManifest& manifest) {
  auto text = read_text_file(path);
  manifest.add_input(path, text);
  return {text, parse_network(text, file_stem(path))};
}

ParameterAssignment load_params(const ReactionNetwork& net, const std::string& path, RunManifest& manifest,
                                bool require_delays = true) {
  auto text = read_text_file(path);
  manifest.add_input(path, text);
  return bind_parameters(net, parse_key_values(text), require_delays);
}

void emit(const std::string& content, const std::string& out) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << content;
}

std::vector<double> parse_csv_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item).get_d());
  return out;
}

/// `const:<v1,...,vn>` or `file:<path>` (CSV with header t,x1,...,xn).
HistoryFunction parse_history(const std::string& spec, const ReactionNetwork& net, const ParameterAssignment& params,
                              RunManifest& manifest) {
  if (spec.empty()) {
    if (auto x = state_vector(net, params)) return HistoryFunction::constant(*x);
    return HistoryFunction::constant(std::vector<double>(net.num_species(), 1.0));
  }
  if (spec.rfind("const:", 0) == 0) {
    auto v = parse_csv_numbers(spec.substr(6));
    if (v.size() != net.num_species()) throw std::runtime_error("history has " + std::to_string(v.size()) + " values, expected " + std::to_string(net.num_species()));
    return HistoryFunction::constant(v);
  }
  if (spec.rfind("file:", 0) == 0) {
    auto path = spec.substr(5);
    auto text = read_text_file(path);
    manifest.add_input(path, text);
    std::stringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto row = parse_csv_numbers(line);
      if (row.size() != net.num_species() + 1) throw std::runtime_error("history row has the wrong number of columns");
      times.push_back(row[0]);
      values.emplace_back(row.begin() + 1, row.end());
    }
    return HistoryFunction::piecewise_cubic(times, values);
  }
  throw std::runtime_error("history must be const:<values> or file:<path>");
}

double default_step(const ParameterAssignment& params, double requested) {
  double h = requested;
  for (const auto& [sym, v] : params.delays)
    if (v > 0) h = std::min(h, v.get_d() / 4);
  return h;
}

std::vector<double> seed_state(const ReactionNetwork& net, const ParameterAssignment& params) {
  if (auto x = state_vector(net, params)) return *x;
  return {};
}

std::optional<Equilibrium> equilibrium_for(const SymbolicModel& model, const ParameterAssignment& params, const Common& c,
                                           const std::vector<double>& guess, bool guess_only) {
  EquilibriumOptions eo;
  eo.seed = c.seed;
  eo.threads = c.threads;
  if (!guess.empty()) eo.guesses.push_back(guess);
  if (guess_only) eo.starts = 0;
  auto eqs = find_equilibria(model, params, eo);
  if (eqs.empty()) return std::nullopt;
  if (!guess.empty()) {
    // Prefer the equilibrium reached from the explicit guess.
    for (const auto& e : eqs)
      if (e.seed == guess) return e;
  }
  return eqs.front();
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string network, point, out;
  bool symbolic = false, json = false, no_blocks = false, polish = false;
  std::optional<std::size_t> max_order;
  std::size_t budget = 256;
};

int cmd_check(const CheckArgs& a, const Common& c) {
  auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = "check";
  manifest.seed = c.seed;
  auto [text, net] = load(a.network, manifest);
  SymbolicModel model(net);
  DelayStabilityReport rep;
  if (!a.point.empty()) {
    auto params = load_params(net, a.point, manifest, false);
    auto x = state_vector(net, params);
    if (!x) throw std::runtime_error("point mode needs a value for every species in " + a.point);
    if (a.polish) {
      auto e = equilibrium_for(model, params, c, *x, true);
      if (!e) throw std::runtime_error("Newton polish from the given state did not converge");
      x = e->x;
    }
    rep = point_stability_check(model, *x, params);
  } else {
    CertificateOptions opt;
    opt.sampler.seed = c.seed;
    opt.sampler.budget = a.budget;
    opt.max_order = a.max_order;
    opt.block_reduction = !a.no_blocks;
    rep = delay_stability_certificate(model, opt);
  }
  if (c.timing) manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (a.json) {
    auto j = report_json(rep, model, c.timing);
    j["manifest"] = to_json(manifest);
    emit(j.dump(2) + "\n", a.out);
  } else {
    std::ostringstream s;
    s << net.name() << ": " << to_string(rep.overall.verdict) << " (" << rep.mode << ")\n";
    for (const auto& h : rep.hypotheses) {
      s << "  " << h.name << ": " << to_string(h.outcome.verdict) << "\n";
      for (const auto& f : h.outcome.failing_checks) s << "    - " << f << "\n";
      for (const auto& n : h.outcome.notes) s << "    note: " << n << "\n";
    }
    auto residual = rep.residual_conditions(model.variables());
    if (!residual.empty()) {
      s << "  residual conditions:\n";
      for (const auto& r : residual) s << "    " << r << "\n";
    }
    emit(s.str(), a.out);
  }
  return exit_code(rep.overall.verdict);
}

struct EquilibriaArgs {
  std::string network, params, out;
  std::size_t starts = 20;
};

int cmd_equilibria(const EquilibriaArgs& a, const Common& c) {
  RunManifest manifest;
  auto [text, net] = load(a.network, manifest);
  SymbolicModel model(net);
  auto params = load_params(net, a.params, manifest, false);
  EquilibriumOptions eo;
  eo.starts = a.starts;
  eo.seed = c.seed;
  eo.threads = c.threads;
  auto eqs = find_equilibria(model, params, eo);
  if (eqs.empty()) std::cerr << "warning: no start converged to a positive equilibrium\n";
  std::ostringstream s;
  write_equilibria_csv(s, eqs, net.num_species());
  emit(s.str(), a.out);
  return 0;
}

struct SimulateArgs {
  std::string network, params, history, out;
  double t_end = 100.0, dt = 0.01, print_interval = 0.1;
  bool conservation = false;
};

int cmd_simulate(const SimulateArgs& a, const Common&) {
  RunManifest manifest;
  auto [text, net] = load(a.network, manifest);
  auto params = load_params(net, a.params, manifest);
  auto history = parse_history(a.history, net, params, manifest);
  auto traj = simulate_dde(net, params, history, {a.t_end, a.dt});
  std::optional<ConservationSeries> cons;
  if (a.conservation) {
    cons = conservation_residual(net, traj, params, sample_times(traj.t_end(), a.print_interval));
    if (!cons->note.empty()) {
      std::cerr << "note: " << cons->note << "\n";
      cons.reset();
    }
  }
  std::ostringstream s;
  write_trajectory_csv(s, traj, a.print_interval, cons ? &*cons : nullptr);
  emit(s.str(), a.out);
  return 0;
}

struct RootsArgs {
  std::string network, params, equilibrium = "auto", out;
  std::optional<double> sigma_min, sigma_max, omega_max;
  std::size_t budget = 400000;
  bool json = false;
};

int cmd_roots(const RootsArgs& a, const Common& c) {
  RunManifest manifest;
  manifest.command = "roots";
  manifest.seed = c.seed;
  auto [text, net] = load(a.network, manifest);
  SymbolicModel model(net);
  auto params = load_params(net, a.params, manifest);
  std::optional<Equilibrium> eq;
  if (a.equilibrium == "auto") {
    eq = equilibrium_for(model, params, c, seed_state(net, params), false);
  } else {
    auto ptext = read_text_file(a.equilibrium);
    manifest.add_input(a.equilibrium, ptext);
    auto state = bind_parameters(net, parse_key_values(ptext), false);
    auto x = state_vector(net, state);
    if (!x) throw std::runtime_error("equilibrium file must give a value for every species");
    eq = equilibrium_for(model, params, c, *x, true);
  }
  if (!eq) throw std::runtime_error("no positive equilibrium found");

  CharacteristicFunction f(model, eq->x, params);
  std::optional<RootRegion> region;
  if (a.sigma_min || a.sigma_max || a.omega_max) {
    RootRegion r = right_half_plane_region(f, a.sigma_max, a.omega_max);
    if (a.sigma_min) r.sigma_min = *a.sigma_min;
    region = r;
  }
  RootOptions ro;
  ro.budget = a.budget;
  auto rc = count_unstable_roots(model, eq->x, params, region, ro);

  json j;
  j["network"] = net.name();
  j["equilibrium"] = eq->x;
  auto body = root_count_json(rc);
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  j["manifest"] = to_json(manifest);
  if (a.json) {
    emit(j.dump(2) + "\n", a.out);
  } else {
    std::ostringstream s;
    s << net.name() << ": " << (rc.count ? std::to_string(*rc.count) : std::string("inconclusive")) << " root(s) in [" << rc.region.sigma_min
      << ", " << rc.region.sigma_max << "] x [-" << rc.region.omega_max << ", " << rc.region.omega_max << "] (" << rc.status << ")\n";
    for (const auto& r : rc.roots) s << "  " << format_double(r.lambda.real()) << " " << (r.lambda.imag() < 0 ? "- " : "+ ") << format_double(std::abs(r.lambda.imag())) << "i\n";
    emit(s.str(), a.out);
  }
  return rc.count ? 0 : 3;
}

struct ReportArgs {
  std::string network, params, out;
  std::size_t tau_grid = 5;
  double tau_max = 50.0, t_end = 100.0, dt = 0.01;
};

/// Delay assignments for the bundle's root grid: a full grid for up to two
/// delay symbols, otherwise all delays scaled together.
std::vector<std::map<std::string, Rational>> tau_grid(const ReactionNetwork& net, std::size_t points, double tau_max) {
  auto syms = net.delay_symbols();
  std::vector<Rational> values;
  for (std::size_t i = 0; i < points; ++i)
    values.push_back(points == 1 ? Rational(0) : exact_rational(tau_max * double(i) / double(points - 1)));
  std::vector<std::map<std::string, Rational>> out;
  if (syms.empty()) return {{}};
  if (syms.size() == 1) {
    for (const auto& v : values) out.push_back({{syms[0], v}});
  } else if (syms.size() == 2) {
    for (const auto& a : values)
      for (const auto& b : values) out.push_back({{syms[0], a}, {syms[1], b}});
  } else {
    for (const auto& v : values) {
      std::map<std::string, Rational> m;
      for (const auto& s : syms) m[s] = v;
      out.push_back(m);
    }
  }
  return out;
}

int cmd_report(const ReportArgs& a, const Common& c) {
  RunManifest manifest;
  manifest.command = "report";
  manifest.seed = c.seed;
  auto [text, net] = load(a.network, manifest);
  SymbolicModel model(net);
  std::optional<ParameterAssignment> params;
  if (!a.params.empty()) params = load_params(net, a.params, manifest);
  fs::create_directories(a.out);
  auto mj = to_json(manifest);
  json status = json::object();
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(fs::path(a.out) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + name);
    f << content;
  };
  auto attempt = [&](const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
      status[name] = "ok";
    } catch (const std::exception& e) {
      status[name] = std::string("error: ") + e.what();
    }
  };

  int code = kExitError;
  attempt("matrices.json", [&] {
    auto j = matrices_json(model);
    j["manifest"] = mj;
    write("matrices.json", j.dump(2) + "\n");
  });
  attempt("certificate.json", [&] {
    CertificateOptions opt;
    opt.sampler.seed = c.seed;
    auto rep = delay_stability_certificate(model, opt);
    auto j = report_json(rep, model, false);
    j["manifest"] = mj;
    write("certificate.json", j.dump(2) + "\n");
    code = exit_code(rep.overall.verdict);
  });

  if (params) {
    std::optional<Equilibrium> eq;
    attempt("equilibria.csv", [&] {
      EquilibriumOptions eo;
      eo.seed = c.seed;
      eo.threads = c.threads;
      auto guess = seed_state(net, *params);
      if (!guess.empty()) eo.guesses.push_back(guess);
      auto eqs = find_equilibria(model, *params, eo);
      std::ostringstream s;
      write_equilibria_csv(s, eqs, net.num_species());
      write("equilibria.csv", s.str());
      eq = equilibrium_for(model, *params, c, guess, false);
      if (!eq) throw std::runtime_error("no positive equilibrium found");
    });
    attempt("roots.json", [&] {
      if (!eq) throw std::runtime_error("no equilibrium available");
      auto grid = tau_grid(net, a.tau_grid, a.tau_max);
      std::vector<json> results(grid.size());
      std::mutex err_mutex;
      std::string first_error;
      auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t g = begin; g < grid.size(); g += stride) {
          try {
            ParameterAssignment p = *params;
            for (const auto& [s, v] : grid[g]) p.delays[s] = v;
            auto rc = count_unstable_roots(model, eq->x, p);
            json d = json::object();
            for (const auto& [s, v] : grid[g]) d[s] = v.get_d();
            json entry;
            entry["delays"] = d;
            auto body = root_count_json(rc);
            for (auto it = body.begin(); it != body.end(); ++it) entry[it.key()] = it.value();
            results[g] = entry;
          } catch (const std::exception& e) {
            std::lock_guard lock(err_mutex);
            if (first_error.empty()) first_error = e.what();
          }
        }
      };
      unsigned threads = std::max(1u, std::min<unsigned>(c.threads, unsigned(grid.size())));
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
      for (auto& t : pool) t.join();
      if (!first_error.empty()) throw std::runtime_error(first_error);
      json j;
      j["network"] = net.name();
      j["equilibrium"] = eq->x;
      j["grid"] = results;
      j["manifest"] = mj;
      write("roots.json", j.dump(2) + "\n");
    });
    attempt("trajectory.csv", [&] {
      auto history = parse_history("", net, *params, manifest);
      auto traj = simulate_dde(net, *params, history, {a.t_end, default_step(*params, a.dt)});
      std::ostringstream s;
      write_trajectory_csv(s, traj, 0.1);
      write("trajectory.csv", s.str());
    });
  }
  json st;
  st["artifacts"] = status;
  st["manifest"] = mj;
  write("status.json", st.dump(2) + "\n");
  for (auto it = status.begin(); it != status.end(); ++it)
    if (it.value() != "ok") std::cerr << it.key() << ": " << it.value().get<std::string>() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-stability certificates for mass-action reaction networks"};
  app.set_version_flag("--version", std::string(delaystab::version));
  app.require_subcommand(1);
  Common common;
  common.threads = default_threads();
  app.add_option("--seed", common.seed, "Seed for all sampling")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (default: $DELAYSTAB_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_flag("--timing", common.timing, "Include wall time in reports");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Run the delay-stability certificate");
  c->add_option("network", check.network, "Network file")->required()->check(CLI::ExistingFile);
  auto* sym = c->add_flag("--symbolic", check.symbolic, "Symbolic mode over all positive rates and states (default)");
  c->add_option("--point", check.point, "Parameter file with rates and a state for point mode")->check(CLI::ExistingFile)->excludes(sym);
  c->add_flag("--polish", check.polish, "Point mode: Newton-polish the given state to an equilibrium first");
  c->add_option("--max-order", check.max_order, "Largest principal-minor order to examine");
  c->add_option("--budget", check.budget, "Sample points per mixed-sign polynomial")->capture_default_str();
  c->add_flag("--no-blocks", check.no_blocks, "Do not reduce the modified Jacobian to irreducible blocks");
  c->add_flag("--json", check.json, "Emit the JSON report");
  c->add_option("--out", check.out, "Write output to a file");

  EquilibriaArgs eqa;
  auto* e = app.add_subcommand("equilibria", "Find positive equilibria");
  e->add_option("network", eqa.network)->required()->check(CLI::ExistingFile);
  e->add_option("params", eqa.params)->required()->check(CLI::ExistingFile);
  e->add_option("--starts", eqa.starts, "Number of Newton starts")->capture_default_str();
  e->add_option("--out", eqa.out, "CSV output file");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Integrate the delay mass-action system");
  s->add_option("network", sim.network)->required()->check(CLI::ExistingFile);
  s->add_option("params", sim.params)->required()->check(CLI::ExistingFile);
  s->add_option("--history", sim.history, "const:<v1,...,vn> or file:<csv>; default: state in params, else ones");
  s->add_option("--t-end", sim.t_end)->capture_default_str();
  s->add_option("--dt", sim.dt, "Base step")->capture_default_str();
  s->add_option("--print-interval", sim.print_interval)->capture_default_str();
  s->add_flag("--conservation", sim.conservation, "Append the conservation-relation residual column");
  s->add_option("--out", sim.out, "CSV output file");

  RootsArgs ra;
  auto* r = app.add_subcommand("roots", "Count characteristic roots with non-negative real part");
  r->add_option("network", ra.network)->required()->check(CLI::ExistingFile);
  r->add_option("params", ra.params)->required()->check(CLI::ExistingFile);
  r->add_option("--equilibrium", ra.equilibrium, "auto, or a file with a state to polish")->capture_default_str();
  r->add_option("--sigma-min", ra.sigma_min);
  r->add_option("--sigma-max", ra.sigma_max);
  r->add_option("--omega-max", ra.omega_max);
  r->add_option("--budget", ra.budget, "Characteristic-function evaluations")->capture_default_str();
  r->add_flag("--json", ra.json);
  r->add_option("--out", ra.out);

  ReportArgs rep;
  auto* b = app.add_subcommand("report", "Write a bundle of matrices, certificate and numerics");
  b->add_option("network", rep.network)->required()->check(CLI::ExistingFile);
  b->add_option("--params", rep.params)->check(CLI::ExistingFile);
  b->add_option("--out", rep.out, "Output directory")->required();
  b->add_option("--tau-grid", rep.tau_grid, "Grid points per delay")->capture_default_str();
  b->add_option("--tau-max", rep.tau_max)->capture_default_str();
  b->add_option("--t-end", rep.t_end)->capture_default_str();
  b->add_option("--dt", rep.dt)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*c) return cmd_check(check, common);
    if (*e) return cmd_equilibria(eqa, common);
    if (*s) return cmd_simulate(sim, common);
    if (*r) return cmd_roots(ra, common);
    if (*b) return cmd_report(rep, common);
  } catch (const ParseError& err) {
    std::cerr << "error: line " << err.line() << ", column " << err.column() << ": " << err.what() << "\n";
    return kExitError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
