#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phaselab/phaselab.hpp"

namespace {

using namespace phaselab;
using io::json;

struct Globals {
  std::string out;
  std::string format = "json";
  std::string preset;
  double tol = 1e-6;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw InputError("cannot write '" + g.out + "'");
  f << text;
}

void emit_json(const Globals& g, const json& j) { emit(g, j.dump(2) + "\n"); }

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int preset_nodes(const std::string& preset, int fallback) {
  if (preset.empty()) return fallback;
  if (preset == "coarse") return quantum::kCoarse;
  if (preset == "default") return quantum::kDefault;
  if (preset == "fine") return quantum::kFine;
  throw InputError("unknown grid preset '" + preset + "' (coarse, default, fine)");
}

// "1,2,3" or "lo:hi:count" (inclusive, evenly spaced)
std::vector<double> parse_lattice(const std::string& s) {
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream ss(s);
      for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
      if (parts.size() != 3) throw InputError("range must read lo:hi:count");
      const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
      const int n = std::stoi(parts[2]);
      if (n < 1) throw InputError("range count must be positive");
      for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    } else {
      std::stringstream ss(s);
      for (std::string p; std::getline(ss, p, ',');) out.push_back(std::stod(p));
    }
  } catch (const std::logic_error&) {
    throw InputError("cannot parse lattice '" + s + "'");
  }
  if (out.empty()) throw InputError("empty lattice '" + s + "'");
  return out;
}

json consistency_json(const marginal::ConsistencyReport& r) {
  return {{"defects", r.defects}, {"max_defect", r.max_defect}, {"pass", r.pass}};
}

json bell_json(const marginal::QuartetProblem& q, const bell::BellWitness& w) {
  const double b = bell::bell_sum(q, w);
  return {{"bell_sum", b}, {"p_expectation", bell::p_expectation_from_bell_sum(b)},
          {"within_bounds", std::abs(b) <= 2.0}};
}

// --- h profiles --------------------------------------------------------------

struct ProfileArgs {
  std::string kind = "cutoff";
  double eps = 1e-6;
  double L = 1e6;
};

quantum::HProfile make_profile(const ProfileArgs& a) {
  if (a.kind == "inv1") return quantum::HProfile::inverse_q_plus_one();
  if (a.kind == "cutoff") return quantum::HProfile::cutoff_sqrt(a.eps, a.L);
  if (a.kind == "smooth") return reproduce::smooth_profile();
  throw InputError("unknown profile '" + a.kind + "' (inv1, cutoff, smooth)");
}

void add_profile_flags(CLI::App* cmd, ProfileArgs& a) {
  // --h names the profile here, so help is --help only
  cmd->set_help_flag("--help", "Print this help message and exit");
  cmd->add_option("--h", a.kind, "radial profile: inv1, cutoff or smooth")->capture_default_str();
  cmd->add_option("--eps", a.eps, "inner cutoff")->capture_default_str();
  cmd->add_option("--L", a.L, "outer cutoff")->capture_default_str();
}

struct StateArgs {
  ProfileArgs profile;
  double rho = 1.0;
  double theta = std::numbers::pi / 4.0;
  double a = 0.0;
  double boost = 0.0;
  int sign = 1;
  int nodes = 0;
};

void add_state_flags(CLI::App* cmd, StateArgs& s, bool with_lambda) {
  add_profile_flags(cmd, s.profile);
  if (with_lambda) {
    cmd->add_option("--rho", s.rho, "|lambda|")->capture_default_str();
    cmd->add_option("--theta", s.theta, "arg lambda")->capture_default_str();
  }
  cmd->add_option("--a", s.a, "position shift of particle 2")->capture_default_str();
  cmd->add_option("--boost", s.boost, "momentum boost of particle 2")->capture_default_str();
  cmd->add_option("--sign", s.sign, "sign of lambda, +1 or -1")->capture_default_str();
  cmd->add_option("--nodes", s.nodes, "nodes per axis (overrides --preset)");
}

quantum::ViolationParams make_params(const StateArgs& s) {
  quantum::ViolationParams p;
  p.h = make_profile(s.profile);
  p.rho = s.rho;
  p.theta = s.theta;
  p.a = s.a;
  p.P = s.boost;
  p.sign = s.sign;
  quantum::validate(p);
  return p;
}

// Singular profiles need 512 nodes per axis to hold the 1e-6 norm contract.
int default_nodes(const StateArgs& s, const Globals& g) {
  if (s.nodes % 2 != 0 || s.nodes < 0) throw InputError("--nodes must be a positive even number");
  if (s.nodes > 0) return s.nodes;
  return preset_nodes(g.preset, s.profile.kind == "smooth" ? quantum::kCoarse : 2 * quantum::kDefault);
}

quantum::WaveFunction2 checked_psi(const quantum::ViolationParams& p, const quad::Grid1D& qh, const quad::Grid1D& ph) {
  auto psi = quantum::build_psi(p, qh, ph);
  const double defect = std::abs(psi.norm2() - 1.0);
  if (defect > 1e-6)
    throw NumericalError("grid too coarse for this profile: norm defect " + csv_number(defect) + "; use more nodes");
  return psi;
}

// --- subcommands -------------------------------------------------------------

int run_bell_eval(const Globals& g, const std::string& qpath, const std::string& wpath) {
  const auto q = io::quartet_from_json(io::read_file(qpath));
  const auto w = io::witness_from_json(io::read_file(wpath));
  const auto cons = marginal::consistency_check(q, g.tol);
  if (!cons.pass) throw ConsistencyError("quartet fails the compatibility conditions (max defect " +
                                         csv_number(cons.max_defect) + ")");
  json j = bell_json(q, w);
  j["consistency"] = consistency_json(cons);
  emit_json(g, j);
  return 0;
}

int run_bell_counterexample(const Globals& g, const std::string& ppath) {
  const marginal::CounterexampleAtoms atoms =
      ppath.empty() ? marginal::CounterexampleAtoms{} : io::counterexample_from_json(io::read_file(ppath));
  const auto q = marginal::counterexample_quartet(atoms);
  const auto w = bell::aligned_witness(atoms);
  json j = bell_json(q, w);
  j["consistency"] = consistency_json(marginal::consistency_check(q, g.tol));
  j["witness"] = io::to_json(w);
  json table = json::object();
  for (const auto* m : {&q.R, &q.S, &q.T, &q.U}) table[marginal::to_string(m->plane())] = io::to_json(*m)["atoms"];
  j["atoms"] = table;
  emit_json(g, j);
  return 0;
}

int run_violate_scan(const Globals& g, const StateArgs& s, const std::string& rho_grid,
                     const std::string& theta_grid) {
  const auto rhos = parse_lattice(rho_grid);
  const auto thetas = parse_lattice(theta_grid);
  const int nodes = default_nodes(s, g);
  const auto base = make_params(s);
  const double gam = quantum::gamma(base.h);
  const auto [qh, ph] = base.h.half_grids(nodes / 2);
  const auto w = quantum::canonical_witness(base);

  struct Row {
    double rho, theta, closed, grid;
  };
  std::vector<Row> rows(rhos.size() * thetas.size());
  parallel_for(rows.size(), [&](std::size_t idx) {
    auto p = base;
    p.rho = rhos[idx / thetas.size()];
    p.theta = thetas[idx % thetas.size()];
    const double grid = quantum::p_hat_expectation_grid(checked_psi(p, qh, ph), w);
    rows[idx] = {p.rho, p.theta, quantum::p_hat_closed_form(gam, p), grid};
  });

  if (g.format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"rho", r.rho}, {"theta", r.theta}, {"gamma", gam}, {"closed_value", r.closed},
                     {"grid_value", r.grid}, {"bell_sum", 2.0 - 4.0 * r.grid}});
    emit_json(g, arr);
    return 0;
  }
  std::string out = "rho,theta,gamma,closed_value,grid_value,bell_sum\n";
  for (const auto& r : rows) {
    out += csv_number(r.rho) + "," + csv_number(r.theta) + "," + csv_number(gam) + "," + csv_number(r.closed) + "," +
           csv_number(r.grid) + "," + csv_number(2.0 - 4.0 * r.grid) + "\n";
  }
  emit(g, out);
  return 0;
}

int run_kop_spectrum(const Globals& g, double U, int n) {
  const auto ev = kop::k_spectrum(U, n);
  emit_json(g, {{"U", U}, {"n", n}, {"eigenvalues", ev}});
  return 0;
}

int run_kop_gamma(const Globals& g, double eps, double L) {
  const double closed = kop::gamma_cutoff_closed_form(eps, L);
  const double direct = quantum::gamma(quantum::HProfile::cutoff_sqrt(eps, L));
  emit_json(g, {{"eps", eps}, {"L", L}, {"closed_form", closed}, {"quadrature", direct},
                {"defect", std::abs(closed - direct)}});
  return 0;
}

double min_over_support(const reconstruct::PhaseSpaceDensity& rho, const reconstruct::SupportMask& sm) {
  const auto& ax = rho.axes();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ax[0].size(); ++i)
    for (std::size_t j = 0; j < ax[1].size(); ++j)
      for (std::size_t k = 0; k < ax[2].size(); ++k)
        for (std::size_t l = 0; l < ax[3].size(); ++l)
          if (sm.in_e(i, j, k, l)) mn = std::min(mn, rho(i, j, k, l));
  return mn;
}

json round_trip_json(const reconstruct::RoundTrip& rt) {
  return {{"sigma0", rt.defects[0]}, {"sigma1", rt.defects[1]}, {"sigma2", rt.defects[2]}, {"max", rt.max_defect}};
}

int run_reconstruct(const Globals& g, const std::string& tpath, const std::string& fpath,
                    std::optional<double> lambda, double supp_tol, const std::string& dense_out) {
  const auto t = io::triplet_from_json(io::read_file(tpath));
  auto base = reconstruct::rho0_with_support(t, supp_tol);
  json j;
  j["pruned_mass"] = base.support.pruned_mass;
  j["chain_defects"] = {{"sigma01", base.chain.sigma01_defect}, {"sigma12", base.chain.sigma12_defect}};

  if (fpath.empty()) {
    if (lambda) throw InputError("--lambda needs --F");
    const auto rt = reconstruct::round_trip(t, base.density);
    j["defects"] = round_trip_json(rt);
    j["mass"] = rt.mass;
    j["lambda_range"] = nullptr;
    j["min_density"] = min_over_support(base.density, base.support);
    if (!dense_out.empty()) std::ofstream(dense_out) << io::to_json(base.density.to_dense()).dump() << "\n";
    emit_json(g, j);
    return 0;
  }

  const auto F = io::dense_from_json(io::read_file(fpath));
  const auto D = reconstruct::delta_from_F(base, F);
  const auto range = reconstruct::lambda_range(base.density, D);
  j["lambda_range"] = {{"lo", io::number(range.lo)}, {"hi", io::number(range.hi)},
                       {"m_plus", io::number(range.m_plus)}, {"m_minus", io::number(range.m_minus)}};
  j["delta_integral"] = D.integral();
  reconstruct::ReconstructionResult rec{std::move(base), D, range};
  const auto rho = lambda ? reconstruct::general_solution(rec, *lambda) : rec.base.density;
  const auto rt = reconstruct::round_trip(t, rho);
  j["lambda"] = lambda ? json(*lambda) : json(0.0);
  j["defects"] = round_trip_json(rt);
  j["mass"] = rt.mass;
  j["min_density"] = min_over_support(rho, rec.base.support);
  if (!dense_out.empty()) std::ofstream(dense_out) << io::to_json(rho.to_dense()).dump() << "\n";
  emit_json(g, j);
  return 0;
}

int run_quartet_from_psi(const Globals& g, const StateArgs& s) {
  const auto p = make_params(s);
  const auto [qh, ph] = p.h.half_grids(default_nodes(s, g) / 2);
  const auto psi = checked_psi(p, qh, ph);
  emit_json(g, io::to_json(marginal::quantum_marginals(psi)));
  return 0;
}

int run_spin_check(const Globals& g) {
  const auto c = reproduce::spin_identities();
  using spin::kron;
  const auto X = spin::sigma_x(), Y = spin::sigma_y(), Z = spin::sigma_z();
  const spin::Mat4 P = spin::p_bar(1.0);
  const spin::Mat4 one = spin::Mat4::Identity();
  const auto [G, Gp] = spin::gamma_matrices(1.0);
  const auto plus = spin::psi_pm_expectations(+1), minus = spin::psi_pm_expectations(-1);
  const json j = {
      {"p_bar_form", (P - (0.5 * one + 0.25 * (kron(Y, Y) - kron(X, X) + kron(X, Y) + kron(Y, X)))).cwiseAbs().maxCoeff()},
      {"p_bar_defect_zz", (P * (one - P) + 0.25 * kron(Z, Z)).cwiseAbs().maxCoeff()},
      {"gamma_projection", (G * G - G).cwiseAbs().maxCoeff()},
      {"gamma_prime_projection", (Gp * Gp - Gp).cwiseAbs().maxCoeff()},
      {"hermitian", (P - P.adjoint()).cwiseAbs().maxCoeff()},
      {"psi_plus_p_bar", std::abs(plus.p_bar_value - (1.0 - std::numbers::sqrt2) / 2.0)},
      {"psi_minus_p_bar", std::abs(minus.p_bar_value - (1.0 + std::numbers::sqrt2) / 2.0)},
      {"psi_plus_defect", std::abs(plus.defect_value + 0.25)},
      {"psi_minus_defect", std::abs(minus.defect_value + 0.25)},
      {"pass", c.pass}};
  emit_json(g, j);
  return c.pass ? 0 : 3;
}

int run_reproduce(const Globals& g) {
  json rows = json::array();
  json meta = json::array();
  bool all = true;
  for (const auto& f : reproduce::criteria()) {
    const auto c = f();
    std::cerr << reproduce::format_row(c) << "\n";
    rows.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}});
    meta.push_back({{"id", c.id}, {"detail", c.detail}, {"seconds", c.seconds}});
    all = all && c.pass;
  }
  emit_json(g, {{"criteria", rows}, {"all_pass", all}, {"metadata", meta}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: phase-space Bell inequalities and marginal problems"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-o,--out", g.out, "write the result here instead of stdout");
  app.add_option("--format", g.format, "json or csv (scans)")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--preset", g.preset, "grid preset: coarse (64), default (256), fine (1024)")
      ->check(CLI::IsMember({"coarse", "default", "fine"}));
  app.add_option("--tol", g.tol, "consistency tolerance")->check(CLI::PositiveNumber)->capture_default_str();

  std::function<int()> action;

  auto* bell_cmd = app.add_subcommand("bell", "Bell sums of marginal quartets")->require_subcommand(1);
  std::string qpath, wpath, ppath;
  auto* eval = bell_cmd->add_subcommand("eval", "Bell sum of a quartet under a witness");
  eval->add_option("--quartet", qpath, "quartet JSON")->required();
  eval->add_option("--witness", wpath, "witness JSON")->required();
  eval->callback([&] { action = [&] { return run_bell_eval(g, qpath, wpath); }; });
  auto* cex = bell_cmd->add_subcommand("counterexample", "classical atomic counterexample");
  cex->add_option("--params", ppath, "atom positions JSON");
  cex->callback([&] { action = [&] { return run_bell_counterexample(g, ppath); }; });

  auto* violate = app.add_subcommand("violate", "violating states")->require_subcommand(1);
  StateArgs scan_state;
  std::string rho_grid = "1", theta_grid = "0.7853981633974483";
  auto* scan = violate->add_subcommand("scan", "CSV of <P> over a (rho, theta) lattice");
  add_state_flags(scan, scan_state, false);
  scan->add_option("--rho-grid", rho_grid, "comma list or lo:hi:count")->capture_default_str();
  scan->add_option("--theta-grid", theta_grid, "comma list or lo:hi:count")->capture_default_str();
  scan->callback([&] {
    if (g.format == "json" && !app.get_option("--format")->count()) g.format = "csv";
    action = [&] { return run_violate_scan(g, scan_state, rho_grid, theta_grid); };
  });

  auto* kop_cmd = app.add_subcommand("kop", "the kernel operator K")->require_subcommand(1);
  double U = 40.0, eps = 1e-6, L = 1e6;
  int n = 512;
  auto* spec = kop_cmd->add_subcommand("spectrum", "Ritz values of K on a log grid");
  spec->add_option("--U", U, "half width of the log grid")->capture_default_str();
  spec->add_option("--n", n, "grid points")->capture_default_str();
  spec->callback([&] { action = [&] { return run_kop_spectrum(g, U, n); }; });
  auto* kg = kop_cmd->add_subcommand("gamma", "gamma of the two-cutoff profile");
  kg->add_option("--eps", eps, "inner cutoff")->capture_default_str();
  kg->add_option("--L", L, "outer cutoff")->capture_default_str();
  kg->callback([&] { action = [&] { return run_kop_gamma(g, eps, L); }; });

  std::string tpath, fpath, dense_out;
  std::optional<double> lambda;
  double supp_tol = reconstruct::kDefaultSuppTol;
  auto* rec = app.add_subcommand("reconstruct", "three-marginal reconstruction");
  rec->add_option("--triplet", tpath, "triplet JSON")->required();
  rec->add_option("--F", fpath, "dense 4-D seed JSON");
  rec->add_option("--lambda", lambda, "perturbation strength");
  rec->add_option("--supp-tol", supp_tol, "support threshold relative to each marginal's max")->capture_default_str();
  rec->add_option("--dense-out", dense_out, "write the 4-D solution as JSON");
  rec->callback([&] { action = [&] { return run_reconstruct(g, tpath, fpath, lambda, supp_tol, dense_out); }; });

  auto* quartet = app.add_subcommand("quartet", "marginal quartets")->require_subcommand(1);
  StateArgs psi_state;
  auto* from_psi = quartet->add_subcommand("from-psi", "the four marginals of a violating state");
  add_state_flags(from_psi, psi_state, true);
  from_psi->callback([&] { action = [&] { return run_quartet_from_psi(g, psi_state); }; });

  auto* sp = app.add_subcommand("spin", "two-qubit reduction")->require_subcommand(1);
  sp->add_subcommand("check", "matrix identities")->callback([&] { action = [&] { return run_spin_check(g); }; });

  app.add_subcommand("reproduce-paper", "run the acceptance table")->callback([&] {
    action = [&] { return run_reproduce(g); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
