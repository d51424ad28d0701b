#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include <confspec/parallel.hpp>
#include <confspec/report.hpp>

namespace {

struct Flags {
  std::string config_file;
  std::string map;
  std::optional<double> p;
  std::optional<double> alpha;
  std::optional<double> r_or_s;
  std::optional<double> diameter;
  std::optional<int> q_grid;
  std::optional<double> tol;
  std::optional<int> oracle_n;
  std::optional<int> restarts;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file; flags override its keys");
  cmd->add_option("--map", f.map, "identity | cardioid | koebe | inline JSON | path to JSON map spec");
  cmd->add_option("--tol", f.tol, "quadrature tolerance");
  cmd->add_option("--output", f.output, "json | csv | text");
  cmd->add_option("--out", f.out_path, "write the report here instead of stdout");
  cmd->add_option("--threads", f.threads, "worker threads (0 = auto); overrides CONF_SPECTRAL_THREADS");
}

void add_bound_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alpha", f.alpha, "integrability exponent alpha > 2");
  cmd->add_option("--q-grid", f.q_grid, "grid points for the q search");
  cmd->add_option("--diameter", f.diameter, "domain diameter for the convex comparison value");
}

confspec::BoundConfig resolve(const Flags& f) {
  confspec::BoundConfig c = f.config_file.empty() ? confspec::BoundConfig{} : confspec::load_config_file(f.config_file);
  if (!f.map.empty()) c.map = f.map;
  if (f.p) c.p = *f.p;
  if (f.alpha) c.alpha = f.alpha;
  if (f.r_or_s) c.r_or_s = f.r_or_s;
  if (f.diameter) c.diameter = f.diameter;
  if (f.q_grid) c.q_grid = *f.q_grid;
  if (f.tol) c.tol = *f.tol;
  if (f.oracle_n) c.oracle_n = *f.oracle_n;
  if (f.restarts) c.restarts = *f.restarts;
  if (!f.output.empty()) c.output = confspec::parse_output_format(f.output);
  if (f.seed) c.seed = *f.seed;
  return c;
}

int emit(const confspec::CommandResult& r, const std::string& out_path) {
  if (!r.message.empty()) std::cerr << r.message << "\n";
  if (out_path.empty()) {
    std::cout << r.output;
  } else {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) {
      std::cerr << "cannot write " << out_path << "\n";
      return 2;
    }
    os << r.output;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann eigenvalue lower bounds for conformal regular domains"};
  app.require_subcommand(1);
  Flags f;
  std::string p_range;
  std::string alpha_range;
  std::string mesh_off;
  double tol_alpha = 0.01;

  auto* bound = app.add_subcommand("bound", "evaluate a bound");
  add_common(bound, f);
  add_bound_flags(bound, f);
  bound->add_option("--p", f.p, "exponent p");
  bound->add_option("--r-or-s", f.r_or_s, "r for the weighted constant, or s (with --alpha) for the unweighted one");

  auto* regularity = app.add_subcommand("regularity", "estimate the integrability exponent of |psi'|");
  add_common(regularity, f);
  regularity->add_option("--tol-alpha", tol_alpha, "bracket width for alpha_max");

  auto* validate = app.add_subcommand("validate", "check a bound against the finite element oracle");
  add_common(validate, f);
  add_bound_flags(validate, f);
  validate->add_option("--p", f.p, "exponent p (2 selects the smooth-domain path)");
  validate->add_option("--oracle-n", f.oracle_n, "rings in the oracle mesh");
  validate->add_option("--restarts", f.restarts, "random restarts of the Rayleigh minimiser");
  validate->add_option("--seed", f.seed, "restart seed (0 derives it from map, p, n)");
  validate->add_option("--mesh-off", mesh_off, "write the oracle mesh in OFF format");

  auto* sweep = app.add_subcommand("sweep", "CSV grid of bounds");
  add_common(sweep, f);
  add_bound_flags(sweep, f);
  sweep->add_option("--p", p_range, "range lo:hi:step or a single value")->required();
  sweep->add_option("--alpha-range", alpha_range, "range lo:hi:step for alpha");
  sweep->add_option("--r-or-s", f.r_or_s, "fixed r or s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (f.threads) confspec::set_thread_count(*f.threads);
  try {
    const confspec::BoundConfig c = resolve(f);
    if (*bound) return emit(confspec::cmd_bound(c), f.out_path);
    if (*regularity) return emit(confspec::cmd_regularity(c, tol_alpha), f.out_path);
    if (*validate) return emit(confspec::cmd_validate(c, mesh_off), f.out_path);
    return emit(confspec::cmd_sweep(c, p_range, alpha_range), f.out_path);
  } catch (const confspec::Error& e) {
    std::cerr << e.what() << "\n";
    return confspec::exit_code_for(e.kind());
  }
}
