// Command-line front end: correspondence sweep, escape-time scaling study,
// wave-packet probes, and the potential admissibility check.
//
// Exit codes: 0 run completed and all validations passed with no row excluded;
// 1 run completed but a validation failed or a row was excluded; 2 bad
// configuration; 3 numerical or I/O failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "smoothlab/run.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string outdir;
  int grid_n = 0;       // 0 = keep config value
  std::int64_t seed = -1;  // <0 = keep config value
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args.outdir, "output directory (created if missing)")->required();
  sub->add_option("--grid-n", args.grid_n, "override grid points per axis");
  sub->add_option("--seed", args.seed, "override random seed");
}

smoothlab::RunConfig load_with_overrides(const CommonArgs& args) {
  smoothlab::RunConfig cfg = smoothlab::load_config(args.config_path);
  if (args.grid_n > 0) cfg.grid_n = args.grid_n;
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  smoothlab::validate_config(cfg);
  return cfg;
}

int run_correspondence_cmd(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  smoothlab::OutdirLock lock(args.outdir);
  const auto rep = smoothlab::run_correspondence(cfg);
  smoothlab::emit_correspondence(args.outdir, cfg, rep);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "rows: " << rep.rows.size() << "  fitted c: " << smoothlab::format_short(rep.fitted_c)
            << "  inequalities: " << (rep.inequalities_pass ? "pass" : "FAIL") << "\n";
  for (const auto& r : rep.rows)
    std::cout << "  R=" << smoothlab::format_short(r.R) << "  C0=" << smoothlab::format_short(r.C0)
              << "  Q0=" << smoothlab::format_short(r.Q0)
              << "  ratio=" << smoothlab::format_short(r.ratio)
              << (r.band_ok ? "" : "  [excluded]") << "\n";
  const bool ok = rep.inequalities_pass && !rep.any_excluded;
  return ok ? 0 : 1;
}

int run_escape_cmd(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  smoothlab::OutdirLock lock(args.outdir);
  const auto rep = smoothlab::run_escape_scaling(cfg);
  smoothlab::emit_escape(args.outdir, cfg, rep);
  if (!rep.notice.empty()) std::cerr << "notice: " << rep.notice << "\n";
  if (rep.fit_done)
    std::cout << "slope: " << smoothlab::format_short(rep.slope)
              << "  C': " << smoothlab::format_short(rep.Cprime) << "\n";
  else
    std::cout << "fit skipped\n";
  return 0;
}

int run_probe_cmd(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  smoothlab::OutdirLock lock(args.outdir);
  const auto rep = smoothlab::run_probes(cfg);
  smoothlab::emit_probes(args.outdir, cfg, rep);
  int rejected = 0;
  for (const auto& r : rep.rows)
    if (!r.accepted) ++rejected;
  std::cout << "probe rows: " << rep.rows.size() << "  rejected: " << rejected
            << "  sup bound certified: " << (rep.all_sup_certified ? "yes" : "NO") << "\n";
  const bool ok = !rep.any_rejected && rep.all_sup_certified;
  return ok ? 0 : 1;
}

int run_assumption_cmd(const CommonArgs& args) {
  const auto cfg = load_with_overrides(args);
  smoothlab::OutdirLock lock(args.outdir);
  const auto rep = smoothlab::run_check_assumption(cfg);
  smoothlab::emit_assumption(args.outdir, cfg, rep);
  std::cout << "admissibility: " << (rep.pass ? "pass" : "FAIL") << "\n";
  for (const auto& o : rep.orders)
    std::cout << "  order " << o.order << "  sup ratio "
              << smoothlab::format_short(o.sup_ratio) << (o.diverging ? "  [diverging]" : "")
              << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scale-dependent constants of confined dynamics"};
  app.require_subcommand(1);

  CommonArgs c_args, e_args, p_args, a_args;
  add_common(app.add_subcommand("correspondence",
                                "sweep R: classical constant vs top Gram eigenvalue"),
             c_args);
  add_common(app.add_subcommand("escape", "occupation-time scaling across energies"), e_args);
  add_common(app.add_subcommand("probe", "coherent-state lower bounds on the Gram top"),
             p_args);
  add_common(app.add_subcommand("check-assumption",
                                "growth and derivative bounds of the potential"),
             a_args);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand("correspondence")) return run_correspondence_cmd(c_args);
    if (app.got_subcommand("escape")) return run_escape_cmd(e_args);
    if (app.got_subcommand("probe")) return run_probe_cmd(p_args);
    if (app.got_subcommand("check-assumption")) return run_assumption_cmd(a_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const smoothlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const smoothlab::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const smoothlab::RunError& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
