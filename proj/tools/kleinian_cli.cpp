#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kleinian/io.hpp"
#include "kleinian/kleinian.hpp"
#include "kleinian/selftest.hpp"

namespace fs = std::filesystem;
using namespace kleinian;
using io::json;

namespace {

struct RunConfig {
  std::string command;
  std::string group;
  std::string family;
  std::string bodies;
  std::optional<double> T;
  std::optional<double> L;
  std::vector<double> window;
  std::optional<std::size_t> budget;
  std::optional<double> delta;
  double tol = Tolerances{}.dedup;
  int workers = 1;
  std::string out;

  TraversalOptions traversal() const {
    TraversalOptions t;
    if (budget) t.node_budget = *budget;
    t.workers = workers;
    t.dedup_tol = tol;
    return t;
  }

  /// Hash of everything that can change the numbers: the subcommand, the
  /// input file contents and the numeric settings. Workers and the output
  /// directory are excluded.
  std::string hash() const {
    std::string s = "command=" + command + "\n";
    for (const auto& [key, path] : {std::pair{"group", group}, {"family", family}, {"bodies", bodies}})
      if (!path.empty()) s += std::string(key) + "=" + io::read_file(path) + "\n";
    if (!family.empty()) {
      const json fam = io::parse_json_file(family);
      for (const auto& m : fam.value("members", json::array())) {
        if (m.contains("group") && m["group"].is_string())
          s += "member=" + io::read_file(fs::path(family).parent_path() / m["group"].get<std::string>()) + "\n";
      }
      if (fam.contains("limit") && fam["limit"].contains("group") && fam["limit"]["group"].is_string())
        s += "limit=" + io::read_file(fs::path(family).parent_path() / fam["limit"]["group"].get<std::string>()) + "\n";
    }
    if (T) s += "T=" + io::fmt(*T) + "\n";
    if (L) s += "L=" + io::fmt(*L) + "\n";
    for (double w : window) s += "window=" + io::fmt(w) + "\n";
    if (budget) s += "budget=" + std::to_string(*budget) + "\n";
    if (delta) s += "delta=" + io::fmt(*delta) + "\n";
    s += "tol=" + io::fmt(tol) + "\n";
    return io::hex64(io::fnv1a64(s));
  }
};

std::string default_out() {
  const char* env = std::getenv("KLEINIAN_OUT");
  return env && *env ? env : "kleinian_out";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("output directory " + dir.string() + " is not writable");
}

io::GroupFile load_group(const RunConfig& c) {
  if (c.group.empty()) throw ValidationError("--group is required");
  io::GroupFile gf = io::load_group(c.group);
  if (!c.bodies.empty()) gf.bodies = io::parse_bodies(io::parse_json_file(c.bodies), gf.spec);
  return gf;
}

double positive(std::optional<double> v, double fallback, const char* name) {
  const double x = v.value_or(fallback);
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(std::string(name) + " must be positive");
  return x;
}

std::pair<double, double> fit_window(const RunConfig& c, double T) {
  if (c.window.empty()) return {T / 2.0, T};
  if (c.window.size() != 2 || !(c.window[0] > 0.0 && c.window[1] > c.window[0] && c.window[1] <= T))
    throw ValidationError("--window must give 0 < t_lo < t_hi <= T");
  return {c.window[0], c.window[1]};
}

std::string g17(double v) { return io::fmt(v); }

void print_row(const char* label, const std::string& value) { std::printf("  %-22s %s\n", label, value.c_str()); }

void print_exponent(const ExponentEstimate& e) {
  print_row("delta_series", g17(e.delta_series));
  print_row("delta_growth", g17(e.delta_growth));
  print_row("agreement_gap", g17(e.agreement_gap));
  print_row("orbit_size", std::to_string(e.orbit_size));
  print_row("elementary", e.elementary ? "yes" : "no");
  print_row("low_confidence", e.low_confidence ? "yes" : "no");
  print_row("certificate", e.certificate.to_string());
}

void print_fit(const ExpFit& f) {
  print_row("C_hat", g17(f.C_hat));
  print_row("delta_hat", g17(f.delta_hat));
  print_row("window", g17(f.t_lo) + " .. " + g17(f.t_hi));
  print_row("residual", g17(f.residual));
  print_row("rejected", f.rejected ? "yes" : "no");
}

using Fitter = ExpFit (*)(const CountSeries&, double, double, std::size_t);

json fit_or_error(const CountSeries& s, std::pair<double, double> w, std::optional<ExpFit>& fit,
                  Fitter fitter = fit_exponential) {
  try {
    fit = fitter(s, w.first, w.second, 30);
    json j = io::to_json(*fit);
    j["certificate"] = s.certificate.to_string();
    return j;
  } catch (const InsufficientDataError& e) {
    return {{"error", e.kind()}, {"message", e.what()}, {"certificate", s.certificate.to_string()}};
  }
}

void write_series(const fs::path& path, const io::Header& h, const CountSeries& s) {
  std::ostringstream csv;
  csv << io::csv_header(h);
  write_series_csv(csv, s);
  io::write_text(path, csv.str());
}

int cmd_exponent(const RunConfig& c, const fs::path& out) {
  const io::GroupFile gf = load_group(c);
  const double T = positive(c.T, 14.0, "--T");
  const ExponentEstimate e = estimate_delta(gf.spec, T, c.traversal());
  const double lambda0 = lambda0_from_delta(e.delta_series, to_int(gf.spec.dim()));
  const io::Header h{c.hash(), {e.certificate.to_string()}};
  json j = io::to_json(e);
  j["lambda0"] = lambda0;
  io::write_json(out / "exponent.json", {{"header", io::header_json(h)}, {"exponent", j}});
  std::printf("exponent (T = %s)\n", g17(T).c_str());
  print_exponent(e);
  print_row("lambda0", g17(lambda0));
  return 0;
}

int cmd_loops(const RunConfig& c, const fs::path& out) {
  const io::GroupFile gf = load_group(c);
  const double T = positive(c.T, 14.0, "--T");
  const auto w = fit_window(c, T);
  const CountSeries s = count_loops(gf.spec, gf.spec.basepoint(), T, c.traversal());
  const io::Header h{c.hash(), {s.certificate.to_string()}};
  write_series(out / "loops.csv", h, s);
  std::optional<ExpFit> fit;
  const json fj = fit_or_error(s, w, fit);
  io::write_json(out / "loops_fit.json", {{"header", io::header_json(h)}, {"count", s.size()}, {"fit", fj}});
  std::printf("loops (T = %s)\n", g17(T).c_str());
  print_row("count", std::to_string(s.size()));
  if (fit) print_fit(*fit);
  else print_row("fit", fj["message"].get<std::string>());
  return 0;
}

int cmd_geodesics(const RunConfig& c, const fs::path& out) {
  const io::GroupFile gf = load_group(c);
  const double L = positive(c.L, 12.0, "--L");
  const double T = positive(c.T, 14.0, "--T");
  const TraversalOptions topt = c.traversal();
  const CountSeries s = count_primitive_geodesics(gf.spec, L, topt);
  const double delta = c.delta ? *c.delta : estimate_delta(gf.spec, T, topt).delta_series;
  const double ratio = delta > 0.0 ? prime_geodesic_ratio(s, delta, L) : 0.0;
  const io::Header h{c.hash(), {s.certificate.to_string()}};
  write_series(out / "geodesics.csv", h, s);
  std::optional<ExpFit> fit;
  const json fj = fit_or_error(s, {L / 2.0, L}, fit, fit_prime_geodesic);
  io::write_json(out / "geodesics.json", {{"header", io::header_json(h)},
                                          {"L", L},
                                          {"count", s.size()},
                                          {"oriented_count", 2 * s.size()},
                                          {"delta", delta},
                                          {"ratio", ratio},
                                          {"fit", fj}});
  std::printf("primitive geodesics (L = %s)\n", g17(L).c_str());
  print_row("count (unoriented)", std::to_string(s.size()));
  print_row("delta", g17(delta));
  print_row("ratio", g17(ratio));
  if (fit) print_row("fit delta_hat", g17(fit->delta_hat));
  else print_row("fit", fj["message"].get<std::string>());
  print_row("certificate", s.certificate.to_string());
  return 0;
}

int cmd_ortho(const RunConfig& c, const fs::path& out) {
  const io::GroupFile gf = load_group(c);
  if (!gf.bodies) throw ValidationError("ortho needs --bodies or bodies in the group file");
  const double T = positive(c.T, 14.0, "--T");
  const auto w = fit_window(c, T);
  const CountSeries s = count_ortho(gf.spec, gf.bodies->minus, gf.bodies->plus, T, c.traversal());
  const io::Header h{c.hash(), {s.certificate.to_string()}};
  write_series(out / "ortho.csv", h, s);
  std::optional<ExpFit> fit;
  const json fj = fit_or_error(s, w, fit);
  io::write_json(out / "ortho_fit.json", {{"header", io::header_json(h)},
                                          {"count", s.size()},
                                          {"overlaps_skipped", s.overlaps_skipped},
                                          {"fit", fj}});
  std::printf("orthogeodesics (T = %s)\n", g17(T).c_str());
  print_row("count", std::to_string(s.size()));
  print_row("overlaps_skipped", std::to_string(s.overlaps_skipped));
  if (fit) print_fit(*fit);
  else print_row("fit", fj["message"].get<std::string>());
  return 0;
}

int cmd_ps_measure(const RunConfig& c, const fs::path& out) {
  const io::GroupFile gf = load_group(c);
  const double T = positive(c.T, 14.0, "--T");
  const TraversalOptions topt = c.traversal();
  const OrbitBatch batch = enumerate_orbit(gf.spec, T, Pruned{}, topt);
  double delta = 0.0;
  if (c.delta) {
    delta = *c.delta;
  } else {
    DisplacementSet d{batch.cutoff, {}, batch.certificate, batch.nodes_visited};
    for (const OrbitEntry& e : batch.entries) d.values.push_back(e.displacement);
    delta = estimate_delta(d, gf.spec).delta_series;
  }
  const EmpiricalBoundaryMeasure mu = ps_estimate(batch, gf.spec.basepoint(), delta);
  json inv = json::array();
  for (int g = 1; g <= gf.spec.rank(); ++g)
    for (Letter l : {g, -g})
      inv.push_back({{"generator", std::string(1, letter_char(l))},
                     {"l1", histogram_distance(mu, pushforward(mu, gf.spec.generator(l)))}});
  const io::Header h{c.hash(), {batch.certificate.to_string()}};
  std::ostringstream csv;
  csv << io::csv_header(h);
  write_measure_csv(csv, mu);
  io::write_text(out / "measure.csv", csv.str());
  io::write_json(out / "measure.json", {{"header", io::header_json(h)},
                                        {"delta", delta},
                                        {"cutoff", T},
                                        {"shell_start", mu.shell_start},
                                        {"atoms", mu.atoms.size()},
                                        {"raw_total", mu.raw_total},
                                        {"invariance_l1", inv}});
  std::printf("Patterson-Sullivan measure (T = %s, delta = %s)\n", g17(T).c_str(), g17(delta).c_str());
  print_row("atoms", std::to_string(mu.atoms.size()));
  print_row("shell_start", g17(mu.shell_start));
  for (const json& r : inv)
    print_row(("l1 under " + r["generator"].get<std::string>()).c_str(), g17(r["l1"].get<double>()));
  return 0;
}

int cmd_sweep(const RunConfig& c, const fs::path& out) {
  if (c.family.empty()) throw ValidationError("--family is required");
  FamilySpec fam = io::load_family(c.family);
  if (c.T) fam.T = positive(c.T, 0.0, "--T");
  if (c.L) fam.L = positive(c.L, 0.0, "--L");
  if (c.budget) fam.node_budget = *c.budget;
  if (!c.window.empty()) fam.window = fit_window(c, fam.T);
  const SweepReport r = run_sweep(fam, {c.workers});

  std::vector<std::string> certs;
  for (const SweepRow& row : r.rows)
    for (const auto& s : row.certificates)
      if (std::find(certs.begin(), certs.end(), s) == certs.end()) certs.push_back(s);
  const io::Header h{c.hash(), certs};

  std::ostringstream csv;
  csv << io::csv_header(h);
  csv << "k,limit,failed,delta_series,delta_growth,lambda0,loop_C,loop_delta,geodesic_count,geodesic_ratio,ortho_C,"
         "gap_delta_series,gap_lambda0,gap_loop_C\n";
  auto opt = [](const std::optional<ExpFit>& f, bool c_hat) {
    return f ? g17(c_hat ? f->C_hat : f->delta_hat) : std::string();
  };
  auto gap = [](double v) { return std::isnan(v) ? std::string() : g17(v); };
  auto line = [&](const SweepRow& row, const SweepGaps* g) {
    csv << g17(row.k) << ',' << (row.is_limit ? 1 : 0) << ',' << (row.failed ? 1 : 0) << ','
        << g17(row.exponent.delta_series) << ',' << g17(row.exponent.delta_growth) << ',' << g17(row.lambda0) << ','
        << opt(row.loop_fit, true) << ',' << opt(row.loop_fit, false) << ',' << row.geodesic_count << ','
        << g17(row.geodesic_ratio) << ',' << opt(row.ortho_fit, true) << ',';
    if (g) csv << gap(g->delta_series) << ',' << gap(g->lambda0) << ',' << gap(g->loop_C);
    else csv << "0,0,0";
    csv << '\n';
  };
  for (std::size_t i = 0; i < r.rows.size(); ++i) line(r.rows[i], &r.gaps[i]);
  line(r.limit, nullptr);
  io::write_text(out / "sweep.csv", csv.str());

  json rows = json::array(), gaps = json::array();
  for (const SweepRow& row : r.rows) rows.push_back(io::to_json(row));
  for (const SweepGaps& g : r.gaps) gaps.push_back(io::to_json(g));
  io::write_json(out / "sweep.json", {{"header", io::header_json(h)},
                                      {"T", fam.T},
                                      {"L", fam.L},
                                      {"rows", rows},
                                      {"limit", io::to_json(r.limit)},
                                      {"gaps", gaps}});

  std::printf("%8s %12s %12s %10s %10s %10s %10s\n", "k", "delta", "gap", "lambda0", "C_hat", "gap_C", "ratio");
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const SweepRow& row = r.rows[i];
    if (row.failed) {
      std::printf("%8g  failed: %s\n", row.k, row.failure.c_str());
      continue;
    }
    std::printf("%8g %12.6f %12.6f %10.6f %10.6f %10.6f %10.6f\n", row.k, row.exponent.delta_series,
                r.gaps[i].delta_series, row.lambda0, row.loop_fit ? row.loop_fit->C_hat : NAN, r.gaps[i].loop_C,
                row.geodesic_ratio);
  }
  std::printf("%8s %12.6f %12s %10.6f %10.6f %10s %10.6f\n", "limit", r.limit.exponent.delta_series, "", r.limit.lambda0,
              r.limit.loop_fit ? r.limit.loop_fit->C_hat : NAN, "", r.limit.geodesic_ratio);
  return 0;
}

int cmd_selftest(const RunConfig& c, const fs::path& out) {
  const auto results = run_selftest();
  json list = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("[%s] %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.empty() ? "" : ": ",
                r.detail.c_str());
    list.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    ok = ok && r.passed;
  }
  io::write_json(out / "selftest.json", {{"header", io::header_json({c.hash(), {}})}, {"results", list}});
  return ok ? 0 : 1;
}

void report_error(const fs::path& out, const std::string& kind, const std::string& message, const json& extra = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (extra.is_object()) j.update(extra);
  std::cerr << j.dump() << "\n";
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) {
    std::ofstream f(out / "error.json", std::ios::binary);
    f << j.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kleinian group counting and exponent toolkit"};
  app.require_subcommand(1, 1);
  RunConfig c;
  c.out = default_out();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", c.out, "output directory (default $KLEINIAN_OUT or ./kleinian_out)");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--budget", c.budget, "node budget per traversal");
    sub->add_option("--tol", c.tol, "matrix deduplication tolerance")->check(CLI::PositiveNumber);
  };
  auto add_group = [&](CLI::App* sub) { sub->add_option("--group", c.group, "group file")->check(CLI::ExistingFile); };

  CLI::App* exponent = app.add_subcommand("exponent", "critical exponent estimates");
  CLI::App* loops = app.add_subcommand("loops", "loop length series and exponential fit");
  CLI::App* geodesics = app.add_subcommand("geodesics", "primitive closed geodesics up to L");
  CLI::App* ortho = app.add_subcommand("ortho", "orthogeodesic lengths between two bodies");
  CLI::App* ps = app.add_subcommand("ps-measure", "empirical Patterson-Sullivan measure");
  CLI::App* sweep = app.add_subcommand("sweep", "estimators along a converging family");
  CLI::App* selftest = app.add_subcommand("selftest", "closed-form example suite");
  for (CLI::App* sub : {exponent, loops, geodesics, ortho, ps, sweep, selftest}) add_common(sub);
  for (CLI::App* sub : {exponent, loops, geodesics, ortho, ps}) add_group(sub);
  for (CLI::App* sub : {exponent, loops, geodesics, ortho, ps, sweep}) sub->add_option("--T", c.T, "length cutoff");
  for (CLI::App* sub : {geodesics, sweep}) sub->add_option("--L", c.L, "geodesic length cutoff");
  for (CLI::App* sub : {loops, ortho, sweep})
    sub->add_option("--window", c.window, "fit window t_lo t_hi")->expected(2);
  for (CLI::App* sub : {geodesics, ps}) sub->add_option("--delta", c.delta, "use this exponent instead of estimating");
  ortho->add_option("--bodies", c.bodies, "bodies file")->check(CLI::ExistingFile);
  sweep->add_option("--family", c.family, "family file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(c.out, "usage", e.what());
    return 2;
  }
  c.command = app.get_subcommands().front()->get_name();
  const fs::path out = c.out;
  try {
    ensure_dir(out);
    if (c.command == "exponent") return cmd_exponent(c, out);
    if (c.command == "loops") return cmd_loops(c, out);
    if (c.command == "geodesics") return cmd_geodesics(c, out);
    if (c.command == "ortho") return cmd_ortho(c, out);
    if (c.command == "ps-measure") return cmd_ps_measure(c, out);
    if (c.command == "sweep") return cmd_sweep(c, out);
    return cmd_selftest(c, out);
  } catch (const BudgetExceeded& e) {
    report_error(out, e.kind(), e.what(),
                 {{"partial", true}, {"budget", e.budget()}, {"nodes_visited", e.nodes_visited()},
                  {"entries_found", e.entries_found()}});
    return 3;
  } catch (const Error& e) {
    report_error(out, e.kind(), e.what());
    return 2;
  }
}
