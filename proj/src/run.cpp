#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dirac_loc/cli.hpp"
#include "dirac_loc/config_detail.hpp"
#include "dirac_loc/green.hpp"
#include "dirac_loc/liealgebra.hpp"
#include "dirac_loc/parallel.hpp"
#include "dirac_loc/rng.hpp"
#include "dirac_loc/spectrum.hpp"

namespace dirac_loc {

using namespace detail;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_csv(const Table& table, const std::string& command, const std::string& manifest_name) {
  std::ostringstream out;
  out << "# dirac-loc " << kVersion << "\n# command: " << command << "\n# manifest: " << manifest_name << "\n";
  for (const auto& [k, v] : table.meta) out << "# " << k << ": " << v << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
  return out.str();
}

namespace {

const char* plot_name(PlotKind kind) {
  switch (kind) {
    case PlotKind::GammaVsE: return "gamma_vs_E";
    case PlotKind::Ids: return "ids";
    case PlotKind::Decay: return "decay";
    case PlotKind::DimVsE: return "dim_vs_E";
  }
  return "";
}

std::vector<std::string> plot_columns(PlotKind kind) {
  switch (kind) {
    case PlotKind::GammaVsE: return {"E", "sum_gamma", "band"};
    case PlotKind::Ids: return {"E", "F", "std_error"};
    case PlotKind::Decay: return {"L", "median_log_norm", "q25", "q75"};
    case PlotKind::DimVsE: return {"E", "dim"};
  }
  return {};
}

}  // namespace

std::string plot_data(const Table& table, PlotKind kind) {
  const auto wanted = plot_columns(kind);
  std::vector<std::size_t> idx;
  for (const auto& w : wanted) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), w);
    if (it == table.columns.end() && !table.rows.empty())
      throw ConfigError(std::string("plot kind ") + plot_name(kind) + " needs column '" + w + "'");
    idx.push_back(static_cast<std::size_t>(it - table.columns.begin()));
  }
  std::ostringstream out;
  out << "# " << plot_name(kind) << ":";
  for (const auto& w : wanted) out << " " << w;
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < idx.size(); ++c) out << (c ? " " : "") << row.at(idx[c]);
    out << "\n";
  }
  return out.str();
}

void emit_plot_data(const Table& table, PlotKind kind, const std::string& path) {
  const std::string data = plot_data(table, kind);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << data;
}

namespace {

std::string num(double x) { return format_number(x); }
std::string num(long x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }

struct Params {
  const std::map<std::string, std::string>& m;
  double real(const std::string& k) const { return parse_real(k, m.at(k)); }
  long count(const std::string& k) const { return parse_int(k, m.at(k)); }
  std::vector<double> grid(const std::string& k) const { return parse_grid(k, m.at(k)); }
  std::vector<long> counts(const std::string& k) const { return parse_int_list(k, m.at(k)); }
  bool has(const std::string& k) const { return !m.at(k).empty(); }
};

void add_gamma_columns(Table& t, int dim) {
  for (int p = 1; p <= dim; ++p) t.columns.push_back("gamma_" + std::to_string(p));
  for (int p = 1; p <= dim; ++p) t.columns.push_back("stderr_" + std::to_string(p));
}

void push_gamma(std::vector<std::string>& row, const LyapunovEstimate& est) {
  for (Eigen::Index p = 0; p < est.gamma.size(); ++p) row.push_back(num(est.gamma(p)));
  for (Eigen::Index p = 0; p < est.std_error.size(); ++p) row.push_back(num(est.std_error(p)));
}

Flavor flavor_of(const std::string& s) {
  if (s == "F+") return Flavor::Fplus;
  if (s == "F-") return Flavor::Fminus;
  if (s == "F++") return Flavor::FplusPlus;
  if (s == "F+-") return Flavor::FplusMinus;
  if (s == "F-+") return Flavor::FminusPlus;
  return Flavor::FminusMinus;
}

Table proportion_table(const std::string& key, const std::vector<std::pair<long, Proportion>>& rows) {
  Table t;
  t.columns = {key, "p_hat", "ci_lo", "ci_hi", "hits", "samples"};
  for (const auto& [k, p] : rows)
    t.rows.push_back({num(k), num(p.p_hat), num(p.ci_lo), num(p.ci_hi), num(p.hits), num(p.samples)});
  return t;
}

}  // namespace

RunResult execute(const ExperimentConfig& cfg) {
  const ModelSpec& spec = cfg.model;
  const Params P{cfg.params};
  const std::string& cmd = cfg.command;
  const int N = spec.N;
  RunResult out;
  Table& t = out.table;

  if (cmd == "lyapunov") {
    const double E = P.real("energy");
    const auto est = lyapunov_spectrum(spec, E, P.count("steps"), cfg.seed, static_cast<int>(P.count("reorth")),
                                       static_cast<int>(P.count("batches")));
    t.columns = {"E"};
    add_gamma_columns(t, 2 * N);
    std::vector<std::string> row{num(E)};
    push_gamma(row, est);
    t.rows.push_back(row);
    t.meta = {{"symmetry_residual", num(symmetry_residual(est))},
              {"degeneracy_residual", num(degeneracy_residual(est))}};
  } else if (cmd == "scan") {
    const auto grid = P.grid("grid");
    const auto scan = energy_scan(spec, grid, P.count("steps"), cfg.seed, cfg.workers);
    t.columns = {"E"};
    add_gamma_columns(t, 2 * N);
    t.columns.push_back("sum_gamma");
    t.columns.push_back("band");
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto& est = scan.rows[g];
      std::vector<std::string> row{num(grid[g])};
      push_gamma(row, est);
      row.push_back(num(est.gamma.head(N).sum()));
      row.push_back(num(est.std_error.head(N).sum()));
      t.rows.push_back(row);
    }
    t.meta = {{"holder_alpha", num(scan.fit.alpha)},
              {"holder_C", num(scan.fit.C)},
              {"holder_r2", num(scan.fit.r2)},
              {"holder_pairs", num(scan.fit.pairs)}};
    for (const auto& f : scan.flags)
      t.meta.emplace_back("delocalization_flag", num(f.energy) + " vanishing=" + num(f.vanishing));
    out.plot = PlotKind::GammaVsE;
  } else if (cmd == "lie") {
    const double E = P.real("energy");
    const LieBasis b = generate_algebra(vertex_generators(spec, E), P.real("tol"));
    t.columns = {"E", "dim", "classification", "closed"};
    t.rows.push_back({num(E), num(b.dim), b.closed ? to_string(b.classification) : "Unclosed", b.closed ? "1" : "0"});
  } else if (cmd == "threshold") {
    const auto r = disorder_threshold(spec, P.real("d_log_O"));
    t.columns = {"lambda_min", "lambda_max", "ell_c", "lo", "hi", "empty"};
    t.rows.push_back({num(r.lambda_min), num(r.lambda_max), num(r.ell_c), num(r.lo), num(r.hi), r.empty ? "1" : "0"});
  } else if (cmd == "critical") {
    const auto scan = critical_energy_scan(spec, P.grid("grid"), P.real("tol"), cfg.workers);
    t.columns = {"E", "dim", "classification"};
    for (std::size_t g = 0; g < scan.energies.size(); ++g)
      t.rows.push_back({num(scan.energies[g]), num(scan.dims[g]), to_string(scan.classes[g])});
    t.meta = {{"generic_dim", num(scan.generic_dim)}};
    for (const auto& d : scan.drops)
      t.meta.emplace_back("critical_energy",
                          num(d.energy) + " dim=" + num(d.dim) + " bracket=[" + num(d.lo) + ", " + num(d.hi) + "]");
    out.plot = PlotKind::DimVsE;
  } else if (cmd == "ids") {
    const auto grid = P.grid("grid");
    const auto curve = ids_estimate(spec, P.count("L"), P.count("samples"), grid, cfg.seed, cfg.workers);
    const auto free = free_ids(N, grid);
    t.columns = {"E", "F", "std_error", "F0"};
    for (std::size_t g = 0; g < grid.size(); ++g)
      t.rows.push_back({num(grid[g]), num(curve.F[g]), num(curve.std_error[g]), num(free.F[g])});
    out.plot = PlotKind::Ids;
  } else if (cmd == "thouless") {
    const auto grid = P.grid("grid");
    const auto ids_grid = P.grid("ids_grid");
    const long steps = P.count("steps");
    std::vector<std::pair<double, double>> curve(grid.size());
    const std::uint64_t gseed = derive_seed(cfg.seed, 1);
    parallel_for(static_cast<long>(grid.size()), cfg.workers, [&](long e) {
      const auto est = lyapunov_spectrum(spec, grid[e], steps, gseed);
      curve[e] = {grid[e], est.gamma.head(N).sum()};
    });
    const auto ids = ids_estimate(spec, P.count("L"), P.count("samples"), ids_grid, derive_seed(cfg.seed, 2),
                                  cfg.workers);
    const auto res = thouless_residual(curve, ids, free_ids(N, ids_grid), P.real("margin"));
    t.columns = {"E", "sum_gamma", "integral", "residual"};
    for (std::size_t e = 0; e < grid.size(); ++e)
      t.rows.push_back({num(grid[e]), num(curve[e].second), num(res.integral[e]), num(res.residuals[e])});
    t.meta = {{"a_fit", num(res.a_fit)},
              {"max_residual", num(res.max_residual)},
              {"truncation_bound", num(res.truncation_bound)}};
  } else if (cmd == "green") {
    const auto fit = green_decay_fit(spec, P.real("energy"), P.counts("L_list"), P.count("samples"), cfg.seed,
                                     cfg.workers);
    t.columns = {"L", "median_log_norm", "q25", "q75", "samples"};
    for (const auto& p : fit.points)
      t.rows.push_back({num(p.L), num(p.median), num(p.q25), num(p.q75), num(p.samples)});
    t.meta = {{"slope", num(fit.slope)}, {"slope_ci95", num(fit.ci)}, {"intercept", num(fit.intercept)}};
    out.plot = PlotKind::Decay;
  } else if (cmd == "ildse") {
    const double m = P.real("m");
    t.columns = {"L", "m", "p_hat", "ci_lo", "ci_hi"};
    for (long L : P.counts("L_list")) {
      const auto p = regularity_probability(spec, P.real("energy"), m, L, P.count("samples"),
                                            derive_seed(cfg.seed, static_cast<std::uint64_t>(L)), cfg.workers,
                                            P.real("collar_outer"), P.real("collar_inner"));
      t.rows.push_back({num(L), num(m), num(p.p_hat), num(p.ci_lo), num(p.ci_hi)});
    }
  } else if (cmd == "ldp") {
    const double E = P.real("energy");
    const int p = static_cast<int>(P.count("p"));
    if (p > 2 * N) throw ConfigError("config key 'p' must not exceed 2n");
    const double gamma_ref = P.has("gamma_ref")
                                 ? P.real("gamma_ref")
                                 : lyapunov_spectrum(spec, E, P.count("steps"), derive_seed(cfg.seed, 1)).gamma(p - 1);
    const double eps = P.has("eps") ? P.real("eps") : 0.5 * std::abs(gamma_ref);
    if (!(eps > 0.0)) throw ConfigError("ldp: eps must be positive");
    std::optional<LagrangianFrame> F;
    if (cfg.params.at("flavor") != "none") F = lagrangian_frame(N, flavor_of(cfg.params.at("flavor")));
    std::vector<std::pair<long, Proportion>> rows;
    for (long n : P.counts("n_list"))
      rows.emplace_back(n, ldp_probability(spec, E, p, eps, n, P.count("samples"),
                                           derive_seed(cfg.seed, static_cast<std::uint64_t>(n)), gamma_ref, F,
                                           cfg.workers));
    t = proportion_table("n", rows);
    t.meta = {{"gamma_ref", num(gamma_ref)}, {"eps", num(eps)}};
  } else if (cmd == "wegner") {
    const long L = P.count("L");
    const auto pr = wegner_probability(spec, P.real("energy"), L, P.real("sigma"), P.real("beta"), P.count("samples"),
                                       cfg.seed, cfg.workers);
    t = proportion_table("L", {{L, pr}});
    t.meta = {{"delta", num(std::exp(-P.real("sigma") * std::pow(static_cast<double>(L), P.real("beta"))))}};
  } else if (cmd == "group-check") {
    const double E = P.real("energy");
    const long n = P.count("samples");
    const DisorderWord word = sample_word(spec, cfg.seed, 0, n - 1);
    t.columns = {"n", "symplectic", "orthogonal", "spo", "tag"};
    long sp = 0;
    for (long k = 0; k < n; ++k) {
      const TransferMatrix T = spec.kind == Kind::Dirac ? cell_transfer(spec, word.cell(k), E)
                                                        : schrodinger_cell_transfer(spec, word.cell(k), E);
      const bool s = is_symplectic(T.entries, 1e-8);
      sp += s;
      t.rows.push_back({num(k), s ? "1" : "0", is_orthogonal(T.entries, 1e-8) ? "1" : "0",
                        is_spo(T.entries, 1e-8) ? "1" : "0", to_string(T.tag)});
    }
    t.meta = {{"symplectic_fraction", num(static_cast<double>(sp) / static_cast<double>(n))}};
  } else {
    throw ConfigError("unknown command '" + cmd + "'");
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << bytes;
  if (!f) throw Error("write failed for " + path.string());
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  try {
    result = execute(cfg);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    log << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    log << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const CoverageError& e) {
    log << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "numerical error: " << e.what() << "\n";
    return 3;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    const std::filesystem::path dir(cfg.output_path);
    std::filesystem::create_directories(dir);
    const std::string stem = cfg.command;
    const std::string manifest_name = stem + ".manifest";
    const std::string csv = to_csv(result.table, cfg.command, manifest_name);
    write_file(dir / (stem + ".csv"), csv);
    std::string plot_hash;
    if (result.plot) {
      const std::string plot = plot_data(result.table, *result.plot);
      write_file(dir / (stem + ".plot.dat"), plot);
      plot_hash = content_hash(plot);
    }
    std::ostringstream m;
    m << "command=" << cfg.command << "\nversion=" << kVersion << "\nseed=" << cfg.seed
      << "\nworkers=" << cfg.workers << "\ndata_file=" << stem << ".csv\ndata_hash=" << content_hash(csv) << "\n";
    if (result.plot) m << "plot_file=" << stem << ".plot.dat\nplot_hash=" << plot_hash << "\n";
    m << "wall_time_s=" << format_number(wall) << "\n";
    for (const auto& [k, v] : cfg.echo) m << "config." << k << "=" << v << "\n";
    write_file(dir / manifest_name, m.str());
    log << "wrote " << (dir / (stem + ".csv")).string() << "\n";
  } catch (const std::exception& e) {
    log << "output error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

int run_from_file(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
                  std::optional<std::string> out_dir, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + config_path);
    std::ostringstream text;
    text << f.rdbuf();
    cfg = make_config(command, parse_config_text(text.str()));
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.output_path = *out_dir;
  return run(cfg, log);
}

}  // namespace dirac_loc
