#include "ethlab/pipeline.hpp"

#include "ethlab/consistency.hpp"
#include "ethlab/coupled_basis.hpp"
#include "ethlab/spectrum_cache.hpp"
#include "ethlab/spin_algebra.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace ethlab {

using nlohmann::json;

namespace {

constexpr const char* kDosConvention =
    "D(E,s) = levels of spin-s block with E/N in [c - w/2, c + w/2) / (w * N); one level per multiplet (single m)";

HalfInt half_int_from(const json& j) {
  if (j.is_string()) return HalfInt::parse(j.get<std::string>());
  if (j.is_number_integer()) return HalfInt(j.get<int>());
  if (j.is_number()) {
    const double twice = 2.0 * j.get<double>();
    if (twice != std::round(twice)) throw ConfigError("spin value " + j.dump() + " is not a multiple of 1/2");
    return HalfInt::from_twice(static_cast<int>(twice));
  }
  throw ConfigError("expected a spin value, got " + j.dump());
}

json half_ints_to_json(const std::vector<HalfInt>& v) {
  json out = json::array();
  for (HalfInt h : v) out.push_back(h.str());
  return out;
}

std::vector<HalfInt> half_ints_from(const json& j) {
  std::vector<HalfInt> out;
  for (const auto& e : j) out.push_back(half_int_from(e));
  return out;
}

std::string hstr(HalfInt h) { return h.str(); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

// --- configuration -----------------------------------------------------------------

PipelineConfig PipelineConfig::paper_defaults() {
  PipelineConfig c;
  c.model.num_qubits = 18;
  return c;
}

void PipelineConfig::apply_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "model",       "operators",      "spins",        "window_width",   "encompassing_width", "window_step",
      "dos_step",    "gap_bins",       "hist_bins",    "min_diag",       "min_offdiag",        "min_cell",
      "fscan_omegas", "fscan_energies", "fscan_nus",   "validate_tolerances", "validate_max_n", "seed",
      "memory_limit_gb", "cache_dir",  "out_dir",      "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("model")) {
      json merged = model.to_json();
      for (const auto& [key, value] : j["model"].items()) merged[key] = value;
      if (j["model"].contains("boundary") && j["model"]["boundary"] == "periodic" && !j["model"].contains("offset")) {
        merged["offset"] = 0.0;
      }
      model = ModelSpec::from_json(merged);
    }
    if (j.contains("operators")) operators = j["operators"].get<std::vector<json>>();
    if (j.contains("spins")) spins = half_ints_from(j["spins"]);
    window_width = j.value("window_width", window_width);
    encompassing_width = j.value("encompassing_width", encompassing_width);
    window_step = j.value("window_step", window_step);
    dos_step = j.value("dos_step", dos_step);
    gap_bins = j.value("gap_bins", gap_bins);
    hist_bins = j.value("hist_bins", hist_bins);
    min_diag = j.value("min_diag", min_diag);
    min_offdiag = j.value("min_offdiag", min_offdiag);
    min_cell = j.value("min_cell", min_cell);
    if (j.contains("fscan_omegas")) fscan_omegas = j["fscan_omegas"].get<std::vector<double>>();
    if (j.contains("fscan_energies")) fscan_energies = j["fscan_energies"].get<std::vector<double>>();
    if (j.contains("fscan_nus")) fscan_nus = half_ints_from(j["fscan_nus"]);
    if (j.contains("validate_tolerances")) {
      for (const auto& [key, value] : j["validate_tolerances"].items()) {
        if (!validate_tolerances.count(key)) throw ConfigError("unknown validate tolerance '" + key + "'");
        validate_tolerances[key] = value.get<double>();
      }
    }
    validate_max_n = j.value("validate_max_n", validate_max_n);
    seed = j.value("seed", seed);
    if (j.contains("memory_limit_gb")) memory_limit_gb = j["memory_limit_gb"].get<double>();
    if (j.contains("cache_dir")) cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("out_dir")) out_dir = j["out_dir"].get<std::string>();
    threads = j.value("threads", threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json PipelineConfig::to_json() const {
  json j;
  j["model"] = model.to_json();
  j["operators"] = operators;
  j["spins"] = half_ints_to_json(spins);
  j["window_width"] = window_width;
  j["encompassing_width"] = encompassing_width;
  j["window_step"] = window_step;
  j["dos_step"] = dos_step;
  j["gap_bins"] = gap_bins;
  j["hist_bins"] = hist_bins;
  j["min_diag"] = min_diag;
  j["min_offdiag"] = min_offdiag;
  j["min_cell"] = min_cell;
  j["fscan_omegas"] = fscan_omegas;
  j["fscan_energies"] = fscan_energies;
  j["fscan_nus"] = half_ints_to_json(fscan_nus);
  j["validate_tolerances"] = validate_tolerances;
  j["validate_max_n"] = validate_max_n;
  j["seed"] = seed;
  return j;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(to_json().dump()); }

std::vector<TensorOpSpec> PipelineConfig::tensor_operators() const {
  std::vector<TensorOpSpec> out;
  for (const auto& j : operators) {
    try {
      if (j.is_string()) out.push_back(builtin_tensor_op(j.get<std::string>(), model.num_qubits));
      else out.push_back(TensorOpSpec::from_json(j, model.num_qubits));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("operator ") + j.dump() + ": " + e.what());
    }
  }
  return out;
}

void PipelineConfig::validate() const {
  if (model.num_qubits < 2) {
    throw ConfigError("N = " + std::to_string(model.num_qubits) + " refused: the chain needs N >= 2");
  }
  if (model.num_qubits > 26) throw ConfigError("N = " + std::to_string(model.num_qubits) + " exceeds the supported 26");
  if (model.boundary == Boundary::Periodic && model.num_qubits < 3) throw ConfigError("periodic chains need N >= 3");
  if (!(window_width > 0.0) || !(encompassing_width >= window_width) || !(window_step > 0.0) || !(dos_step > 0.0)) {
    throw ConfigError("window widths and steps must be positive, encompassing_width >= window_width");
  }
  if (gap_bins == 0) throw ConfigError("gap_bins must be positive");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (operators.empty()) throw ConfigError("operators list is empty");
  tensor_operators();
  try {
    build_hamiltonian(model);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

// --- memory ---------------------------------------------------------------------------

MemoryEstimate estimate_memory(int num_qubits) {
  MemoryEstimate est;
  const auto layout = sector_layout(num_qubits);
  const double base = binomial(num_qubits, num_qubits / 2);
  for (const auto& [s, d64] : layout.multiplicity) {
    const double d = static_cast<double>(d64);
    const double sector = binomial(num_qubits, static_cast<int>((HalfInt::half(num_qubits) - s).as_int()));
    est.spectra_bytes += 8.0 * (d * d + d);
    // Block matrix, eigensolver copy and workspace, plus the basis and H*basis.
    est.working_bytes = std::max(est.working_bytes, 8.0 * (3.0 * d * d + 2.0 * sector * d));
    est.states_bytes += 8.0 * base * d * 2.0;
  }
  return est;
}

double physical_memory_bytes() {
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long size = sysconf(_SC_PAGE_SIZE);
  return pages > 0 && size > 0 ? static_cast<double>(pages) * static_cast<double>(size) : 0.0;
}

// --- schema ---------------------------------------------------------------------------

namespace {

const std::map<std::string, std::vector<std::string>>& csv_columns() {
  static const std::map<std::string, std::vector<std::string>> columns{
      {"spectrum_summary", {"s", "dim", "degeneracy", "e_min", "e_max"}},
      {"spectrum_levels", {"s", "index", "energy", "energy_density"}},
      {"dos", {"s", "lo", "hi", "center", "count", "density", "entropy"}},
      {"gapstats",
       {"s", "bin_lo", "bin_hi", "count", "density", "p_goe", "two_p_goe", "r_squared", "r_squared_direct_2p",
        "r_squared_direct_p", "mean_r", "ratios", "dropped_gaps"}},
      {"bands", {"operator", "s", "energy_density", "value"}},
      {"hist",
       {"operator", "kind", "s", "window_center", "window_width", "bin_lo", "bin_hi", "count", "density",
        "gaussian_pdf"}},
      {"hist_summary",
       {"operator", "kind", "s", "window_center", "window_width", "count", "mean", "variance", "ks_statistic",
        "ks_critical", "lilliefors_critical", "ks_pass", "r_squared", "low_stats"}},
      {"fscan",
       {"operator", "s_row", "s_col", "energy_density", "spin", "nu", "omega", "count", "variance", "dos",
        "magnitude", "reliable"}},
      {"varratio", {"operator", "s", "center", "mean", "std", "stderr", "windows", "skipped"}},
  };
  return columns;
}

}  // namespace

json output_schema() {
  json j;
  j["csv"] = csv_columns();
  j["csv_preamble"] = "lines starting with '#' carry config_hash, subcommand and conventions";
  j["sidecar"] = "<file>.csv.json: config_hash, config, conventions, columns, notes, details";
  j["validate"] = "validate.json: reports[{identity, instance, metric, threshold, pass, ...}], pass, worst";
  j["config_keys"] = PipelineConfig{}.to_json();
  return j;
}

// --- pipeline -------------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config, std::ostream& log) : config_(std::move(config)), log_(log) {
  config_.validate();
}

const std::vector<std::string>& Pipeline::subcommands() {
  static const std::vector<std::string> names{"spectrum", "gapstats", "bands",    "hist", "fscan",
                                              "varratio", "dos",      "validate", "all"};
  return names;
}

int Pipeline::run(const std::string& subcommand) {
  if (subcommand == "spectrum") return spectrum();
  if (subcommand == "dos") return dos();
  if (subcommand == "gapstats") return gapstats();
  if (subcommand == "bands") return bands();
  if (subcommand == "hist") return hist();
  if (subcommand == "fscan") return fscan();
  if (subcommand == "varratio") return varratio();
  if (subcommand == "validate") return validate();
  if (subcommand == "all") return all();
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

const Eigensystem& Pipeline::system(bool needs_states) {
  const int n = config_.model.num_qubits;
  const auto est = estimate_memory(n);
  const double limit = config_.memory_limit_gb ? *config_.memory_limit_gb * 1e9 : 0.8 * physical_memory_bytes();
  const double need = est.total(needs_states);
  if (limit > 0.0 && need > limit) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "N = %d refused: estimated %.2f GB (spectra %.2f, workspace %.2f, eigenstates %.2f) exceeds the "
                  "%.2f GB limit",
                  n, need / 1e9, est.spectra_bytes / 1e9, est.working_bytes / 1e9,
                  needs_states ? est.states_bytes / 1e9 : 0.0, limit / 1e9);
    throw ConfigError(buf);
  }
  if (!system_) {
    Eigensystem::Options options;
    options.threads = config_.threads;
    options.cache_dir = config_.cache_dir;
    system_ = Eigensystem::compute(config_.model, options);
    diagonalizations_ += system_->diagonalizations();
    log_ << "eth-lab: N=" << n << ", " << system_->spins().size() << " blocks, " << system_->diagonalizations()
         << " diagonalizations\n";
  }
  return *system_;
}

std::vector<HalfInt> Pipeline::analysis_spins() {
  const auto& sys = system(true);
  if (config_.spins.empty()) return sys.spins();
  for (HalfInt s : config_.spins) {
    if (!sys.has(s)) throw ConfigError("spin " + s.str() + " has no multiplets at N = " + std::to_string(sys.num_qubits()));
  }
  return config_.spins;
}

ReducedElementTable Pipeline::table(const TensorOpSpec& op, HalfInt s_row, HalfInt s_col) {
  const auto& sys = system(true);
  if (!config_.cache_dir) return reduced_elements(op, sys, s_row, s_col);
  const SpectrumCache cache(*config_.cache_dir);
  const auto key = SpectrumCache::table_key(config_.model, op, s_row, s_col);
  if (auto hit = cache.load_table(key)) return *hit;
  auto t = reduced_elements(op, sys, s_row, s_col);
  cache.store(key, t);
  return t;
}

void Pipeline::write_csv(const std::string& name, const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows, json sidecar) {
  std::filesystem::create_directories(config_.out_dir);
  const auto path = config_.out_dir / (name + ".csv");
  const std::string hash = hex64(config_.hash());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# eth-lab config_hash=" << hash << " file=" << name << "\n";
  out << "# dos_convention: " << kDosConvention << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  sidecar["config_hash"] = hash;
  sidecar["config"] = config_.to_json();
  sidecar["columns"] = columns;
  sidecar["conventions"]["dos"] = kDosConvention;
  if (!sidecar.contains("notes")) sidecar["notes"] = json::array();
  std::ofstream side(config_.out_dir / (name + ".csv.json"), std::ios::binary | std::ios::trunc);
  side << sidecar.dump(2) << "\n";
  log_ << "eth-lab: wrote " << path.string() << " (" << rows.size() << " rows)\n";
}

int Pipeline::spectrum() {
  const auto& sys = system(false);
  std::vector<std::vector<std::string>> summary, levels;
  for (HalfInt s : sys.spins()) {
    const auto& b = sys.spectrum(s);
    summary.push_back({hstr(s), std::to_string(b.dim()), std::to_string(s.twice() + 1),
                       format_number(b.eigenvalues.minCoeff()), format_number(b.eigenvalues.maxCoeff())});
    for (Eigen::Index i = 0; i < b.dim(); ++i) {
      levels.push_back({hstr(s), std::to_string(i), format_number(b.eigenvalues(i)),
                        format_number(b.eigenvalues(i) / sys.num_qubits())});
    }
  }
  const auto& cols = csv_columns();
  write_csv("spectrum_summary", cols.at("spectrum_summary"), summary,
            {{"details", {{"diagonalization_sector", "m = s"}, {"eigenvector_sign", "largest |coefficient| positive"}}}});
  write_csv("spectrum_levels", cols.at("spectrum_levels"), levels, json::object());
  return 0;
}

int Pipeline::dos() {
  const auto& sys = system(false);
  const DosTable table = DosTable::from(sys);
  const double w = config_.window_width;
  std::vector<std::vector<std::string>> rows;
  json peaks = json::object();
  for (HalfInt s : sys.spins()) {
    const auto& v = table.levels(s);
    std::vector<double> edges;
    for (double e = std::floor(v.front() / w) * w; ; e += w) {
      edges.push_back(e);
      if (e > v.back()) break;
    }
    const auto counts = table.partition_counts(s, edges);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double c = 0.5 * (edges[i] + edges[i + 1]);
      const double density = static_cast<double>(counts[i]) / (w * sys.num_qubits());
      rows.push_back({hstr(s), format_number(edges[i]), format_number(edges[i + 1]), format_number(c),
                      std::to_string(counts[i]), format_number(density),
                      counts[i] ? format_number(std::log(density)) : "-inf"});
    }
    peaks[s.str()] = table.peak(s, config_.encompassing_width, config_.dos_step);
  }
  write_csv("dos", csv_columns().at("dos"), rows,
            {{"details", {{"bin_width", w}, {"peaks", peaks}, {"peak_window", config_.encompassing_width}}}});
  return 0;
}

int Pipeline::gapstats() {
  const auto spins = analysis_spins();
  const auto& sys = system(true);
  std::vector<std::vector<std::string>> rows;
  json notes = json::array();
  for (HalfInt s : spins) {
    const auto& e = sys.spectrum(s).eigenvalues;
    GapRatioResult g;
    try {
      g = gap_ratios(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), config_.gap_bins);
    } catch (const std::invalid_argument& err) {
      notes.push_back("s=" + s.str() + ": " + err.what());
      continue;
    }
    for (std::size_t i = 0; i < g.histogram.bins(); ++i) {
      const double p = p_goe(g.histogram.center(i));
      rows.push_back({hstr(s), format_number(g.histogram.edges[i]), format_number(g.histogram.edges[i + 1]),
                      std::to_string(g.histogram.counts[i]), format_number(g.histogram.densities[i]),
                      format_number(p), format_number(2.0 * p), format_number(g.r_squared),
                      format_number(g.r_squared_direct_2p), format_number(g.r_squared_direct_p),
                      format_number(g.mean), std::to_string(g.r.size()), std::to_string(g.dropped_gaps)});
    }
  }
  write_csv("gapstats", csv_columns().at("gapstats"), rows,
            {{"notes", notes},
             {"details",
              {{"levels", "one per multiplet (fixed m)"},
               {"degeneracy_threshold", "gaps <= 1e-12 x bandwidth dropped"},
               {"r_squared", "least squares with intercept of density on 2 P_GOE at bin centers"}}}});
  return 0;
}

int Pipeline::bands() {
  const auto spins = analysis_spins();
  const auto& sys = system(true);
  std::vector<std::vector<std::string>> rows;
  json notes = json::array(), choices = json::object();
  for (const auto& op : config_.tensor_operators()) {
    for (HalfInt s : spins) {
      const auto t = table(op, s, s);
      if (!t.present) {
        notes.push_back(op.name + " s=" + s.str() + ": diagonal table absent (triangle rule with k=" + op.rank.str() + ")");
        continue;
      }
      choices[op.name][s.str()] = {{"m_row", t.choice.m_row.str()}, {"m_col", t.choice.m_col.str()}};
      for (const auto& p : band_data(t, sys.spectrum(s))) {
        rows.push_back({op.name, hstr(s), format_number(p.energy_density), format_number(p.value)});
      }
    }
  }
  write_csv("bands", csv_columns().at("bands"), rows, {{"notes", notes}, {"details", {{"m_choices", choices}}}});
  return 0;
}

int Pipeline::hist() {
  const auto spins = analysis_spins();
  const auto& sys = system(true);
  const DosTable dos_table = DosTable::from(sys);
  std::vector<std::vector<std::string>> rows, summary;
  json notes = json::array();
  auto emit = [&](const std::string& op, const std::string& kind, HalfInt s, const EnergyWindow& w,
                  const GaussianFit& fit, bool low) {
    const double sd = std::sqrt(fit.variance);
    for (std::size_t i = 0; i < fit.histogram.bins(); ++i) {
      const double z = sd > 0 ? (fit.histogram.center(i) - fit.mean) / sd : 0.0;
      const double pdf = sd > 0 ? std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI)) : 0.0;
      rows.push_back({op, kind, hstr(s), format_number(w.center), format_number(w.width),
                      format_number(fit.histogram.edges[i]), format_number(fit.histogram.edges[i + 1]),
                      std::to_string(fit.histogram.counts[i]), format_number(fit.histogram.densities[i]),
                      format_number(pdf)});
    }
    summary.push_back({op, kind, hstr(s), format_number(w.center), format_number(w.width), std::to_string(fit.count),
                       format_number(fit.mean), format_number(fit.variance), format_number(fit.ks_statistic),
                       format_number(fit.ks_critical), format_number(fit.lilliefors_critical),
                       fit.ks_pass() ? "1" : "0", format_number(fit.r_squared), low ? "1" : "0"});
  };
  for (const auto& op : config_.tensor_operators()) {
    for (HalfInt s : spins) {
      const auto t = table(op, s, s);
      if (!t.present) {
        notes.push_back(op.name + " s=" + s.str() + ": table absent (triangle rule)");
        continue;
      }
      const EnergyWindow w{dos_table.peak(s, config_.encompassing_width, config_.dos_step), config_.window_width};
      const auto& spec = sys.spectrum(s);
      try {
        const auto d = diag_residual_stats(t, spec, w, config_.min_diag, config_.hist_bins);
        emit(op.name, "diag", s, w, d.fit, d.low_stats);
      } catch (const std::invalid_argument& e) {
        notes.push_back(op.name + " s=" + s.str() + " diag: " + e.what());
      }
      try {
        const auto o = offdiag_window_stats(t, spec, spec, w, w, config_.min_offdiag, config_.hist_bins);
        emit(op.name, "offdiag", s, w, o.fit, o.low_stats);
      } catch (const std::invalid_argument& e) {
        notes.push_back(op.name + " s=" + s.str() + " offdiag: " + e.what());
      }
    }
  }
  const json details{{"window", "width window_width centered at the DOS peak (width encompassing_width search)"},
                     {"binning", config_.hist_bins == 0 ? "Sturges" : std::to_string(config_.hist_bins) + " bins"}};
  write_csv("hist", csv_columns().at("hist"), rows, {{"notes", notes}, {"details", details}});
  write_csv("hist_summary", csv_columns().at("hist_summary"), summary, {{"notes", notes}, {"details", details}});
  return 0;
}

int Pipeline::fscan() {
  const auto spins = analysis_spins();
  const auto& sys = system(true);
  const DosTable dos_table = DosTable::from(sys);
  FScanGrid grid;
  grid.width = config_.window_width;
  grid.min_count = config_.min_cell;
  grid.omegas = config_.fscan_omegas;
  if (grid.omegas.empty()) {
    for (int i = -24; i <= 24; ++i) grid.omegas.push_back(0.5 * i);
  }
  std::vector<std::vector<std::string>> rows;
  json notes = json::array();
  for (const auto& op : config_.tensor_operators()) {
    for (HalfInt s_row : spins) {
      for (HalfInt nu : config_.fscan_nus) {
        const HalfInt s_col = s_row - nu;
        if (!sys.has(s_col)) {
          notes.push_back(op.name + " s_row=" + s_row.str() + " nu=" + nu.str() + ": no spin-" + s_col.str() + " block");
          continue;
        }
        const auto t = table(op, s_row, s_col);
        if (!t.present) {
          notes.push_back(op.name + " (" + s_row.str() + ", " + s_col.str() + "): absent by the triangle rule");
          continue;
        }
        grid.energy_densities = config_.fscan_energies;
        if (grid.energy_densities.empty()) {
          grid.energy_densities = {dos_table.peak(s_row, config_.encompassing_width, config_.dos_step)};
        }
        const auto result = f_magnitude(t, sys.spectrum(s_row), sys.spectrum(s_col), dos_table, grid);
        for (const auto& c : result.cells) {
          rows.push_back({op.name, hstr(s_row), hstr(s_col), format_number(c.energy_density), format_number(c.spin),
                          format_number(c.nu), format_number(c.omega), std::to_string(c.count),
                          format_number(c.variance), format_number(c.dos), format_number(c.magnitude),
                          c.reliable ? "1" : "0"});
        }
      }
    }
  }
  write_csv("fscan", csv_columns().at("fscan"), rows,
            {{"notes", notes},
             {"details",
              {{"cell", "row window at (E + omega/2)/N, column window at (E - omega/2)/N, width window_width"},
               {"magnitude", "sqrt(sample variance x D); D geometric mean of both blocks when nu != 0"},
               {"min_count", config_.min_cell}}}});
  return 0;
}

int Pipeline::varratio() {
  const auto spins = analysis_spins();
  const auto& sys = system(true);
  const DosTable dos_table = DosTable::from(sys);
  std::vector<std::vector<std::string>> rows;
  json notes = json::array(), windows = json::object();
  for (const auto& op : config_.tensor_operators()) {
    for (HalfInt s : spins) {
      const auto t = table(op, s, s);
      if (!t.present) {
        notes.push_back(op.name + " s=" + s.str() + ": absent by the triangle rule");
        continue;
      }
      VarianceSweep sweep;
      sweep.center = dos_table.peak(s, config_.encompassing_width, config_.dos_step);
      sweep.encompassing_width = config_.encompassing_width;
      sweep.window_width = config_.window_width;
      sweep.step = config_.window_step;
      sweep.min_diag = config_.min_diag;
      sweep.min_offdiag = config_.min_offdiag;
      try {
        const auto r = variance_ratio(t, sys.spectrum(s), sweep);
        rows.push_back({op.name, hstr(s), format_number(sweep.center), format_number(r.mean), format_number(r.std),
                        format_number(r.standard_error), std::to_string(r.ratios.size()), std::to_string(r.skipped)});
        windows[op.name][s.str()] = {{"centers", r.centers}, {"ratios", r.ratios}};
      } catch (const std::runtime_error& e) {
        notes.push_back(op.name + " s=" + s.str() + ": " + e.what());
      }
    }
  }
  write_csv("varratio", csv_columns().at("varratio"), rows,
            {{"notes", notes},
             {"details",
              {{"std", "across accepted windows"}, {"stderr", "std / sqrt(windows)"}, {"windows", windows}}}});
  return 0;
}

int Pipeline::validate() {
  const int requested = config_.model.num_qubits;
  int n_max = std::min(requested, config_.validate_max_n);
  if (requested > config_.validate_max_n) {
    log_ << "eth-lab: warning: validate clamps N = " << requested << " to " << config_.validate_max_n << "\n";
  }
  std::set<int> sizes{n_max};
  for (int n : {4, 6, 8}) {
    if (n <= n_max) sizes.insert(n);
  }
  const auto& tol = config_.validate_tolerances;
  json reports = json::array();
  bool pass = true;
  double worst_score = -1.0;
  json worst;
  auto add = [&](const IdentityReport& r, const std::string& tolerance_key, double metric) {
    json j = r.to_json();
    const double threshold = tol.at(tolerance_key);
    j["metric"] = metric;
    j["threshold"] = threshold;
    j["pass"] = metric <= threshold;
    if (!(metric <= threshold)) pass = false;
    const double score = threshold > 0 ? metric / threshold : metric;
    if (!(score <= worst_score)) {
      worst_score = std::isnan(score) ? std::numeric_limits<double>::infinity() : score;
      worst = j;
    }
    reports.push_back(j);
  };

  for (int n : sizes) {
    ModelSpec model = config_.model;
    model.num_qubits = n;
    if (n != requested) {
      model.nn_couplings.clear();
      model.nnn_couplings.clear();
    }
    if (model.boundary == Boundary::Periodic && n < 3) continue;
    Eigensystem::Options options;
    options.threads = config_.threads;
    const auto sys = Eigensystem::compute(model, options);

    const auto exact = check_exact_spectrum(sys);
    add(exact, "exact_spectrum", exact.max_abs_deviation);

    IdentityReport m_indep;
    m_indep.identity = "m_independence";
    m_indep.instance = "N=" + std::to_string(n);
    for (HalfInt s : sys.spins()) {
      const Eigen::MatrixXd ref = block_matrix(sys.hamiltonian(), s, s);
      for (HalfInt m = -s; m < s; m += 1) {
        const double dev = (block_matrix(sys.hamiltonian(), s, m) - ref).cwiseAbs().maxCoeff();
        m_indep.max_abs_deviation = std::max(m_indep.max_abs_deviation, dev);
        ++m_indep.comparisons;
      }
    }
    add(m_indep, "m_independence", m_indep.max_abs_deviation);

    const auto t1 = builtin_tensor_family("T1", n);
    const auto t2 = builtin_tensor_family("T2", n);
    for (const auto& fam : {t1, t2}) {
      const auto r = check_wigner_eckart(fam, sys);
      add(r, "wigner_eckart", r.max_rel_deviation);
    }
    const int c = anchor_site(n);
    const auto a = site_vector(n, c);
    const auto b = site_vector(n, c + 1 <= n ? c + 1 : 1);
    struct Instance {
      const SphericalTensor* a;
      const SphericalTensor* b;
      int k, q;
    };
    const std::vector<Instance> instances{{&a, &a, 2, 0}, {&a, &b, 2, 2}, {&a, &b, 1, 0},
                                          {&a, &b, 0, 0}, {&t2, &a, 1, -1}, {&t2, &b, 3, 1}};
    for (const auto& inst : instances) {
      const auto r = check_composition_identity(*inst.a, *inst.b, HalfInt(inst.k), HalfInt(inst.q), sys);
      add(r, "composition", r.max_abs_deviation);
    }
  }

  const std::vector<std::array<int, 6>> upsilon_cases{{2, 2, 2, 2, 1, 1}, {1, 1, 1, 2, 1, 1}, {2, 1, 2, 1, 1, 1},
                                                      {3, 2, 2, 2, 1, 1}, {2, 2, 1, 2, 1, 1}};
  for (const auto& u : upsilon_cases) {
    const auto r = check_upsilon_independence(HalfInt(u[0]), HalfInt(u[1]), HalfInt(u[2]), HalfInt(u[3]),
                                              HalfInt(u[4]), HalfInt(u[5]));
    add(r, "upsilon", r.max_abs_deviation);
  }

  const std::vector<std::array<int, 4>> scans{{1, 1, 1, 2}, {1, 0, 1, 1}, {1, 1, 0, 1}, {2, 1, 1, 2}};
  for (const auto& sc : scans) {
    const auto scan =
        cg_asymptotic_scan(HalfInt(sc[0]), HalfInt(sc[1]), HalfInt(sc[2]), HalfInt(sc[3]), default_scan_grid());
    const double metric = scan.report.slope ? std::abs(*scan.report.slope + 1.0) : std::numeric_limits<double>::infinity();
    add(scan.report, "cg_slope", metric);
  }

  json result{{"config_hash", hex64(config_.hash())}, {"sizes", sizes}, {"pass", pass}, {"reports", reports}};
  if (!pass) result["worst"] = worst;
  std::filesystem::create_directories(config_.out_dir);
  std::ofstream(config_.out_dir / "validate.json", std::ios::binary | std::ios::trunc) << result.dump(2) << "\n";
  if (!pass) {
    log_ << "eth-lab: validate FAILED; worst offender: " << worst["identity"].get<std::string>() << " ("
         << worst["instance"].get<std::string>() << ") metric " << worst["metric"].dump() << " > threshold "
         << worst["threshold"].dump() << "\n";
    return 1;
  }
  log_ << "eth-lab: validate passed (" << reports.size() << " checks)\n";
  return 0;
}

int Pipeline::all() {
  for (auto step : {&Pipeline::spectrum, &Pipeline::dos, &Pipeline::gapstats, &Pipeline::bands, &Pipeline::hist,
                    &Pipeline::fscan, &Pipeline::varratio}) {
    if (const int code = (this->*step)(); code != 0) return code;
  }
  return validate();
}

}  // namespace ethlab
