#pragma once

#include "ethlab/eth_stats.hpp"
#include "ethlab/model.hpp"
#include "ethlab/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ethlab {

/// Raised for malformed or unsatisfiable configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  ModelSpec model;
  /// Builtin names ("T10", "T11", "T20", "T22") or TensorOpSpec objects.
  std::vector<nlohmann::json> operators{"T10"};
  /// Spins analysed by the statistics subcommands; empty means every block.
  std::vector<HalfInt> spins;

  double window_width = 0.1;        // energy density
  double encompassing_width = 0.5;  // energy density
  double window_step = 0.1;         // varratio sweep
  double dos_step = 0.01;           // peak search grid
  std::size_t gap_bins = 25;
  std::size_t hist_bins = 0;  // 0: Sturges
  std::size_t min_diag = 30;
  std::size_t min_offdiag = 100;
  std::size_t min_cell = 30;
  std::vector<double> fscan_omegas;     // empty: -12..12 step 0.5
  std::vector<double> fscan_energies;   // empty: DOS peak of the row block
  std::vector<HalfInt> fscan_nus{HalfInt(0), HalfInt(1)};

  /// Thresholds of the validate subcommand, keyed by identity name.
  std::map<std::string, double> validate_tolerances{{"exact_spectrum", 1e-9}, {"m_independence", 1e-10},
                                                    {"wigner_eckart", 1e-8},  {"composition", 1e-8},
                                                    {"upsilon", 1e-10},       {"cg_slope", 0.2}};
  int validate_max_n = 8;

  std::uint64_t seed = 20240101;
  std::optional<double> memory_limit_gb;  // default: 80% of physical memory

  // Execution settings; not part of the content hash.
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path out_dir = "eth-lab-out";
  int threads = 1;

  static PipelineConfig defaults() { return {}; }
  /// Chain of 18 with the default coupling profile and window widths.
  static PipelineConfig paper_defaults();

  /// Overlays the keys present in `j`; unknown keys are a ConfigError.
  void apply_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // content fields only
  std::uint64_t hash() const;
  std::vector<TensorOpSpec> tensor_operators() const;
  void validate() const;
};

struct MemoryEstimate {
  double spectra_bytes = 0.0;  // all block eigenvectors
  double working_bytes = 0.0;  // largest block's dense workspace + sector basis
  double states_bytes = 0.0;   // eigenstates of every block in the m = 0 (or 1/2) sector
  double total(bool with_states) const { return spectra_bytes + working_bytes + (with_states ? states_bytes : 0.0); }
};

MemoryEstimate estimate_memory(int num_qubits);
double physical_memory_bytes();

/// CSV column sets and sidecar conventions of every subcommand.
nlohmann::json output_schema();

class Pipeline {
public:
  Pipeline(PipelineConfig config, std::ostream& log);

  /// Runs one subcommand; returns the process exit code. Throws ConfigError
  /// for refusals (N < 2, memory estimate over the limit).
  int run(const std::string& subcommand);

  static const std::vector<std::string>& subcommands();

  int spectrum();
  int dos();
  int gapstats();
  int bands();
  int hist();
  int fscan();
  int varratio();
  int validate();
  int all();

  const PipelineConfig& config() const { return config_; }
  /// Blocks diagonalized (not loaded from cache) by this pipeline so far.
  int diagonalizations() const { return diagonalizations_; }

private:
  const Eigensystem& system(bool needs_states);
  std::vector<HalfInt> analysis_spins();
  ReducedElementTable table(const TensorOpSpec& op, HalfInt s_row, HalfInt s_col);
  void write_csv(const std::string& name, const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows, nlohmann::json sidecar);

  PipelineConfig config_;
  std::ostream& log_;
  std::optional<Eigensystem> system_;
  int diagonalizations_ = 0;
};

/// Number formatting shared by every CSV: shortest round-trip form.
std::string format_number(double value);

}  // namespace ethlab
