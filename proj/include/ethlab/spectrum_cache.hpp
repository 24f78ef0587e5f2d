#pragma once

#include "ethlab/model.hpp"
#include "ethlab/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace ethlab {

/// On-disk store of block spectra and reduced-element tables.
///
/// One file per fingerprint, named `<kind>-<16 hex digits>.bin`:
///
///   offset 0            8 bytes   magic "ETHLAB\0\1"
///   offset 8            8 bytes   header length H, unsigned little-endian
///   offset 16           H bytes   JSON header (format_version, kind, key,
///                                 num_qubits, spins, dims, array table)
///   offset 16 + H       payload   little-endian float64 arrays; the header's
///                                 "arrays" entries give each array's byte
///                                 offset relative to the payload start
///
/// Spectrum payload: eigenvalues (d), then eigenvectors (d*d, column-major).
/// Table payload: elements (rows*cols, column-major).
///
/// Writes go to a unique temporary file in the same directory followed by an
/// atomic rename, so readers never observe a partial file and concurrent
/// writers of identical content leave one valid file. Any mismatch on load
/// (missing file, wrong key, wrong kind, truncated payload) is a cache miss.
class SpectrumCache {
public:
  static constexpr int kFormatVersion = 1;

  explicit SpectrumCache(std::filesystem::path directory);

  const std::filesystem::path& directory() const { return directory_; }

  static std::uint64_t spectrum_key(const ModelSpec& model, HalfInt s);
  static std::uint64_t table_key(const ModelSpec& model, const TensorOpSpec& op, HalfInt s_row, HalfInt s_col);

  std::filesystem::path spectrum_path(std::uint64_t key) const;
  std::filesystem::path table_path(std::uint64_t key) const;

  void store(std::uint64_t key, const BlockSpectrum& spectrum) const;
  std::optional<BlockSpectrum> load_spectrum(std::uint64_t key) const;

  void store(std::uint64_t key, const ReducedElementTable& table) const;
  std::optional<ReducedElementTable> load_table(std::uint64_t key) const;

private:
  std::filesystem::path directory_;
};

std::string hex64(std::uint64_t value);

}  // namespace ethlab
