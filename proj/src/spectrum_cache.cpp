#include "ethlab/spectrum_cache.hpp"

#include <json.hpp>

#include <array>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace ethlab {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'E', 'T', 'H', 'L', 'A', 'B', '\0', '\1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_doubles(std::string& out, const double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
}

void get_doubles(const char* p, double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) data[i] = std::bit_cast<double>(get_u64(p + 8 * i));
}

std::string unique_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  std::ostringstream s;
  s << ".tmp." << std::hex << rd() << '.' << counter++ << '.' << std::hash<std::thread::id>{}(std::this_thread::get_id());
  return s.str();
}

void write_atomically(const std::filesystem::path& target, const json& header, const std::string& payload) {
  std::filesystem::create_directories(target.parent_path());
  const std::string text = header.dump();
  std::string bytes(kMagic.begin(), kMagic.end());
  put_u64(bytes, text.size());
  bytes += text;
  bytes += payload;
  const auto tmp = std::filesystem::path(target.string() + unique_suffix());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cache: cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cache: short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

struct RawFile {
  json header;
  std::string payload;
};

std::optional<RawFile> read_file(const std::filesystem::path& path, const std::string& kind, std::uint64_t key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) return std::nullopt;
  const std::uint64_t h = get_u64(bytes.data() + 8);
  if (h > bytes.size() - 16) return std::nullopt;
  RawFile raw;
  raw.header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(h), nullptr, false);
  if (raw.header.is_discarded() || !raw.header.is_object()) return std::nullopt;
  if (raw.header.value("format_version", -1) != SpectrumCache::kFormatVersion) return std::nullopt;
  if (raw.header.value("kind", std::string()) != kind) return std::nullopt;
  if (raw.header.value("key", std::string()) != hex64(key)) return std::nullopt;
  raw.payload = bytes.substr(16 + h);
  return raw;
}

// Checks an array-table entry and returns a pointer to its data.
const char* array_at(const RawFile& raw, const std::string& name, Eigen::Index count) {
  if (!raw.header.contains("arrays") || !raw.header["arrays"].contains(name)) return nullptr;
  const auto& entry = raw.header["arrays"][name];
  const auto offset = entry.value("offset", std::uint64_t{0});
  const auto length = entry.value("length", std::uint64_t{0});
  if (length != static_cast<std::uint64_t>(count)) return nullptr;
  if (offset + 8 * length > raw.payload.size()) return nullptr;
  return raw.payload.data() + offset;
}

}  // namespace

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) s[static_cast<std::size_t>(i)] = digits[value & 0xf];
  return s;
}

SpectrumCache::SpectrumCache(std::filesystem::path directory) : directory_(std::move(directory)) {}

std::uint64_t SpectrumCache::spectrum_key(const ModelSpec& model, HalfInt s) {
  json j{{"format_version", kFormatVersion}, {"kind", "spectrum"}, {"model", model.to_json()}, {"s", s.str()}};
  return fnv1a64(j.dump());
}

std::uint64_t SpectrumCache::table_key(const ModelSpec& model, const TensorOpSpec& op, HalfInt s_row,
                                       HalfInt s_col) {
  json j{{"format_version", kFormatVersion},
         {"kind", "table"},
         {"model", model.to_json()},
         {"operator", op.to_json()},
         {"s_row", s_row.str()},
         {"s_col", s_col.str()}};
  return fnv1a64(j.dump());
}

std::filesystem::path SpectrumCache::spectrum_path(std::uint64_t key) const {
  return directory_ / ("spectrum-" + hex64(key) + ".bin");
}

std::filesystem::path SpectrumCache::table_path(std::uint64_t key) const {
  return directory_ / ("table-" + hex64(key) + ".bin");
}

void SpectrumCache::store(std::uint64_t key, const BlockSpectrum& spectrum) const {
  const Eigen::Index d = spectrum.dim();
  std::string payload;
  put_doubles(payload, spectrum.eigenvalues.data(), d);
  put_doubles(payload, spectrum.eigenvectors.data(), d * d);
  json header{{"format_version", kFormatVersion},
              {"kind", "spectrum"},
              {"key", hex64(key)},
              {"num_qubits", spectrum.num_qubits},
              {"s", spectrum.s.str()},
              {"dim", d},
              {"model_fingerprint", hex64(spectrum.model_fingerprint)},
              {"arrays",
               {{"eigenvalues", {{"offset", 0}, {"length", d}}},
                {"eigenvectors", {{"offset", 8 * d}, {"length", d * d}}}}}};
  write_atomically(spectrum_path(key), header, payload);
}

std::optional<BlockSpectrum> SpectrumCache::load_spectrum(std::uint64_t key) const {
  const auto raw = read_file(spectrum_path(key), "spectrum", key);
  if (!raw) return std::nullopt;
  try {
    BlockSpectrum b;
    b.num_qubits = raw->header.at("num_qubits").get<int>();
    b.s = HalfInt::parse(raw->header.at("s").get<std::string>());
    b.model_fingerprint = std::stoull(raw->header.at("model_fingerprint").get<std::string>(), nullptr, 16);
    const auto d = raw->header.at("dim").get<Eigen::Index>();
    const char* values = array_at(*raw, "eigenvalues", d);
    const char* vectors = array_at(*raw, "eigenvectors", d * d);
    if (!values || !vectors) return std::nullopt;
    b.eigenvalues.resize(d);
    b.eigenvectors.resize(d, d);
    get_doubles(values, b.eigenvalues.data(), d);
    get_doubles(vectors, b.eigenvectors.data(), d * d);
    return b;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void SpectrumCache::store(std::uint64_t key, const ReducedElementTable& table) const {
  const Eigen::Index rows = table.elements.rows(), cols = table.elements.cols();
  std::string payload;
  put_doubles(payload, table.elements.data(), rows * cols);
  json header{{"format_version", kFormatVersion},
              {"kind", "table"},
              {"key", hex64(key)},
              {"s_row", table.s_row.str()},
              {"s_col", table.s_col.str()},
              {"rank", table.rank.str()},
              {"component", table.component.str()},
              {"present", table.present},
              {"rows", rows},
              {"cols", cols},
              {"m_row", table.choice.m_row.str()},
              {"m_col", table.choice.m_col.str()},
              {"cg", table.choice.cg},
              {"operator_fingerprint", hex64(table.operator_fingerprint)},
              {"model_fingerprint", hex64(table.model_fingerprint)},
              {"arrays", {{"elements", {{"offset", 0}, {"length", rows * cols}}}}}};
  write_atomically(table_path(key), header, payload);
}

std::optional<ReducedElementTable> SpectrumCache::load_table(std::uint64_t key) const {
  const auto raw = read_file(table_path(key), "table", key);
  if (!raw) return std::nullopt;
  try {
    const auto& h = raw->header;
    ReducedElementTable t;
    t.s_row = HalfInt::parse(h.at("s_row").get<std::string>());
    t.s_col = HalfInt::parse(h.at("s_col").get<std::string>());
    t.rank = HalfInt::parse(h.at("rank").get<std::string>());
    t.component = HalfInt::parse(h.at("component").get<std::string>());
    t.present = h.at("present").get<bool>();
    t.choice = MChoice{HalfInt::parse(h.at("m_row").get<std::string>()), HalfInt::parse(h.at("m_col").get<std::string>()),
                       t.component, h.at("cg").get<double>()};
    t.operator_fingerprint = std::stoull(h.at("operator_fingerprint").get<std::string>(), nullptr, 16);
    t.model_fingerprint = std::stoull(h.at("model_fingerprint").get<std::string>(), nullptr, 16);
    const auto rows = h.at("rows").get<Eigen::Index>(), cols = h.at("cols").get<Eigen::Index>();
    const char* data = array_at(*raw, "elements", rows * cols);
    if (!data) return std::nullopt;
    t.elements.resize(rows, cols);
    get_doubles(data, t.elements.data(), rows * cols);
    return t;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace ethlab
